#pragma once

// Shared plumbing: error type, points, deterministic parallel loops, the
// seeded generator, result tables, and small fitting helpers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace czlab {

enum class ErrorKind {
    NonFiniteSample,
    MisalignedShift,
    EmptyBall,
    EmptySubset,
    DegenerateConfiguration,
    ConstraintViolated,
    LambdaTooSmall,
    DiagonalUnderResolved,
    ZeroDenominator,
    MissingSymbol,
    SetTooLarge,
    RadiusTooSmall,
    ShiftTooLarge,
    ZeroMaximal,
    NegativeValues,
    MollificationTooCoarse,
    TailTooHeavy,
    InvalidArgument,
    ConfigError,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NonFiniteSample: return "NonFiniteSample";
        case ErrorKind::MisalignedShift: return "MisalignedShift";
        case ErrorKind::EmptyBall: return "EmptyBall";
        case ErrorKind::EmptySubset: return "EmptySubset";
        case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
        case ErrorKind::ConstraintViolated: return "ConstraintViolated";
        case ErrorKind::LambdaTooSmall: return "LambdaTooSmall";
        case ErrorKind::DiagonalUnderResolved: return "DiagonalUnderResolved";
        case ErrorKind::ZeroDenominator: return "ZeroDenominator";
        case ErrorKind::MissingSymbol: return "MissingSymbol";
        case ErrorKind::SetTooLarge: return "SetTooLarge";
        case ErrorKind::RadiusTooSmall: return "RadiusTooSmall";
        case ErrorKind::ShiftTooLarge: return "ShiftTooLarge";
        case ErrorKind::ZeroMaximal: return "ZeroMaximal";
        case ErrorKind::NegativeValues: return "NegativeValues";
        case ErrorKind::MollificationTooCoarse: return "MollificationTooCoarse";
        case ErrorKind::TailTooHeavy: return "TailTooHeavy";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

using Point = std::vector<double>;

inline double euclidean_norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Threading. Work is split into contiguous index blocks and every output slot
// is written by exactly one task, so results never depend on the thread count.

namespace detail {
inline std::atomic<int>& thread_setting() {
    static std::atomic<int> threads{1};
    return threads;
}
}  // namespace detail

inline void set_thread_count(int n) { detail::thread_setting() = std::max(1, n); }
inline int thread_count() { return detail::thread_setting().load(); }

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t block = (count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                const std::size_t lo = t * block;
                const std::size_t hi = std::min(count, lo + block);
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Seeded randomness: std::mt19937_64 (fully specified by the C++ standard)
// with doubles formed from the top 53 bits, u = (x >> 11) * 2^-53. Library
// distributions are avoided because their algorithms are implementation
// defined.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // log-uniform on [lo, hi], lo > 0
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    std::uint64_t next() { return engine_(); }

    // uniformly distributed direction on the unit sphere in R^n (rejection)
    Point direction(std::size_t n) {
        Point v(n);
        for (;;) {
            double r2 = 0.0;
            for (auto& c : v) {
                c = uniform(-1.0, 1.0);
                r2 += c * c;
            }
            if (r2 > 1e-12 && r2 <= 1.0) {
                const double r = std::sqrt(r2);
                for (auto& c : v) c /= r;
                return v;
            }
        }
    }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Tables and CSV: one header row, dot decimal, 17 significant digits.

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string to_csv() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
            os << '\n';
        }
        return os.str();
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r.at(c));
        return out;
    }
};

// Least-squares slope of log(ys) against log(xs). Pairs with a nonpositive
// coordinate are skipped; fewer than two usable pairs yields NaN.
inline double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// max/min over positive entries; 1 for a constant sequence, inf if any entry is 0
inline double spread(std::span<const double> v) {
    if (v.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*lo <= 0.0) return *hi <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return *hi / *lo;
}

}  // namespace czlab
