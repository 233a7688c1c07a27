#pragma once

// Uniform-grid functions on a box [-L, L]^n and the weighted L^p machinery
// used everywhere else: quasi-norms for all 0 < p < inf, grid-aligned
// translations, tails, and ball averages.
//
// Cells are indexed with axis 0 varying fastest:
//   flat = i_0 + N * i_1 + N^2 * i_2 + ...
// and cell i along an axis has center -L + (i + 1/2) h with h = 2L / N.

#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "czlab/core.hpp"
#include "czlab/weight_spec.hpp"

namespace czlab {

class Grid {
public:
    Grid(std::size_t n, double half_width, std::size_t points_per_axis)
        : n_(n), half_width_(half_width), points_(points_per_axis) {
        if (n == 0) throw Error(ErrorKind::InvalidArgument, "grid dimension must be positive");
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            throw Error(ErrorKind::InvalidArgument, "grid half width must be positive");
        if (points_per_axis == 0 || points_per_axis % 2 != 0)
            throw Error(ErrorKind::InvalidArgument, "points per axis must be a positive even integer");
        spacing_ = 2.0 * half_width / static_cast<double>(points_per_axis);
        size_ = 1;
        for (std::size_t d = 0; d < n; ++d) size_ *= points_per_axis;
    }

    std::size_t dim() const { return n_; }
    double half_width() const { return half_width_; }
    std::size_t points_per_axis() const { return points_; }
    double spacing() const { return spacing_; }
    std::size_t size() const { return size_; }
    double cell_volume() const { return std::pow(spacing_, static_cast<double>(n_)); }

    double axis_center(std::size_t i) const {
        return -half_width_ + (static_cast<double>(i) + 0.5) * spacing_;
    }

    std::vector<std::size_t> multi_index(std::size_t flat) const {
        std::vector<std::size_t> idx(n_);
        for (std::size_t d = 0; d < n_; ++d) {
            idx[d] = flat % points_;
            flat /= points_;
        }
        return idx;
    }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        for (std::size_t d = n_; d-- > 0;) flat = flat * points_ + idx[d];
        return flat;
    }

    Point center(std::size_t flat) const {
        Point x(n_);
        for (std::size_t d = 0; d < n_; ++d) {
            x[d] = axis_center(flat % points_);
            flat /= points_;
        }
        return x;
    }

    /// All cell centers, flattened (size() * dim() doubles).
    std::vector<double> centers() const {
        std::vector<double> out(size_ * n_);
        for (std::size_t k = 0; k < size_; ++k) {
            std::size_t rest = k;
            for (std::size_t d = 0; d < n_; ++d) {
                out[k * n_ + d] = axis_center(rest % points_);
                rest /= points_;
            }
        }
        return out;
    }

    /// Index of the cell containing x, or nullopt outside the box.
    std::optional<std::size_t> cell_of(std::span<const double> x) const {
        std::vector<std::size_t> idx(n_);
        for (std::size_t d = 0; d < n_; ++d) {
            const double s = (x[d] + half_width_) / spacing_;
            if (!(s >= 0.0) || s >= static_cast<double>(points_)) return std::nullopt;
            idx[d] = static_cast<std::size_t>(s);
        }
        return flat_index(idx);
    }

    /// Converts a shift vector to whole cells; throws MisalignedShift unless
    /// every component is an integer multiple of h.
    std::vector<long> shift_in_cells(std::span<const double> u) const {
        if (u.size() != n_) throw Error(ErrorKind::InvalidArgument, "shift dimension mismatch");
        std::vector<long> s(n_);
        for (std::size_t d = 0; d < n_; ++d) {
            const double q = u[d] / spacing_;
            const double r = std::round(q);
            if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
                throw Error(ErrorKind::MisalignedShift, "shift component " + format_double(u[d]) +
                                                           " is not a multiple of h=" + format_double(spacing_));
            s[d] = static_cast<long>(r);
        }
        return s;
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.n_ == b.n_ && a.half_width_ == b.half_width_ && a.points_ == b.points_;
    }

private:
    std::size_t n_;
    double half_width_;
    std::size_t points_;
    double spacing_ = 0.0;
    std::size_t size_ = 0;
};

/// A scalar field sampled at the cell centers of a grid; zero outside the box.
class SampledFunction {
public:
    SampledFunction(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw Error(ErrorKind::InvalidArgument, "value count does not match grid size");
        for (double v : values_)
            if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteSample, "sampled values must be finite");
    }

    static SampledFunction zero(const Grid& grid) { return SampledFunction(grid, std::vector<double>(grid.size(), 0.0)); }

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::size_t size() const { return values_.size(); }

    /// Value at the cell containing x; 0 outside the box.
    double at(std::span<const double> x) const {
        const auto k = grid_.cell_of(x);
        return k ? values_[*k] : 0.0;
    }

    bool is_zero() const {
        for (double v : values_)
            if (v != 0.0) return false;
        return true;
    }

    SampledFunction scaled(double c) const {
        std::vector<double> v(values_);
        for (auto& x : v) x *= c;
        return SampledFunction(grid_, std::move(v));
    }

    SampledFunction map(const std::function<double(double)>& fn) const {
        std::vector<double> v(values_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(values_[k]);
        return SampledFunction(grid_, std::move(v));
    }

    friend SampledFunction operator+(const SampledFunction& a, const SampledFunction& b) {
        if (!(a.grid_ == b.grid_)) throw Error(ErrorKind::InvalidArgument, "grid mismatch");
        std::vector<double> v(a.values_);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += b.values_[k];
        return SampledFunction(a.grid_, std::move(v));
    }

    friend SampledFunction operator-(const SampledFunction& a, const SampledFunction& b) {
        return a + b.scaled(-1.0);
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Ordered family of functions sharing one grid.
class FamilyOfFunctions {
public:
    FamilyOfFunctions() = default;
    explicit FamilyOfFunctions(std::vector<SampledFunction> members) : members_(std::move(members)) {
        for (const auto& f : members_)
            if (!(f.grid() == members_.front().grid()))
                throw Error(ErrorKind::InvalidArgument, "family members must share one grid");
    }

    void push_back(SampledFunction f) {
        if (!members_.empty() && !(f.grid() == members_.front().grid()))
            throw Error(ErrorKind::InvalidArgument, "family members must share one grid");
        members_.push_back(std::move(f));
    }

    const std::vector<SampledFunction>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    const SampledFunction& operator[](std::size_t i) const { return members_[i]; }
    const Grid& grid() const { return members_.front().grid(); }

private:
    std::vector<SampledFunction> members_;
};

using ScalarField = std::function<double(std::span<const double>)>;

inline SampledFunction sample(const ScalarField& expr, const Grid& grid) {
    std::vector<double> values(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Point x = grid.center(k);
        const double v = expr(x);
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFiniteSample, "expression is not finite at cell " + std::to_string(k));
        values[k] = v;
    }
    return SampledFunction(grid, std::move(values));
}

inline std::vector<double> sample_weight(const WeightSpec& w, const Grid& grid) {
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = w(grid.center(k));
    return out;
}

/// sum_k |f(x_k)|^p w(x_k) h^n -- the p-th power of the weighted quasi-norm,
/// which is the metric used for p < 1.
inline double weighted_lp_pow(const SampledFunction& f, double p, const WeightSpec& w) {
    if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "exponent p must be positive");
    const Grid& g = f.grid();
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double a = std::abs(f[k]);
        if (a == 0.0) continue;
        s += std::pow(a, p) * w(g.center(k));
    }
    return s * g.cell_volume();
}

inline double weighted_lp(const SampledFunction& f, double p, const WeightSpec& w) {
    return std::pow(weighted_lp_pow(f, p, w), 1.0 / p);
}

/// Same sums against a weight already sampled on the grid.
inline double weighted_lp_pow(std::span<const double> values, double p, std::span<const double> weight,
                              double cell_volume) {
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double a = std::abs(values[k]);
        if (a != 0.0) s += std::pow(a, p) * weight[k];
    }
    return s * cell_volume;
}

/// g(x_k) = f(x_k + u) for grid-aligned u; cells whose source lies outside
/// the box read 0.
inline SampledFunction translate(const SampledFunction& f, std::span<const double> u) {
    const Grid& g = f.grid();
    const auto shift = g.shift_in_cells(u);
    const long N = static_cast<long>(g.points_per_axis());
    std::vector<double> out(g.size(), 0.0);
    std::vector<std::size_t> src(g.dim());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto idx = g.multi_index(k);
        bool inside = true;
        for (std::size_t d = 0; d < g.dim(); ++d) {
            const long s = static_cast<long>(idx[d]) + shift[d];
            if (s < 0 || s >= N) {
                inside = false;
                break;
            }
            src[d] = static_cast<std::size_t>(s);
        }
        if (inside) out[k] = f[g.flat_index(src)];
    }
    return SampledFunction(g, std::move(out));
}

/// sum over cells with |x_k| >= A of |f|^p w h^n.
inline double tail_mass(const SampledFunction& f, double p, const WeightSpec& w, double A) {
    if (!(A >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tail radius must be nonnegative");
    if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "exponent p must be positive");
    const Grid& g = f.grid();
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double a = std::abs(f[k]);
        if (a == 0.0) continue;
        const Point x = g.center(k);
        if (euclidean_norm(x) >= A) s += std::pow(a, p) * w(x);
    }
    return s * g.cell_volume();
}

namespace detail {

// Calls fn(flat) for every in-box cell whose center lies within distance t of x.
template <class Fn>
void for_each_cell_in_ball(const Grid& g, std::span<const double> x, double t, Fn&& fn) {
    const std::size_t n = g.dim();
    const double h = g.spacing();
    const double L = g.half_width();
    const long N = static_cast<long>(g.points_per_axis());
    std::vector<long> lo(n), hi(n);
    for (std::size_t d = 0; d < n; ++d) {
        lo[d] = std::max(0L, static_cast<long>(std::ceil((x[d] - t + L) / h - 0.5 - 1e-12)));
        hi[d] = std::min(N - 1, static_cast<long>(std::floor((x[d] + t + L) / h - 0.5 + 1e-12)));
        if (lo[d] > hi[d]) return;
    }
    std::vector<long> idx(lo);
    std::vector<std::size_t> uidx(n);
    Point c(n);
    for (;;) {
        double r2 = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            c[d] = g.axis_center(static_cast<std::size_t>(idx[d]));
            const double diff = c[d] - x[d];
            r2 += diff * diff;
            uidx[d] = static_cast<std::size_t>(idx[d]);
        }
        if (std::sqrt(r2) <= t) fn(g.flat_index(uidx));
        std::size_t d = 0;
        while (d < n && ++idx[d] > hi[d]) {
            idx[d] = lo[d];
            ++d;
        }
        if (d == n) break;
    }
}

}  // namespace detail

/// Mean of f over the cell centers within distance t of x (cells inside the box).
inline double ball_average(const SampledFunction& f, std::span<const double> x, double t) {
    const Grid& g = f.grid();
    if (x.size() != g.dim()) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
    if (!(t >= g.spacing() * (1.0 - 1e-12)))
        throw Error(ErrorKind::InvalidArgument, "ball radius must be at least the grid spacing");
    double s = 0.0;
    std::size_t count = 0;
    detail::for_each_cell_in_ball(g, x, t, [&](std::size_t k) {
        s += f[k];
        ++count;
    });
    if (count == 0) throw Error(ErrorKind::EmptyBall, "no cell center lies in the ball");
    return s / static_cast<double>(count);
}

/// x -> f_{B(x,t)} evaluated at every cell center.
inline SampledFunction ball_average_field(const SampledFunction& f, double t) {
    const Grid& g = f.grid();
    std::vector<double> out(g.size());
    parallel_for(g.size(), [&](std::size_t k) { out[k] = ball_average(f, g.center(k), t); });
    return SampledFunction(g, std::move(out));
}

// ---------------------------------------------------------------------------
// Serialization (text, stable):
//
//   # czlab sampled function v1
//   n,half_width,points_per_axis
//   <n>,<L>,<N>
//   index,value
//   0,<value>
//   ...
//
// Values and L are printed with 17 significant digits, so reading back
// reproduces the function bit for bit.

inline void write_csv(std::ostream& os, const SampledFunction& f) {
    const Grid& g = f.grid();
    os << "# czlab sampled function v1\n";
    os << "n,half_width,points_per_axis\n";
    os << g.dim() << ',' << format_double(g.half_width()) << ',' << g.points_per_axis() << '\n';
    os << "index,value\n";
    for (std::size_t k = 0; k < g.size(); ++k) os << k << ',' << format_double(f[k]) << '\n';
}

inline SampledFunction read_csv(std::istream& is) {
    std::string line;
    auto next = [&](const char* what) {
        if (!std::getline(is, line)) throw Error(ErrorKind::InvalidArgument, std::string("missing ") + what);
    };
    next("magic line");
    if (line != "# czlab sampled function v1") throw Error(ErrorKind::InvalidArgument, "bad magic line");
    next("grid header");
    next("grid row");
    std::size_t n = 0, N = 0;
    double L = 0.0;
    {
        std::istringstream row(line);
        char c1 = 0, c2 = 0;
        row >> n >> c1 >> L >> c2 >> N;
        if (!row || c1 != ',' || c2 != ',') throw Error(ErrorKind::InvalidArgument, "bad grid row");
    }
    Grid g(n, L, N);
    next("value header");
    std::vector<double> values(g.size(), 0.0);
    std::vector<bool> seen(g.size(), false);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(ErrorKind::InvalidArgument, "bad value row");
        const std::size_t k = std::stoull(line.substr(0, comma));
        if (k >= g.size() || seen[k]) throw Error(ErrorKind::InvalidArgument, "bad cell index");
        values[k] = std::stod(line.substr(comma + 1));
        seen[k] = true;
    }
    for (bool s : seen)
        if (!s) throw Error(ErrorKind::InvalidArgument, "missing cell rows");
    return SampledFunction(g, std::move(values));
}

}  // namespace czlab
