#pragma once

// Quadrature evaluation of the truncated m-linear operator T_delta, the square
// functions G and G*_lambda, the maximal functions M_A, and empirical
// operator-norm ratios.
//
// Every y-sum runs over the tensor product of per-slot support lists (cells
// where the slot input is nonzero) in a fixed order, so the summation is
// deterministic and independent of the thread count.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "czlab/core.hpp"
#include "czlab/funcspace.hpp"
#include "czlab/kernels.hpp"
#include "czlab/weights.hpp"

namespace czlab {

enum class Cutoff { Sharp, Smooth };

inline double smooth_step_psi(double r) { return r > 0.0 ? std::exp(-1.0 / r) : 0.0; }

/// C-infinity cutoff: 0 on s <= 1/2, 1 on s >= 1.
inline double smooth_cutoff(double s) {
    if (s <= 0.5) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = smooth_step_psi(2.0 * s - 1.0);
    const double b = smooth_step_psi(2.0 - 2.0 * s);
    return a / (a + b);
}

struct TruncationPolicy {
    double delta = 0.0;
    Cutoff cutoff = Cutoff::Smooth;

    /// u(s / delta) for s = sum |x - y_j|.
    double weight(double s) const {
        const double r = s / delta;
        return cutoff == Cutoff::Sharp ? (r >= 1.0 ? 1.0 : 0.0) : smooth_cutoff(r);
    }

    void check(const Grid& g) const {
        if (!(delta >= 2.0 * g.spacing() * (1.0 - 1e-12)))
            throw Error(ErrorKind::DiagonalUnderResolved,
                        "delta = " + format_double(delta) + " is below 2h = " + format_double(2.0 * g.spacing()));
    }
};

struct OperatorOutput {
    std::vector<Point> points;
    std::vector<double> values;

    Table to_table() const {
        Table t;
        const std::size_t n = points.empty() ? 0 : points.front().size();
        for (std::size_t d = 0; d < n; ++d) t.columns.push_back("x" + std::to_string(d + 1));
        t.columns.push_back("value");
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::vector<double> row(points[i]);
            row.push_back(values[i]);
            t.rows.push_back(std::move(row));
        }
        return t;
    }

    /// Reassembles a full-grid evaluation as a sampled function.
    SampledFunction to_sampled(const Grid& g) const {
        if (points.size() != g.size()) throw Error(ErrorKind::InvalidArgument, "output does not cover the grid");
        return SampledFunction(g, values);
    }
};

inline std::vector<Point> all_points(const Grid& g) {
    std::vector<Point> out;
    out.reserve(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) out.push_back(g.center(k));
    return out;
}

/// Every stride-th cell center per axis, starting at index stride/2.
inline std::vector<Point> decimated_points(const Grid& g, std::size_t stride = 4) {
    std::vector<Point> out;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto idx = g.multi_index(k);
        bool keep = true;
        for (auto i : idx) keep = keep && (i % stride == stride / 2);
        if (keep) out.push_back(g.center(k));
    }
    return out;
}

namespace detail {

inline const Grid& common_grid(const std::vector<SampledFunction>& fs) {
    if (fs.empty()) throw Error(ErrorKind::InvalidArgument, "operator needs at least one input");
    for (const auto& f : fs)
        if (!(f.grid() == fs.front().grid())) throw Error(ErrorKind::InvalidArgument, "inputs must share one grid");
    return fs.front().grid();
}

inline std::vector<std::size_t> support_of(std::span<const double> v) {
    std::vector<std::size_t> s;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (v[k] != 0.0) s.push_back(k);
    return s;
}

/// h^{nm} sum over y in prod_j supports[j] of integrand(y) * prod_j values[j][y_j].
/// Slot 0 varies fastest.
template <class Integrand>
double tensor_sum(const Grid& g, const std::vector<double>& centers, const std::vector<std::vector<std::size_t>>& supports,
                  const std::vector<std::span<const double>>& values, std::vector<double>& y, Integrand&& integrand) {
    const std::size_t m = supports.size();
    const std::size_t n = g.dim();
    for (const auto& s : supports)
        if (s.empty()) return 0.0;
    y.resize(m * n);
    std::vector<std::size_t> pos(m, 0);
    double sum = 0.0;
    for (;;) {
        double prod = 1.0;
        for (std::size_t j = 0; j < m; ++j) prod *= values[j][supports[j][pos[j]]];
        if (prod != 0.0) {
            for (std::size_t j = 0; j < m; ++j) {
                const double* c = centers.data() + supports[j][pos[j]] * n;
                for (std::size_t d = 0; d < n; ++d) y[j * n + d] = c[d];
            }
            sum += integrand(std::span<const double>(y)) * prod;
        }
        std::size_t j = 0;
        while (j < m && ++pos[j] == supports[j].size()) {
            pos[j] = 0;
            ++j;
        }
        if (j == m) break;
    }
    return sum * std::pow(g.cell_volume(), static_cast<double>(m));
}

/// Per-point slot values: out[j] receives the values fed to slot j at x.
/// Commutators multiply the inputs by their symbol differences here.
using SlotTransform = std::function<void(std::span<const double> x, std::vector<std::vector<double>>& out)>;

/// Values fed to the tensor sum at x: the raw inputs, or the transformed ones.
struct SlotValues {
    std::vector<std::vector<double>> storage;
    std::vector<std::span<const double>> spans;

    void load(const std::vector<SampledFunction>& fs, const SlotTransform* transform, std::span<const double> x) {
        spans.resize(fs.size());
        if (transform) {
            storage.resize(fs.size());
            (*transform)(x, storage);
            for (std::size_t j = 0; j < fs.size(); ++j) spans[j] = storage[j];
        } else {
            for (std::size_t j = 0; j < fs.size(); ++j) spans[j] = fs[j].values();
        }
    }
};

inline std::vector<std::vector<std::size_t>> supports_of(const std::vector<SampledFunction>& fs) {
    std::vector<std::vector<std::size_t>> s;
    for (const auto& f : fs) s.push_back(support_of(f.values()));
    return s;
}

/// T_delta with an optional per-point slot transform.
inline OperatorOutput truncated_operator(const KernelSpec& k, const std::vector<SampledFunction>& fs,
                                         const TruncationPolicy& trunc, const std::vector<Point>& points,
                                         const SlotTransform* transform) {
    const Grid& g = common_grid(fs);
    if (fs.size() != k.m()) throw Error(ErrorKind::InvalidArgument, "kernel arity does not match the input count");
    if (g.dim() != k.n()) throw Error(ErrorKind::InvalidArgument, "kernel dimension does not match the grid");
    trunc.check(g);
    const auto centers = g.centers();
    const auto supports = supports_of(fs);
    OperatorOutput out{points, std::vector<double>(points.size(), 0.0)};
    parallel_for(points.size(), [&](std::size_t i) {
        const std::span<const double> x = points[i];
        SlotValues sv;
        sv.load(fs, transform, x);
        std::vector<double> y;
        out.values[i] = tensor_sum(g, centers, supports, sv.spans, y, [&](std::span<const double> yy) {
            const double u = trunc.weight(diagonal_distance(x, yy));
            return u == 0.0 ? 0.0 : u * k(x, yy);
        });
    });
    return out;
}

/// Theta_t(x) over the scale grid, optionally truncated.
inline std::vector<double> theta_profile(const ScaleFamily& fam, const Grid& g, const std::vector<double>& centers,
                                         const std::vector<std::vector<std::size_t>>& supports,
                                         const std::vector<std::span<const double>>& values, std::span<const double> x,
                                         const std::optional<TruncationPolicy>& trunc) {
    std::vector<double> theta(fam.scales().size());
    std::vector<double> y, xs, ys;
    for (std::size_t q = 0; q < theta.size(); ++q) {
        const double t = fam.scales()[q];
        theta[q] = tensor_sum(g, centers, supports, values, y, [&](std::span<const double> yy) {
            double u = 1.0;
            if (trunc) {
                u = trunc->weight(diagonal_distance(x, yy));
                if (u == 0.0) return 0.0;
            }
            return u * fam.eval(t, x, yy, xs, ys);
        });
    }
    return theta;
}

inline void check_family(const ScaleFamily& fam, const std::vector<SampledFunction>& fs, const Grid& g) {
    if (fs.size() != fam.base().m()) throw Error(ErrorKind::InvalidArgument, "kernel arity does not match the input count");
    if (g.dim() != fam.base().n()) throw Error(ErrorKind::InvalidArgument, "kernel dimension does not match the grid");
}

inline OperatorOutput square_operator(const ScaleFamily& fam, const std::vector<SampledFunction>& fs,
                                      const std::vector<Point>& points, const std::optional<TruncationPolicy>& trunc,
                                      const SlotTransform* transform) {
    const Grid& g = common_grid(fs);
    check_family(fam, fs, g);
    if (trunc) trunc->check(g);
    const auto centers = g.centers();
    const auto supports = supports_of(fs);
    OperatorOutput out{points, std::vector<double>(points.size(), 0.0)};
    parallel_for(points.size(), [&](std::size_t i) {
        SlotValues sv;
        sv.load(fs, transform, points[i]);
        const auto theta = theta_profile(fam, g, centers, supports, sv.spans, points[i], trunc);
        double s = 0.0;
        for (double v : theta) s += v * v;
        out.values[i] = std::sqrt(s * fam.log_ratio());
    });
    return out;
}

inline OperatorOutput square_star_operator(const ScaleFamily& fam, double lambda, const std::vector<SampledFunction>& fs,
                                           const std::vector<Point>& points, const Grid& z_grid,
                                           const std::optional<TruncationPolicy>& trunc,
                                           const SlotTransform* transform) {
    if (!(lambda > 1.0)) throw Error(ErrorKind::LambdaTooSmall, "lambda must exceed 1");
    const Grid& g = common_grid(fs);
    check_family(fam, fs, g);
    if (trunc) trunc->check(g);
    if (z_grid.dim() != g.dim()) throw Error(ErrorKind::InvalidArgument, "z grid dimension mismatch");
    const auto centers = g.centers();
    const auto supports = supports_of(fs);
    const auto zs = z_grid.centers();
    const std::size_t n = g.dim();
    const std::size_t T = fam.scales().size();
    const double nd = static_cast<double>(n);

    // theta[z * T + q] = Theta_{t_q}(z)
    auto theta_table = [&](const std::vector<std::span<const double>>& values) {
        std::vector<double> table(z_grid.size() * T);
        for (std::size_t zk = 0; zk < z_grid.size(); ++zk) {
            const auto th = theta_profile(fam, g, centers, supports, values,
                                          std::span<const double>(zs.data() + zk * n, n), trunc);
            std::copy(th.begin(), th.end(), table.begin() + static_cast<std::ptrdiff_t>(zk * T));
        }
        return table;
    };
    auto reduce = [&](std::span<const double> x, const std::vector<double>& table) {
        double s = 0.0;
        for (std::size_t q = 0; q < T; ++q) {
            const double t = fam.scales()[q];
            double inner = 0.0;
            for (std::size_t zk = 0; zk < z_grid.size(); ++zk) {
                const double v = table[zk * T + q];
                if (v == 0.0) continue;
                const double d = distance(x, std::span<const double>(zs.data() + zk * n, n));
                inner += std::pow(t / (d + t), nd * lambda) * v * v;
            }
            s += inner / std::pow(t, nd);
        }
        return std::sqrt(s * z_grid.cell_volume() * fam.log_ratio());
    };

    OperatorOutput out{points, std::vector<double>(points.size(), 0.0)};
    if (!transform) {
        std::vector<std::span<const double>> values;
        for (const auto& f : fs) values.push_back(f.values());
        std::vector<double> table(z_grid.size() * T);
        parallel_for(z_grid.size(), [&](std::size_t zk) {
            const auto th = theta_profile(fam, g, centers, supports, values,
                                          std::span<const double>(zs.data() + zk * n, n), trunc);
            std::copy(th.begin(), th.end(), table.begin() + static_cast<std::ptrdiff_t>(zk * T));
        });
        parallel_for(points.size(), [&](std::size_t i) { out.values[i] = reduce(points[i], table); });
    } else {
        parallel_for(points.size(), [&](std::size_t i) {
            SlotValues sv;
            sv.load(fs, transform, points[i]);
            out.values[i] = reduce(points[i], theta_table(sv.spans));
        });
    }
    return out;
}

}  // namespace detail

/// T_delta(f)(x) = h^{nm} sum_y u(sum|x-y_j|/delta) K(x,y) prod f_j(y_j).
inline OperatorOutput apply_T(const KernelSpec& k, const std::vector<SampledFunction>& fs,
                              const TruncationPolicy& trunc, const std::vector<Point>& points) {
    return detail::truncated_operator(k, fs, trunc, points, nullptr);
}

/// G(f)(x) = (sum_k |Theta_{t_k}(x)|^2 ln r)^{1/2}. An optional truncation
/// removes the diagonal shell from the inner sum.
inline OperatorOutput apply_G(const ScaleFamily& fam, const std::vector<SampledFunction>& fs,
                              const std::vector<Point>& points,
                              const std::optional<TruncationPolicy>& trunc = std::nullopt) {
    return detail::square_operator(fam, fs, points, trunc, nullptr);
}

inline OperatorOutput apply_G_star(const ScaleFamily& fam, double lambda, const std::vector<SampledFunction>& fs,
                                   const std::vector<Point>& points, const Grid& z_grid,
                                   const std::optional<TruncationPolicy>& trunc = std::nullopt) {
    return detail::square_star_operator(fam, lambda, fs, points, z_grid, trunc, nullptr);
}

// ---------------------------------------------------------------------------
// Maximal functions

/// Side lengths h * 2^j, j = 0..count-1.
inline std::vector<double> dyadic_scales(const Grid& g, std::size_t count) {
    std::vector<double> s(count);
    for (std::size_t j = 0; j < count; ++j) s[j] = std::ldexp(g.spacing(), static_cast<int>(j));
    return s;
}

namespace detail {

/// n-dimensional inclusive prefix sums of |f| on an (N+1)^n array with a zero
/// border, so box sums cost 2^n lookups.
class PrefixSums {
public:
    explicit PrefixSums(const SampledFunction& f) : g_(f.grid()) {
        const std::size_t n = g_.dim();
        const std::size_t M = g_.points_per_axis() + 1;
        stride_.resize(n);
        std::size_t total = 1;
        for (std::size_t d = 0; d < n; ++d) {
            stride_[d] = total;
            total *= M;
        }
        data_.assign(total, 0.0);
        for (std::size_t k = 0; k < g_.size(); ++k) {
            const auto idx = g_.multi_index(k);
            std::size_t off = 0;
            for (std::size_t d = 0; d < n; ++d) off += (idx[d] + 1) * stride_[d];
            data_[off] = std::abs(f[k]);
        }
        for (std::size_t d = 0; d < n; ++d) {
            for (std::size_t off = 0; off < total; ++off) {
                const std::size_t coord = (off / stride_[d]) % M;
                if (coord > 0) data_[off] += data_[off - stride_[d]];
            }
        }
    }

    /// Sum over cells lo[d] <= i_d < hi[d].
    double box(std::span<const std::size_t> lo, std::span<const std::size_t> hi) const {
        const std::size_t n = g_.dim();
        double s = 0.0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            std::size_t off = 0;
            int sign = 1;
            for (std::size_t d = 0; d < n; ++d) {
                if (mask & (std::size_t{1} << d)) {
                    off += lo[d] * stride_[d];
                    sign = -sign;
                } else {
                    off += hi[d] * stride_[d];
                }
            }
            s += sign * data_[off];
        }
        return s;
    }

private:
    Grid g_;
    std::vector<std::size_t> stride_;
    std::vector<double> data_;
};

}  // namespace detail

/// M_A(f)(x): max over tested cubes Q containing x of prod_{j in A} avg_Q |f_j|.
/// Cubes of each side s sit on the lattice s Z^n + sigma s (1, .., 1) for
/// sigma in {0, 1/3, 2/3}. Inputs are zero outside the box, so averages count
/// every lattice position of the cube, inside the box or not. A = {} gives 1.
inline OperatorOutput maximal_MA(const std::vector<SampledFunction>& fs, const SlotSet& A,
                                 const std::vector<Point>& points, const std::vector<double>& scales) {
    if (scales.empty()) throw Error(ErrorKind::InvalidArgument, "maximal function needs at least one scale");
    OperatorOutput out{points, std::vector<double>(points.size(), 1.0)};
    if (A.empty()) return out;
    const Grid& g = detail::common_grid(fs);
    for (std::size_t i = 0; i < A.size(); ++i) {
        if (A[i] < 1 || A[i] > fs.size()) throw Error(ErrorKind::InvalidArgument, "slot index out of range");
        if (i > 0 && A[i] <= A[i - 1]) throw Error(ErrorKind::InvalidArgument, "slot subset must be sorted and unique");
    }
    std::vector<detail::PrefixSums> prefix;
    for (auto j : A) prefix.emplace_back(fs[j - 1]);
    const std::size_t n = g.dim();
    const double L = g.half_width();
    const double h = g.spacing();
    const long N = static_cast<long>(g.points_per_axis());

    parallel_for(points.size(), [&](std::size_t i) {
        const Point& x = points[i];
        std::vector<std::size_t> lo(n), hi(n);
        double best = 0.0;
        for (double s : scales) {
            for (int shift = 0; shift < 3; ++shift) {
                const double sigma = shift * s / 3.0;
                double count = 1.0;
                bool empty = false;
                for (std::size_t d = 0; d < n; ++d) {
                    const double lower = s * std::floor((x[d] - sigma) / s) + sigma;
                    const long a = static_cast<long>(std::ceil((lower + L) / h - 0.5 - 1e-9));
                    const long b = static_cast<long>(std::ceil((lower + s + L) / h - 0.5 - 1e-9));
                    count *= static_cast<double>(b - a);
                    const long ca = std::clamp(a, 0L, N), cb = std::clamp(b, 0L, N);
                    if (b <= a) empty = true;
                    lo[d] = static_cast<std::size_t>(ca);
                    hi[d] = static_cast<std::size_t>(std::max(ca, cb));
                }
                if (empty) continue;
                double v = 1.0;
                for (const auto& p : prefix) v *= p.box(lo, hi) / count;
                best = std::max(best, v);
            }
        }
        out.values[i] = best;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Empirical operator-norm ratios

using FieldOperator = std::function<SampledFunction(const std::vector<SampledFunction>&)>;

struct RatioReport {
    std::vector<double> ratios;  // one per test tuple
    double max = 0.0;
    double median = 0.0;
};

/// ||op(f)||_{L^p(nu)} / prod ||f_j||_{L^{p_j}(omega_j)} for each test tuple.
inline RatioReport empirical_ratio(const FieldOperator& op, const WeightVector& wv,
                                   const std::vector<std::vector<SampledFunction>>& testset) {
    if (testset.empty()) throw Error(ErrorKind::InvalidArgument, "test set must be nonempty");
    const WeightSpec nu = nu_weight(wv);
    RatioReport rep;
    rep.ratios.resize(testset.size());
    for (std::size_t t = 0; t < testset.size(); ++t) {
        const auto& fs = testset[t];
        if (fs.size() != wv.size()) throw Error(ErrorKind::InvalidArgument, "test tuple arity does not match the weights");
        double denom = 1.0;
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const double nj = weighted_lp(fs[j], wv.exponent(j), wv.weight(j));
            if (nj == 0.0) throw Error(ErrorKind::ZeroDenominator, "input " + std::to_string(j + 1) + " has zero norm");
            denom *= nj;
        }
        rep.ratios[t] = weighted_lp(op(fs), wv.p(), nu) / denom;
    }
    rep.max = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.median = median(rep.ratios);
    return rep;
}

struct RefinementReport {
    std::vector<std::size_t> points_per_axis;
    std::vector<RatioReport> per_grid;
    double max_relative_change = 0.0;  // of the max ratio between consecutive grids
};

/// Runs empirical_ratio on each grid with a test set resampled there.
inline RefinementReport empirical_ratio_refinement(
    const FieldOperator& op, const WeightVector& wv,
    const std::function<std::vector<std::vector<SampledFunction>>(const Grid&)>& testset_on,
    const std::vector<Grid>& grids) {
    RefinementReport rep;
    for (const auto& g : grids) {
        rep.points_per_axis.push_back(g.points_per_axis());
        rep.per_grid.push_back(empirical_ratio(op, wv, testset_on(g)));
    }
    for (std::size_t i = 1; i < rep.per_grid.size(); ++i) {
        const double a = rep.per_grid[i - 1].max, b = rep.per_grid[i].max;
        rep.max_relative_change = std::max(rep.max_relative_change, std::abs(b - a) / std::abs(a));
    }
    return rep;
}

}  // namespace czlab
