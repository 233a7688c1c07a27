#pragma once

// Generalized commutators T_{b,S,delta}: the truncated operator with the
// symbol factor prod_{(i,j) in S} (b_i(x) - b_i(y_j)) inserted, their
// square-function analogs, the product-expansion identities, and the four
// numerical studies (truncation convergence, near/far diagonal bounds,
// spatial decay, translation modulus).
//
// The symbol factor splits by slot: g_j(y) = f_j(y) prod_{i in S_j} (b_i(x) - b_i(y)),
// so every commutator runs through the same tensor sum as T itself.

#include <cmath>
#include <algorithm>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "czlab/core.hpp"
#include "czlab/funcspace.hpp"
#include "czlab/kernels.hpp"
#include "czlab/operators.hpp"
#include "czlab/weights.hpp"

namespace czlab {

/// Finite set of (symbol index i, slot j) pairs, both 1-based.
class IndexSet {
public:
    using Pair = std::pair<std::size_t, std::size_t>;

    IndexSet() = default;
    IndexSet(std::initializer_list<Pair> pairs) {
        for (const auto& p : pairs) insert(p.first, p.second);
    }
    explicit IndexSet(const std::vector<Pair>& pairs) {
        for (const auto& p : pairs) insert(p.first, p.second);
    }

    /// Inserting an existing pair is a no-op.
    void insert(std::size_t i, std::size_t j) {
        if (i < 1 || j < 1) throw Error(ErrorKind::InvalidArgument, "index pairs are 1-based");
        pairs_.emplace(i, j);
    }

    const std::set<Pair>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    /// S_j = {i : (i, j) in S}
    std::vector<std::size_t> symbols_of_slot(std::size_t j) const {
        std::vector<std::size_t> out;
        for (const auto& [i, jj] : pairs_)
            if (jj == j) out.push_back(i);
        return out;
    }

    /// A = {j : S_j nonempty}
    SlotSet active_slots() const {
        std::set<std::size_t> a;
        for (const auto& p : pairs_) a.insert(p.second);
        return SlotSet(a.begin(), a.end());
    }

    std::set<std::size_t> symbol_indices() const {
        std::set<std::size_t> s;
        for (const auto& p : pairs_) s.insert(p.first);
        return s;
    }

    void validate(std::size_t m) const {
        for (const auto& p : pairs_)
            if (p.second > m) throw Error(ErrorKind::InvalidArgument, "slot index " + std::to_string(p.second) + " exceeds m");
    }

private:
    std::set<Pair> pairs_;
};

/// A symbol b sampled on the grid, with an optional closed form used for
/// evaluation at arbitrary points, and recorded sup / gradient bounds.
class Symbol {
public:
    Symbol(SampledFunction values, std::optional<ScalarField> closed_form, double sup_bound, double gradient_bound,
           double support_radius, std::string label)
        : values_(std::move(values)), closed_(std::move(closed_form)), sup_(sup_bound), grad_(gradient_bound),
          support_radius_(support_radius), label_(std::move(label)) {}

    double operator()(std::span<const double> x) const { return closed_ ? (*closed_)(x) : values_.at(x); }
    double operator[](std::size_t k) const { return values_[k]; }

    const SampledFunction& values() const { return values_; }
    double sup_bound() const { return sup_; }
    double gradient_bound() const { return grad_; }
    double support_radius() const { return support_radius_; }
    const std::string& label() const { return label_; }

    bool is_constant() const {
        const auto v = values_.values();
        return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; }) && (!closed_ || grad_ == 0.0);
    }

    /// b + c; the support radius becomes infinite unless c = 0.
    Symbol shifted(double c) const {
        std::optional<ScalarField> cf;
        if (closed_) {
            auto f = *closed_;
            cf = [f, c](std::span<const double> x) { return f(x) + c; };
        }
        return Symbol(values_.map([c](double v) { return v + c; }), cf, sup_ + std::abs(c), grad_,
                      c == 0.0 ? support_radius_ : std::numeric_limits<double>::infinity(),
                      label_ + "+" + format_double(c));
    }

private:
    SampledFunction values_;
    std::optional<ScalarField> closed_;
    double sup_, grad_, support_radius_;
    std::string label_;
};

namespace detail {

/// max over cells of the central-difference gradient (one-sided at the box edge).
inline double fd_gradient_max(const SampledFunction& f) {
    const Grid& g = f.grid();
    const std::size_t n = g.dim();
    const std::size_t N = g.points_per_axis();
    const double h = g.spacing();
    double best = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        auto idx = g.multi_index(k);
        double s2 = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            auto lo = idx, hi = idx;
            double span = 2.0 * h;
            if (idx[d] == 0) {
                span = h;
            } else {
                lo[d] -= 1;
            }
            if (idx[d] + 1 == N) {
                span -= h;
            } else {
                hi[d] += 1;
            }
            const double dv = (f[g.flat_index(hi)] - f[g.flat_index(lo)]) / span;
            s2 += dv * dv;
        }
        best = std::max(best, std::sqrt(s2));
    }
    return best;
}

inline double support_radius_of(const SampledFunction& f) {
    const Grid& g = f.grid();
    double r = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (f[k] == 0.0) continue;
        any = true;
        r = std::max(r, euclidean_norm(g.center(k)));
    }
    return any ? r + 0.5 * g.spacing() * std::sqrt(static_cast<double>(g.dim())) : 0.0;
}

}  // namespace detail

/// a exp(1/((|x-c|/N)^2 - 1)) on |x - c| < N, 0 outside.
inline Symbol bump_symbol(const Grid& grid, Point center, double radius, double amplitude = 1.0) {
    if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump radius must be positive");
    if (center.size() != grid.dim()) throw Error(ErrorKind::InvalidArgument, "bump center dimension mismatch");
    ScalarField fn = [center, radius, amplitude](std::span<const double> x) {
        const double r = distance(x, center) / radius;
        if (r >= 1.0) return 0.0;
        return amplitude * std::exp(1.0 / (r * r - 1.0));
    };
    // |grad b| = |a| e^{1/(r^2-1)} 2r / ((1-r^2)^2 N), maximized over a dense r grid
    double grad = 0.0;
    for (int i = 1; i < 100000; ++i) {
        const double r = i / 100000.0;
        const double q = 1.0 - r * r;
        grad = std::max(grad, std::exp(-1.0 / q) * 2.0 * r / (q * q));
    }
    grad *= std::abs(amplitude) / radius * (1.0 + 1e-6);
    return Symbol(sample(fn, grid), fn, std::abs(amplitude) * std::exp(-1.0), grad,
                  euclidean_norm(center) + radius, "bump");
}

inline Symbol constant_symbol(const Grid& grid, double c) {
    ScalarField fn = [c](std::span<const double>) { return c; };
    return Symbol(sample(fn, grid), fn, std::abs(c), 0.0, c == 0.0 ? 0.0 : std::numeric_limits<double>::infinity(),
                  "constant(" + format_double(c) + ")");
}

/// User symbol from a closed form; gradient bound from finite differences
/// inflated by 10%.
inline Symbol symbol_from_function(const Grid& grid, ScalarField fn, std::string label) {
    SampledFunction v = sample(fn, grid);
    double sup = 0.0;
    for (double a : v.values()) sup = std::max(sup, std::abs(a));
    const double grad = 1.1 * detail::fd_gradient_max(v);
    const double rad = detail::support_radius_of(v);
    return Symbol(std::move(v), std::move(fn), sup, grad, rad, std::move(label));
}

inline Symbol symbol_from_samples(SampledFunction v, std::string label) {
    double sup = 0.0;
    for (double a : v.values()) sup = std::max(sup, std::abs(a));
    const double grad = 1.1 * detail::fd_gradient_max(v);
    const double rad = detail::support_radius_of(v);
    return Symbol(std::move(v), std::nullopt, sup, grad, rad, std::move(label));
}

class SymbolSet {
public:
    SymbolSet() = default;

    void set(std::size_t i, Symbol b) {
        if (i < 1) throw Error(ErrorKind::InvalidArgument, "symbol indices are 1-based");
        symbols_.insert_or_assign(i, std::move(b));
    }

    const Symbol& get(std::size_t i) const {
        auto it = symbols_.find(i);
        if (it == symbols_.end()) throw Error(ErrorKind::MissingSymbol, "no symbol b_" + std::to_string(i));
        return it->second;
    }

    bool contains(std::size_t i) const { return symbols_.count(i) != 0; }
    const std::map<std::size_t, Symbol>& all() const { return symbols_; }

    /// b_i + c for every i.
    SymbolSet shifted(double c) const {
        SymbolSet s;
        for (const auto& [i, b] : symbols_) s.set(i, b.shifted(c));
        return s;
    }

    void require(const IndexSet& S) const {
        for (auto i : S.symbol_indices()) get(i);
    }

private:
    std::map<std::size_t, Symbol> symbols_;
};

/// prod_{(i,j) in S} (b_i(x) - b_i(y_j)); 1 for empty S.
inline double symbol_factor(const SymbolSet& b, const IndexSet& S, std::span<const double> x,
                            std::span<const double> y) {
    const std::size_t n = x.size();
    double v = 1.0;
    for (const auto& [i, j] : S.pairs()) {
        const Symbol& bi = b.get(i);
        if (y.size() < j * n) throw Error(ErrorKind::InvalidArgument, "y has fewer slots than S references");
        v *= bi(x) - bi(y.subspan((j - 1) * n, n));
    }
    return v;
}

namespace detail {

/// Slot transform g_j = f_j prod_{i in S_j} (b_i(x) - b_i(y)).
inline SlotTransform commutator_transform(const SymbolSet& b, const IndexSet& S, const std::vector<SampledFunction>& fs) {
    S.validate(fs.size());
    b.require(S);
    const Grid& g = common_grid(fs);
    for (auto i : S.symbol_indices())
        if (!(b.get(i).values().grid() == g)) throw Error(ErrorKind::InvalidArgument, "symbol grid differs from input grid");
    std::vector<std::vector<const Symbol*>> per_slot(fs.size());
    for (std::size_t j = 1; j <= fs.size(); ++j)
        for (auto i : S.symbols_of_slot(j)) per_slot[j - 1].push_back(&b.get(i));
    return [&fs, per_slot](std::span<const double> x, std::vector<std::vector<double>>& out) {
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const auto f = fs[j].values();
            out[j].assign(f.begin(), f.end());
            for (const Symbol* bi : per_slot[j]) {
                const double bx = (*bi)(x);
                for (std::size_t k = 0; k < out[j].size(); ++k)
                    if (out[j][k] != 0.0) out[j][k] *= bx - (*bi)[k];
            }
        }
    };
}

}  // namespace detail

/// T_{b,S,delta}(f)(x); S = {} runs the identical sum as apply_T.
inline OperatorOutput apply_T_bS(const KernelSpec& k, const SymbolSet& b, const IndexSet& S,
                                 const std::vector<SampledFunction>& fs, const TruncationPolicy& trunc,
                                 const std::vector<Point>& points) {
    const auto tr = detail::commutator_transform(b, S, fs);
    return detail::truncated_operator(k, fs, trunc, points, &tr);
}

inline OperatorOutput apply_G_bS(const ScaleFamily& fam, const SymbolSet& b, const IndexSet& S,
                                 const std::vector<SampledFunction>& fs, const std::vector<Point>& points,
                                 const std::optional<TruncationPolicy>& trunc = std::nullopt) {
    const auto tr = detail::commutator_transform(b, S, fs);
    return detail::square_operator(fam, fs, points, trunc, &tr);
}

inline OperatorOutput apply_G_star_bS(const ScaleFamily& fam, double lambda, const SymbolSet& b, const IndexSet& S,
                                      const std::vector<SampledFunction>& fs, const std::vector<Point>& points,
                                      const Grid& z_grid, const std::optional<TruncationPolicy>& trunc = std::nullopt) {
    const auto tr = detail::commutator_transform(b, S, fs);
    return detail::square_star_operator(fam, lambda, fs, points, z_grid, trunc, &tr);
}

// ---------------------------------------------------------------------------
// Product-expansion identities

struct ExpansionReport {
    std::size_t set_size = 0;
    std::size_t trials = 0;
    double max_error_difference = 0.0;  // prod(a+b) - prod b = sum_{D strict} prod_D b prod_{S\D} a
    double max_error_signed = 0.0;      // prod(c - d) = sum_E (-1)^{|D\E|} prod_E c prod_{D\E} d
};

/// Relative errors are |lhs - rhs| / sum |terms|, so cancellation in the sum
/// does not inflate them. Values are uniform in [-1, 1].
inline ExpansionReport expansion_identity_check(std::size_t set_size, std::size_t trials, std::uint64_t seed) {
    if (set_size > 8) throw Error(ErrorKind::SetTooLarge, "expansion check enumerates 2^|S| subsets; |S| <= 8");
    ExpansionReport rep{set_size, trials, 0.0, 0.0};
    Rng rng(seed);
    const std::size_t k = set_size;
    const std::size_t full = std::size_t{1} << k;
    std::vector<double> a(k), bb(k), c(k), d(k);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t q = 0; q < k; ++q) {
            a[q] = rng.uniform(-1.0, 1.0);
            bb[q] = rng.uniform(-1.0, 1.0);
            c[q] = rng.uniform(-1.0, 1.0);
            d[q] = rng.uniform(-1.0, 1.0);
        }
        double lhs1 = 1.0, prod_b = 1.0, lhs2 = 1.0;
        for (std::size_t q = 0; q < k; ++q) {
            lhs1 *= a[q] + bb[q];
            prod_b *= bb[q];
            lhs2 *= c[q] - d[q];
        }
        lhs1 -= prod_b;
        double rhs1 = 0.0, abs1 = 0.0, rhs2 = 0.0, abs2 = 0.0;
        for (std::size_t mask = 0; mask < full; ++mask) {
            double term2 = 1.0;
            int sign = 1;
            for (std::size_t q = 0; q < k; ++q) {
                if (mask & (std::size_t{1} << q)) {
                    term2 *= c[q];
                } else {
                    term2 *= d[q];
                    sign = -sign;
                }
            }
            rhs2 += sign * term2;
            abs2 += std::abs(term2);
            if (mask == full - 1) continue;  // D strictly inside S
            double term1 = 1.0;
            for (std::size_t q = 0; q < k; ++q) term1 *= (mask & (std::size_t{1} << q)) ? bb[q] : a[q];
            rhs1 += term1;
            abs1 += std::abs(term1);
        }
        if (abs1 > 0.0) rep.max_error_difference = std::max(rep.max_error_difference, std::abs(lhs1 - rhs1) / abs1);
        else rep.max_error_difference = std::max(rep.max_error_difference, std::abs(lhs1));
        if (abs2 > 0.0) rep.max_error_signed = std::max(rep.max_error_signed, std::abs(lhs2 - rhs2) / abs2);
        else rep.max_error_signed = std::max(rep.max_error_signed, std::abs(lhs2));
    }
    return rep;
}

inline ExpansionReport expansion_identity_check(const IndexSet& S, std::size_t trials, std::uint64_t seed) {
    return expansion_identity_check(S.size(), trials, seed);
}

// ---------------------------------------------------------------------------
// Studies

namespace detail {

inline std::vector<double> maximal_all(const std::vector<SampledFunction>& fs, const std::vector<Point>& points,
                                       const std::vector<double>& scales) {
    return maximal_MA(fs, all_slots(fs.size()), points, scales).values;
}

inline std::vector<double> default_maximal_scales(const Grid& g) {
    // up to the box diameter
    std::size_t count = 1;
    while (std::ldexp(g.spacing(), static_cast<int>(count)) <= 4.0 * g.half_width()) ++count;
    return dyadic_scales(g, count + 1);
}

}  // namespace detail

struct ConvergenceStudy {
    Table table;  // delta, norm_difference, max_pointwise_ratio
    double slope = 0.0;
    std::vector<Point> probes;
    std::vector<double> deltas;                        // the non-reference deltas, in input order
    std::vector<std::vector<double>> pointwise_ratio;  // [delta][probe] |diff| / (delta M(f)(x))
    double max_pointwise_spread = 0.0;                 // max over probes of spread across deltas
};

struct ConvergenceOptions {
    std::vector<double> deltas;
    double reference_delta = 0.0;
    Cutoff cutoff = Cutoff::Smooth;
    double p = 1.0;
    WeightSpec nu = WeightSpec::unit();
    std::vector<Point> probes;
};

/// ||T_{b,S,ref} - T_{b,S,delta}||_{L^p(nu)} over the grid for each delta,
/// plus the pointwise ratio |difference| / (delta M(f)(x)) at the probes.
inline ConvergenceStudy truncation_convergence_study(const KernelSpec& k, const SymbolSet& b, const IndexSet& S,
                                                     const std::vector<SampledFunction>& fs,
                                                     const ConvergenceOptions& opt) {
    const Grid& g = detail::common_grid(fs);
    if (opt.deltas.empty()) throw Error(ErrorKind::InvalidArgument, "convergence study needs deltas");
    const auto points = all_points(g);
    const auto ref = apply_T_bS(k, b, S, fs, {opt.reference_delta, opt.cutoff}, points).values;
    const auto ref_probe = apply_T_bS(k, b, S, fs, {opt.reference_delta, opt.cutoff}, opt.probes).values;
    const auto M = detail::maximal_all(fs, opt.probes, detail::default_maximal_scales(g));
    for (double v : M)
        if (!(v > 0.0)) throw Error(ErrorKind::ZeroMaximal, "M(f) vanishes at a probe point");
    const auto nu = sample_weight(opt.nu, g);

    ConvergenceStudy st;
    st.table.columns = {"delta", "norm_difference", "max_pointwise_ratio"};
    st.probes = opt.probes;
    std::vector<double> xs, ys;
    for (double delta : opt.deltas) {
        const auto cur = apply_T_bS(k, b, S, fs, {delta, opt.cutoff}, points).values;
        std::vector<double> diff(cur.size());
        for (std::size_t q = 0; q < cur.size(); ++q) diff[q] = ref[q] - cur[q];
        const double norm = std::pow(weighted_lp_pow(diff, opt.p, nu, g.cell_volume()), 1.0 / opt.p);
        const auto cur_probe = apply_T_bS(k, b, S, fs, {delta, opt.cutoff}, opt.probes).values;
        std::vector<double> ratio(opt.probes.size());
        double worst = 0.0;
        for (std::size_t q = 0; q < ratio.size(); ++q) {
            ratio[q] = std::abs(ref_probe[q] - cur_probe[q]) / (delta * M[q]);
            worst = std::max(worst, ratio[q]);
        }
        st.table.rows.push_back({delta, norm, worst});
        if (delta != opt.reference_delta) {
            xs.push_back(delta);
            ys.push_back(norm);
            st.deltas.push_back(delta);
            st.pointwise_ratio.push_back(std::move(ratio));
        }
    }
    st.slope = loglog_slope(xs, ys);
    for (std::size_t q = 0; q < opt.probes.size(); ++q) {
        std::vector<double> across;
        for (const auto& row : st.pointwise_ratio) across.push_back(row[q]);
        st.max_pointwise_spread = std::max(st.max_pointwise_spread, spread(across));
    }
    return st;
}

struct NearFarStudy {
    Table table;  // delta, x.., near_integral, far_integral, maximal, near_ratio, far_ratio
    std::vector<double> deltas;
    std::vector<double> near_sup;  // per delta, sup over points
    std::vector<double> far_sup;
    double near_spread = 1.0;
    double far_spread = 1.0;
};

/// Near integral  int_{Sigma <= delta} prod f_j / Sigma^{nm-1} and far integral
/// int_{Sigma >= delta} prod f_j / Sigma^{nm+1}, Sigma = sum |x - y_j|, at
/// each point; ratios near/(delta M) and far delta / M. The piecewise-constant
/// inputs are integrated on `subdivision`^n subcells per cell, so delta may
/// go below h. Subcells with Sigma = 0 are skipped.
inline NearFarStudy near_far_bounds_study(const std::vector<SampledFunction>& fs, const std::vector<double>& deltas,
                                          const std::vector<Point>& points, std::size_t subdivision = 1) {
    const Grid& g = detail::common_grid(fs);
    if (deltas.empty() || subdivision == 0) throw Error(ErrorKind::InvalidArgument, "near/far study needs deltas");
    const std::size_t m = fs.size(), n = g.dim();
    const double nm = static_cast<double>(n * m);
    const auto M = detail::maximal_all(fs, points, detail::default_maximal_scales(g));
    for (double v : M)
        if (!(v > 0.0)) throw Error(ErrorKind::ZeroMaximal, "M(f) vanishes at a requested point");

    // refined slot data: subcell centers and values (piecewise constant)
    const double h = g.spacing();
    const std::size_t sub_count = static_cast<std::size_t>(std::pow(static_cast<double>(subdivision), static_cast<double>(n)));
    std::vector<std::vector<double>> sub_centers(m), sub_values(m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (fs[j][k] == 0.0) continue;
            const Point c = g.center(k);
            for (std::size_t s = 0; s < sub_count; ++s) {
                std::size_t rest = s;
                for (std::size_t d = 0; d < n; ++d) {
                    const std::size_t a = rest % subdivision;
                    rest /= subdivision;
                    sub_centers[j].push_back(c[d] - 0.5 * h + (static_cast<double>(a) + 0.5) * h / static_cast<double>(subdivision));
                }
                sub_values[j].push_back(fs[j][k]);
            }
        }
    }
    const double vol = std::pow(g.cell_volume() / static_cast<double>(sub_count), static_cast<double>(m));

    const std::size_t D = deltas.size();
    std::vector<double> near(points.size() * D, 0.0), far(points.size() * D, 0.0);
    parallel_for(points.size(), [&](std::size_t i) {
        const Point& x = points[i];
        std::vector<std::vector<double>> dist(m);
        for (std::size_t j = 0; j < m; ++j) {
            dist[j].resize(sub_values[j].size());
            for (std::size_t q = 0; q < dist[j].size(); ++q)
                dist[j][q] = distance(x, std::span<const double>(sub_centers[j].data() + q * n, n));
        }
        for (const auto& v : sub_values)
            if (v.empty()) return;
        std::vector<std::size_t> pos(m, 0);
        std::vector<double> nsum(D, 0.0), fsum(D, 0.0);
        for (;;) {
            double prod = 1.0, sigma = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                prod *= sub_values[j][pos[j]];
                sigma += dist[j][pos[j]];
            }
            if (sigma > 0.0 && prod != 0.0) {
                const double nv = prod * std::pow(sigma, 1.0 - nm);
                const double fv = prod * std::pow(sigma, -1.0 - nm);
                for (std::size_t q = 0; q < D; ++q) {
                    if (sigma <= deltas[q]) nsum[q] += nv;
                    if (sigma >= deltas[q]) fsum[q] += fv;
                }
            }
            std::size_t j = 0;
            while (j < m && ++pos[j] == sub_values[j].size()) {
                pos[j] = 0;
                ++j;
            }
            if (j == m) break;
        }
        for (std::size_t q = 0; q < D; ++q) {
            near[i * D + q] = nsum[q] * vol;
            far[i * D + q] = fsum[q] * vol;
        }
    });

    NearFarStudy st;
    st.deltas = deltas;
    st.table.columns = {"delta"};
    for (std::size_t d = 0; d < n; ++d) st.table.columns.push_back("x" + std::to_string(d + 1));
    for (const char* c : {"near_integral", "far_integral", "maximal", "near_ratio", "far_ratio"}) st.table.columns.push_back(c);
    st.near_sup.assign(D, 0.0);
    st.far_sup.assign(D, 0.0);
    for (std::size_t q = 0; q < D; ++q) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double nr = near[i * D + q] / (deltas[q] * M[i]);
            const double fr = far[i * D + q] * deltas[q] / M[i];
            st.near_sup[q] = std::max(st.near_sup[q], nr);
            st.far_sup[q] = std::max(st.far_sup[q], fr);
            std::vector<double> row{deltas[q]};
            row.insert(row.end(), points[i].begin(), points[i].end());
            row.insert(row.end(), {near[i * D + q], far[i * D + q], M[i], nr, fr});
            st.table.rows.push_back(std::move(row));
        }
    }
    st.near_spread = spread(st.near_sup);
    st.far_spread = spread(st.far_sup);
    return st;
}

/// Points on the sphere |x| = r: +-r for n = 1, `angles` equispaced points for
/// n = 2, +-r e_d otherwise.
inline std::vector<Point> sphere_points(std::size_t n, double r, std::size_t angles = 16) {
    std::vector<Point> out;
    if (n == 1) return {Point{-r}, Point{r}};
    if (n == 2) {
        for (std::size_t a = 0; a < angles; ++a) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(angles);
            out.push_back(Point{r * std::cos(th), r * std::sin(th)});
        }
        return out;
    }
    for (std::size_t d = 0; d < n; ++d)
        for (double s : {-1.0, 1.0}) {
            Point p(n, 0.0);
            p[d] = s * r;
            out.push_back(p);
        }
    return out;
}

struct DecayStudy {
    Table table;  // radius, sup_abs_value
    double slope = 0.0;
    double support_radius = 0.0;
};

/// sup over sphere points of |T_{b,S,delta}(f)(x)| per radius. The evaluation
/// points may lie outside the box; the y-sum only sees the inputs' supports.
inline DecayStudy decay_study(const KernelSpec& k, const SymbolSet& b, const IndexSet& S,
                              const std::vector<SampledFunction>& fs, const TruncationPolicy& trunc,
                              const std::vector<double>& radii) {
    const Grid& g = detail::common_grid(fs);
    DecayStudy st;
    for (const auto& f : fs) st.support_radius = std::max(st.support_radius, detail::support_radius_of(f));
    for (auto i : S.symbol_indices()) st.support_radius = std::max(st.support_radius, b.get(i).support_radius());
    st.table.columns = {"radius", "sup_abs_value"};
    std::vector<double> rs, vs;
    for (double r : radii) {
        if (r < 2.0 * st.support_radius)
            throw Error(ErrorKind::RadiusTooSmall,
                        "radius " + format_double(r) + " is below twice the support radius " + format_double(st.support_radius));
        const auto out = apply_T_bS(k, b, S, fs, trunc, sphere_points(g.dim(), r));
        double sup = 0.0;
        for (double v : out.values) sup = std::max(sup, std::abs(v));
        st.table.rows.push_back({r, sup});
        rs.push_back(r);
        vs.push_back(sup);
    }
    st.slope = loglog_slope(rs, vs);
    return st;
}

struct TranslationStudy {
    Table table;  // shift_length, norm_difference, part_I_norm, part_II_norm, part_I_ratio, part_II_ratio
    double slope = 0.0;
};

/// ||T(. + t) - T(.)||_{L^p(nu)} over the grid centers, with T evaluated at
/// x + t by quadrature rather than by shifting sampled output. The difference
/// splits as I + II with
///   I  = sum (P_{x+t} - P_x) uK(x, y) prod f,   II = sum P_{x+t} (uK(x+t, y) - uK(x, y)) prod f,
/// P_z the symbol factor at z. part_I_ratio = ||I|| / |t|, part_II_ratio = ||II|| delta / |t|.
inline TranslationStudy translation_modulus_study(const KernelSpec& k, const SymbolSet& b, const IndexSet& S,
                                                  const std::vector<SampledFunction>& fs, const TruncationPolicy& trunc,
                                                  const std::vector<Point>& shifts, double p = 1.0,
                                                  const WeightSpec& nu_w = WeightSpec::unit()) {
    const Grid& g = detail::common_grid(fs);
    const auto base = all_points(g);
    const auto tr = detail::commutator_transform(b, S, fs);
    const auto t0 = detail::truncated_operator(k, fs, trunc, base, &tr).values;
    const auto nu = sample_weight(nu_w, g);
    auto norm = [&](const std::vector<double>& v) {
        return std::pow(weighted_lp_pow(v, p, nu, g.cell_volume()), 1.0 / p);
    };

    TranslationStudy st;
    st.table.columns = {"shift_length", "norm_difference", "part_I_norm", "part_II_norm", "part_I_ratio", "part_II_ratio"};
    std::vector<double> ls, ds;
    for (const auto& t : shifts) {
        g.shift_in_cells(t);
        const double len = euclidean_norm(t);
        if (len > 0.5 * trunc.delta * (1.0 + 1e-12))
            throw Error(ErrorKind::ShiftTooLarge, "|t| = " + format_double(len) + " exceeds delta / 2");
        std::vector<Point> moved(base);
        for (auto& x : moved)
            for (std::size_t d = 0; d < x.size(); ++d) x[d] += t[d];
        const auto tt = detail::truncated_operator(k, fs, trunc, moved, &tr).values;
        // C(x) = sum P_{x+t} uK(x, y) prod f: symbol factor at x + t, kernel at x
        std::vector<double> cross(base.size());
        {
            const auto centers = g.centers();
            const auto supports = detail::supports_of(fs);
            parallel_for(base.size(), [&](std::size_t i) {
                detail::SlotValues sv;
                sv.load(fs, &tr, moved[i]);
                std::vector<double> y;
                const std::span<const double> x = base[i];
                cross[i] = detail::tensor_sum(g, centers, supports, sv.spans, y, [&](std::span<const double> yy) {
                    const double u = trunc.weight(diagonal_distance(x, yy));
                    return u == 0.0 ? 0.0 : u * k(x, yy);
                });
            });
        }
        std::vector<double> diff(base.size()), part1(base.size()), part2(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            diff[i] = tt[i] - t0[i];
            part1[i] = cross[i] - t0[i];
            part2[i] = tt[i] - cross[i];
        }
        const double nd = norm(diff), n1 = norm(part1), n2 = norm(part2);
        const double r1 = len > 0.0 ? n1 / len : 0.0;
        const double r2 = len > 0.0 ? n2 * trunc.delta / len : 0.0;
        st.table.rows.push_back({len, nd, n1, n2, r1, r2});
        ls.push_back(len);
        ds.push_back(nd);
    }
    st.slope = loglog_slope(ls, ds);
    return st;
}

}  // namespace czlab
