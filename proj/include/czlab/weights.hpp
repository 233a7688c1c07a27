#pragma once

// Multiple weights and finite-family estimates of A_p, A_{p-vec} and
// A_{p-vec,A} constants. Every constant reported here is a sup over a finite
// cube family, i.e. a lower estimate of the true sup over all cubes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "czlab/core.hpp"
#include "czlab/funcspace.hpp"
#include "czlab/weight_spec.hpp"

namespace czlab {

/// 1-based slot indices, sorted and unique.
using SlotSet = std::vector<std::size_t>;

inline SlotSet all_slots(std::size_t m) {
    SlotSet s(m);
    std::iota(s.begin(), s.end(), std::size_t{1});
    return s;
}

/// (omega_1..omega_m) with exponents (p_1..p_m), 1 < p_j < inf, and 1/p = sum 1/p_j.
class WeightVector {
public:
    WeightVector(std::vector<WeightSpec> weights, std::vector<double> exponents)
        : weights_(std::move(weights)), exponents_(std::move(exponents)) {
        if (weights_.size() != exponents_.size() || weights_.empty())
            throw Error(ErrorKind::InvalidArgument, "weight and exponent counts must agree and be nonzero");
        double inv = 0.0;
        for (double pj : exponents_) {
            if (!(pj > 1.0) || !std::isfinite(pj))
                throw Error(ErrorKind::InvalidArgument, "each exponent p_j must lie in (1, inf)");
            inv += 1.0 / pj;
        }
        p_ = 1.0 / inv;
    }

    static WeightVector unweighted(std::vector<double> exponents) {
        std::vector<WeightSpec> w(exponents.size(), WeightSpec::unit());
        return WeightVector(std::move(w), std::move(exponents));
    }

    std::size_t size() const { return weights_.size(); }
    const WeightSpec& weight(std::size_t j) const { return weights_.at(j); }  // 0-based
    double exponent(std::size_t j) const { return exponents_.at(j); }      // 0-based
    const std::vector<WeightSpec>& weights() const { return weights_; }
    const std::vector<double>& exponents() const { return exponents_; }
    double p() const { return p_; }

    /// p_A with 1/p_A = sum_{j in A} 1/p_j.
    double p_of(const SlotSet& A) const {
        check_subset(A);
        double inv = 0.0;
        for (auto j : A) inv += 1.0 / exponents_[j - 1];
        return 1.0 / inv;
    }

    void check_subset(const SlotSet& A) const {
        if (A.empty()) throw Error(ErrorKind::EmptySubset, "slot subset must be nonempty");
        for (std::size_t i = 0; i < A.size(); ++i) {
            if (A[i] < 1 || A[i] > size()) throw Error(ErrorKind::InvalidArgument, "slot index out of range");
            if (i > 0 && A[i] <= A[i - 1]) throw Error(ErrorKind::InvalidArgument, "slot subset must be sorted and unique");
        }
    }

private:
    std::vector<WeightSpec> weights_;
    std::vector<double> exponents_;
    double p_ = 1.0;
};

/// nu_{omega,A}(x) = prod_{j in A} omega_j(x)^{p_A / p_j}; A = all slots gives nu_omega.
inline WeightSpec nu_weight(const WeightVector& wv, const SlotSet& A) {
    const double pA = wv.p_of(A);
    std::vector<WeightSpec> ws;
    std::vector<double> powers;
    std::string label = "nu[";
    for (auto j : A) {
        ws.push_back(wv.weight(j - 1));
        powers.push_back(pA / wv.exponent(j - 1));
        label += std::to_string(j) + (j == A.back() ? "]" : ",");
    }
    if (ws.size() == 1 && powers[0] == 1.0) return ws[0];
    return WeightSpec::from_function(
        [ws, powers](std::span<const double> x) {
            double v = 1.0;
            for (std::size_t i = 0; i < ws.size(); ++i) v *= std::pow(ws[i](x), powers[i]);
            return v;
        },
        label);
}

inline WeightSpec nu_weight(const WeightVector& wv) { return nu_weight(wv, all_slots(wv.size())); }

/// Half-open cube [lower, lower + side)^n.
struct Cube {
    Point lower;
    double side = 0.0;

    Point center() const {
        Point c(lower);
        for (auto& v : c) v += 0.5 * side;
        return c;
    }
};

struct CubeFamily {
    std::vector<Cube> cubes;

    void add(Cube c) { cubes.push_back(std::move(c)); }
    std::size_t size() const { return cubes.size(); }
};

/// Cubes of side 2^j h, j = 0..levels, centered at each given point.
inline CubeFamily dyadic_cube_family(const Grid& grid, const std::vector<Point>& centers, std::size_t levels) {
    CubeFamily fam;
    for (const auto& c : centers) {
        for (std::size_t j = 0; j <= levels; ++j) {
            const double s = std::ldexp(grid.spacing(), static_cast<int>(j));
            Cube q{c, s};
            for (auto& v : q.lower) v -= 0.5 * s;
            fam.add(std::move(q));
        }
    }
    return fam;
}

namespace detail {

// Flat indices of cells whose centers lie in the cube. Empty when the cube
// leaves the box (clipped cubes are skipped).
inline std::vector<std::size_t> cells_in_cube(const Grid& g, const Cube& q) {
    const std::size_t n = g.dim();
    const double L = g.half_width();
    const double h = g.spacing();
    const double tol = 1e-12 * std::max(1.0, L);
    if (q.lower.size() != n) throw Error(ErrorKind::InvalidArgument, "cube dimension mismatch");
    std::vector<std::size_t> lo(n), hi(n);
    for (std::size_t d = 0; d < n; ++d) {
        if (q.lower[d] < -L - tol || q.lower[d] + q.side > L + tol) return {};
        // centers c_i = -L + (i + 1/2) h with lower <= c_i < lower + side
        const double a = (q.lower[d] + L) / h - 0.5;
        const double b = (q.lower[d] + q.side + L) / h - 0.5;
        const long ilo = std::max(0L, static_cast<long>(std::ceil(a - 1e-9)));
        const long ihi = std::min(static_cast<long>(g.points_per_axis()), static_cast<long>(std::ceil(b - 1e-9)));
        if (ilo >= ihi) return {};
        lo[d] = static_cast<std::size_t>(ilo);
        hi[d] = static_cast<std::size_t>(ihi);
    }
    std::vector<std::size_t> out;
    std::vector<std::size_t> idx(lo);
    for (;;) {
        out.push_back(g.flat_index(idx));
        std::size_t d = 0;
        while (d < n && ++idx[d] >= hi[d]) {
            idx[d] = lo[d];
            ++d;
        }
        if (d == n) break;
    }
    return out;
}

inline double average_over(std::span<const double> values, const std::vector<std::size_t>& cells) {
    double s = 0.0;
    for (auto k : cells) s += values[k];
    return s / static_cast<double>(cells.size());
}

inline bool lex_less(const Cube& a, const Cube& b) {
    const Point ca = a.center(), cb = b.center();
    if (ca != cb) return ca < cb;
    return a.side < b.side;
}

}  // namespace detail

/// Per-cube local constants plus the sup and its arg-max cube. Cubes that
/// leave the box carry NaN and are excluded from the sup.
struct ConstantEstimate {
    double value = 0.0;  // lower estimate of the true sup
    std::size_t argmax = 0;
    std::vector<double> local;
};

namespace detail {

inline ConstantEstimate finish_estimate(const CubeFamily& cubes, std::vector<double> local) {
    ConstantEstimate est;
    est.local = std::move(local);
    bool found = false;
    for (std::size_t i = 0; i < est.local.size(); ++i) {
        const double v = est.local[i];
        if (std::isnan(v)) continue;
        if (!found || v > est.value ||
            (v == est.value && lex_less(cubes.cubes[i], cubes.cubes[est.argmax]))) {
            est.value = v;
            est.argmax = i;
            found = true;
        }
    }
    if (!found) throw Error(ErrorKind::InvalidArgument, "no cube of the family lies inside the grid box");
    return est;
}

}  // namespace detail

/// max over cubes of (avg_Q w) (avg_Q w^{1-p'})^{p-1}.
inline ConstantEstimate ap_constant(const WeightSpec& w, double p, const CubeFamily& cubes, const Grid& grid) {
    if (!(p > 1.0)) throw Error(ErrorKind::InvalidArgument, "A_p needs p > 1");
    const double dual_power = -1.0 / (p - 1.0);  // 1 - p'
    const std::vector<double> wv = sample_weight(w, grid);
    std::vector<double> wd(wv.size());
    for (std::size_t k = 0; k < wv.size(); ++k) wd[k] = std::pow(wv[k], dual_power);
    std::vector<double> local(cubes.size(), std::numeric_limits<double>::quiet_NaN());
    parallel_for(cubes.size(), [&](std::size_t i) {
        const auto cells = detail::cells_in_cube(grid, cubes.cubes[i]);
        if (cells.empty()) return;
        local[i] = detail::average_over(wv, cells) * std::pow(detail::average_over(wd, cells), p - 1.0);
    });
    return detail::finish_estimate(cubes, std::move(local));
}

/// max over cubes of (avg nu_A)^{1/p_A} prod_{j in A} (avg omega_j^{1-p_j'})^{1/p_j'}.
inline ConstantEstimate multi_ap_constant(const WeightVector& wv, const CubeFamily& cubes, const SlotSet& A,
                                          const Grid& grid) {
    const double pA = wv.p_of(A);
    const std::vector<double> nu = sample_weight(nu_weight(wv, A), grid);
    std::vector<std::vector<double>> duals;
    std::vector<double> dual_exponents;  // 1/p_j'
    for (auto j : A) {
        const double pj = wv.exponent(j - 1);
        const double dual_power = -1.0 / (pj - 1.0);
        std::vector<double> s = sample_weight(wv.weight(j - 1), grid);
        for (auto& v : s) v = std::pow(v, dual_power);
        duals.push_back(std::move(s));
        dual_exponents.push_back(1.0 - 1.0 / pj);
    }
    std::vector<double> local(cubes.size(), std::numeric_limits<double>::quiet_NaN());
    parallel_for(cubes.size(), [&](std::size_t i) {
        const auto cells = detail::cells_in_cube(grid, cubes.cubes[i]);
        if (cells.empty()) return;
        double v = std::pow(detail::average_over(nu, cells), 1.0 / pA);
        for (std::size_t a = 0; a < duals.size(); ++a)
            v *= std::pow(detail::average_over(duals[a], cells), dual_exponents[a]);
        local[i] = v;
    });
    return detail::finish_estimate(cubes, std::move(local));
}

}  // namespace czlab
