#pragma once

// Frechet-Kolmogorov diagnostics for finite families in L^p(w), 0 < p < inf:
// the three curves (uniform bound, tail, translation modulus), a
// finite-resolution verdict, the exponent trick f -> f^{p/p0} for p < 1 with
// its elementary inequalities, and a constructive epsilon-net built from ball
// averages.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "czlab/core.hpp"
#include "czlab/funcspace.hpp"
#include "czlab/weight_spec.hpp"

namespace czlab {

struct FKReport {
    double p = 1.0;
    std::string weight;
    double uniform_bound = 0.0;  // sup_f ||f||_{L^p(w)}
    std::vector<double> tail_radii;
    std::vector<double> tail_curve;  // sup_f sum_{|x| >= A} |f|^p w h^n
    std::vector<double> shift_lengths;
    std::vector<double> modulus_curve;  // sup_f sum |f(.+u) - f|^p w h^n, in input order
    std::vector<std::vector<double>> member_modulus;  // [member][shift]
    // hypothesis flags (warnings only)
    double p0 = 2.0;
    bool dual_weight_finite = true;  // w^{-1/(p0-1)} has finite mass on the box
    double weight_infimum = 0.0;     // inf of w on the box
    std::vector<std::string> warnings;

    Table curves_table() const {
        Table t;
        t.columns = {"curve", "abscissa", "value"};
        t.rows.push_back({0.0, 0.0, uniform_bound});
        for (std::size_t i = 0; i < tail_radii.size(); ++i) t.rows.push_back({1.0, tail_radii[i], tail_curve[i]});
        for (std::size_t i = 0; i < shift_lengths.size(); ++i)
            t.rows.push_back({2.0, shift_lengths[i], modulus_curve[i]});
        return t;
    }
};

namespace detail {

inline double modulus_value(const SampledFunction& f, std::span<const double> u, double p, std::span<const double> w) {
    const SampledFunction g = translate(f, u);
    std::vector<double> d(f.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = g[k] - f[k];
    return weighted_lp_pow(d, p, w, f.grid().cell_volume());
}

}  // namespace detail

/// The three curves of the criterion, computed by direct summation. Tail radii
/// must increase; shifts must be grid-aligned.
inline FKReport fk_report(const FamilyOfFunctions& F, double p, const WeightSpec& w, const std::vector<double>& tail_radii,
                          const std::vector<Point>& shifts, double p0 = 2.0) {
    if (F.empty()) throw Error(ErrorKind::InvalidArgument, "family must be nonempty");
    if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "exponent p must be positive");
    for (std::size_t i = 1; i < tail_radii.size(); ++i)
        if (!(tail_radii[i] > tail_radii[i - 1])) throw Error(ErrorKind::InvalidArgument, "tail radii must increase");
    const Grid& g = F.grid();
    for (const auto& u : shifts) g.shift_in_cells(u);
    const auto wv = sample_weight(w, g);

    FKReport rep;
    rep.p = p;
    rep.p0 = p0;
    rep.weight = w.label();
    rep.tail_radii = tail_radii;
    for (const auto& u : shifts) rep.shift_lengths.push_back(euclidean_norm(u));

    const std::size_t M = F.size();
    std::vector<double> norms(M);
    std::vector<std::vector<double>> tails(M, std::vector<double>(tail_radii.size()));
    rep.member_modulus.assign(M, std::vector<double>(shifts.size()));
    parallel_for(M, [&](std::size_t i) {
        norms[i] = std::pow(weighted_lp_pow(F[i].values(), p, wv, g.cell_volume()), 1.0 / p);
        for (std::size_t a = 0; a < tail_radii.size(); ++a) tails[i][a] = tail_mass(F[i], p, w, tail_radii[a]);
        for (std::size_t s = 0; s < shifts.size(); ++s)
            rep.member_modulus[i][s] = detail::modulus_value(F[i], shifts[s], p, wv);
    });
    rep.uniform_bound = *std::max_element(norms.begin(), norms.end());
    rep.tail_curve.assign(tail_radii.size(), 0.0);
    rep.modulus_curve.assign(shifts.size(), 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t a = 0; a < tail_radii.size(); ++a) rep.tail_curve[a] = std::max(rep.tail_curve[a], tails[i][a]);
        for (std::size_t s = 0; s < shifts.size(); ++s)
            rep.modulus_curve[s] = std::max(rep.modulus_curve[s], rep.member_modulus[i][s]);
    }

    // standing hypothesis: w^{-1/(p0-1)} is locally integrable
    const auto& pw = w.power_params();
    const double dual = -1.0 / (p0 - 1.0);
    if (pw && pw->eps == 0.0) {
        rep.dual_weight_finite = pw->alpha * dual > -static_cast<double>(g.dim());
    } else {
        double mass = 0.0;
        for (double v : wv) mass += std::pow(v, dual);
        rep.dual_weight_finite = std::isfinite(mass * g.cell_volume());
    }
    if (!rep.dual_weight_finite)
        rep.warnings.push_back("w^{-1/(p0-1)} is not locally integrable for p0 = " + format_double(p0));

    // infimum of w on the box (relevant at p = 1)
    if (pw && pw->eps == 0.0 && pw->alpha > 0.0) {
        rep.weight_infimum = 0.0;
    } else {
        rep.weight_infimum = *std::min_element(wv.begin(), wv.end());
    }
    if (p == 1.0 && !(rep.weight_infimum > 0.0))
        rep.warnings.push_back("inf of w on the box is 0; the p = 1 case needs a positive local infimum");
    return rep;
}

enum class FKVerdict { Pass, FailBound, FailTail, FailModulus, Inconclusive };

inline const char* to_string(FKVerdict v) {
    switch (v) {
        case FKVerdict::Pass: return "pass";
        case FKVerdict::FailBound: return "fail(i)";
        case FKVerdict::FailTail: return "fail(ii)";
        case FKVerdict::FailModulus: return "fail(iii)";
        case FKVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

/// Thresholds relative to uniform_bound^p.
struct FKThresholds {
    double tail = 1e-2;
    double modulus = 5e-2;
    double monotone = 1e-9;  // allowed relative decrease of the modulus curve as |u| grows
};

struct FKDecision {
    FKVerdict verdict = FKVerdict::Pass;
    std::string reason;
};

/// Finite-resolution decision: checks (i) bound finite, (ii) tail at the
/// largest radius, (iii) modulus at the smallest nonzero shift, then flags a
/// modulus curve that is not nondecreasing in |u| as inconclusive.
inline FKDecision fk_verdict(const FKReport& r, const FKThresholds& tol = {}) {
    if (!std::isfinite(r.uniform_bound)) return {FKVerdict::FailBound, "uniform bound is not finite"};
    const double scale = std::pow(r.uniform_bound, r.p);
    if (scale == 0.0) return {FKVerdict::Pass, "family is zero"};
    if (!r.tail_curve.empty() && r.tail_curve.back() > tol.tail * scale)
        return {FKVerdict::FailTail, "tail mass " + format_double(r.tail_curve.back()) + " at A = " +
                                         format_double(r.tail_radii.back()) + " exceeds " + format_double(tol.tail * scale)};
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < r.shift_lengths.size(); ++i)
        if (r.shift_lengths[i] > 0.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r.shift_lengths[a] < r.shift_lengths[b]; });
    if (!order.empty()) {
        const double first = r.modulus_curve[order.front()];
        if (first > tol.modulus * scale)
            return {FKVerdict::FailModulus, "modulus " + format_double(first) + " at |u| = " +
                                                format_double(r.shift_lengths[order.front()]) + " exceeds " +
                                                format_double(tol.modulus * scale)};
        for (std::size_t i = 1; i < order.size(); ++i) {
            const double prev = r.modulus_curve[order[i - 1]], cur = r.modulus_curve[order[i]];
            if (cur < prev - tol.monotone * scale)
                return {FKVerdict::Inconclusive, "modulus curve decreases between |u| = " +
                                                     format_double(r.shift_lengths[order[i - 1]]) + " and " +
                                                     format_double(r.shift_lengths[order[i]])};
        }
    }
    return {FKVerdict::Pass, "all conditions within thresholds"};
}

// ---------------------------------------------------------------------------
// Exponent trick and its inequalities

/// s^a - t^a computed as t^a expm1(a log1p((s - t)/t)) with t the smaller
/// argument, so nearby arguments keep their relative precision.
inline double power_difference(double s, double t, double a) {
    if (s == t) return 0.0;
    const bool swap = s < t;
    const double hi = swap ? t : s, lo = swap ? s : t;
    const double v = lo == 0.0 ? std::pow(hi, a) : std::pow(lo, a) * std::expm1(a * std::log1p((hi - lo) / lo));
    return swap ? -v : v;
}

inline void require_nonnegative(const SampledFunction& f) {
    for (double v : f.values())
        if (v < 0.0) throw Error(ErrorKind::NegativeValues, "exponent trick needs nonnegative members");
}

/// F^a with a = p / p0.
inline FamilyOfFunctions exponent_trick(const FamilyOfFunctions& F, double p, double p0) {
    if (!(p > 0.0 && p < 1.0) || !(p0 > 1.0))
        throw Error(ErrorKind::InvalidArgument, "exponent trick needs 0 < p < 1 < p0");
    const double a = p / p0;
    FamilyOfFunctions out;
    for (const auto& f : F.members()) {
        require_nonnegative(f);
        out.push_back(f.map([a](double v) { return std::pow(v, a); }));
    }
    return out;
}

struct DominationReport {
    std::size_t checks = 0;
    std::size_t violations = 0;
    double max_ratio = 0.0;  // max over cells of |f(x+u)^a - f(x)^a|^{p0} / |f(x+u) - f(x)|^p
};

/// Cell-wise |f(x+u)^a - f(x)^a|^{p0} <= |f(x+u) - f(x)|^p for every member
/// and shift, with relative slack 1e-12.
inline DominationReport exponent_trick_domination(const FamilyOfFunctions& F, double p, double p0,
                                                  const std::vector<Point>& shifts) {
    const double a = p / p0;
    DominationReport rep;
    for (const auto& f : F.members()) {
        require_nonnegative(f);
        for (const auto& u : shifts) {
            const SampledFunction g = translate(f, u);
            for (std::size_t k = 0; k < f.size(); ++k) {
                const double s = g[k], t = f[k];
                ++rep.checks;
                if (s == t) continue;
                const double lhs = std::pow(std::abs(power_difference(s, t, a)), p0);
                const double rhs = std::pow(std::abs(s - t), p);
                rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
                if (lhs > rhs * (1.0 + 1e-12)) ++rep.violations;
            }
        }
    }
    return rep;
}

struct InequalityReport {
    std::size_t trials = 0;
    std::size_t violations_41 = 0;  // |s^a - t^a| <= |s - t|^a
    std::size_t violations_42 = 0;  // |s - t|^a <= (1/a) ((s+t)/|s-t|)^{1-a} |s^a - t^a|
    double max_slack_41 = -std::numeric_limits<double>::infinity();  // max of lhs/rhs - 1
    double max_slack_42 = -std::numeric_limits<double>::infinity();
};

/// s, t log-uniform in [1e-6, 1e6], a uniform in (0, 1); pairs with s = t are
/// redrawn. A violation is lhs > rhs (1 + 1e-12).
inline InequalityReport inequality_selftest(std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
    Rng rng(seed);
    InequalityReport rep;
    rep.trials = trials;
    for (std::size_t i = 0; i < trials; ++i) {
        double s, t, a;
        do {
            s = rng.log_uniform(1e-6, 1e6);
            t = rng.log_uniform(1e-6, 1e6);
            a = rng.uniform();
        } while (s == t || a == 0.0);
        const double diff_a = std::abs(power_difference(s, t, a));
        const double d = std::abs(s - t);
        const double lhs1 = diff_a, rhs1 = std::pow(d, a);
        const double lhs2 = std::pow(d, a), rhs2 = std::pow((s + t) / d, 1.0 - a) * diff_a / a;
        const double sl1 = lhs1 / rhs1 - 1.0, sl2 = lhs2 / rhs2 - 1.0;
        rep.max_slack_41 = std::max(rep.max_slack_41, sl1);
        rep.max_slack_42 = std::max(rep.max_slack_42, sl2);
        if (sl1 > 1e-12) ++rep.violations_41;
        if (sl2 > 1e-12) ++rep.violations_42;
    }
    return rep;
}

struct SplitReport {
    double inside_lhs = 0.0, inside_rhs = 0.0;    // on E_eps
    double outside_lhs = 0.0, outside_rhs = 0.0;  // on the complement
    std::size_t inside_cells = 0;
    bool inside_ok = true, outside_ok = true;
};

/// E_eps = {(f+g)/|f-g| <= 1/eps}. Checks
///   sum_E |f-g|^p w <= a^{-p0} eps^{(a-1)p0} sum_E |f^a - g^a|^{p0} w
///   sum_{E^c} |f-g|^p w <= eps^p (sum f^p w + sum g^p w)
/// with a = p / p0; cells with f = g contribute nothing to either side.
inline SplitReport cauchy_split_check(const SampledFunction& f, const SampledFunction& g, double p, double p0,
                                      const WeightSpec& w, double eps) {
    require_nonnegative(f);
    require_nonnegative(g);
    if (!(f.grid() == g.grid())) throw Error(ErrorKind::InvalidArgument, "grid mismatch");
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    const double a = p / p0;
    const Grid& gr = f.grid();
    const auto wv = sample_weight(w, gr);
    SplitReport rep;
    double in_a = 0.0, fp = 0.0, gp = 0.0;
    for (std::size_t k = 0; k < gr.size(); ++k) {
        const double s = f[k], t = g[k];
        fp += std::pow(s, p) * wv[k];
        gp += std::pow(t, p) * wv[k];
        if (s == t) continue;
        const double d = std::abs(s - t);
        const double term = std::pow(d, p) * wv[k];
        if (s + t <= d / eps) {
            ++rep.inside_cells;
            rep.inside_lhs += term;
            in_a += std::pow(std::abs(power_difference(s, t, a)), p0) * wv[k];
        } else {
            rep.outside_lhs += term;
        }
    }
    const double vol = gr.cell_volume();
    rep.inside_lhs *= vol;
    rep.outside_lhs *= vol;
    rep.inside_rhs = std::pow(a, -p0) * std::pow(eps, (a - 1.0) * p0) * in_a * vol;
    rep.outside_rhs = std::pow(eps, p) * (fp + gp) * vol;
    rep.inside_ok = rep.inside_lhs <= rep.inside_rhs * (1.0 + 1e-12);
    rep.outside_ok = rep.outside_lhs <= rep.outside_rhs * (1.0 + 1e-12);
    return rep;
}

// ---------------------------------------------------------------------------
// Epsilon-net from ball averages

struct NetCertificate {
    double epsilon = 0.0;
    double mollification_radius = 0.0;
    double tail_radius = 0.0;
    double p = 1.0;
    double metric_exponent = 1.0;  // p for p >= 1 (norm); distances for p < 1 are p-th powers
    double selection_tolerance = 0.0;  // sup-metric tolerance on ball averages
    double mollification_error = 0.0;  // sup_f ||f - f_B||
    double tail_error = 0.0;           // sup_f ||f 1_{|x|>=A}||
    std::vector<std::size_t> selected;
    std::vector<std::size_t> nearest;       // per member: index of the nearest selected member
    std::vector<double> nearest_distance;  // per member
    double max_distance = 0.0;
    double certified_radius = 0.0;  // the target the measured distances are held to
    bool pass = false;
};

/// ||f - g||_{L^p(w)} for p >= 1; the p-th power for p < 1.
inline double family_distance(const SampledFunction& f, const SampledFunction& g, double p, const WeightSpec& w) {
    const SampledFunction d = f - g;
    const double s = weighted_lp_pow(d, p, w);
    return p >= 1.0 ? std::pow(s, 1.0 / p) : s;
}

namespace detail {

// Greedy farthest-point selection in the sup metric on the cells `mask`,
// starting from member 0; ties go to the lowest index.
inline std::vector<std::size_t> greedy_net(const std::vector<SampledFunction>& avgs, const std::vector<std::size_t>& mask,
                                           double tol) {
    const std::size_t M = avgs.size();
    std::vector<std::size_t> net{0};
    std::vector<double> dist(M, std::numeric_limits<double>::infinity());
    auto update = [&](std::size_t j) {
        parallel_for(M, [&](std::size_t i) {
            double d = 0.0;
            for (auto k : mask) d = std::max(d, std::abs(avgs[i][k] - avgs[j][k]));
            dist[i] = std::min(dist[i], d);
        });
    };
    update(0);
    for (;;) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < M; ++i)
            if (dist[i] > dist[far]) far = i;
        if (!(dist[far] > tol)) break;
        net.push_back(far);
        update(far);
    }
    return net;
}

inline NetCertificate build_net_normed(const FamilyOfFunctions& F, double p, const WeightSpec& w, double eps, double t,
                                       double A) {
    const Grid& g = F.grid();
    if (!(t >= g.spacing())) throw Error(ErrorKind::InvalidArgument, "mollification radius must be at least h");
    if (!(A > 0.0) || A > g.half_width() * std::sqrt(static_cast<double>(g.dim())))
        throw Error(ErrorKind::InvalidArgument, "tail radius must lie inside the box");
    const std::size_t M = F.size();
    NetCertificate c;
    c.epsilon = eps;
    c.mollification_radius = t;
    c.tail_radius = A;
    c.p = p;
    c.metric_exponent = p;

    std::vector<SampledFunction> avgs(M, SampledFunction::zero(g));
    std::vector<double> moll(M), tails(M);
    parallel_for(M, [&](std::size_t i) {
        avgs[i] = ball_average_field(F[i], t);
        moll[i] = std::pow(weighted_lp_pow(F[i] - avgs[i], p, w), 1.0 / p);
        tails[i] = std::pow(tail_mass(F[i], p, w, A), 1.0 / p);
    });
    c.mollification_error = *std::max_element(moll.begin(), moll.end());
    c.tail_error = *std::max_element(tails.begin(), tails.end());
    if (c.mollification_error >= eps)
        throw Error(ErrorKind::MollificationTooCoarse,
                    "sup ||f - f_B|| = " + format_double(c.mollification_error) + " >= eps; shrink t");
    if (c.tail_error >= eps)
        throw Error(ErrorKind::TailTooHeavy, "sup tail = " + format_double(c.tail_error) + " >= eps; enlarge A");

    std::vector<std::size_t> mask;
    double wball = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.center(k);
        if (euclidean_norm(x) < A) {
            mask.push_back(k);
            wball += w(x);
        }
    }
    wball *= g.cell_volume();
    c.selection_tolerance = eps / std::pow(wball, 1.0 / p);
    c.selected = greedy_net(avgs, mask, c.selection_tolerance);

    c.nearest.assign(M, 0);
    c.nearest_distance.assign(M, 0.0);
    parallel_for(M, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (auto j : c.selected) {
            const double d = family_distance(F[i], F[j], p, w);
            if (d < best) {
                best = d;
                c.nearest[i] = j;
            }
        }
        c.nearest_distance[i] = best;
    });
    c.max_distance = *std::max_element(c.nearest_distance.begin(), c.nearest_distance.end());
    c.certified_radius = 5.0 * eps;
    c.pass = c.max_distance <= c.certified_radius;
    return c;
}

}  // namespace detail

/// For p >= 1: mollify at radius t, check the mollification and tail errors
/// against eps, select a net greedily on ball averages within
/// eps / w(B(0,A))^{1/p} in the sup metric on |x| < A, then measure every
/// member's L^p(w) distance to its nearest net member against 5 eps.
///
/// For 0 < p < 1 the net is built for F^a (a = p/p0) in L^{p0}(w) and the
/// distances are measured in the p-power metric against
///   a^{-p0} eps^{(a-1)p0} (5 eps)^{p0} + 2 eps^p K^p,   K^p = sup_f int f^p w,
/// the bound obtained by splitting along E_eps.
inline NetCertificate build_net(const FamilyOfFunctions& F, double p, const WeightSpec& w, double eps, double t,
                                double A, double p0 = 2.0) {
    if (F.empty()) throw Error(ErrorKind::InvalidArgument, "family must be nonempty");
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    if (p >= 1.0) return detail::build_net_normed(F, p, w, eps, t, A);
    if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "exponent p must be positive");

    const FamilyOfFunctions Fa = exponent_trick(F, p, p0);
    NetCertificate c = detail::build_net_normed(Fa, p0, w, eps, t, A);
    const double a = p / p0;
    double Kp = 0.0;
    for (const auto& f : F.members()) Kp = std::max(Kp, weighted_lp_pow(f, p, w));
    c.p = p;
    c.metric_exponent = p;
    for (std::size_t i = 0; i < F.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (auto j : c.selected) {
            const double d = family_distance(F[i], F[j], p, w);
            if (d < best) {
                best = d;
                c.nearest[i] = j;
            }
        }
        c.nearest_distance[i] = best;
    }
    c.max_distance = *std::max_element(c.nearest_distance.begin(), c.nearest_distance.end());
    c.certified_radius = std::pow(a, -p0) * std::pow(eps, (a - 1.0) * p0) * std::pow(5.0 * eps, p0) + 2.0 * std::pow(eps, p) * Kp;
    c.pass = c.max_distance <= c.certified_radius;
    return c;
}

/// Re-measures the certificate's recorded distances; returns the largest
/// absolute discrepancy.
inline double recheck_net(const NetCertificate& c, const FamilyOfFunctions& F, const WeightSpec& w) {
    double worst = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
        worst = std::max(worst, std::abs(family_distance(F[i], F[c.nearest[i]], c.p, w) - c.nearest_distance[i]));
    return worst;
}

/// eps for a net: twice the larger of the modulus at the mollification
/// shift and the tail at A, both in norm units.
inline double epsilon_from_report(const FKReport& r, std::size_t shift_index, std::size_t tail_index) {
    const double mod = std::pow(r.modulus_curve.at(shift_index), 1.0 / std::max(r.p, 1.0));
    const double tail = std::pow(r.tail_curve.at(tail_index), 1.0 / std::max(r.p, 1.0));
    return 2.0 * std::max(mod, tail);
}

}  // namespace czlab
