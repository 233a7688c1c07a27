#pragma once

// The acceptance suite: thirteen pass/fail checks at desk scale. Tolerances
// and configurations are fixed here. Each check also returns a payload (its
// numeric outputs as text) so determinism across thread counts can be
// compared byte for byte.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "czlab/commutators.hpp"
#include "czlab/compactness.hpp"
#include "czlab/core.hpp"
#include "czlab/funcspace.hpp"
#include "czlab/kernels.hpp"
#include "czlab/operators.hpp"
#include "czlab/weights.hpp"

namespace czlab::acceptance {

struct CriterionResult {
    CriterionResult() = default;
    explicit CriterionResult(std::string n) : name(std::move(n)) {}

    std::string name;
    bool pass = false;
    std::string detail;
    std::string payload;
    double seconds = 0.0;
};

namespace tol {
inline constexpr double inequality_slack = 1e-12;
inline constexpr double expansion = 1e-10;
inline constexpr double constant_symbols = 1e-12;
inline constexpr double symbol_shift = 1e-10;
inline constexpr double slope_lo = 0.8, slope_hi = 1.2;
inline constexpr double spread = 2.0;
inline constexpr double decay_slope = 0.15;
inline constexpr double ap_oracle = 0.02;
inline constexpr double maximal_stability = 0.20;
inline constexpr double k1_size = 1e-12;
inline constexpr double square_refinement = 0.05;
inline constexpr double net_recheck = 1e-12;
}  // namespace tol

namespace detail {

inline ScalarField bump(Point c, double R, double amp = 1.0) {
    return [c = std::move(c), R, amp](std::span<const double> x) {
        const double r = distance(x, c) / R;
        return r < 1.0 ? amp * std::exp(1.0 / (r * r - 1.0)) : 0.0;
    };
}

inline std::string fmt(double v) { return format_double(v); }

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + fmt(v[i]);
    return s;
}

// Shared configuration of the commutator studies: n = 1, m = 2, L = 2, 32
// points, two offset unit bumps as inputs, one bump symbol on slot 1.
struct CommutatorSetup {
    Grid grid{1, 2.0, 32};
    std::vector<SampledFunction> fs;
    SymbolSet symbols;
    IndexSet S{{1, 1}};
    KernelSpec kernel = kernels::k1(2, 1);
    std::vector<Point> probes;

    CommutatorSetup() {
        fs = {sample(bump({0.1}, 1.0), grid), sample(bump({-0.1}, 1.0), grid)};
        symbols.set(1, bump_symbol(grid, {0.0}, 1.0));
        for (std::size_t k = 8; k < 24; ++k) probes.push_back(grid.center(k));
    }
    double h() const { return grid.spacing(); }
};

}  // namespace detail

inline CriterionResult elementary_inequalities(std::uint64_t seed) {
    const auto r = inequality_selftest(1000000, seed);
    CriterionResult c("elementary-inequalities");
    c.pass = r.violations_41 == 0 && r.violations_42 == 0 && r.max_slack_41 <= tol::inequality_slack &&
             r.max_slack_42 <= tol::inequality_slack;
    c.detail = "trials=" + std::to_string(r.trials) + " violations=" + std::to_string(r.violations_41) + "/" +
               std::to_string(r.violations_42) + " max_slack=" + detail::fmt(r.max_slack_41) + "/" +
               detail::fmt(r.max_slack_42);
    c.payload = c.detail;
    return c;
}

inline CriterionResult expansion_identities(std::uint64_t seed) {
    CriterionResult c("product-expansion-identities");
    c.pass = true;
    double worst = 0.0;
    for (std::size_t k = 1; k <= 6; ++k) {
        const auto r = expansion_identity_check(k, 1000, seed + k);
        worst = std::max({worst, r.max_error_difference, r.max_error_signed});
        c.payload += detail::fmt(r.max_error_difference) + "," + detail::fmt(r.max_error_signed) + "\n";
    }
    c.pass = worst <= tol::expansion;
    c.detail = "|S|=1..6 x 1000 trials, max relative error=" + detail::fmt(worst);
    return c;
}

inline CriterionResult commutator_degeneracies(std::uint64_t) {
    detail::CommutatorSetup s;
    const TruncationPolicy trunc{2.0 * s.h(), Cutoff::Smooth};
    const auto pts = all_points(s.grid);
    CriterionResult c("commutator-degeneracies");

    const auto plain = apply_T(s.kernel, s.fs, trunc, pts).values;
    const auto empty = apply_T_bS(s.kernel, s.symbols, IndexSet{}, s.fs, trunc, pts).values;
    const bool bitwise = std::memcmp(plain.data(), empty.data(), plain.size() * sizeof(double)) == 0;

    double scale = 0.0;
    for (double v : plain) scale = std::max(scale, std::abs(v));
    SymbolSet constants;
    constants.set(1, constant_symbol(s.grid, 0.7));
    constants.set(2, constant_symbol(s.grid, -1.3));
    const IndexSet full{{1, 1}, {2, 2}, {1, 2}};
    double const_max = 0.0;
    for (double v : apply_T_bS(s.kernel, constants, full, s.fs, trunc, pts).values) const_max = std::max(const_max, std::abs(v));

    SymbolSet syms;
    syms.set(1, bump_symbol(s.grid, {0.0}, 1.0));
    syms.set(2, bump_symbol(s.grid, {0.3}, 0.8, 2.0));
    const auto base = apply_T_bS(s.kernel, syms, full, s.fs, trunc, pts).values;
    const auto moved = apply_T_bS(s.kernel, syms.shifted(0.75), full, s.fs, trunc, pts).values;
    double diff = 0.0, bscale = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        diff = std::max(diff, std::abs(base[i] - moved[i]));
        bscale = std::max(bscale, std::abs(base[i]));
    }
    const double shift_rel = diff / bscale;

    c.pass = bitwise && const_max <= tol::constant_symbols * scale && shift_rel <= tol::symbol_shift;
    c.detail = std::string("empty_S_bitwise=") + (bitwise ? "yes" : "no") + " constant_max/scale=" +
               detail::fmt(const_max / scale) + " shift_rel=" + detail::fmt(shift_rel);
    c.payload = detail::join(plain) + "\n" + detail::join(base) + "\n" + detail::join(moved);
    return c;
}

inline CriterionResult truncation_convergence(std::uint64_t) {
    detail::CommutatorSetup s;
    const double h = s.h();
    ConvergenceOptions opt;
    opt.deltas = {4 * h, 8 * h, 16 * h, 32 * h};
    opt.reference_delta = 2 * h;
    opt.cutoff = Cutoff::Smooth;
    opt.p = 1.0;  // p1 = p2 = 2
    opt.probes = s.probes;
    const auto st = truncation_convergence_study(s.kernel, s.symbols, s.S, s.fs, opt);
    CriterionResult c("truncation-convergence");
    const bool slope_ok = st.slope >= tol::slope_lo && st.slope <= tol::slope_hi;
    const bool spread_ok = st.max_pointwise_spread <= tol::spread;
    c.pass = slope_ok && spread_ok;
    c.detail = "slope=" + detail::fmt(st.slope) + " (target [0.8,1.2]) pointwise_spread=" +
               detail::fmt(st.max_pointwise_spread) + " (limit 2)";
    c.payload = st.table.to_csv();
    for (const auto& row : st.pointwise_ratio) c.payload += detail::join(row) + "\n";
    return c;
}

inline CriterionResult near_far_bounds(std::uint64_t) {
    detail::CommutatorSetup s;
    std::vector<double> deltas;
    for (int k = -4; k <= 1; ++k) deltas.push_back(std::ldexp(s.h(), k));
    // 128 subcells per cell: the smallest delta spans 8 subcells
    const auto st = near_far_bounds_study(s.fs, deltas, s.probes, 128);
    CriterionResult c("near-far-diagonal-bounds");
    bool finite = true;
    for (double v : st.near_sup) finite = finite && std::isfinite(v) && v > 0.0;
    for (double v : st.far_sup) finite = finite && std::isfinite(v) && v > 0.0;
    c.pass = finite && st.near_spread <= tol::spread && st.far_spread <= tol::spread;
    c.detail = "near_sup=[" + detail::join(st.near_sup) + "] far_sup=[" + detail::join(st.far_sup) +
               "] spreads=" + detail::fmt(st.near_spread) + "/" + detail::fmt(st.far_spread) + " (limit 2)";
    c.payload = st.table.to_csv();
    return c;
}

inline CriterionResult spatial_decay(std::uint64_t) {
    const Grid g(1, 2.0, 32);
    const std::vector<SampledFunction> fs{sample(detail::bump({0.1}, 0.8), g), sample(detail::bump({-0.1}, 0.8), g)};
    SymbolSet b;
    b.set(1, bump_symbol(g, {0.0}, 1.0));
    const auto st = decay_study(kernels::k1(2, 1), b, IndexSet{{1, 1}}, fs, {2 * g.spacing(), Cutoff::Smooth},
                                {4.0, 8.0, 16.0, 32.0});
    CriterionResult c("spatial-decay");
    c.pass = std::abs(st.slope + 2.0) <= tol::decay_slope;
    c.detail = "slope=" + detail::fmt(st.slope) + " (target -2 +- 0.15)";
    c.payload = st.table.to_csv();
    return c;
}

inline CriterionResult translation_modulus(std::uint64_t) {
    detail::CommutatorSetup s;
    const double h = s.h();
    std::vector<Point> shifts;
    for (double q : {1.0, 2.0, 4.0, 8.0}) shifts.push_back({q * h});
    const auto st = translation_modulus_study(s.kernel, s.symbols, s.S, s.fs, {32 * h, Cutoff::Smooth}, shifts, 1.0);
    CriterionResult c("translation-modulus");
    c.pass = st.slope >= tol::slope_lo && st.slope <= tol::slope_hi;
    c.detail = "slope=" + detail::fmt(st.slope) + " (target [0.8,1.2])";
    c.payload = st.table.to_csv();
    return c;
}

inline CriterionResult ap_oracle(std::uint64_t) {
    CriterionResult c("ap-constant-oracle");
    CubeFamily unit;
    unit.add(Cube{{0.0}, 1.0});
    // alpha = 1/2: closed form (avg w)(avg w^{-1}) = (2/3)(2) = 4/3 on [0,1]
    std::vector<double> errs;
    double finest = 0.0;
    for (int e = 7; e <= 11; ++e) {
        const Grid g(1, 1.0, std::size_t{1} << e);
        finest = ap_constant(WeightSpec::power(0.5), 2.0, unit, g).value;
        errs.push_back(std::abs(finest - 4.0 / 3.0));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < errs.size(); ++i) decreasing = decreasing && errs[i] < errs[i - 1];
    const bool close = std::abs(finest - 4.0 / 3.0) <= tol::ap_oracle * 4.0 / 3.0;
    // alpha = 1.5 lies outside A_2: the constant grows as cells approach the origin
    std::vector<double> growth;
    for (int e = 3; e <= 11; ++e) {
        const Grid g(1, 1.0, std::size_t{1} << e);
        growth.push_back(ap_constant(WeightSpec::power(1.5), 2.0, unit, g).value);
    }
    bool increasing = true;
    for (std::size_t i = 1; i < growth.size(); ++i) increasing = increasing && growth[i] > growth[i - 1];
    c.pass = decreasing && close && increasing;
    c.detail = "alpha=0.5 finest=" + detail::fmt(finest) + " errors_decreasing=" + (decreasing ? "yes" : "no") +
               " alpha=1.5 values=[" + detail::join(growth) + "] increasing=" + (increasing ? "yes" : "no");
    c.payload = detail::join(errs) + "\n" + detail::join(growth);
    return c;
}

inline CriterionResult maximal_stability(std::uint64_t seed) {
    CriterionResult c("maximal-ratio-stability");
    const WeightVector wv({WeightSpec::power(0.3), WeightSpec::power(-0.2)}, {2.0, 2.0});
    struct Tuple {
        double c1, r1, c2, r2;
    };
    Rng rng(seed);
    std::vector<Tuple> tuples(20);
    for (auto& t : tuples) t = {rng.uniform(-1.0, 1.0), rng.uniform(0.3, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.3, 1.0)};
    auto testset = [&](const Grid& g) {
        std::vector<std::vector<SampledFunction>> out;
        for (const auto& t : tuples)
            out.push_back({sample(detail::bump({t.c1}, t.r1), g), sample(detail::bump({t.c2}, t.r2), g)});
        return out;
    };
    FieldOperator op = [](const std::vector<SampledFunction>& fs) {
        const Grid& g = fs.front().grid();
        std::size_t count = 1;
        while (std::ldexp(g.spacing(), static_cast<int>(count)) <= 4.0 * g.half_width()) ++count;
        return maximal_MA(fs, {1, 2}, all_points(g), dyadic_scales(g, count + 1)).to_sampled(g);
    };
    const auto rep = empirical_ratio_refinement(op, wv, testset, {Grid(1, 2.0, 32), Grid(1, 2.0, 64)});
    c.pass = rep.max_relative_change <= tol::maximal_stability;
    c.detail = "max_ratio=" + detail::fmt(rep.per_grid[0].max) + "->" + detail::fmt(rep.per_grid[1].max) +
               " relative_change=" + detail::fmt(rep.max_relative_change) + " (limit 0.2)";
    c.payload = detail::join(rep.per_grid[0].ratios) + "\n" + detail::join(rep.per_grid[1].ratios);
    return c;
}

inline CriterionResult kernel_certificates(std::uint64_t seed) {
    CriterionResult c("kernel-certificates");
    // K1 saturates its size bound
    const auto k1 = kernels::k1(2, 2);
    const auto samples = sample_configurations(2, 2, 10000, seed, 2.0);
    const auto cert1 = certify_size(k1, samples, 1.0);
    double dev = 0.0;
    for (double r : cert1.ratios) dev = std::max(dev, std::abs(r - 1.0));
    // K2 support
    const auto k2 = kernels::k2(2, 1);
    const auto s2 = sample_configurations(2, 1, 10000, seed + 1, 1.0);
    const auto cert2 = certify_size(k2, s2, std::numeric_limits<double>::infinity());
    std::size_t outside = 0;
    for (const auto& cf : s2) {
        double q = 0.0;
        for (std::size_t j = 0; j < 2; ++j) q += std::pow(cf.x[0] - cf.y[j], 2);
        if (q > 1.0) ++outside;
    }
    // square bounds for K2 at m = 1 under t-grid refinement
    const auto base = ScaleFamily::with_default_grid(kernels::k2(1, 1));
    const auto xs = sample_x_perturbations(1, 1, 200, seed + 2, 0.5);
    const auto ys = sample_y_perturbations(1, 1, 1, 200, seed + 3, 0.5);
    const auto sq = certify_square_bounds(base, xs, ys);
    const auto sq2 = certify_square_bounds(base.refined(), xs, ys);
    double change = 0.0;
    bool finite = true;
    const std::vector<std::pair<double, double>> pairs{{sq.size.worst_ratio, sq2.size.worst_ratio},
                                                       {sq.smooth_x.worst_ratio, sq2.smooth_x.worst_ratio},
                                                       {sq.smooth_y.worst_ratio, sq2.smooth_y.worst_ratio}};
    for (const auto& [a, b] : pairs) {
        finite = finite && std::isfinite(a) && std::isfinite(b) && a > 0.0;
        change = std::max(change, std::abs(b - a) / a);
    }
    c.pass = dev <= tol::k1_size && cert2.support_violations == 0 && outside > 0 && finite &&
             change <= tol::square_refinement;
    c.detail = "K1_size_dev=" + detail::fmt(dev) + " K2_outside_samples=" + std::to_string(outside) +
               " K2_support_violations=" + std::to_string(cert2.support_violations) + " square_ratios=[" +
               detail::fmt(sq.size.worst_ratio) + "," + detail::fmt(sq.smooth_x.worst_ratio) + "," +
               detail::fmt(sq.smooth_y.worst_ratio) + "] refinement_change=" + detail::fmt(change) + " (limit 0.05)";
    c.payload = detail::join(cert1.ratios) + "\n" + detail::join(cert2.ratios) + "\n" + detail::join(sq.size.ratios) +
                "\n" + detail::join(sq2.smooth_y.ratios);
    return c;
}

inline CriterionResult fk_diagnostics(std::uint64_t) {
    CriterionResult c("fk-diagnostics");
    const Grid g(1, 1.0, 64);
    const double h = g.spacing();
    std::vector<Point> shifts;
    for (double q : {0.0, 1.0, 2.0, 4.0, 8.0}) shifts.push_back({q * h});
    const std::vector<double> radii{0.25, 0.5, 0.75};
    auto phi = detail::bump({0.0}, 1.0);

    FamilyOfFunctions zero, single, osc;
    zero.push_back(SampledFunction::zero(g));
    single.push_back(sample(phi, g));
    for (int k = 1; k <= 5; ++k)
        osc.push_back(sample([k, phi](std::span<const double> x) { return std::sin(std::ldexp(std::numbers::pi, k) * x[0]) * phi(x); }, g));
    const auto rz = fk_report(zero, 2.0, WeightSpec::unit(), radii, shifts);
    const auto rs = fk_report(single, 2.0, WeightSpec::unit(), radii, shifts);
    const auto ro = fk_report(osc, 2.0, WeightSpec::unit(), radii, shifts);

    // translates f(. - 4kh) under (1 + |x|)^2 on a wider box
    const Grid gt(1, 4.0, 64);
    const double ht = gt.spacing();
    FamilyOfFunctions tr;
    for (int k = 0; k < 8; ++k) tr.push_back(sample(detail::bump({4.0 * k * ht}, 0.5), gt));
    std::vector<Point> tshifts;
    for (double q : {0.0, 1.0, 2.0, 4.0}) tshifts.push_back({q * ht});
    const auto rt = fk_report(tr, 2.0, WeightSpec::power(2.0, 1.0), {1.0, 2.0, 3.0}, tshifts);

    const auto vz = fk_verdict(rz), vs = fk_verdict(rs), vo = fk_verdict(ro), vt = fk_verdict(rt);
    const auto d1 = exponent_trick_domination(single, 0.5, 2.0, shifts);
    const auto d2 = exponent_trick_domination(tr, 0.5, 2.0, tshifts);
    const std::size_t violations = d1.violations + d2.violations;
    c.pass = vz.verdict == FKVerdict::Pass && vs.verdict == FKVerdict::Pass && vt.verdict == FKVerdict::FailTail &&
             vo.verdict == FKVerdict::FailModulus && violations == 0;
    c.detail = std::string("zero=") + to_string(vz.verdict) + " single=" + to_string(vs.verdict) +
               " translates=" + to_string(vt.verdict) + " oscillation=" + to_string(vo.verdict) +
               " exponent_trick_violations=" + std::to_string(violations) + "/" + std::to_string(d1.checks + d2.checks);
    for (const auto* r : {&rz, &rs, &ro, &rt}) c.payload += r->curves_table().to_csv();
    return c;
}

inline CriterionResult net_certificate(std::uint64_t seed) {
    CriterionResult c("net-certificate");
    const Grid g(1, 2.0, 64);
    const double h = g.spacing();
    auto phi = detail::bump({0.0}, 1.0);
    Rng rng(seed);
    double freq[3], phase[3], amp[3];
    for (int q = 0; q < 3; ++q) {
        freq[q] = rng.uniform(1.0, 4.0);
        phase[q] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        amp[q] = rng.uniform(-1.0, 1.0);
    }
    auto noise = [=](std::span<const double> x) {
        double s = 0.0;
        for (int q = 0; q < 3; ++q) s += amp[q] * std::sin(freq[q] * x[0] + phase[q]);
        return s * phi(x);
    };
    FamilyOfFunctions F;
    for (int k = 0; k < 8; ++k) F.push_back(sample([&, k](std::span<const double> x) { return phi(x) + k * 0.01 * noise(x); }, g));
    std::vector<Point> shifts;
    for (double q : {0.0, 1.0, 2.0, 4.0}) shifts.push_back({q * h});
    bool ok = true;
    std::string det;
    for (const auto& w : {WeightSpec::unit(), WeightSpec::power(0.5, 1.0)}) {
        const auto rep = fk_report(F, 2.0, w, {1.0, 1.5}, shifts);
        const double eps = epsilon_from_report(rep, 2, 1);
        const auto cert = build_net(F, 2.0, w, eps, 2.0 * h, 1.5);
        const double re = recheck_net(cert, F, w);
        ok = ok && cert.pass && cert.selected.size() <= 8 && re <= tol::net_recheck;
        det += "[" + w.label() + ": eps=" + detail::fmt(eps) + " net=" + std::to_string(cert.selected.size()) +
               " max_min=" + detail::fmt(cert.max_distance) + " target=" + detail::fmt(cert.certified_radius) + "] ";
        c.payload += detail::join(cert.nearest_distance) + "\n";
    }
    c.pass = ok;
    c.detail = det;
    return c;
}

using CriterionFn = std::function<CriterionResult(std::uint64_t)>;

inline std::vector<CriterionFn> criteria() {
    return {elementary_inequalities, expansion_identities, commutator_degeneracies, truncation_convergence,
            near_far_bounds,         spatial_decay,        translation_modulus,     ap_oracle,
            maximal_stability,       kernel_certificates,  fk_diagnostics,          net_certificate};
}

inline std::vector<CriterionResult> run_criteria(std::uint64_t seed) {
    std::vector<CriterionResult> out;
    for (const auto& fn : criteria()) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            out.push_back(fn(seed));
        } catch (const std::exception& e) {
            CriterionResult r;
            r.name = "criterion-" + std::to_string(out.size() + 1);
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
            out.push_back(r);
        }
        out.back().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return out;
}

/// Runs every check at 1 and at 4 threads and appends the determinism check
/// comparing the payloads of the two runs.
inline std::vector<CriterionResult> run_suite(std::uint64_t seed) {
    const int saved = thread_count();
    set_thread_count(1);
    auto first = run_criteria(seed);
    set_thread_count(4);
    const auto second = run_criteria(seed);
    set_thread_count(saved);
    CriterionResult det("determinism");
    std::size_t same = 0;
    for (std::size_t i = 0; i < first.size(); ++i)
        if (first[i].payload == second[i].payload && first[i].detail == second[i].detail) ++same;
    det.pass = same == first.size();
    det.detail = std::to_string(same) + "/" + std::to_string(first.size()) + " outputs byte-identical at 1 vs 4 threads";
    first.push_back(det);
    return first;
}

}  // namespace czlab::acceptance
