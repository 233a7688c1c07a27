#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "czlab/compactness.hpp"

using namespace czlab;
using Catch::Approx;

namespace {
ScalarField bump(double c, double R) {
    return [c, R](std::span<const double> x) {
        const double r = std::abs(x[0] - c) / R;
        return r < 1.0 ? std::exp(1.0 / (r * r - 1.0)) : 0.0;
    };
}

std::vector<Point> cell_shifts(const Grid& g, std::initializer_list<double> q) {
    std::vector<Point> out;
    for (double v : q) out.push_back({v * g.spacing()});
    return out;
}
}  // namespace

TEST_CASE("report on the zero family", "[compactness]") {
    const Grid g(1, 1.0, 64);
    FamilyOfFunctions F;
    F.push_back(SampledFunction::zero(g));
    const auto r = fk_report(F, 2.0, WeightSpec::unit(), {0.25, 0.5}, cell_shifts(g, {0, 1, 2}));
    CHECK(r.uniform_bound == 0.0);
    for (double v : r.tail_curve) CHECK(v == 0.0);
    for (double v : r.modulus_curve) CHECK(v == 0.0);
    CHECK(fk_verdict(r).verdict == FKVerdict::Pass);
}

TEST_CASE("single bump modulus obeys the gradient bound", "[compactness]") {
    const Grid g(1, 1.0, 128);
    FamilyOfFunctions F;
    F.push_back(sample(bump(0.0, 1.0), g));
    const auto shifts = cell_shifts(g, {1, 2, 4, 8});
    const auto r = fk_report(F, 2.0, WeightSpec::unit(), {1.0}, shifts);
    // sup |phi'| for the unit bump is below 0.8; support mass 2 plus the shift
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        const double u = shifts[i][0];
        CHECK(r.modulus_curve[i] <= std::pow(0.8 * u, 2.0) * (2.0 + u));
        if (i) CHECK(r.modulus_curve[i] > r.modulus_curve[i - 1]);
    }
    CHECK(fk_verdict(r).verdict == FKVerdict::Pass);
}

TEST_CASE("translates: identical moduli, escaping tails", "[compactness]") {
    const Grid g(1, 4.0, 64);
    FamilyOfFunctions F;
    for (int k = 0; k < 8; ++k) F.push_back(sample(bump(4.0 * k * g.spacing(), 0.5), g));
    const auto r = fk_report(F, 2.0, WeightSpec::unit(), {1.0, 2.0, 3.0}, cell_shifts(g, {1, 2}));
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t i = 1; i < F.size(); ++i)
            CHECK(r.member_modulus[i][s] == Approx(r.member_modulus[0][s]).epsilon(1e-12));
    CHECK(r.tail_curve.back() == Approx(weighted_lp_pow(F[7], 2.0, WeightSpec::unit())).epsilon(1e-12));

    const auto rw = fk_report(F, 2.0, WeightSpec::power(2.0, 1.0), {1.0, 2.0, 3.0}, cell_shifts(g, {0, 1, 2, 4}));
    CHECK(fk_verdict(rw).verdict == FKVerdict::FailTail);
}

TEST_CASE("oscillating family fails the modulus condition", "[compactness]") {
    const Grid g(1, 1.0, 64);
    FamilyOfFunctions F;
    const auto phi = bump(0.0, 1.0);
    for (int k = 1; k <= 5; ++k)
        F.push_back(sample([k, phi](std::span<const double> x) { return std::sin(std::ldexp(std::numbers::pi, k) * x[0]) * phi(x); }, g));
    const auto r = fk_report(F, 2.0, WeightSpec::unit(), {0.25, 0.5, 0.75}, cell_shifts(g, {0, 1, 2, 4, 8}));
    CHECK(fk_verdict(r).verdict == FKVerdict::FailModulus);
}

TEST_CASE("elementary inequalities", "[compactness]") {
    // s = 4, t = 1, a = 1/2
    const double d = power_difference(4.0, 1.0, 0.5);
    CHECK(d == Approx(1.0).epsilon(1e-15));
    CHECK(d <= std::sqrt(3.0));
    CHECK(std::sqrt(3.0) <= 2.0 * std::sqrt(5.0 / 3.0) * d);
    CHECK(power_difference(2.0, 2.0, 0.3) == 0.0);
    CHECK(power_difference(1.0, 4.0, 0.5) == Approx(-1.0));
    const auto rep = inequality_selftest(20000, 3);
    CHECK(rep.violations_41 == 0);
    CHECK(rep.violations_42 == 0);
}

TEST_CASE("exponent trick", "[compactness]") {
    const Grid g(1, 1.0, 32);
    FamilyOfFunctions F;
    F.push_back(SampledFunction::zero(g));
    F.push_back(sample([](std::span<const double>) { return 1.0; }, g));
    const auto Fa = exponent_trick(F, 0.5, 2.0);
    CHECK(Fa[0].is_zero());
    for (double v : Fa[1].values()) CHECK(v == 1.0);

    FamilyOfFunctions R;
    Rng rng(12);
    std::vector<double> v(g.size());
    for (auto& x : v) x = rng.uniform();
    R.push_back(SampledFunction(g, v));
    const auto dom = exponent_trick_domination(R, 0.5, 2.0, cell_shifts(g, {1, 2, 4, -3}));
    CHECK(dom.violations == 0);
    CHECK(dom.checks > 0);

    FamilyOfFunctions neg;
    neg.push_back(sample([](std::span<const double>) { return -1.0; }, g));
    CHECK_THROWS_AS(exponent_trick(neg, 0.5, 2.0), Error);
}

TEST_CASE("splitting along E_eps", "[compactness]") {
    const Grid g(1, 1.0, 64);
    Rng rng(4);
    std::vector<double> a(g.size()), b(g.size());
    for (auto& x : a) x = rng.uniform();
    for (auto& x : b) x = rng.uniform();
    const SampledFunction f(g, a), h(g, b);
    const auto r = cauchy_split_check(f, h, 0.5, 2.0, WeightSpec::unit(), 0.1);
    CHECK(r.inside_ok);
    CHECK(r.outside_ok);
    const auto same = cauchy_split_check(f, f, 0.5, 2.0, WeightSpec::unit(), 0.1);
    CHECK(same.inside_lhs == 0.0);
    CHECK(same.outside_lhs == 0.0);
    const auto z = cauchy_split_check(f, SampledFunction::zero(g), 0.5, 2.0, WeightSpec::unit(), 0.5);
    CHECK(z.inside_ok);
    CHECK(z.outside_ok);
}

TEST_CASE("epsilon nets", "[compactness]") {
    const Grid g(1, 2.0, 64);
    const double h = g.spacing();
    const auto f = sample(bump(0.0, 1.0), g);
    FamilyOfFunctions one;
    one.push_back(f);
    const auto c1 = build_net(one, 2.0, WeightSpec::unit(), 0.5, 2 * h, 1.5);
    CHECK(c1.selected.size() == 1);
    CHECK(c1.max_distance == 0.0);

    FamilyOfFunctions dup;
    dup.push_back(f);
    dup.push_back(f);
    const auto c2 = build_net(dup, 2.0, WeightSpec::unit(), 0.5, 2 * h, 1.5);
    CHECK(c2.selected.size() == 1);
    CHECK(c2.max_distance == 0.0);
    CHECK(c2.pass);

    // perturbed bumps, eps from the report
    FamilyOfFunctions F;
    for (int k = 0; k < 8; ++k)
        F.push_back(sample([k](std::span<const double> x) {
            const double b = std::abs(x[0]) < 1.0 ? std::exp(1.0 / (x[0] * x[0] - 1.0)) : 0.0;
            return b * (1.0 + 0.01 * k * std::sin(3.0 * x[0] + 0.4));
        }, g));
    const auto rep = fk_report(F, 2.0, WeightSpec::unit(), {1.0, 1.5}, cell_shifts(g, {0, 1, 2, 4}));
    const double eps = epsilon_from_report(rep, 2, 1);
    const auto c3 = build_net(F, 2.0, WeightSpec::unit(), eps, 2 * h, 1.5);
    CHECK(c3.pass);
    CHECK(c3.selected.size() <= 8);
    CHECK(c3.max_distance <= 5.0 * eps);
    CHECK(recheck_net(c3, F, WeightSpec::unit()) <= 1e-12);

    // quasi-norm route
    const auto c4 = build_net(F, 0.5, WeightSpec::unit(), 0.2, 2 * h, 1.5);
    CHECK(c4.metric_exponent == 0.5);
    CHECK(c4.pass);

    CHECK_THROWS_AS(build_net(F, 2.0, WeightSpec::unit(), 1e-6, 2 * h, 1.5), Error);
}
