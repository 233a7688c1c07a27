#include <cmath>

#include "catch_amalgamated.hpp"
#include "czlab/operators.hpp"

using namespace czlab;
using Catch::Approx;

namespace {
ScalarField bump(double c, double R) {
    return [c, R](std::span<const double> x) {
        const double r = std::abs(x[0] - c) / R;
        return r < 1.0 ? std::exp(1.0 / (r * r - 1.0)) : 0.0;
    };
}
}  // namespace

TEST_CASE("smooth cutoff", "[operators]") {
    CHECK(smooth_cutoff(0.4) == 0.0);
    CHECK(smooth_cutoff(0.5) == 0.0);
    CHECK(smooth_cutoff(1.0) == 1.0);
    CHECK(smooth_cutoff(0.75) == Approx(0.5));
    const Grid g(1, 1.0, 16);
    CHECK_THROWS_AS((TruncationPolicy{g.spacing(), Cutoff::Smooth}.check(g)), Error);
}

TEST_CASE("T vanishes on a zero input and is multilinear", "[operators]") {
    const Grid g(1, 2.0, 32);
    const auto k = kernels::k1(2, 1);
    const TruncationPolicy tr{4 * g.spacing(), Cutoff::Smooth};
    const auto pts = decimated_points(g);
    const auto f1 = sample(bump(0.1, 1.0), g), f2 = sample(bump(-0.2, 0.8), g);
    for (double v : apply_T(k, {f1, SampledFunction::zero(g)}, tr, pts).values) CHECK(v == 0.0);
    const auto a = apply_T(k, {f1, f2}, tr, pts).values;
    const auto b = apply_T(k, {f1.scaled(-2.5), f2}, tr, pts).values;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == Approx(-2.5 * a[i]).epsilon(1e-12));
}

TEST_CASE("T against a closed-form integral", "[operators]") {
    // int_0^1 dy / (2 - y) = ln 2
    auto value = [](std::size_t N) {
        const Grid g(1, 2.5, N);
        const auto f = sample([](std::span<const double> x) { return x[0] > 0.0 && x[0] < 1.0 ? 1.0 : 0.0; }, g);
        const TruncationPolicy tr{2 * g.spacing(), Cutoff::Sharp};
        return apply_T(kernels::k1(1, 1), {f}, tr, {Point{2.0}}).values[0];
    };
    const double e1 = std::abs(value(40) - std::log(2.0)), e2 = std::abs(value(160) - std::log(2.0));
    CHECK(e2 < e1);
    CHECK(e2 < 1e-4);
}

TEST_CASE("square function G", "[operators]") {
    const Grid g(1, 2.0, 64);
    const ScaleFamily fam(kernels::k2(2, 1), g.spacing(), std::pow(2.0, 0.25), 40);
    const auto f1 = sample(bump(0.0, 1.0), g), f2 = sample(bump(0.2, 0.7), g);
    const std::vector<Point> pts{{0.0625}, {0.3125}};
    for (double v : apply_G(fam, {f1, SampledFunction::zero(g)}, pts).values) CHECK(v == 0.0);
    const auto a = apply_G(fam, {f1, f2}, pts).values;
    const auto b = apply_G(fam, {f1, f2.scaled(-3.0)}, pts).values;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == Approx(3.0 * a[i]).epsilon(1e-12));
    const auto c = apply_G(fam.refined(), {f1, f2}, pts).values;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(c[i] == Approx(a[i]).epsilon(0.05));

    const Grid z(1, 2.0, 16);
    const auto s = apply_G_star(fam, 3.0, {f1, f2}, pts, z).values;
    const auto s2 = apply_G_star(fam, 3.0, {f1.scaled(2.0), f2}, pts, z).values;
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i] > 0.0);
        CHECK(s2[i] == Approx(2.0 * s[i]).epsilon(1e-12));
    }
}

TEST_CASE("maximal function", "[operators]") {
    const Grid g(1, 2.0, 32);
    const auto c1 = sample([](std::span<const double>) { return 2.0; }, g);
    const auto c2 = sample([](std::span<const double>) { return -0.5; }, g);
    const auto pts = decimated_points(g);
    const auto scales = dyadic_scales(g, 3);
    for (double v : maximal_MA({c1, c2}, {}, pts, scales).values) CHECK(v == 1.0);
    // constants, cubes inside the box
    const std::vector<Point> inner{{0.0625}, {-0.3125}};
    for (double v : maximal_MA({c1, c2}, {1, 2}, inner, scales).values) CHECK(v == Approx(1.0).epsilon(1e-14));
    for (double v : maximal_MA({c1, c2}, {1}, inner, scales).values) CHECK(v == Approx(2.0).epsilon(1e-14));

    // decay away from the support: slope close to -n|A|
    const Grid big(1, 64.0, 1024);
    const auto b = sample(bump(0.0, 1.0), big);
    std::vector<double> rs{8.0, 16.0, 32.0}, vs;
    for (double r : rs) vs.push_back(maximal_MA({b}, {1}, {Point{r}}, dyadic_scales(big, 12)).values[0]);
    CHECK(loglog_slope(rs, vs) == Approx(-1.0).margin(0.15));
}

TEST_CASE("empirical ratios", "[operators]") {
    const Grid g(1, 2.0, 32);
    const WeightVector wv = WeightVector::unweighted({2.0, 2.0});
    std::vector<std::vector<SampledFunction>> ts{{sample(bump(0.0, 1.0), g), sample(bump(0.3, 0.5), g)},
                                                 {sample(bump(-0.5, 0.6), g), sample(bump(0.1, 1.2), g)}};
    FieldOperator product = [](const std::vector<SampledFunction>& fs) {
        std::vector<double> v(fs[0].size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = fs[0][k] * fs[1][k];
        return SampledFunction(fs[0].grid(), std::move(v));
    };
    const auto rep = empirical_ratio(product, wv, ts);
    CHECK(rep.max <= 1.0 + 1e-12);

    // M_empty = 1 on unit-norm inputs gives ||1||_{L^p}
    std::vector<std::vector<SampledFunction>> unit;
    for (auto fs : ts) {
        for (auto& f : fs) f = f.scaled(1.0 / weighted_lp(f, 2.0, WeightSpec::unit()));
        unit.push_back(fs);
    }
    FieldOperator one = [](const std::vector<SampledFunction>& fs) {
        return maximal_MA(fs, {}, all_points(fs[0].grid()), {1.0}).to_sampled(fs[0].grid());
    };
    for (double r : empirical_ratio(one, wv, unit).ratios) CHECK(r == Approx(4.0).epsilon(1e-12));

    std::vector<std::vector<SampledFunction>> zero{{SampledFunction::zero(g), ts[0][1]}};
    CHECK_THROWS_AS(empirical_ratio(product, wv, zero), Error);
}
