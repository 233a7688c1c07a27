#include <cmath>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "czlab/funcspace.hpp"

using namespace czlab;
using Catch::Approx;

TEST_CASE("sample at cell centers", "[funcspace]") {
    const Grid g(1, 1.0, 4);
    CHECK(sample([](std::span<const double>) { return 0.0; }, g).is_zero());
    const auto one = sample([](std::span<const double>) { return 1.0; }, g);
    for (std::size_t k = 0; k < 4; ++k) CHECK(one[k] == 1.0);
    const auto id = sample([](std::span<const double> x) { return x[0]; }, g);
    CHECK(id[0] == -0.75);
    CHECK(id[1] == -0.25);
    CHECK(id[2] == 0.25);
    CHECK(id[3] == 0.75);
}

TEST_CASE("grid indexing is axis-0 fastest", "[funcspace]") {
    const Grid g(2, 1.0, 4);
    CHECK(g.size() == 16);
    const auto x = g.center(1);
    CHECK(x[0] == -0.25);
    CHECK(x[1] == -0.75);
    const std::vector<std::size_t> idx{3, 2};
    CHECK(g.flat_index(idx) == 11);
    CHECK(g.multi_index(11) == idx);
    CHECK_THROWS_AS(Grid(1, 1.0, 5), Error);
    CHECK_THROWS_AS(Grid(0, 1.0, 4), Error);
}

TEST_CASE("non-finite samples are rejected", "[funcspace]") {
    const Grid g(1, 1.0, 4);
    CHECK_THROWS_AS(sample([](std::span<const double>) { return std::nan(""); }, g), Error);
}

TEST_CASE("weighted norms", "[funcspace]") {
    const Grid g(1, 1.0, 64);
    const auto w = WeightSpec::unit();
    CHECK(weighted_lp(SampledFunction::zero(g), 2.0, w) == 0.0);
    const auto one = sample([](std::span<const double>) { return 1.0; }, g);
    CHECK(weighted_lp(one, 2.0, w) == Approx(std::sqrt(2.0)).epsilon(1e-14));

    // x on [0, 1]: ||x||_2 -> (1/3)^{1/2}
    auto err = [](std::size_t N) {
        const Grid gg(1, 1.0, N);
        const auto f = sample([](std::span<const double> x) { return x[0] >= 0.0 ? x[0] : 0.0; }, gg);
        return std::abs(weighted_lp(f, 2.0, WeightSpec::unit()) - std::sqrt(1.0 / 3.0));
    };
    CHECK(err(256) < err(64));
    CHECK(err(256) < 1e-4);

    // p < 1: the p-th power is the metric
    const double q = weighted_lp_pow(one, 0.5, w);
    CHECK(q == Approx(2.0));
    CHECK(weighted_lp(one, 0.5, w) == Approx(4.0));
}

TEST_CASE("weighted norm uses the weight", "[funcspace]") {
    const Grid g(1, 1.0, 200);
    const auto one = sample([](std::span<const double>) { return 1.0; }, g);
    // int_{-1}^{1} |x| dx = 1
    CHECK(weighted_lp_pow(one, 1.0, WeightSpec::power(1.0)) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid-aligned translation", "[funcspace]") {
    const Grid g(1, 1.0, 8);
    std::vector<double> v(8, 0.0);
    v[4] = 1.0;
    const SampledFunction f(g, v);
    const Point zero{0.0};
    const auto same = translate(f, zero);
    for (std::size_t k = 0; k < 8; ++k) CHECK(same[k] == f[k]);
    // f(. + h): the bump moves one cell toward -e1
    const Point u{g.spacing()};
    const auto moved = translate(f, u);
    CHECK(moved[3] == 1.0);
    CHECK(moved[4] == 0.0);
    const Point bad{0.3 * g.spacing()};
    CHECK_THROWS_AS(translate(f, bad), Error);

    const Grid g2(1, 2.0, 32);
    const auto b = sample([](std::span<const double> x) { return std::exp(-4.0 * x[0] * x[0]) * (std::abs(x[0]) < 1.5); }, g2);
    const Point s{2 * g2.spacing()}, ms{-2 * g2.spacing()};
    const auto back = translate(translate(b, s), ms);
    for (std::size_t k = 2; k < 30; ++k) CHECK(back[k] == b[k]);
}

TEST_CASE("tail mass", "[funcspace]") {
    const Grid g(1, 2.0, 64);
    const auto w = WeightSpec::unit();
    const auto f = sample([](std::span<const double> x) { return std::exp(-x[0] * x[0]); }, g);
    CHECK(tail_mass(f, 2.0, w, 0.0) == Approx(weighted_lp_pow(f, 2.0, w)).epsilon(1e-14));
    CHECK(tail_mass(f, 2.0, w, 3.0) == 0.0);
    const double a = tail_mass(f, 2.0, w, 0.5), b = tail_mass(f, 2.0, w, 1.0), c = tail_mass(f, 2.0, w, 1.5);
    CHECK(a > b);
    CHECK(b > c);
}

TEST_CASE("ball averages", "[funcspace]") {
    const Grid g(1, 1.0, 400);
    const auto c = sample([](std::span<const double>) { return 3.0; }, g);
    const Point o{0.0};
    CHECK(ball_average(c, o, 0.2) == Approx(3.0).epsilon(1e-15));
    const auto id = sample([](std::span<const double> x) { return x[0]; }, g);
    CHECK(std::abs(ball_average(id, o, 0.2)) < 1e-15);
    const auto sq = sample([](std::span<const double> x) { return x[0] * x[0]; }, g);
    CHECK(ball_average(sq, o, 0.5) == Approx(1.0 / 12.0).epsilon(1e-3));
}

TEST_CASE("csv round trip is exact", "[funcspace]") {
    const Grid g(2, 1.5, 8);
    const auto f = sample([](std::span<const double> x) { return std::sin(3.0 * x[0]) * std::cos(x[1]) / 7.0; }, g);
    std::stringstream ss;
    write_csv(ss, f);
    const auto r = read_csv(ss);
    CHECK(r.grid() == g);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(r[k] == f[k]);
}
