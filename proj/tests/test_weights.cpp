#include <cmath>

#include "catch_amalgamated.hpp"
#include "czlab/weights.hpp"

using namespace czlab;
using Catch::Approx;

TEST_CASE("nu weight", "[weights]") {
    const Point x{0.7};
    const WeightVector one({WeightSpec::power(0.4)}, {3.0});
    CHECK(nu_weight(one, {1})(x) == Approx(WeightSpec::power(0.4)(x)).epsilon(1e-15));
    CHECK(nu_weight(WeightVector::unweighted({2.0, 3.0}))(x) == Approx(1.0));
    const WeightVector two({WeightSpec::power(0.3), WeightSpec::power(-0.5)}, {2.0, 2.0});
    CHECK(two.p() == Approx(1.0));
    CHECK(nu_weight(two)(x) == Approx(std::pow(0.7, (0.3 - 0.5) / 2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(WeightVector({WeightSpec::unit()}, {1.0}), Error);
}

TEST_CASE("A_p constant of the unit weight is 1", "[weights]") {
    const Grid g(1, 2.0, 64);
    const auto cubes = dyadic_cube_family(g, {{0.0}, {0.5}}, 4);
    const auto est = ap_constant(WeightSpec::unit(), 2.0, cubes, g);
    CHECK(est.value == Approx(1.0).epsilon(1e-14));
    for (double v : est.local)
        if (!std::isnan(v)) CHECK(v == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("A_2 of |x|^{1/2} on [0,1] converges to 4/3", "[weights]") {
    auto estimate = [](std::size_t N) {
        const Grid g(1, 1.0, N);
        CubeFamily c;
        c.add(Cube{{0.0}, 1.0});
        return ap_constant(WeightSpec::power(0.5), 2.0, c, g).value;
    };
    const double e1 = std::abs(estimate(64) - 4.0 / 3.0), e2 = std::abs(estimate(1024) - 4.0 / 3.0);
    CHECK(e2 < e1);
    CHECK(e2 < 0.02);
}

TEST_CASE("A_p grows under refinement for alpha >= n(p-1)", "[weights]") {
    // the continuum constant is infinite; finer grids resolve more of the singularity at 0
    double prev = 0.0;
    for (std::size_t N = 16; N <= 1024; N *= 2) {
        const Grid g(1, 1.0, N);
        CubeFamily c;
        c.add(Cube{{0.0}, 1.0});
        const double v = ap_constant(WeightSpec::power(1.5), 2.0, c, g).value;
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("clipped cubes are skipped", "[weights]") {
    const Grid g(1, 1.0, 16);
    CubeFamily c;
    c.add(Cube{{0.5}, 1.0});   // leaves the box
    c.add(Cube{{-0.5}, 0.5});
    const auto est = ap_constant(WeightSpec::power(0.5), 2.0, c, g);
    CHECK(std::isnan(est.local[0]));
    CHECK(est.argmax == 1);
}

TEST_CASE("multi-weight constant", "[weights]") {
    const Grid g(1, 1.0, 256);
    CubeFamily c;
    c.add(Cube{{0.0}, 1.0});
    c.add(Cube{{-0.5}, 0.25});
    CHECK(multi_ap_constant(WeightVector::unweighted({2.0, 2.0}), c, {1, 2}, g).value == Approx(1.0).epsilon(1e-14));

    // m = 1 reduces to A_p^{1/p}
    const WeightVector one({WeightSpec::power(0.5)}, {2.0});
    const double single = ap_constant(WeightSpec::power(0.5), 2.0, c, g).value;
    CHECK(multi_ap_constant(one, c, {1}, g).value == Approx(std::pow(single, 0.5)).epsilon(1e-12));
}
