#include <cmath>

#include "catch_amalgamated.hpp"
#include "czlab/kernels.hpp"

using namespace czlab;
using Catch::Approx;

TEST_CASE("built-in kernel values", "[kernels]") {
    const Point x0{0.0}, y1{1.0}, y11{1.0, 1.0};
    CHECK(kernels::k1(1, 1)(x0, y1) == 1.0);
    CHECK(kernels::k1(2, 1)(x0, y11) == 0.25);
    const Point far{0.8, -0.7};
    CHECK(kernels::k2(2, 1)(x0, far) == 0.0);
    CHECK(kernels::k3(1, 1)(x0, y1) == Approx(std::pow(2.0, -1.0)));
    CHECK_THROWS_AS(kernels::by_label("K7", 1, 1), Error);
}

TEST_CASE("size certificate", "[kernels]") {
    const auto samples = sample_configurations(2, 1, 2000, 17, 2.0);
    const auto c1 = certify_size(kernels::k1(2, 1), samples, 1.0);
    CHECK(c1.pass);
    CHECK(c1.worst_ratio == Approx(1.0).epsilon(1e-12));
    for (double r : c1.ratios) CHECK(std::abs(r - 1.0) <= 1e-12);
    // the witness reproduces the worst ratio
    CHECK(size_ratio(kernels::k1(2, 1), c1.witness.x, c1.witness.y) == c1.worst_ratio);

    const auto c2 = certify_size(kernels::k1(2, 1).scaled(2.0), samples, 1.0);
    CHECK_FALSE(c2.pass);
    CHECK(c2.worst_ratio == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("Marcinkiewicz kernel vanishes off its support", "[kernels]") {
    const auto k = kernels::k2(2, 1);
    const auto samples = sample_configurations(2, 1, 3000, 5, 2.0);
    const auto c = certify_size(k, samples, std::numeric_limits<double>::infinity());
    CHECK(c.support_violations == 0);
    CHECK(c.pass);
    // dense check of the bound constant: sup |K2| Sigma^{mn} over a fine sample
    double best = 0.0;
    for (const auto& s : sample_configurations(2, 1, 20000, 6, 0.5)) best = std::max(best, size_ratio(k, s.x, s.y));
    CHECK(certify_size(k, samples, best * 1.5).pass);
}

TEST_CASE("hoelder certificates", "[kernels]") {
    const auto k = kernels::k1(2, 1);
    auto ys = sample_y_perturbations(2, 1, 1, 500, 3, 2.0);
    for (auto& c : ys) c.yp = c.y;  // zero perturbation
    const auto z = certify_hoelder_y(k, 1, ys, 1.0, 1.0);
    CHECK(z.worst_ratio == 0.0);
    const auto r = certify_hoelder_y(k, 2, sample_y_perturbations(2, 1, 2, 2000, 4, 2.0), 1e9, 1.0);
    CHECK(std::isfinite(r.worst_ratio));
    CHECK(r.worst_ratio > 0.0);
    const auto x = certify_hoelder_x(k, sample_x_perturbations(2, 1, 2000, 4, 2.0), 1e9, 1.0);
    CHECK(std::isfinite(x.worst_ratio));

    // a perturbation violating |y - y'| <= |x - y| / 2 is rejected
    auto bad = sample_y_perturbations(2, 1, 1, 1, 9, 2.0);
    bad[0].yp[0] = bad[0].x[0];
    CHECK_THROWS_AS(certify_hoelder_y(k, 1, bad, 1.0, 1.0), Error);
}

TEST_CASE("constant kernel has zero smoothness ratio in its interior", "[kernels]") {
    const KernelSpec c(1, 1, "const", [](std::span<const double>, std::span<const double>) { return 3.0; });
    const auto c_y = certify_hoelder_y(c, 1, sample_y_perturbations(1, 1, 1, 200, 8, 1.0), 1.0, 1.0);
    CHECK(c_y.worst_ratio == 0.0);
}

TEST_CASE("hoelder exponent estimate for K1 is at least 1", "[kernels]") {
    const Configuration base{{0.0}, {}, {1.0, 0.5}, {}};
    const Point dir{1.0};
    const std::vector<double> lengths{1e-4, 2e-4, 4e-4, 8e-4};
    CHECK(estimate_hoelder_exponent(kernels::k1(2, 1), base, 1, dir, lengths) == Approx(1.0).margin(0.05));
    CHECK(estimate_hoelder_exponent(kernels::k1(2, 1), base, 0, dir, lengths) == Approx(1.0).margin(0.05));
}

TEST_CASE("square norms", "[kernels]") {
    const auto fam = ScaleFamily::with_default_grid(kernels::k2(2, 1));
    const Point x{0.0}, y{0.2, -0.1};
    CHECK(h1_norm(ScaleFamily::with_default_grid(kernels::zero(2, 1)), x, y) == 0.0);
    const double v = h1_norm(fam, x, y);
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
    CHECK(h1_norm(fam.with_base(kernels::k2(2, 1).scaled(2.0)), x, y) == Approx(2.0 * v).epsilon(1e-14));
    // refined t-grid oracle: 2^{1/40} ratio (10x finer)
    const ScaleFamily fine(kernels::k2(2, 1), fam.t_min(), std::pow(2.0, 1.0 / 40.0), 960);
    CHECK(h1_norm(fine, x, y) == Approx(v).epsilon(0.02));

    const Grid z(1, 4.0, 128);
    const double w = h2_norm(fam, 3.0, x, y, z);
    CHECK(w > 0.0);
    CHECK(h2_norm(fam.with_base(kernels::k2(2, 1).scaled(-3.0)), 3.0, x, y, z) == Approx(3.0 * w).epsilon(1e-12));
    CHECK(h2_norm(fam, 3.0, x, y, Grid(1, 4.0, 256)) == Approx(w).epsilon(0.05));
    CHECK_THROWS_AS(h2_norm(fam, 0.5, x, y, z), Error);
}

TEST_CASE("square-bound certificate", "[kernels]") {
    const auto fam = ScaleFamily::with_default_grid(kernels::k2(1, 1));
    const auto xs = sample_x_perturbations(1, 1, 300, 1, 1.0);
    const auto ys = sample_y_perturbations(1, 1, 1, 300, 2, 1.0);
    const auto a = certify_square_bounds(fam, xs, ys);
    const auto b = certify_square_bounds(fam.refined(), xs, ys);
    CHECK(a.pass());
    for (const auto& [p, q] : {std::pair{a.size, b.size}, {a.smooth_x, b.smooth_x}, {a.smooth_y, b.smooth_y}}) {
        CHECK(std::isfinite(p.worst_ratio));
        CHECK(q.worst_ratio == Approx(p.worst_ratio).epsilon(0.05));
    }
    const auto zero = certify_square_bounds(ScaleFamily::with_default_grid(kernels::zero(1, 1)), xs, ys);
    CHECK(zero.size.worst_ratio == 0.0);
    CHECK(zero.smooth_x.worst_ratio == 0.0);
}
