#include <cmath>
#include <cstring>

#include "catch_amalgamated.hpp"
#include "czlab/commutators.hpp"

using namespace czlab;
using Catch::Approx;

namespace {
ScalarField bump(double c, double R) {
    return [c, R](std::span<const double> x) {
        const double r = std::abs(x[0] - c) / R;
        return r < 1.0 ? std::exp(1.0 / (r * r - 1.0)) : 0.0;
    };
}

struct Setup {
    Grid g{1, 2.0, 32};
    std::vector<SampledFunction> fs;
    SymbolSet b;
    KernelSpec k = kernels::k1(2, 1);
    TruncationPolicy tr;

    Setup() {
        fs = {sample(bump(0.1, 1.0), g), sample(bump(-0.1, 1.0), g)};
        b.set(1, bump_symbol(g, {0.0}, 1.0));
        b.set(2, symbol_from_function(g, [](std::span<const double> x) { return x[0]; }, "x"));
        tr = {4 * g.spacing(), Cutoff::Smooth};
    }
};
}  // namespace

TEST_CASE("index sets", "[commutators]") {
    IndexSet S{{1, 1}, {2, 1}, {1, 2}, {1, 1}};
    CHECK(S.size() == 3);
    CHECK(S.symbols_of_slot(1) == std::vector<std::size_t>{1, 2});
    CHECK(S.active_slots() == SlotSet{1, 2});
    CHECK_THROWS_AS(S.validate(1), Error);
    CHECK_THROWS_AS(S.insert(0, 1), Error);
}

TEST_CASE("symbol factor", "[commutators]") {
    Setup s;
    const Point x{0.3}, y{-0.4, 0.9};
    CHECK(symbol_factor(s.b, {}, x, y) == 1.0);
    CHECK(symbol_factor(s.b, {{2, 1}}, x, y) == Approx(0.3 - -0.4).epsilon(1e-15));
    SymbolSet c;
    c.set(1, constant_symbol(s.g, 2.5));
    CHECK(symbol_factor(c, {{1, 2}}, x, y) == 0.0);
    CHECK_THROWS_AS(symbol_factor(s.b, {{3, 1}}, x, y), Error);
}

TEST_CASE("empty S reproduces T bit for bit", "[commutators]") {
    Setup s;
    const auto pts = all_points(s.g);
    const auto a = apply_T(s.k, s.fs, s.tr, pts).values;
    const auto b = apply_T_bS(s.k, s.b, {}, s.fs, s.tr, pts).values;
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("constant symbols annihilate the commutator", "[commutators]") {
    Setup s;
    SymbolSet c;
    c.set(1, constant_symbol(s.g, 1.7));
    const auto pts = all_points(s.g);
    for (double v : apply_T_bS(s.k, c, {{1, 1}, {1, 2}}, s.fs, s.tr, pts).values) CHECK(v == 0.0);
    const ScaleFamily fam(kernels::k2(2, 1), s.g.spacing(), std::pow(2.0, 0.5), 20);
    for (double v : apply_G_bS(fam, c, {{1, 2}}, s.fs, decimated_points(s.g)).values) CHECK(v == 0.0);
}

TEST_CASE("commutator with a repeated symbol matches a direct double sum", "[commutators]") {
    const Grid g(1, 1.0, 16);
    const auto f1 = sample(bump(0.1, 0.8), g), f2 = sample(bump(-0.2, 0.7), g);
    SymbolSet b;
    b.set(1, bump_symbol(g, {0.05}, 0.9));
    const auto k = kernels::k1(2, 1);
    const TruncationPolicy tr{2 * g.spacing(), Cutoff::Smooth};
    const auto pts = all_points(g);
    const auto got = apply_T_bS(k, b, {{1, 1}, {1, 2}}, {f1, f2}, tr, pts).values;
    const Symbol& s = b.get(1);
    const double h = g.spacing();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double x = pts[i][0];
        double sum = 0.0;
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t c = 0; c < g.size(); ++c) {
                const double y1 = g.center(a)[0], y2 = g.center(c)[0];
                const double sig = std::abs(x - y1) + std::abs(x - y2);
                if (sig == 0.0) continue;
                const Point xp{x}, yy{y1, y2}, p1{y1}, p2{y2};
                const double u = tr.weight(sig);
                if (u == 0.0) continue;
                sum += u * k(xp, yy) * (s(xp) - s(p1)) * (s(xp) - s(p2)) * f1[a] * f2[c];
            }
        sum *= h * h;
        CHECK(got[i] == Approx(sum).epsilon(1e-12).margin(1e-300));
    }
}

TEST_CASE("product expansion identities", "[commutators]") {
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto r = expansion_identity_check(n, 200, 100 + n);
        CHECK(r.max_error_difference <= 1e-10);
        CHECK(r.max_error_signed <= 1e-10);
    }
    CHECK_THROWS_AS(expansion_identity_check(9, 1, 1), Error);
}

TEST_CASE("truncation convergence study", "[commutators]") {
    Setup s;
    ConvergenceOptions opt;
    opt.reference_delta = 2 * s.g.spacing();
    opt.deltas = {2 * s.g.spacing(), 4 * s.g.spacing(), 8 * s.g.spacing()};
    opt.probes = {{0.0625}, {-0.1875}};
    const auto st = truncation_convergence_study(s.k, s.b, {{1, 1}}, s.fs, opt);
    CHECK(st.table.rows[0][1] == 0.0);
    CHECK(st.table.rows[1][1] < st.table.rows[2][1]);

    SymbolSet c;
    c.set(1, constant_symbol(s.g, 3.0));
    opt.deltas = {4 * s.g.spacing(), 8 * s.g.spacing()};
    const auto z = truncation_convergence_study(s.k, c, {{1, 1}}, s.fs, opt);
    for (const auto& row : z.table.rows) CHECK(row[1] == 0.0);
}

TEST_CASE("near/far integrals", "[commutators]") {
    Setup s;
    const std::vector<double> deltas{0.125, 0.25};
    const std::vector<Point> pts{{0.0625}, {-0.1875}};
    const auto a = near_far_bounds_study(s.fs, deltas, pts, 4);
    const auto b = near_far_bounds_study({s.fs[0].scaled(3.0), s.fs[1].scaled(0.5)}, deltas, pts, 4);
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        CHECK(b.near_sup[i] == Approx(a.near_sup[i]).epsilon(1e-12));
        CHECK(b.far_sup[i] == Approx(a.far_sup[i]).epsilon(1e-12));
    }
    // inputs vanish near x: empty near integral
    const auto far = near_far_bounds_study(s.fs, {0.125}, {Point{1.9375}}, 4);
    CHECK(far.table.rows[0][2] == 0.0);
}

TEST_CASE("decay study", "[commutators]") {
    Setup s;
    const auto st = decay_study(s.k, s.b, {{1, 1}}, s.fs, s.tr, {4.0, 8.0, 16.0, 32.0});
    CHECK(st.slope == Approx(-2.0).margin(0.15));
    CHECK_THROWS_AS(decay_study(s.k, s.b, {{1, 1}}, s.fs, s.tr, {1.0}), Error);
    const auto z = decay_study(s.k, s.b, {{1, 1}}, {s.fs[0], SampledFunction::zero(s.g)}, s.tr, {4.0, 8.0});
    for (const auto& row : z.table.rows) CHECK(row[1] == 0.0);
}

TEST_CASE("translation modulus study", "[commutators]") {
    Setup s;
    const double h = s.g.spacing();
    const TruncationPolicy tr{32 * h, Cutoff::Smooth};
    const auto st = translation_modulus_study(s.k, s.b, {{1, 1}}, s.fs, tr, {{h}, {2 * h}, {4 * h}, {8 * h}});
    CHECK(st.slope >= 0.8);
    CHECK(st.slope <= 1.2);
    const auto zero = translation_modulus_study(s.k, s.b, {{1, 1}}, s.fs, tr, {{0.0}});
    CHECK(zero.table.rows[0][1] == 0.0);
    CHECK_THROWS_AS(translation_modulus_study(s.k, s.b, {{1, 1}}, s.fs, tr, {{0.5 * h}}), Error);
    CHECK_THROWS_AS(translation_modulus_study(s.k, s.b, {{1, 1}}, s.fs, s.tr, {{8 * h}}), Error);
}
