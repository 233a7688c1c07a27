#pragma once

// Scenario runner. Every scenario first parses its whole configuration into a
// plan (config errors surface here, before any computation), then executes
// the plan into in-memory outputs. Writing files is left to the caller.

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "czlab/acceptance.hpp"
#include "czlab/config.hpp"

namespace czlab {

inline constexpr const char* tool_version = "0.1.0";

/// A module error raised while executing a scenario, labeled with the scenario.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& scenario, const Error& e)
        : std::runtime_error("scenario '" + scenario + "' failed: " + e.what()), kind_(e.kind()) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct RunOutput {
    std::string name;
    std::string content;
};

struct RunResult {
    std::string scenario;
    std::uint64_t seed = 0;
    bool success = true;  // false when a certificate, verdict or criterion failed
    std::vector<RunOutput> outputs;
    std::string summary;  // one or a few lines for the console
};

// ---------------------------------------------------------------------------
// Output helpers

/// RFC 4180 quoting for text fields.
inline std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// "key = value" lines grouped under [section] headers.
class TextReport {
public:
    void section(const std::string& name) { os_ << (os_.tellp() > 0 ? "\n" : "") << '[' << name << "]\n"; }
    void kv(const std::string& key, const std::string& v) { os_ << key << " = " << v << '\n'; }
    void kv(const std::string& key, const char* v) { kv(key, std::string(v)); }
    void kv(const std::string& key, double v) { kv(key, format_double(v)); }
    void kv(const std::string& key, std::size_t v) { kv(key, std::to_string(v)); }
    void kv(const std::string& key, bool v) { kv(key, std::string(v ? "true" : "false")); }
    void kv(const std::string& key, std::span<const double> v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
        kv(key, s);
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

namespace detail {

using config::Node;
using Plan = std::function<RunResult()>;

inline std::string point_columns(std::size_t n, const std::string& prefix = "x") {
    std::string s;
    for (std::size_t d = 0; d < n; ++d) s += (d ? "," : "") + prefix + std::to_string(d + 1);
    return s;
}

inline std::string point_fields(std::span<const double> x) {
    std::string s;
    for (std::size_t d = 0; d < x.size(); ++d) s += (d ? "," : "") + format_double(x[d]);
    return s;
}

inline void write_certificate(TextReport& r, const KernelCertificate& c) {
    r.section(c.condition);
    r.kv("sample_count", c.sample_count);
    r.kv("worst_ratio", c.worst_ratio);
    r.kv("constant", c.constant);
    r.kv("pass", c.pass);
    r.kv("witness_x", c.witness.x);
    r.kv("witness_y", c.witness.y);
    r.kv("witness_xp", c.witness.xp);
    r.kv("witness_yp", c.witness.yp);
    if (c.support_violations >= 0) r.kv("support_violations", static_cast<std::size_t>(c.support_violations));
    for (const auto& w : c.warnings) r.kv("warning", w);
}

// ---------------------------------------------------------------------------
// verify-kernel

inline Plan plan_verify_kernel(const Node& root, std::uint64_t seed) {
    root.expect_keys({"scenario", "seed", "kernel", "conditions", "samples", "radius", "gamma", "gap_factor", "slots",
                      "constants", "square", "scales"});
    const KernelSpec k = config::parse_kernel(root.at("kernel"));
    std::set<std::string> conds{"size", "hoelder-x", "hoelder-y"};
    if (root.has("conditions")) {
        conds.clear();
        const Node c = root.at("conditions");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::string s = c.at(i).string();
            if (s != "size" && s != "hoelder-x" && s != "hoelder-y" && s != "square")
                c.at(i).fail("unknown condition '" + s + "' (size, hoelder-x, hoelder-y, square)");
            conds.insert(s);
        }
        if (conds.empty()) c.fail("list must be nonempty");
    }
    const std::size_t count = root.count_or("samples", 1000);
    if (count == 0) root.at("samples").fail("must be positive");
    const double radius = root.positive_or("radius", 2.0);
    const double gamma = root.positive_or("gamma", 1.0);
    const double gap = root.number_or("gap_factor", 2.0);
    if (!(gap > 1.0)) root.at("gap_factor").fail("must exceed 1");
    const SlotSet slots = root.has("slots") ? config::parse_slots(root.at("slots"), k.m()) : all_slots(k.m());

    const double inf = std::numeric_limits<double>::infinity();
    double c_size = std::isfinite(k.size_constant()) ? k.size_constant() : inf;
    double c_x = inf, c_y = inf, c_sq_size = inf, c_sq_smooth = inf;
    if (root.has("constants")) {
        const Node c = root.at("constants");
        c.expect_keys({"size", "hoelder_x", "hoelder_y", "square_size", "square_smooth"});
        c_size = c.positive_or("size", c_size);
        c_x = c.positive_or("hoelder_x", c_x);
        c_y = c.positive_or("hoelder_y", c_y);
        c_sq_size = c.positive_or("square_size", c_sq_size);
        c_sq_smooth = c.positive_or("square_smooth", c_sq_smooth);
    }

    std::optional<ScaleFamily> fam;
    SquareBoundOptions sq;
    if (conds.count("square")) {
        fam = config::parse_scales(root, k);
        sq.gamma = gamma;
        sq.gap_factor = gap;
        sq.size_constant = c_sq_size;
        sq.smooth_constant = c_sq_smooth;
        if (root.has("square")) {
            const Node s = root.at("square");
            s.expect_keys({"slot", "h2", "lambda", "z_grid"});
            if (s.has("slot")) {
                sq.slot = s.at("slot").count();
                if (sq.slot < 1 || sq.slot > k.m()) s.at("slot").fail("slot must lie in 1.." + std::to_string(k.m()));
            }
            sq.include_h2 = s.boolean_or("h2", false);
            sq.lambda = s.positive_or("lambda", 3.0);
            if (sq.include_h2) {
                const Grid z = config::parse_grid(s.at("z_grid"));
                if (z.dim() != k.n()) s.at("z_grid").fail("dimension does not match the kernel");
                sq.z_grid = z;
            }
        }
    } else if (root.has("square") || root.has("scales")) {
        root.fail("'square' and 'scales' apply only when the condition list includes \"square\"");
    }

    return [=]() {
        Rng master(seed);
        const std::uint64_t s_size = master.next(), s_x = master.next(), s_y = master.next(),
                            s_sqx = master.next(), s_sqy = master.next();
        std::vector<KernelCertificate> certs;
        if (conds.count("size")) {
            const auto samples = sample_configurations(k.m(), k.n(), count, s_size, radius);
            certs.push_back(certify_size(k, samples, c_size));
        }
        if (conds.count("hoelder-x")) {
            const auto samples = sample_x_perturbations(k.m(), k.n(), count, s_x, radius, gap);
            certs.push_back(certify_hoelder_x(k, samples, c_x, gamma, gap));
        }
        if (conds.count("hoelder-y"))
            for (auto j : slots) {
                const auto samples = sample_y_perturbations(k.m(), k.n(), j, count, s_y + j, radius, gap);
                certs.push_back(certify_hoelder_y(k, j, samples, c_y, gamma, gap));
            }
        std::vector<std::string> sq_warnings;
        if (fam) {
            const auto xs = sample_x_perturbations(k.m(), k.n(), count, s_sqx, radius, gap);
            const auto ys = sample_y_perturbations(k.m(), k.n(), sq.slot, count, s_sqy, radius, gap);
            const auto sc = certify_square_bounds(*fam, xs, ys, sq);
            certs.push_back(sc.size);
            certs.push_back(sc.smooth_x);
            certs.push_back(sc.smooth_y);
            for (const auto* c : {&sc.h2_size, &sc.h2_smooth_x, &sc.h2_smooth_y})
                if (c->has_value()) certs.push_back(**c);
            sq_warnings = sc.warnings;
        }

        TextReport rep;
        rep.section("kernel");
        rep.kv("label", k.label());
        rep.kv("class", to_string(k.kernel_class()));
        rep.kv("m", k.m());
        rep.kv("n", k.n());
        rep.kv("seed", std::to_string(seed));
        for (const auto& w : sq_warnings) rep.kv("warning", w);
        std::string csv = "condition,sample,ratio\n";
        RunResult res;
        for (const auto& c : certs) {
            write_certificate(rep, c);
            for (std::size_t i = 0; i < c.ratios.size(); ++i)
                csv += c.condition + "," + std::to_string(i) + "," + format_double(c.ratios[i]) + "\n";
            res.success = res.success && c.pass;
            res.summary += c.condition + ": worst_ratio=" + format_double(c.worst_ratio) +
                           (c.pass ? " pass" : " FAIL") + "\n";
        }
        res.outputs = {{"certificate.txt", rep.str()}, {"ratios.csv", csv}};
        return res;
    };
}

// ---------------------------------------------------------------------------
// ap-constant

inline CubeFamily parse_cubes(const Node& c, const Grid& g) {
    c.expect_keys({"centers", "levels", "explicit"});
    const std::string which = c.one_of("centers", "explicit");
    if (which == "centers") {
        const Node cs = c.at("centers");
        std::vector<Point> centers;
        for (std::size_t i = 0; i < cs.size(); ++i) centers.push_back(cs.at(i).point(g.dim()));
        if (centers.empty()) cs.fail("list must be nonempty");
        return dyadic_cube_family(g, centers, c.at("levels").count());
    }
    if (c.has("levels")) c.at("levels").fail("'levels' applies only to 'centers'");
    const Node ex = c.at("explicit");
    CubeFamily fam;
    for (std::size_t i = 0; i < ex.size(); ++i) {
        const Node q = ex.at(i);
        q.expect_keys({"lower", "side"});
        fam.add(Cube{q.at("lower").point(g.dim()), q.at("side").positive()});
    }
    if (fam.size() == 0) ex.fail("list must be nonempty");
    return fam;
}

inline std::vector<double> parse_exponents(const Node& list, std::size_t m) {
    auto p = list.numbers();
    if (p.size() != m) list.fail("expected " + std::to_string(m) + " exponents");
    for (std::size_t j = 0; j < p.size(); ++j)
        if (!(p[j] > 1.0)) list.at(j).fail("each exponent must exceed 1");
    return p;
}

inline std::vector<WeightSpec> parse_weight_list(const Node& list) {
    std::vector<WeightSpec> w;
    for (std::size_t j = 0; j < list.size(); ++j) w.push_back(config::parse_weight(list.at(j)));
    if (w.empty()) list.fail("list must be nonempty");
    return w;
}

inline Plan plan_ap_constant(const Node& root, std::uint64_t) {
    root.expect_keys({"scenario", "seed", "grid", "weight", "p", "cubes", "weights", "exponents", "subset"});
    const Grid g = config::parse_grid(root.at("grid"));
    const CubeFamily cubes = parse_cubes(root.at("cubes"), g);
    const std::string mode = root.one_of("weight", "weights");
    std::function<ConstantEstimate()> compute;
    std::string label;
    if (mode == "weight") {
        for (const char* key : {"exponents", "subset"})
            if (root.has(key)) root.at(key).fail("applies only to the multi-weight form ('weights')");
        const WeightSpec w = config::parse_weight(root.at("weight"));
        const double p = root.at("p").number();
        if (!(p > 1.0)) root.at("p").fail("must exceed 1");
        label = "A_p, w = " + w.label() + ", p = " + format_double(p);
        compute = [=] { return ap_constant(w, p, cubes, g); };
    } else {
        if (root.has("p")) root.at("p").fail("the multi-weight form takes 'exponents'");
        const auto ws = parse_weight_list(root.at("weights"));
        const auto ps = parse_exponents(root.at("exponents"), ws.size());
        const SlotSet A = root.has("subset") ? config::parse_slots(root.at("subset"), ws.size()) : all_slots(ws.size());
        if (A.empty()) root.at("subset").fail("subset must be nonempty");
        const WeightVector wv(ws, ps);
        label = "multi-weight constant over " + std::to_string(A.size()) + " slot(s)";
        compute = [=] { return multi_ap_constant(wv, cubes, A, g); };
    }
    return [=]() {
        const ConstantEstimate est = compute();
        std::string csv = "row," + point_columns(g.dim(), "center") + ",side,local_constant\n";
        auto row = [&](const char* kind, const Cube& q, double v) {
            csv += std::string(kind) + "," + point_fields(q.center()) + "," + format_double(q.side) + "," +
                   format_double(v) + "\n";
        };
        for (std::size_t i = 0; i < cubes.size(); ++i) row("cube", cubes.cubes[i], est.local[i]);
        const Cube& best = cubes.cubes[est.argmax];
        row("sup", best, est.value);
        TextReport rep;
        rep.section("constant");
        rep.kv("quantity", label);
        rep.kv("value", est.value);
        rep.kv("argmax_center", best.center());
        rep.kv("argmax_side", best.side);
        std::size_t clipped = 0;
        for (double v : est.local) clipped += std::isnan(v) ? 1 : 0;
        rep.kv("cubes", cubes.size());
        rep.kv("clipped_cubes", clipped);
        RunResult res;
        res.outputs = {{"constants.csv", csv}, {"report.txt", rep.str()}};
        res.summary = "sup=" + format_double(est.value) + " over " + std::to_string(cubes.size()) + " cubes\n";
        return res;
    };
}

// ---------------------------------------------------------------------------
// run-operator and commutator-run

inline Plan plan_operator(const Node& root, bool commutator) {
    if (commutator)
        root.expect_keys({"scenario", "seed", "grid", "kernel", "operator", "inputs", "truncation", "points", "lambda",
                          "z_grid", "scales", "pairs", "symbols"});
    else
        root.expect_keys({"scenario", "seed", "grid", "kernel", "operator", "inputs", "truncation", "points", "lambda",
                          "z_grid", "scales", "subset", "scale_count"});
    const Grid g = config::parse_grid(root.at("grid"));
    const std::string op = root.at("operator").string();
    const bool known = op == "T" || op == "G" || op == "G*" || (!commutator && op == "M");
    if (!known) root.at("operator").fail(commutator ? "expected \"T\", \"G\" or \"G*\"" : "expected \"T\", \"G\", \"G*\" or \"M\"");
    const auto points = config::parse_points(root, "points", g);

    if (op == "M") {
        for (const char* key : {"kernel", "truncation", "lambda", "z_grid", "scales"})
            if (root.has(key)) root.at(key).fail("does not apply to the maximal operator");
        const auto fs = config::parse_inputs(root.at("inputs"), g, std::nullopt);
        const SlotSet A = root.has("subset") ? config::parse_slots(root.at("subset"), fs.size()) : all_slots(fs.size());
        std::size_t count = 1;
        while (std::ldexp(g.spacing(), static_cast<int>(count)) <= 4.0 * g.half_width()) ++count;
        count = root.count_or("scale_count", count + 1);
        if (count == 0) root.at("scale_count").fail("must be positive");
        const auto scales = dyadic_scales(g, count);
        return [=]() {
            RunResult res;
            const auto out = maximal_MA(fs, A, points, scales);
            res.outputs = {{"values.csv", out.to_table().to_csv()}};
            res.summary = "M over " + std::to_string(points.size()) + " points\n";
            return res;
        };
    }
    if (!commutator)
        for (const char* key : {"subset", "scale_count"})
            if (root.has(key)) root.at(key).fail("applies only to the maximal operator");

    const KernelSpec k = config::parse_kernel(root.at("kernel"), g.dim());
    const auto fs = config::parse_inputs(root.at("inputs"), g, k.m());
    std::optional<TruncationPolicy> trunc;
    if (root.has("truncation")) trunc = config::parse_truncation(root.at("truncation"), g);
    if (op == "T" && !trunc) root.at("truncation");  // throws: required for T
    if (op != "G*")
        for (const char* key : {"lambda", "z_grid"})
            if (root.has(key)) root.at(key).fail("applies only to G*");
    if (op == "T" && root.has("scales")) root.at("scales").fail("does not apply to T");
    const double lambda = op == "G*" ? root.at("lambda").positive() : 0.0;
    std::optional<Grid> z;
    if (op == "G*") {
        z = config::parse_grid(root.at("z_grid"));
        if (z->dim() != g.dim()) root.at("z_grid").fail("dimension does not match the grid");
    }
    const std::optional<ScaleFamily> fam = op == "T" ? std::nullopt : std::optional(config::parse_scales(root, k));

    SymbolSet b;
    IndexSet S;
    if (commutator) {
        S = config::parse_pairs(root.at("pairs"), k.m());
        b = config::parse_symbols(root.at("symbols"), g);
        for (auto i : S.symbol_indices())
            if (!b.contains(i)) root.at("symbols").fail("no recipe for symbol b_" + std::to_string(i) + " used in 'pairs'");
    }

    return [=]() {
        OperatorOutput out;
        if (op == "T") out = commutator ? apply_T_bS(k, b, S, fs, *trunc, points) : apply_T(k, fs, *trunc, points);
        else if (op == "G") out = commutator ? apply_G_bS(*fam, b, S, fs, points, trunc) : apply_G(*fam, fs, points, trunc);
        else
            out = commutator ? apply_G_star_bS(*fam, lambda, b, S, fs, points, *z, trunc)
                             : apply_G_star(*fam, lambda, fs, points, *z, trunc);
        double sup = 0.0;
        for (double v : out.values) sup = std::max(sup, std::abs(v));
        RunResult res;
        res.outputs = {{"values.csv", out.to_table().to_csv()}};
        res.summary = op + " (" + k.label() + ") at " + std::to_string(points.size()) + " points, max |value| = " +
                      format_double(sup) + "\n";
        return res;
    };
}

// ---------------------------------------------------------------------------
// empirical-ratio

inline Plan plan_empirical_ratio(const Node& root, std::uint64_t seed) {
    root.expect_keys({"scenario", "seed", "box", "points_per_axis", "operator", "subset", "kernel", "truncation",
                      "weights", "exponents", "testset"});
    const Node box = root.at("box");
    box.expect_keys({"n", "half_width"});
    const std::size_t n = box.at("n").count();
    if (n == 0) box.at("n").fail("dimension must be positive");
    const double L = box.at("half_width").positive();
    std::vector<Grid> grids;
    {
        const Node pp = root.at("points_per_axis");
        for (std::size_t i = 0; i < pp.size(); ++i) {
            const std::size_t N = pp.at(i).count();
            if (N == 0 || N % 2 != 0) pp.at(i).fail("must be a positive even integer");
            grids.emplace_back(n, L, N);
        }
        if (grids.empty()) pp.fail("list must be nonempty");
    }
    const auto ws = parse_weight_list(root.at("weights"));
    const auto ps = parse_exponents(root.at("exponents"), ws.size());
    const WeightVector wv(ws, ps);
    const std::size_t m = ws.size();

    const std::string op = root.at("operator").string();
    FieldOperator fop;
    std::string label;
    if (op == "M") {
        for (const char* key : {"kernel", "truncation"})
            if (root.has(key)) root.at(key).fail("does not apply to the maximal operator");
        const SlotSet A = root.has("subset") ? config::parse_slots(root.at("subset"), m) : all_slots(m);
        label = "M";
        fop = [A](const std::vector<SampledFunction>& fs) {
            const Grid& g = fs.front().grid();
            std::size_t count = 1;
            while (std::ldexp(g.spacing(), static_cast<int>(count)) <= 4.0 * g.half_width()) ++count;
            return maximal_MA(fs, A, all_points(g), dyadic_scales(g, count + 1)).to_sampled(g);
        };
    } else if (op == "T") {
        if (root.has("subset")) root.at("subset").fail("applies only to the maximal operator");
        const KernelSpec k = config::parse_kernel(root.at("kernel"), n);
        if (k.m() != m) root.at("kernel").at("m").fail("does not match the number of weights");
        const Node tn = root.at("truncation");
        std::vector<TruncationPolicy> per_grid;
        for (const auto& g : grids) per_grid.push_back(config::parse_truncation(tn, g));
        label = "T (" + k.label() + ")";
        fop = [k, per_grid, grids](const std::vector<SampledFunction>& fs) {
            const Grid& g = fs.front().grid();
            std::size_t i = 0;
            while (!(grids[i] == g)) ++i;
            return apply_T(k, fs, per_grid[i], all_points(g)).to_sampled(g);
        };
    } else {
        root.at("operator").fail("expected \"M\" or \"T\"");
    }

    const Node ts = root.at("testset");
    ts.expect_keys({"count", "center_range", "radius"});
    const std::size_t count = ts.at("count").count();
    if (count == 0) ts.at("count").fail("must be positive");
    const double cr = ts.number_or("center_range", 0.5 * L);
    if (cr < 0.0) ts.at("center_range").fail("must be nonnegative");
    std::vector<double> rr{0.3, 1.0};
    if (ts.has("radius")) {
        rr = ts.at("radius").numbers();
        if (rr.size() != 2 || !(rr[0] > 0.0) || !(rr[1] >= rr[0])) ts.at("radius").fail("expected [r_min, r_max], 0 < r_min <= r_max");
    }
    if (cr + rr[1] > L) ts.fail("center_range + r_max exceeds the box half width");

    return [=]() {
        // one random bump per slot per tuple, drawn once and resampled on every grid
        Rng rng(seed);
        std::vector<std::vector<std::pair<Point, double>>> tuples(count);
        for (auto& t : tuples)
            for (std::size_t j = 0; j < m; ++j) {
                Point c(n);
                for (auto& v : c) v = rng.uniform(-cr, cr);
                t.emplace_back(std::move(c), rng.uniform(rr[0], rr[1]));
            }
        auto testset = [&](const Grid& g) {
            std::vector<std::vector<SampledFunction>> out;
            for (const auto& t : tuples) {
                std::vector<SampledFunction> fs;
                for (const auto& [c, r] : t) fs.push_back(sample(config::bump_field(c, r, 1.0), g));
                out.push_back(std::move(fs));
            }
            return out;
        };
        const auto rep = empirical_ratio_refinement(fop, wv, testset, grids);
        std::string csv = "points_per_axis,tuple,ratio\n", sum = "points_per_axis,max,median\n";
        for (std::size_t i = 0; i < grids.size(); ++i) {
            const auto& r = rep.per_grid[i];
            for (std::size_t t = 0; t < r.ratios.size(); ++t)
                csv += std::to_string(rep.points_per_axis[i]) + "," + std::to_string(t) + "," + format_double(r.ratios[t]) + "\n";
            sum += std::to_string(rep.points_per_axis[i]) + "," + format_double(r.max) + "," + format_double(r.median) + "\n";
        }
        TextReport tr;
        tr.section("empirical-ratio");
        tr.kv("operator", label);
        tr.kv("p", wv.p());
        tr.kv("tuples", count);
        tr.kv("max_relative_change", rep.max_relative_change);
        RunResult res;
        res.outputs = {{"ratios.csv", csv}, {"summary.csv", sum}, {"report.txt", tr.str()}};
        res.summary = "max ratio " + format_double(rep.per_grid.back().max) + ", relative change across grids " +
                      format_double(rep.max_relative_change) + "\n";
        return res;
    };
}

// ---------------------------------------------------------------------------
// Commutator studies

struct CommutatorInputs {
    Grid grid{1, 1.0, 2};
    KernelSpec kernel = kernels::zero(1, 1);
    std::vector<SampledFunction> fs;
    SymbolSet b;
    IndexSet S;
};

inline CommutatorInputs parse_commutator_inputs(const Node& root) {
    CommutatorInputs c;
    c.grid = config::parse_grid(root.at("grid"));
    c.kernel = config::parse_kernel(root.at("kernel"), c.grid.dim());
    c.fs = config::parse_inputs(root.at("inputs"), c.grid, c.kernel.m());
    c.S = config::parse_pairs(root.at("pairs"), c.kernel.m());
    c.b = config::parse_symbols(root.at("symbols"), c.grid);
    for (auto i : c.S.symbol_indices())
        if (!c.b.contains(i)) root.at("symbols").fail("no recipe for symbol b_" + std::to_string(i) + " used in 'pairs'");
    return c;
}

inline Plan plan_convergence(const Node& root) {
    const std::string study = root.string_or("study", "truncation");
    if (study == "near-far") {
        root.expect_keys({"scenario", "seed", "study", "grid", "inputs", "deltas", "deltas_cells", "probes", "subdivision"});
        const Grid g = config::parse_grid(root.at("grid"));
        const auto fs = config::parse_inputs(root.at("inputs"), g, std::nullopt);
        const auto deltas = config::parse_lengths(root, "deltas", g);
        const auto probes = config::parse_points(root, "probes", g);
        const std::size_t sub = root.count_or("subdivision", 8);
        if (sub == 0) root.at("subdivision").fail("must be positive");
        return [=]() {
            const auto st = near_far_bounds_study(fs, deltas, probes, sub);
            TextReport tr;
            tr.section("near-far");
            tr.kv("subdivision", sub);
            tr.kv("near_sup", st.near_sup);
            tr.kv("far_sup", st.far_sup);
            tr.kv("near_spread", st.near_spread);
            tr.kv("far_spread", st.far_spread);
            RunResult res;
            res.outputs = {{"near_far.csv", st.table.to_csv()}, {"report.txt", tr.str()}};
            res.summary = "near spread " + format_double(st.near_spread) + ", far spread " + format_double(st.far_spread) + "\n";
            return res;
        };
    }
    if (study != "truncation") root.at("study").fail("expected \"truncation\" or \"near-far\"");
    root.expect_keys({"scenario", "seed", "study", "grid", "kernel", "inputs", "pairs", "symbols", "deltas",
                      "deltas_cells", "reference_delta", "reference_delta_cells", "cutoff", "p", "nu", "probes"});
    const auto c = parse_commutator_inputs(root);
    ConvergenceOptions opt;
    opt.deltas = config::parse_lengths(root, "deltas", c.grid);
    opt.reference_delta = config::parse_length(root, "reference_delta", c.grid);
    opt.cutoff = config::parse_cutoff_or(root, Cutoff::Smooth);
    opt.p = root.positive_or("p", 1.0);
    opt.nu = config::parse_weight_or_unit(root, "nu");
    opt.probes = config::parse_points(root, "probes", c.grid);
    return [=]() {
        const auto st = truncation_convergence_study(c.kernel, c.b, c.S, c.fs, opt);
        const std::size_t n = c.grid.dim();
        std::string pw = "delta,probe," + point_columns(n) + ",ratio\n";
        for (std::size_t d = 0; d < st.deltas.size(); ++d)
            for (std::size_t q = 0; q < st.probes.size(); ++q)
                pw += format_double(st.deltas[d]) + "," + std::to_string(q) + "," + point_fields(st.probes[q]) + "," +
                      format_double(st.pointwise_ratio[d][q]) + "\n";
        TextReport tr;
        tr.section("truncation-convergence");
        tr.kv("reference_delta", opt.reference_delta);
        tr.kv("slope", st.slope);
        tr.kv("max_pointwise_spread", st.max_pointwise_spread);
        RunResult res;
        res.outputs = {{"convergence.csv", st.table.to_csv()}, {"pointwise.csv", pw}, {"report.txt", tr.str()}};
        res.summary = "slope " + format_double(st.slope) + ", pointwise spread " + format_double(st.max_pointwise_spread) + "\n";
        return res;
    };
}

inline Plan plan_decay(const Node& root) {
    root.expect_keys({"scenario", "seed", "grid", "kernel", "inputs", "pairs", "symbols", "truncation", "radii"});
    const auto c = parse_commutator_inputs(root);
    const auto trunc = config::parse_truncation(root.at("truncation"), c.grid);
    const auto radii = root.at("radii").numbers();
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (!(radii[i] > 0.0)) root.at("radii").at(i).fail("must be positive");
    return [=]() {
        const auto st = decay_study(c.kernel, c.b, c.S, c.fs, trunc, radii);
        TextReport tr;
        tr.section("decay");
        tr.kv("support_radius", st.support_radius);
        tr.kv("slope", st.slope);
        tr.kv("predicted_slope", -static_cast<double>(c.kernel.m() * c.kernel.n()));
        RunResult res;
        res.outputs = {{"decay.csv", st.table.to_csv()}, {"report.txt", tr.str()}};
        res.summary = "decay slope " + format_double(st.slope) + "\n";
        return res;
    };
}

inline Plan plan_translation(const Node& root) {
    root.expect_keys({"scenario", "seed", "grid", "kernel", "inputs", "pairs", "symbols", "truncation", "shifts_cells",
                      "p", "nu"});
    const auto c = parse_commutator_inputs(root);
    const auto trunc = config::parse_truncation(root.at("truncation"), c.grid);
    const auto shifts = config::parse_shifts(root.at("shifts_cells"), c.grid, false);
    const double p = root.positive_or("p", 1.0);
    const WeightSpec nu = config::parse_weight_or_unit(root, "nu");
    return [=]() {
        const auto st = translation_modulus_study(c.kernel, c.b, c.S, c.fs, trunc, shifts, p, nu);
        TextReport tr;
        tr.section("translation-modulus");
        tr.kv("delta", trunc.delta);
        tr.kv("slope", st.slope);
        RunResult res;
        res.outputs = {{"translation.csv", st.table.to_csv()}, {"report.txt", tr.str()}};
        res.summary = "translation slope " + format_double(st.slope) + "\n";
        return res;
    };
}

// ---------------------------------------------------------------------------
// fk-check and net-build

inline Plan plan_fk_check(const Node& root, std::uint64_t seed) {
    root.expect_keys({"scenario", "seed", "grid", "family", "p", "weight", "tail_radii", "shifts_cells", "p0",
                      "thresholds"});
    const Grid g = config::parse_grid(root.at("grid"));
    const FamilyOfFunctions F = config::parse_family(root.at("family"), g, seed);
    const double p = root.at("p").positive();
    const WeightSpec w = config::parse_weight_or_unit(root, "weight");
    const auto radii = root.at("tail_radii").numbers();
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) root.at("tail_radii").at(i).fail("must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1])) root.at("tail_radii").at(i).fail("tail radii must increase");
    }
    const auto shifts = config::parse_shifts(root.at("shifts_cells"), g);
    const double p0 = root.number_or("p0", 2.0);
    if (!(p0 > 1.0)) root.at("p0").fail("must exceed 1");
    FKThresholds th;
    if (root.has("thresholds")) {
        const Node t = root.at("thresholds");
        t.expect_keys({"tail", "modulus", "monotone"});
        th.tail = t.positive_or("tail", th.tail);
        th.modulus = t.positive_or("modulus", th.modulus);
        th.monotone = t.positive_or("monotone", th.monotone);
    }
    return [=]() {
        const auto r = fk_report(F, p, w, radii, shifts, p0);
        const auto v = fk_verdict(r, th);
        std::string mm = "member,shift_length,modulus\n";
        for (std::size_t i = 0; i < r.member_modulus.size(); ++i)
            for (std::size_t s = 0; s < r.shift_lengths.size(); ++s)
                mm += std::to_string(i) + "," + format_double(r.shift_lengths[s]) + "," +
                      format_double(r.member_modulus[i][s]) + "\n";
        TextReport tr;
        tr.section("fk-check");
        tr.kv("members", F.size());
        tr.kv("p", p);
        tr.kv("weight", w.label());
        tr.kv("uniform_bound", r.uniform_bound);
        tr.kv("dual_weight_finite", r.dual_weight_finite);
        tr.kv("weight_infimum", r.weight_infimum);
        for (const auto& s : r.warnings) tr.kv("warning", s);
        tr.kv("verdict", to_string(v.verdict));
        tr.kv("reason", v.reason);
        RunResult res;
        res.success = v.verdict == FKVerdict::Pass;
        res.outputs = {{"curves.csv", r.curves_table().to_csv()}, {"member_modulus.csv", mm}, {"report.txt", tr.str()}};
        res.summary = std::string("verdict: ") + to_string(v.verdict) + (v.reason.empty() ? "" : " (" + v.reason + ")") + "\n";
        return res;
    };
}

inline Plan plan_net_build(const Node& root, std::uint64_t seed) {
    root.expect_keys({"scenario", "seed", "grid", "family", "p", "weight", "epsilon", "mollification_radius",
                      "mollification_radius_cells", "tail_radius", "p0"});
    const Grid g = config::parse_grid(root.at("grid"));
    const FamilyOfFunctions F = config::parse_family(root.at("family"), g, seed);
    const double p = root.at("p").positive();
    const WeightSpec w = config::parse_weight_or_unit(root, "weight");
    const double t = config::parse_length(root, "mollification_radius", g);
    const double A = root.at("tail_radius").positive();
    const double p0 = root.number_or("p0", 2.0);
    if (!(p0 > 1.0)) root.at("p0").fail("must exceed 1");
    std::optional<double> eps;
    const Node e = root.at("epsilon");
    if (e.is_string()) {
        if (e.string() != "auto") e.fail("expected a positive number or \"auto\"");
    } else {
        eps = e.positive();
    }
    return [=]() {
        double epsilon = 0.0;
        if (eps) {
            epsilon = *eps;
        } else {
            // twice the larger of the modulus at the mollification radius and the tail at A
            const double cells = std::max(1.0, std::round(t / g.spacing()));
            Point u(g.dim(), 0.0);
            u[0] = cells * g.spacing();
            const auto r = fk_report(F, p, w, {A}, {u}, p0);
            epsilon = epsilon_from_report(r, 0, 0);
        }
        const auto c = build_net(F, p, w, epsilon, t, A, p0);
        std::string csv = "member,nearest,distance,selected\n";
        std::set<std::size_t> sel(c.selected.begin(), c.selected.end());
        for (std::size_t i = 0; i < F.size(); ++i)
            csv += std::to_string(i) + "," + std::to_string(c.nearest[i]) + "," + format_double(c.nearest_distance[i]) +
                   "," + (sel.count(i) ? "1" : "0") + "\n";
        TextReport tr;
        tr.section("net");
        tr.kv("epsilon", c.epsilon);
        tr.kv("mollification_radius", c.mollification_radius);
        tr.kv("tail_radius", c.tail_radius);
        tr.kv("p", c.p);
        tr.kv("metric_exponent", c.metric_exponent);
        tr.kv("selection_tolerance", c.selection_tolerance);
        tr.kv("mollification_error", c.mollification_error);
        tr.kv("tail_error", c.tail_error);
        std::vector<double> selected(c.selected.begin(), c.selected.end());
        tr.kv("selected", selected);
        tr.kv("max_distance", c.max_distance);
        tr.kv("certified_radius", c.certified_radius);
        tr.kv("pass", c.pass);
        RunResult res;
        res.success = c.pass;
        res.outputs = {{"certificate.txt", tr.str()}, {"distances.csv", csv}};
        res.summary = "net of " + std::to_string(c.selected.size()) + "/" + std::to_string(F.size()) + " members, max distance " +
                      format_double(c.max_distance) + " vs " + format_double(c.certified_radius) + (c.pass ? " pass" : " FAIL") + "\n";
        return res;
    };
}

// ---------------------------------------------------------------------------
// acceptance

inline Plan plan_acceptance(const Node& root, std::uint64_t seed) {
    root.expect_keys({"scenario", "seed"});
    return [=]() {
        const auto results = acceptance::run_suite(seed);
        std::string csv = "criterion,name,pass,detail\n";
        RunResult res;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            csv += std::to_string(i + 1) + "," + csv_text(r.name) + "," + (r.pass ? "1" : "0") + "," + csv_text(r.detail) + "\n";
            res.summary += std::string(r.pass ? "[PASS] " : "[FAIL] ") + r.name + " " + r.detail + "\n";
            res.success = res.success && r.pass;
        }
        res.outputs = {{"acceptance.csv", csv}};
        return res;
    };
}

}  // namespace detail

inline const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> kinds{
        "verify-kernel",          "ap-constant",      "run-operator",        "empirical-ratio",
        "commutator-run",         "commutator-convergence", "commutator-decay", "translation-modulus",
        "fk-check",               "net-build",        "acceptance"};
    return kinds;
}

/// Validates `cfg` for scenario `kind`, then runs it. Throws
/// config::ConfigError for invalid configurations (nothing computed) and
/// ScenarioError for module errors raised during the run.
inline RunResult run_scenario(const std::string& kind, const config::Json& cfg,
                              std::optional<std::uint64_t> seed_override = std::nullopt) {
    const config::Node root(cfg, "");
    if (!cfg.is_object()) root.fail("configuration must be an object");
    if (root.has("scenario") && root.at("scenario").string() != kind)
        root.at("scenario").fail("names '" + root.at("scenario").string() + "' but the subcommand is '" + kind + "'");
    const std::uint64_t seed = config::parse_seed(root, seed_override);

    detail::Plan plan;
    try {
        if (kind == "verify-kernel") plan = detail::plan_verify_kernel(root, seed);
        else if (kind == "ap-constant") plan = detail::plan_ap_constant(root, seed);
        else if (kind == "run-operator") plan = detail::plan_operator(root, false);
        else if (kind == "commutator-run") plan = detail::plan_operator(root, true);
        else if (kind == "empirical-ratio") plan = detail::plan_empirical_ratio(root, seed);
        else if (kind == "commutator-convergence") plan = detail::plan_convergence(root);
        else if (kind == "commutator-decay") plan = detail::plan_decay(root);
        else if (kind == "translation-modulus") plan = detail::plan_translation(root);
        else if (kind == "fk-check") plan = detail::plan_fk_check(root, seed);
        else if (kind == "net-build") plan = detail::plan_net_build(root, seed);
        else if (kind == "acceptance") plan = detail::plan_acceptance(root, seed);
        else throw config::ConfigError("scenario", "unknown scenario kind '" + kind + "'");
    } catch (const config::ConfigError&) {
        throw;
    } catch (const Error& e) {
        // a module constructor rejected a parsed value
        throw config::ConfigError("", e.what());
    }

    RunResult res;
    try {
        res = plan();
    } catch (const Error& e) {
        throw ScenarioError(kind, e);
    }
    res.scenario = kind;
    res.seed = seed;
    return res;
}

}  // namespace czlab
