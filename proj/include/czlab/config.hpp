#pragma once

// Experiment configuration: a JSON document per run, read through a thin
// path-tracking view so every validation failure names the offending field.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "czlab/commutators.hpp"
#include "czlab/compactness.hpp"
#include "czlab/core.hpp"
#include "czlab/funcspace.hpp"
#include "czlab/kernels.hpp"
#include "czlab/operators.hpp"
#include "czlab/weights.hpp"

namespace czlab::config {

using Json = nlohmann::json;

/// ConfigError carrying the field path, e.g. "inputs[1].radius".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& msg)
        : Error(ErrorKind::ConfigError, (path.empty() ? std::string("<root>") : path) + ": " + msg),
          path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Read-only view of a JSON value together with its path from the root.
class Node {
public:
    Node(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const Json& json() const { return *j_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_, msg); }

    bool is_object() const { return j_->is_object(); }
    bool is_array() const { return j_->is_array(); }
    bool is_string() const { return j_->is_string(); }
    bool is_number() const { return j_->is_number(); }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    Node at(const std::string& key) const {
        if (!j_->is_object()) fail("expected an object");
        if (!j_->contains(key)) throw ConfigError(child(key), "required field is missing");
        return Node((*j_)[key], child(key));
    }

    Node at(std::size_t i) const {
        if (!j_->is_array()) fail("expected an array");
        if (i >= j_->size()) fail("index " + std::to_string(i) + " out of range");
        return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]");
    }

    std::size_t size() const {
        if (!j_->is_array()) fail("expected an array");
        return j_->size();
    }

    /// Rejects keys outside `allowed`; catches misspelled fields early.
    void expect_keys(std::initializer_list<const char*> allowed) const {
        if (!j_->is_object()) fail("expected an object");
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : j_->items())
            if (!ok.count(k)) throw ConfigError(child(k), "unknown field");
    }

    double number() const {
        if (!j_->is_number()) fail("expected a number");
        const double v = j_->get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }

    double positive() const {
        const double v = number();
        if (!(v > 0.0)) fail("expected a positive number");
        return v;
    }

    std::size_t count() const {
        if (!j_->is_number_integer() || j_->get<long long>() < 0) fail("expected a nonnegative integer");
        return static_cast<std::size_t>(j_->get<long long>());
    }

    std::string string() const {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }

    bool boolean() const {
        if (!j_->is_boolean()) fail("expected true or false");
        return j_->get<bool>();
    }

    std::vector<double> numbers(bool nonempty = true) const {
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
        if (nonempty && out.empty()) fail("list must be nonempty");
        return out;
    }

    Point point(std::size_t n) const {
        auto v = numbers();
        if (v.size() != n) fail("expected " + std::to_string(n) + " coordinates");
        return v;
    }

    double number_or(const std::string& key, double dflt) const { return has(key) ? at(key).number() : dflt; }
    double positive_or(const std::string& key, double dflt) const { return has(key) ? at(key).positive() : dflt; }
    std::size_t count_or(const std::string& key, std::size_t dflt) const { return has(key) ? at(key).count() : dflt; }
    std::string string_or(const std::string& key, std::string dflt) const {
        return has(key) ? at(key).string() : std::move(dflt);
    }
    bool boolean_or(const std::string& key, bool dflt) const { return has(key) ? at(key).boolean() : dflt; }

    template <class... Keys>
    std::string one_of(const Keys&... keys) const {
        std::vector<std::string> present;
        (..., (has(keys) ? present.push_back(keys) : void()));
        std::string names;
        (..., (names += (names.empty() ? "" : " or ") + std::string(keys)));
        if (present.size() != 1) fail("exactly one of " + names + " is required");
        return present.front();
    }

private:
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json* j_;
    std::string path_;
};

// ---------------------------------------------------------------------------
// Scalars and small records

/// {"n": 1, "half_width": 2, "points_per_axis": 32}
inline Grid parse_grid(const Node& g) {
    g.expect_keys({"n", "half_width", "points_per_axis"});
    const std::size_t n = g.at("n").count();
    if (n == 0) g.at("n").fail("dimension must be positive");
    const double L = g.at("half_width").positive();
    const std::size_t N = g.at("points_per_axis").count();
    if (N == 0 || N % 2 != 0) g.at("points_per_axis").fail("must be a positive even integer");
    return Grid(n, L, N);
}

/// "unit" or {"alpha": a, "eps": e} for (eps + |x|)^alpha.
inline WeightSpec parse_weight(const Node& w) {
    if (w.is_string()) {
        if (w.string() != "unit") w.fail("the only named weight is \"unit\"");
        return WeightSpec::unit();
    }
    w.expect_keys({"alpha", "eps"});
    const double alpha = w.at("alpha").number();
    const double eps = w.number_or("eps", 0.0);
    if (eps < 0.0) w.at("eps").fail("must be nonnegative");
    return WeightSpec::power(alpha, eps);
}

inline WeightSpec parse_weight_or_unit(const Node& parent, const std::string& key) {
    return parent.has(key) ? parse_weight(parent.at(key)) : WeightSpec::unit();
}

inline std::uint64_t parse_seed(const Node& root, std::optional<std::uint64_t> override_seed) {
    if (override_seed) return *override_seed;
    if (!root.has("seed")) root.fail("field 'seed' is required (or pass --seed)");
    const Node s = root.at("seed");
    if (!s.json().is_number_unsigned()) s.fail("expected a nonnegative integer");
    return s.json().get<std::uint64_t>();
}

/// {"label": "K1", "m": 2}; n comes from the grid when one is given.
inline KernelSpec parse_kernel(const Node& k, std::optional<std::size_t> grid_n = std::nullopt) {
    k.expect_keys({"label", "m", "n"});
    const std::string label = k.at("label").string();
    if (label != "K1" && label != "K2" && label != "K3" && label != "zero")
        k.at("label").fail("unknown kernel label '" + label + "' (built-ins: K1, K2, K3, zero)");
    const std::size_t m = k.at("m").count();
    if (m == 0) k.at("m").fail("must be at least 1");
    std::size_t n = grid_n.value_or(1);
    if (k.has("n")) {
        n = k.at("n").count();
        if (n == 0) k.at("n").fail("must be at least 1");
        if (grid_n && n != *grid_n) k.at("n").fail("does not match the grid dimension");
    }
    return kernels::by_label(label, m, n);
}

/// Optional {"t_min", "ratio", "steps"}; default r = 2^{1/4} over [2^-12, 2^12].
inline ScaleFamily parse_scales(const Node& parent, KernelSpec base) {
    if (!parent.has("scales")) return ScaleFamily::with_default_grid(std::move(base));
    const Node s = parent.at("scales");
    s.expect_keys({"t_min", "ratio", "steps"});
    const double t_min = s.at("t_min").positive();
    const double ratio = s.at("ratio").number();
    if (!(ratio > 1.0)) s.at("ratio").fail("must exceed 1");
    const std::size_t steps = s.at("steps").count();
    if (steps == 0) s.at("steps").fail("must be positive");
    return ScaleFamily(std::move(base), t_min, ratio, steps);
}

/// A length given either in absolute units (`key`) or in cells (`key_cells`).
inline double parse_length(const Node& parent, const std::string& key, const Grid& g) {
    const std::string cells = key + "_cells";
    const std::string which = parent.one_of(key, cells);
    const double v = parent.at(which).positive();
    return which == cells ? v * g.spacing() : v;
}

inline std::vector<double> parse_lengths(const Node& parent, const std::string& key, const Grid& g) {
    const std::string cells = key + "_cells";
    const std::string which = parent.one_of(key, cells);
    const Node list = parent.at(which);
    std::vector<double> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const double v = list.at(i).positive();
        out.push_back(which == cells ? v * g.spacing() : v);
    }
    if (out.empty()) list.fail("list must be nonempty");
    return out;
}

/// Shifts in whole cells: [1, 2, 4] along the first axis, or vectors [[1, 0], [0, 1]].
inline std::vector<Point> parse_shifts(const Node& list, const Grid& g, bool allow_zero = true) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const Node s = list.at(i);
        Point u(g.dim(), 0.0);
        auto cell = [&](const Node& c) {
            if (!c.json().is_number_integer()) c.fail("shifts are whole numbers of cells");
            return static_cast<double>(c.json().get<long long>()) * g.spacing();
        };
        if (s.is_array()) {
            if (s.size() != g.dim()) s.fail("expected " + std::to_string(g.dim()) + " components");
            for (std::size_t d = 0; d < g.dim(); ++d) u[d] = cell(s.at(d));
        } else {
            u[0] = cell(s);
        }
        if (!allow_zero && euclidean_norm(u) == 0.0) s.fail("shift must be nonzero");
        out.push_back(std::move(u));
    }
    if (out.empty()) list.fail("list must be nonempty");
    return out;
}

/// {"delta": x} or {"delta_cells": k}, optional "cutoff": "smooth" | "sharp".
inline TruncationPolicy parse_truncation(const Node& t, const Grid& g) {
    t.expect_keys({"delta", "delta_cells", "cutoff"});
    TruncationPolicy tp;
    tp.delta = parse_length(t, "delta", g);
    tp.cutoff = Cutoff::Smooth;
    if (t.has("cutoff")) {
        const std::string c = t.at("cutoff").string();
        if (c == "sharp") tp.cutoff = Cutoff::Sharp;
        else if (c != "smooth") t.at("cutoff").fail("expected \"smooth\" or \"sharp\"");
    }
    return tp;
}

inline Cutoff parse_cutoff_or(const Node& parent, Cutoff dflt) {
    if (!parent.has("cutoff")) return dflt;
    const std::string c = parent.at("cutoff").string();
    if (c == "sharp") return Cutoff::Sharp;
    if (c == "smooth") return Cutoff::Smooth;
    parent.at("cutoff").fail("expected \"smooth\" or \"sharp\"");
}

/// "decimated" (default, stride 4), "all", {"stride": k}, or an explicit list of points.
inline std::vector<Point> parse_points(const Node& parent, const std::string& key, const Grid& g) {
    if (!parent.has(key)) return decimated_points(g);
    const Node p = parent.at(key);
    if (p.is_string()) {
        const std::string s = p.string();
        if (s == "all") return all_points(g);
        if (s == "decimated") return decimated_points(g);
        p.fail("expected \"all\", \"decimated\", {\"stride\": k} or a list of points");
    }
    if (p.is_object()) {
        p.expect_keys({"stride"});
        const std::size_t k = p.at("stride").count();
        if (k == 0) p.at("stride").fail("must be positive");
        return decimated_points(g, k);
    }
    std::vector<Point> out;
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back(p.at(i).point(g.dim()));
    if (out.empty()) p.fail("list must be nonempty");
    return out;
}

/// [[i, j], ...], 1-based (symbol, slot) pairs.
inline IndexSet parse_pairs(const Node& list, std::size_t m) {
    IndexSet S;
    for (std::size_t k = 0; k < list.size(); ++k) {
        const Node p = list.at(k);
        if (p.size() != 2) p.fail("expected a pair [i, j]");
        const std::size_t i = p.at(0).count(), j = p.at(1).count();
        if (i < 1) p.at(0).fail("symbol index is 1-based");
        if (j < 1 || j > m) p.at(1).fail("slot must lie in 1.." + std::to_string(m));
        S.insert(i, j);
    }
    return S;
}

/// [1, 2] -> sorted unique 1-based slots, each <= m.
inline SlotSet parse_slots(const Node& list, std::size_t m) {
    std::set<std::size_t> s;
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::size_t j = list.at(k).count();
        if (j < 1 || j > m) list.at(k).fail("slot must lie in 1.." + std::to_string(m));
        if (!s.insert(j).second) list.at(k).fail("duplicate slot");
    }
    return SlotSet(s.begin(), s.end());
}

// ---------------------------------------------------------------------------
// Function recipes

inline ScalarField bump_field(Point c, double R, double amp) {
    return [c = std::move(c), R, amp](std::span<const double> x) {
        const double r = distance(x, c) / R;
        return r < 1.0 ? amp * std::exp(1.0 / (r * r - 1.0)) : 0.0;
    };
}

struct Recipe {
    std::string kind;
    ScalarField field;
    // bump parameters, kept so bump symbols can use the analytic gradient
    Point center;
    double radius = 0.0;
    double amplitude = 1.0;
    double value = 0.0;  // constant
};

inline Point center_or_origin(const Node& r, std::size_t n) {
    return r.has("center") ? r.at("center").point(n) : Point(n, 0.0);
}

/// Input-function recipes. All kinds take an optional "center" (default origin).
///   bump      radius, amplitude = 1       a exp(1 / (|x-c|^2/R^2 - 1)) inside the ball
///   gaussian  width, amplitude = 1        a exp(-|x-c|^2 / (2 w^2))
///   constant  value
///   zero
///   linear    coefficients, offset = 0    offset + <coefficients, x - c>
///   sin_bump  frequency, radius, amplitude = 1, phase = 0
///             sin(2 pi k (x_1 - c_1) + phase) times the bump
inline Recipe parse_recipe(const Node& r, std::size_t n) {
    Recipe out;
    out.kind = r.at("kind").string();
    const std::string& k = out.kind;
    if (k == "bump") {
        r.expect_keys({"kind", "center", "radius", "amplitude"});
        out.center = center_or_origin(r, n);
        out.radius = r.at("radius").positive();
        out.amplitude = r.number_or("amplitude", 1.0);
        out.field = bump_field(out.center, out.radius, out.amplitude);
    } else if (k == "gaussian") {
        r.expect_keys({"kind", "center", "width", "amplitude"});
        const Point c = center_or_origin(r, n);
        const double w = r.at("width").positive();
        const double a = r.number_or("amplitude", 1.0);
        out.field = [c, w, a](std::span<const double> x) {
            const double d = distance(x, c);
            return a * std::exp(-d * d / (2.0 * w * w));
        };
    } else if (k == "constant") {
        r.expect_keys({"kind", "value"});
        out.value = r.at("value").number();
        out.field = [v = out.value](std::span<const double>) { return v; };
    } else if (k == "zero") {
        r.expect_keys({"kind"});
        out.field = [](std::span<const double>) { return 0.0; };
    } else if (k == "linear") {
        r.expect_keys({"kind", "center", "coefficients", "offset"});
        const Point c = center_or_origin(r, n);
        const Point a = r.at("coefficients").point(n);
        const double b = r.number_or("offset", 0.0);
        out.field = [c, a, b](std::span<const double> x) {
            double s = b;
            for (std::size_t d = 0; d < x.size(); ++d) s += a[d] * (x[d] - c[d]);
            return s;
        };
    } else if (k == "sin_bump") {
        r.expect_keys({"kind", "center", "frequency", "radius", "amplitude", "phase"});
        const Point c = center_or_origin(r, n);
        const double freq = r.at("frequency").number();
        const double phase = r.number_or("phase", 0.0);
        auto phi = bump_field(c, r.at("radius").positive(), r.number_or("amplitude", 1.0));
        out.field = [c, freq, phase, phi](std::span<const double> x) {
            return std::sin(2.0 * std::numbers::pi * freq * (x[0] - c[0]) + phase) * phi(x);
        };
    } else {
        r.at("kind").fail("unknown recipe kind '" + k + "' (bump, gaussian, constant, zero, linear, sin_bump)");
    }
    return out;
}

inline std::vector<SampledFunction> parse_inputs(const Node& list, const Grid& g, std::optional<std::size_t> arity) {
    std::vector<SampledFunction> out;
    for (std::size_t i = 0; i < list.size(); ++i) out.push_back(sample(parse_recipe(list.at(i), g.dim()).field, g));
    if (out.empty()) list.fail("list must be nonempty");
    if (arity && out.size() != *arity) list.fail("expected " + std::to_string(*arity) + " input functions (one per slot)");
    return out;
}

/// {"1": recipe, "2": recipe}. Bumps keep their analytic gradient bound;
/// constants are exact; other kinds get a finite-difference bound.
inline SymbolSet parse_symbols(const Node& obj, const Grid& g) {
    if (!obj.is_object()) obj.fail("expected an object mapping symbol indices to recipes");
    SymbolSet b;
    for (const auto& [key, val] : obj.json().items()) {
        const Node r = obj.at(key);
        std::size_t i = 0;
        try {
            std::size_t used = 0;
            i = std::stoul(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            r.fail("symbol keys are positive integers");
        }
        if (i < 1) r.fail("symbol indices are 1-based");
        const Recipe rec = parse_recipe(r, g.dim());
        if (rec.kind == "bump") b.set(i, bump_symbol(g, rec.center, rec.radius, rec.amplitude));
        else if (rec.kind == "constant") b.set(i, constant_symbol(g, rec.value));
        else if (rec.kind == "zero") b.set(i, constant_symbol(g, 0.0));
        else b.set(i, symbol_from_function(g, rec.field, rec.kind));
    }
    return b;
}

/// Families of functions on one grid.
///   {"kind": "members", "members": [recipe, ...]}
///   {"kind": "translates", "base": recipe, "step_cells": s, "count": c}
///        base(x - k s h e_1), k = 0..c-1
///   {"kind": "oscillation", "frequencies": [...], "radius": R, "center": c}
///        sin(2^k pi x_1) bump(x), one member per k
///   {"kind": "perturbed", "base": recipe, "count": c, "amplitude": a, "modes": 3}
///        base + k a noise, noise a seeded random trigonometric sum times the base
inline FamilyOfFunctions parse_family(const Node& f, const Grid& g, std::uint64_t seed) {
    const std::string kind = f.at("kind").string();
    const std::size_t n = g.dim();
    FamilyOfFunctions F;
    if (kind == "members") {
        f.expect_keys({"kind", "members"});
        for (const auto& s : parse_inputs(f.at("members"), g, std::nullopt)) F.push_back(s);
    } else if (kind == "translates") {
        f.expect_keys({"kind", "base", "step_cells", "count"});
        const auto base = parse_recipe(f.at("base"), n).field;
        const Node sc = f.at("step_cells");
        if (!sc.json().is_number_integer()) sc.fail("expected an integer number of cells");
        const double step = static_cast<double>(sc.json().get<long long>()) * g.spacing();
        const std::size_t count = f.at("count").count();
        if (count == 0) f.at("count").fail("must be positive");
        for (std::size_t k = 0; k < count; ++k) {
            const double s = static_cast<double>(k) * step;
            F.push_back(sample([base, s](std::span<const double> x) {
                Point y(x.begin(), x.end());
                y[0] -= s;
                return base(y);
            }, g));
        }
    } else if (kind == "oscillation") {
        f.expect_keys({"kind", "frequencies", "radius", "center"});
        const auto phi = bump_field(center_or_origin(f, n), f.at("radius").positive(), 1.0);
        const Node fr = f.at("frequencies");
        for (std::size_t i = 0; i < fr.size(); ++i) {
            const double k = fr.at(i).number();
            F.push_back(sample([k, phi](std::span<const double> x) {
                return std::sin(std::exp2(k) * std::numbers::pi * x[0]) * phi(x);
            }, g));
        }
        if (F.empty()) fr.fail("list must be nonempty");
    } else if (kind == "perturbed") {
        f.expect_keys({"kind", "base", "count", "amplitude", "modes"});
        const auto base = parse_recipe(f.at("base"), n).field;
        const std::size_t count = f.at("count").count();
        if (count == 0) f.at("count").fail("must be positive");
        const double amp = f.at("amplitude").number();
        const std::size_t modes = f.count_or("modes", 3);
        Rng rng(seed);
        std::vector<double> freq(modes), phase(modes), a(modes);
        for (std::size_t q = 0; q < modes; ++q) {
            freq[q] = rng.uniform(1.0, 4.0);
            phase[q] = rng.uniform(0.0, 2.0 * std::numbers::pi);
            a[q] = rng.uniform(-1.0, 1.0);
        }
        for (std::size_t k = 0; k < count; ++k) {
            const double c = static_cast<double>(k) * amp;
            F.push_back(sample([=](std::span<const double> x) {
                double s = 0.0;
                for (std::size_t q = 0; q < modes; ++q) s += a[q] * std::sin(freq[q] * x[0] + phase[q]);
                const double b = base(x);
                return b + c * s * b;
            }, g));
        }
    } else {
        f.at("kind").fail("unknown family kind '" + kind + "' (members, translates, oscillation, perturbed)");
    }
    return F;
}

}  // namespace czlab::config
