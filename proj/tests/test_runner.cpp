#include <string>

#include "catch_amalgamated.hpp"
#include "czlab/runner.hpp"

using namespace czlab;
using config::Json;

namespace {

Json operator_config() {
    return Json::parse(R"({
      "seed": 1,
      "grid": {"n": 1, "half_width": 2.0, "points_per_axis": 32},
      "kernel": {"label": "K1", "m": 2},
      "operator": "T",
      "inputs": [{"kind": "bump", "center": [0.1], "radius": 1.0},
                 {"kind": "gaussian", "center": [-0.1], "width": 0.4}],
      "truncation": {"delta_cells": 4}
    })");
}

std::string config_error_path(const std::string& kind, const Json& cfg) {
    try {
        run_scenario(kind, cfg);
    } catch (const config::ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

const std::string& output(const RunResult& r, const std::string& name) {
    for (const auto& o : r.outputs)
        if (o.name == name) return o.content;
    throw std::runtime_error("missing output " + name);
}

}  // namespace

TEST_CASE("config errors name the field", "[runner]") {
    auto c = operator_config();
    c["inputs"][1]["width"] = -1.0;
    CHECK(config_error_path("run-operator", c) == "inputs[1].width");

    c = operator_config();
    c["truncation"]["cutof"] = "sharp";
    CHECK(config_error_path("run-operator", c) == "truncation.cutof");

    c = operator_config();
    c.erase("seed");
    CHECK(config_error_path("run-operator", c) == "");
    CHECK_NOTHROW(run_scenario("run-operator", c, 5));

    c = operator_config();
    c["kernel"]["label"] = "K9";
    CHECK(config_error_path("run-operator", c) == "kernel.label");

    c = operator_config();
    c["inputs"].erase(1);
    CHECK(config_error_path("run-operator", c) == "inputs");

    c = operator_config();
    c["scenario"] = "fk-check";
    CHECK(config_error_path("run-operator", c) == "scenario");

    CHECK(config_error_path("no-such-scenario", operator_config()) == "scenario");

    c = operator_config();
    c["truncation"] = {{"delta_cells", 4}, {"delta", 0.5}};
    CHECK(config_error_path("run-operator", c) == "truncation");
}

TEST_CASE("module errors surface as scenario errors", "[runner]") {
    auto c = operator_config();
    c["truncation"]["delta_cells"] = 1;
    CHECK_THROWS_AS(run_scenario("run-operator", c), ScenarioError);
}

TEST_CASE("identical configs give identical outputs at any thread count", "[runner]") {
    const auto c = operator_config();
    set_thread_count(1);
    const auto a = run_scenario("run-operator", c);
    set_thread_count(3);
    const auto b = run_scenario("run-operator", c);
    set_thread_count(1);
    REQUIRE(a.outputs.size() == b.outputs.size());
    for (std::size_t i = 0; i < a.outputs.size(); ++i) CHECK(a.outputs[i].content == b.outputs[i].content);
}

TEST_CASE("zero family fk-check passes with all-zero curves", "[runner]") {
    const auto c = Json::parse(R"({
      "seed": 1,
      "grid": {"n": 1, "half_width": 1.0, "points_per_axis": 32},
      "family": {"kind": "members", "members": [{"kind": "zero"}]},
      "p": 2.0,
      "tail_radii": [0.25, 0.5],
      "shifts_cells": [0, 1, 2]
    })");
    const auto r = run_scenario("fk-check", c);
    CHECK(r.success);
    const auto& curves = output(r, "curves.csv");
    CHECK(curves.rfind("curve,abscissa,value\n", 0) == 0);
    std::size_t rows = 0;
    for (std::size_t pos = curves.find('\n') + 1; pos < curves.size(); pos = curves.find('\n', pos) + 1) {
        const auto line = curves.substr(pos, curves.find('\n', pos) - pos);
        CHECK(line.substr(line.rfind(',') + 1) == "0");
        ++rows;
    }
    CHECK(rows == 6);
    CHECK(output(r, "report.txt").find("verdict = pass") != std::string::npos);
}

TEST_CASE("seeded scenarios follow the seed", "[runner]") {
    const auto c = Json::parse(R"({
      "seed": 3,
      "kernel": {"label": "K1", "m": 2},
      "conditions": ["hoelder-x"],
      "samples": 50
    })");
    const auto a = run_scenario("verify-kernel", c);
    const auto b = run_scenario("verify-kernel", c);
    const auto d = run_scenario("verify-kernel", c, 4);
    CHECK(output(a, "ratios.csv") == output(b, "ratios.csv"));
    CHECK(output(a, "ratios.csv") != output(d, "ratios.csv"));
}

TEST_CASE("csv text quoting", "[runner]") {
    CHECK(csv_text("plain") == "plain");
    CHECK(csv_text("a,b") == "\"a,b\"");
    CHECK(csv_text("say \"x\"") == "\"say \"\"x\"\"\"");
}
