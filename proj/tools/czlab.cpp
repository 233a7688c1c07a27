// czlab: batch experiment runner. One subcommand per scenario kind; each run
// reads a JSON config, writes its outputs plus manifest.json into --out.
//
// exit codes: 0 success, 1 scenario failure (module error, failed
// certificate, verdict or criterion), 2 configuration or usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "czlab/runner.hpp"

namespace fs = std::filesystem;

namespace {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        out += buf;
    }
    return out;
}

bool read_file(const std::string& path, std::string& out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    std::ostringstream ss;
    ss << is.rdbuf();
    out = ss.str();
    return true;
}

struct Options {
    std::string config;
    std::string out = "out";
    int threads = 1;
    std::optional<std::uint64_t> seed;
};

int run(const std::string& kind, const Options& opt) {
    std::string text;
    if (!read_file(opt.config, text)) {
        std::cerr << "config error: cannot read '" << opt.config << "'\n";
        return 2;
    }
    czlab::config::Json cfg;
    try {
        cfg = czlab::config::Json::parse(text);
    } catch (const czlab::config::Json::parse_error& e) {
        std::cerr << "config error: " << opt.config << " is not valid JSON: " << e.what() << '\n';
        return 2;
    }
    czlab::set_thread_count(opt.threads);

    const auto t0 = std::chrono::steady_clock::now();
    czlab::RunResult res;
    try {
        res = czlab::run_scenario(kind, cfg, opt.seed);
    } catch (const czlab::config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const czlab::ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::ordered_json manifest;
    manifest["tool"] = "czlab";
    manifest["tool_version"] = czlab::tool_version;
    manifest["scenario"] = res.scenario;
    manifest["seed"] = res.seed;
    manifest["threads"] = czlab::thread_count();
    manifest["config"] = opt.config;
    manifest["config_sha256"] = sha256_hex(text);
    manifest["success"] = res.success;
    manifest["outputs"] = nlohmann::ordered_json::array();
    try {
        fs::create_directories(opt.out);
        for (const auto& o : res.outputs) {
            std::ofstream os(fs::path(opt.out) / o.name, std::ios::binary);
            os << o.content;
            if (!os) throw std::runtime_error("cannot write " + (fs::path(opt.out) / o.name).string());
            manifest["outputs"].push_back({{"name", o.name}, {"sha256", sha256_hex(o.content)}, {"bytes", o.content.size()}});
        }
        manifest["wall_time_seconds"] = wall;
        std::ofstream ms(fs::path(opt.out) / "manifest.json", std::ios::binary);
        ms << manifest.dump(2) << '\n';
        if (!ms) throw std::runtime_error("cannot write manifest.json");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cout << res.summary;
    std::cout << "outputs written to " << opt.out << '\n';
    return res.success ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"czlab: numerical experiments on multilinear singular integrals, commutators and compactness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(czlab::tool_version));

    Options opt;
    std::uint64_t seed = 0;
    std::string chosen;
    for (const auto& kind : czlab::scenario_kinds()) {
        auto* sub = app.add_subcommand(kind, "run the " + kind + " scenario");
        sub->add_option("--config", opt.config, "JSON configuration file")->required();
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--threads", opt.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->callback([&, kind, sub] {
            chosen = kind;
            if (sub->count("--seed")) opt.seed = seed;
        });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return run(chosen, opt);
}
