// kolmo_lab: command-line runner for the verification experiments.
//
//   kolmo_lab <kind> --config run.json [--seed N] [--out DIR] [--plots]
//
// Exit codes: 0 success, 2 config error, 3 numerical guard tripped, 4 inequality violation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "kolmo/lab/runner.hpp"

namespace {

using kolmo::lab::json;

json load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw kolmo::ConfigError("cannot open config " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw kolmo::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kolmogorov-equation verification lab"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool plots = false;
    for (const char* name : {"propagate", "decay-check", "thickness", "spectral-fit", "interp-verify", "telescope"}) {
        auto* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "override the output directory");
        sub->add_flag("--plots", plots, "also write SVG plots");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kolmo::lab::exit_config;
    }
    const std::string kind = app.get_subcommands().front()->get_name();

    kolmo::lab::ExperimentConfig cfg;
    try {
        auto j = load(config_path);
        if (!j.is_object()) throw kolmo::ConfigError("config must be a JSON object");
        if (!j.contains("kind")) j["kind"] = kind;
        if (j["kind"] != kind)
            throw kolmo::ConfigError("config kind '" + j["kind"].dump() + "' does not match subcommand '" + kind + "'");
        cfg = kolmo::lab::parse_config(j);
    } catch (const kolmo::Error& e) {
        std::cerr << "kolmo_lab " << kind << ": config error: " << e.what() << '\n';
        return kolmo::lab::exit_config;
    }
    if (app.get_subcommands().front()->count("--seed")) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.plots = cfg.plots || plots;

    try {
        return kolmo::lab::run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "kolmo_lab " << kind << ": internal error: " << e.what() << '\n';
        return kolmo::lab::exit_internal;
    }
}
