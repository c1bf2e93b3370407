#pragma once

// Argument handling shared by the chemo_sim binary and the CLI tests.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "chemo/cli/commands.hpp"
#include "chemo/cli/config.hpp"

namespace chemo::cli {

inline int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Chemotaxis-consumption simulator with nonlocal sources"};
    app.require_subcommand(1, 1);
    std::string config_path;
    CliOptions opts;
    std::string out_dir;

    std::vector<std::pair<CLI::App*, Command>> subs;
    auto add = [&](const char* name, const char* help, Command cmd) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config (YAML)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->add_option("--workers", opts.workers, "concurrent sweep points")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", opts.quiet, "suppress progress output");
        subs.emplace_back(sub, cmd);
    };
    add("run", "simulate one configuration", Command::Run);
    add("sweep", "simulate the Cartesian product of the sweep section", Command::Sweep);
    add("classify", "print the regime report as JSON", Command::Classify);
    add("check-inequality", "sample the interpolation inequality", Command::CheckInequality);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (!out_dir.empty()) opts.out_dir = out_dir;

    std::ifstream in(config_path);
    if (!in) {
        err << "error: cannot read config " << config_path << '\n';
        return kExitUsage;
    }
    std::ostringstream text;
    text << in.rdbuf();
    const ParseResult parsed = parse_config(text.str());
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) err << "error: " << e << '\n';
        return kExitUsage;
    }
    const ExperimentConfig& cfg = *parsed.config;

    Command cmd = Command::Run;
    for (const auto& [sub, c] : subs) {
        if (sub->parsed()) cmd = c;
    }
    switch (cmd) {
        case Command::Run: return cmd_run(cfg, opts, out, err);
        case Command::Sweep: return cmd_sweep(cfg, opts, out, err);
        case Command::Classify: return cmd_classify(cfg, opts, out, err);
        case Command::CheckInequality: return cmd_check_inequality(cfg, opts, out, err);
    }
    return kExitUsage;
}

}  // namespace chemo::cli
