#pragma once

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cplxinterp/harness/report.hpp"

#ifndef CPLXINTERP_DEFAULT_CONFIG
#define CPLXINTERP_DEFAULT_CONFIG "configs/default.json"
#endif

namespace cplxinterp::harness {

inline std::string summary_path(const std::string& out)
{
    const std::string ext = ".csv";
    std::string stem = out;
    if (stem.size() > ext.size() && stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0)
        stem.resize(stem.size() - ext.size());
    return stem + ".summary.txt";
}

/// The `verify` command.  Exit codes: 0 no FAIL, 1 FAIL (or an undecided
/// record under --strict), 2 bad arguments or configuration.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Numerical verification of interpolation estimates for injective tensor products", "verify"};
    std::string suite = "all";
    std::string config_path = CPLXINTERP_DEFAULT_CONFIG;
    std::uint64_t seed = 0;
    std::string out_path = "report.csv";
    bool strict = false, timings = false, progress = false;
    int jobs = 1;
    app.add_option("--suite", suite, "Suite to run")
        ->check(CLI::IsMember({"lemma4", "prop3", "cor6_7", "prop8", "theorem", "factorization", "all"}));
    app.add_option("--config", config_path, "Instance configuration (JSON)");
    app.add_option("--seed", seed, "Base seed");
    app.add_option("--out", out_path, "CSV report; the summary goes next to it");
    app.add_flag("--strict", strict, "Treat SKIPPED, INFORMATIONAL and STAGNATED records as failures");
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));
    app.add_flag("--timings", timings, "Fill the seconds column (the report is then no longer reproducible)");
    app.add_flag("--progress", progress, "Report finished tasks on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "verify: " << e.what() << '\n';
        return 2;
    }

    Config cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "verify: invalid configuration: " << e.what() << '\n';
        return 2;
    }

    RunOptions opt;
    opt.suites = expand_suite(suite);
    opt.seed = seed;
    opt.jobs = jobs;
    if (progress)
        opt.progress = [&err](size_t done, size_t total, const std::string& key) {
            err << "[" << done << "/" << total << "] " << key << '\n';
        };
    const auto recs = run_suites(cfg, opt);

    std::ofstream csv(out_path, std::ios::binary);
    if (!csv) {
        err << "verify: cannot write " << out_path << '\n';
        return 2;
    }
    write_csv(csv, recs, timings);
    std::ofstream sum(summary_path(out_path), std::ios::binary);
    write_summary(sum, recs, opt.suites, timings);
    write_summary(out, recs, opt.suites, timings, 10);
    return exit_code(recs, strict);
}

} // namespace cplxinterp::harness
