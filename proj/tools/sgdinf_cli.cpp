// Command-line front end: simulation studies, result tables and batch schedules.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgdinf/batchmeans.hpp"
#include "sgdinf/sim/config.hpp"
#include "sgdinf/sim/runner.hpp"

namespace fs = std::filesystem;
using namespace sgdinf;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 1;

struct SimulateArgs {
    std::string config;
    std::string out;
    std::size_t workers = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool fixed_design = false;
};

int simulate(const SimulateArgs& args, sim::Mode mode) {
    if (!fs::exists(args.config)) {
        std::cerr << "error: config file not found: " << args.config << '\n';
        return kExitConfig;
    }
    sim::SimConfig cfg;
    try {
        cfg = sim::load_config(args.config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (!args.out.empty()) cfg.out = args.out;
    if (args.workers > 0) cfg.workers = args.workers;
    if (args.seed_given) cfg.seed = args.seed;
    if (args.fixed_design) cfg.fixed_design = true;

    const char* other = mode == sim::Mode::LowDim ? "highdim-simulate" : "simulate";
    for (const auto& sc : cfg.scenarios)
        if (sc.mode != mode) {
            std::cerr << "error: " << cfg.source << ": scenario '" << sc.id << "' needs the " << other
                      << " subcommand\n";
            return kExitConfig;
        }

    bool failed = false;
    const auto results = sim::run_config(cfg, [&](const sim::ScenarioResult& r) {
        if (!r.error.empty()) {
            failed = true;
            std::cerr << "scenario " << r.id << " failed: " << r.error << '\n';
            return;
        }
        std::cerr << "scenario " << r.id << " done in " << std::fixed << std::setprecision(1) << r.wall_time << " s\n";
        std::cerr.unsetf(std::ios::floatfield);
    });
    try {
        sim::write_results(cfg.out, cfg, results);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    std::cout << "wrote " << (fs::path(cfg.out) / "results.csv").string() << " and results.json\n";
    return failed ? kExitRuntime : 0;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    return cells;
}

int report(const std::vector<std::string>& paths) {
    std::vector<std::vector<std::string>> table;
    for (const auto& p : paths) {
        fs::path file = p;
        if (fs::is_directory(file)) file /= "results.csv";
        std::ifstream in(file);
        if (!in) {
            std::cerr << "error: cannot read results file " << file.string() << '\n';
            return kExitConfig;
        }
        std::string line;
        std::getline(in, line);
        if (line != sim::csv_header()) {
            std::cerr << "error: " << file.string() << ": not a results.csv (unexpected header)\n";
            return kExitConfig;
        }
        if (table.empty()) table.push_back(split_csv(line));
        while (std::getline(in, line))
            if (!line.empty()) table.push_back(split_csv(line));
    }
    std::vector<std::size_t> width;
    for (const auto& row : table) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < table[r].size(); ++c) {
            const bool left = c < 2;
            std::cout << (c ? "  " : "") << (left ? std::left : std::right) << std::setw(static_cast<int>(width[c]))
                      << table[r][c];
        }
        std::cout << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w + 2;
            std::cout << std::string(total - 2, '-') << '\n';
        }
    }
    return 0;
}

int schedule_dump(std::size_t n, std::size_t m, double alpha, bool json) {
    try {
        const auto s = make_schedule(n, m, alpha);
        if (json) {
            std::cout << to_json(s).dump(2) << '\n';
            return 0;
        }
        for (std::size_t k = 0; k <= s.M; ++k) std::cout << (k ? " " : "") << s.boundaries[k];
        std::cout << '\n';
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence intervals from averaged SGD: coverage studies and utilities"};
    app.require_subcommand(1);

    SimulateArgs low, high;
    auto add_sim_flags = [](CLI::App* sub, SimulateArgs& a) {
        sub->add_option("--config", a.config, "scenario file (YAML)")->required();
        sub->add_option("--out", a.out, "output directory (overrides the config)");
        sub->add_option("--workers", a.workers, "parallel replications (overrides the config)")->check(CLI::PositiveNumber);
        sub->add_option("--seed", a.seed, "base seed (overrides the config)")->each([&a](const std::string&) {
            a.seed_given = true;
        });
        sub->add_flag("--fixed-design", a.fixed_design, "draw the covariate sequence once and reuse it in every replication");
    };
    auto* sim_cmd = app.add_subcommand("simulate", "low-dimensional coverage study (plug-in, batch-means, oracle)");
    add_sim_flags(sim_cmd, low);
    auto* hd_cmd = app.add_subcommand("highdim-simulate", "one-pass debiased sparse regression coverage study");
    add_sim_flags(hd_cmd, high);

    std::vector<std::string> report_paths;
    auto* rep_cmd = app.add_subcommand("report", "print results.csv files as a table");
    rep_cmd->add_option("paths", report_paths, "results.csv files or output directories")->required();

    std::size_t n = 0, m = 0;
    double alpha = 0.5;
    bool json = false;
    auto* sched_cmd = app.add_subcommand("schedule-dump", "print batch-means boundaries e_0 .. e_M");
    sched_cmd->add_option("--n", n, "number of iterations")->required();
    sched_cmd->add_option("--M", m, "number of batches after burn-in")->required();
    sched_cmd->add_option("--alpha", alpha, "step-size decay exponent");
    sched_cmd->add_flag("--json", json, "full schedule as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim_cmd) return simulate(low, sim::Mode::LowDim);
        if (*hd_cmd) return simulate(high, sim::Mode::HighDim);
        if (*rep_cmd) return report(report_paths);
        if (*sched_cmd) return schedule_dump(n, m, alpha, json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
