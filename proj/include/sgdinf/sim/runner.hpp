#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgdinf/sim/aggregate.hpp"
#include "sgdinf/sim/config.hpp"
#include "sgdinf/sim/highdim.hpp"
#include "sgdinf/sim/lowdim.hpp"
#include "sgdinf/sim/parallel.hpp"

namespace sgdinf::sim {

struct ScenarioResult {
    std::string id;
    std::vector<AggregateRow> rows;
    std::vector<Replication> replications;
    nlohmann::json description;
    std::string error;  // set when the scenario could not be run or aggregated
    double wall_time = 0.0;
};

// Replication index -> Replication, for either scenario kind.
template <class Scenario>
std::vector<Replication> run_replications(const Scenario& sc, std::size_t n_sim, std::size_t workers) {
    return parallel_map(n_sim, workers, [&](std::size_t i) { return sc.run_replication(i); });
}

inline ScenarioResult run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::size_t workers,
                                   bool fixed_design) {
    ScenarioResult out;
    out.id = cfg.id;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (cfg.mode == Mode::LowDim) {
            const LowDimScenario sc(cfg, seed, fixed_design);
            out.description = sc.describe();
            out.replications = run_replications(sc, cfg.n_sim, workers);
            out.rows = aggregate(cfg.id, out.replications, sc.estimators());
            for (auto& r : out.rows) r.oracle_len = sc.oracle_length();
        } else {
            const HighDimScenario sc(cfg, seed, fixed_design);
            out.description = sc.describe();
            out.replications = run_replications(sc, cfg.n_sim, workers);
            auto names = sc.estimators();
            if (cfg.highdim.sparsity == cfg.design.dimension) names.pop_back();
            out.rows = aggregate(cfg.id, out.replications, names);
            for (auto& r : out.rows) r.oracle_len = sc.oracle_length(r.estimator == "Debiased S0");
        }
    } catch (const Error& e) {
        out.error = e.what();
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : out.rows) r.wall_time = out.wall_time;
    return out;
}

inline std::vector<ScenarioResult> run_config(const SimConfig& cfg,
                                              const std::function<void(const ScenarioResult&)>& on_done = {}) {
    std::vector<ScenarioResult> results;
    for (const auto& sc : cfg.scenarios) {
        results.push_back(run_scenario(sc, cfg.seed, cfg.workers, cfg.fixed_design));
        if (on_done) on_done(results.back());
    }
    return results;
}

inline std::vector<AggregateRow> all_rows(const std::vector<ScenarioResult>& results) {
    std::vector<AggregateRow> rows;
    for (const auto& r : results) rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    return rows;
}

inline nlohmann::json results_json(const SimConfig& cfg, const std::vector<ScenarioResult>& results) {
    auto scenarios = nlohmann::json::array();
    for (const auto& r : results) {
        auto rows = nlohmann::json::array();
        for (const auto& row : r.rows) rows.push_back(to_json(row));
        nlohmann::json extras = nlohmann::json::array();
        for (const auto& rep : r.replications)
            if (!rep.extras.empty()) extras.push_back(nlohmann::json{{"replication", rep.index}, {"values", rep.extras}});
        nlohmann::json s = {{"id", r.id},
                            {"setup", r.description},
                            {"rows", rows},
                            {"failures", failures_json(r.replications)},
                            {"replication_diagnostics", extras},
                            {"wall_time_s", r.wall_time}};
        if (!r.error.empty()) s["error"] = r.error;
        scenarios.push_back(std::move(s));
    }
    return {{"config", cfg.source},
            {"seed", cfg.seed},
            {"workers", cfg.workers},
            {"fixed_design", cfg.fixed_design},
            {"std_err_formula", "100 * sqrt(p (1 - p) / (n_ok * coordinates))"},
            {"scenarios", scenarios}};
}

// Writes results.csv and results.json under `dir`.
inline void write_results(const std::filesystem::path& dir, const SimConfig& cfg,
                          const std::vector<ScenarioResult>& results) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "results.csv", std::ios::binary);
        if (!csv) throw ConfigError("cannot write " + (dir / "results.csv").string());
        write_csv(csv, all_rows(results));
    }
    std::ofstream js(dir / "results.json", std::ios::binary);
    if (!js) throw ConfigError("cannot write " + (dir / "results.json").string());
    js << results_json(cfg, results).dump(2) << '\n';
}

}  // namespace sgdinf::sim
