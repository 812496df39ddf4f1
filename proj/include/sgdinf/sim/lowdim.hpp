#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgdinf/batchmeans.hpp"
#include "sgdinf/inference.hpp"
#include "sgdinf/model.hpp"
#include "sgdinf/plugin.hpp"
#include "sgdinf/rng.hpp"
#include "sgdinf/sgd.hpp"
#include "sgdinf/sim/aggregate.hpp"
#include "sgdinf/sim/config.hpp"

namespace sgdinf::sim {

// Stream labels for the scenario-level generators; replication i uses index i.
inline constexpr std::uint64_t kDesignStream = 0x8000'0000'0000'0001ULL;
inline constexpr std::uint64_t kOracleStream = 0x8000'0000'0000'0002ULL;
inline constexpr std::uint64_t kTruthStream = 0x8000'0000'0000'0003ULL;

// FNV-1a, so a scenario's seed depends on its id and not its position in the file.
inline std::uint64_t scenario_seed(std::uint64_t base, const std::string& id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : id) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return derive_seed(base, h);
}

inline std::string bm_label(double c) {
    std::ostringstream os;
    os << "BM(" << c << ')';
    return os.str();
}

/// Everything about a low-dimensional scenario that is shared by its
/// replications: model, oracle covariance, lambda_A and batch schedules.
class LowDimScenario {
public:
    LowDimScenario(ScenarioConfig cfg, std::uint64_t base_seed, bool fixed_design)
        : cfg_(std::move(cfg)),
          seed_(scenario_seed(base_seed, cfg_.id)),
          fixed_design_(fixed_design),
          model_(cfg_.model_spec(linspace_truth(cfg_.design.dimension))),
          schedule_(cfg_.eta, cfg_.alpha) {
        Rng oracle_rng = make_rng(seed_, kOracleStream);
        oracle_ = oracle_covariance(model_, cfg_.oracle_samples, oracle_rng);
        // A = Sigma for linear models; for logistic the oracle is A^{-1}.
        lambda_a_ = model_.kind() == ModelKind::LinearRegression ? min_eigenvalue(model_.covariance())
                                                                 : 1.0 / max_eigenvalue(oracle_.matrix);
        for (double c : cfg_.batch_exponents) {
            const std::size_t m = batches_for_exponent(cfg_.n, c);
            schedules_.push_back({c, make_schedule(cfg_.n, m, cfg_.alpha)});
        }
    }

    [[nodiscard]] const ScenarioConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const LossModel& model() const noexcept { return model_; }
    [[nodiscard]] const OracleCovariance& oracle() const noexcept { return oracle_; }
    [[nodiscard]] double lambda_a() const noexcept { return lambda_a_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] double oracle_length() const { return mean_oracle_ci_length(oracle_, static_cast<double>(cfg_.n), cfg_.q); }

    [[nodiscard]] std::vector<std::string> estimators() const {
        std::vector<std::string> names;
        if (cfg_.plugin) names.emplace_back("Plug-in");
        for (const auto& [c, s] : schedules_) names.push_back(bm_label(c));
        if (cfg_.oracle) names.emplace_back("Oracle");
        return names;
    }

    /// One SGD run with every configured estimator attached. Divergence is
    /// recorded on the replication; an estimator that fails to finalize is
    /// recorded on its own entry.
    [[nodiscard]] Replication run_replication(std::size_t index) const {
        Replication rep;
        rep.index = index;
        rep.seed = derive_seed(seed_, index);
        Rng rng(rep.seed);
        std::optional<Rng> design_rng;
        if (fixed_design_) design_rng.emplace(derive_seed(seed_, kDesignStream));

        const Eigen::Index d = model_.dim();
        std::vector<std::unique_ptr<EstimatorSink>> owned;
        std::vector<std::string> labels;
        if (cfg_.plugin) {
            owned.push_back(std::make_unique<PluginSink>(d, lambda_a_));
            labels.emplace_back("Plug-in");
        }
        for (const auto& [c, s] : schedules_) {
            owned.push_back(std::make_unique<BatchMeansSink>(s, d, bm_label(c)));
            labels.push_back(bm_label(c));
        }
        std::vector<EstimatorSink*> sinks;
        for (auto& s : owned) sinks.push_back(s.get());

        RunOptions opts;
        opts.covariate_rng = design_rng ? &*design_rng : nullptr;
        RunResult result;
        try {
            result = run(model_, cfg_.n, schedule_, Vector::Zero(d), sinks, rng, opts);
        } catch (const DivergenceError& e) {
            rep.diverged = true;
            rep.divergence_step = e.iteration;
            return rep;
        }

        const auto n = static_cast<double>(cfg_.n);
        const Vector& x_bar = result.state.x_bar;
        for (std::size_t k = 0; k < result.outcomes.size(); ++k) {
            const auto& out = result.outcomes[k];
            if (!out.ok()) {
                rep.records.push_back(failed_record(labels[k], out.error));
                continue;
            }
            try {
                auto ci = confidence_interval(x_bar, *out.estimate, n, cfg_.q);
                ci.mark(model_.x_star());
                rep.records.push_back(summarize(labels[k], ci));
            } catch (const Error& e) {
                rep.records.push_back(failed_record(labels[k], e.what()));
            }
        }
        if (cfg_.oracle) {
            auto ci = confidence_interval(x_bar, oracle_.matrix, n, cfg_.q);
            ci.mark(model_.x_star());
            rep.records.push_back(summarize("Oracle", ci));
        }
        rep.extras["error_l2"] = (x_bar - model_.x_star()).norm();
        return rep;
    }

    [[nodiscard]] nlohmann::json describe() const {
        auto sched = nlohmann::json::array();
        for (const auto& [c, s] : schedules_) sched.push_back({{"exponent", c}, {"schedule", to_json(s)}});
        return {{"mode", "lowdim"},
                {"model", to_string(cfg_.model)},
                {"design", to_string(cfg_.design.kind)},
                {"rho", cfg_.design.rho},
                {"dimension", cfg_.design.dimension},
                {"n", cfg_.n},
                {"alpha", cfg_.alpha},
                {"eta", cfg_.eta},
                {"q", cfg_.q},
                {"lambda_A", lambda_a_},
                {"oracle_method", oracle_.method == OracleMethod::ClosedForm ? "closed_form" : "monte_carlo"},
                {"oracle_samples", cfg_.oracle_samples},
                {"batch_schedules", sched}};
    }

private:
    ScenarioConfig cfg_;
    std::uint64_t seed_;
    bool fixed_design_;
    LossModel model_;
    StepSchedule schedule_;
    OracleCovariance oracle_;
    double lambda_a_ = 0.0;
    std::vector<std::pair<double, BatchSchedule>> schedules_;
};

}  // namespace sgdinf::sim
