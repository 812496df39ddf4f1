#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgdinf/highdim/debias.hpp"
#include "sgdinf/model.hpp"
#include "sgdinf/rng.hpp"
#include "sgdinf/sim/aggregate.hpp"
#include "sgdinf/sim/config.hpp"
#include "sgdinf/sim/lowdim.hpp"

namespace sgdinf::sim {

// Node-wise target (gamma^j)* = -Omega_{j,-j} / Omega_jj for a known precision matrix.
inline Vector nodewise_target(const Matrix& omega, Eigen::Index j) {
    Vector row;
    highdim::drop_coordinate(omega.row(j).transpose(), j, row);
    return -row / omega(j, j);
}

inline highdim::RadarConfig radar_config(const RadarParams& p, const Vector& target, std::size_t sparsity) {
    highdim::RadarConfig c;
    c.initial_radius = std::max(p.radius_factor * target.lpNorm<1>(), p.radius_floor);
    c.epoch_constant = p.epoch_constant;
    c.lambda_constant = p.lambda_constant;
    c.sparsity = static_cast<double>(std::max<std::size_t>(1, sparsity));
    c.step_scale = p.step_scale;
    return c;
}

inline std::size_t support_size(const Vector& v, double tol = 1e-12) {
    return static_cast<std::size_t>((v.array().abs() > tol).count());
}

/// Sparse linear regression with x*_j ~ U[0, coef_max] on {1..s0} (one draw per
/// scenario), run through the one-pass debiased pipeline with known sigma.
class HighDimScenario {
public:
    HighDimScenario(ScenarioConfig cfg, std::uint64_t base_seed, bool fixed_design)
        : cfg_(std::move(cfg)), seed_(scenario_seed(base_seed, cfg_.id)), fixed_design_(fixed_design) {
        const auto d = static_cast<Eigen::Index>(cfg_.design.dimension);
        Vector truth = Vector::Zero(d);
        Rng truth_rng = make_rng(seed_, kTruthStream);
        std::uniform_real_distribution<double> coef(0.0, cfg_.highdim.coef_max);
        for (std::size_t k = 0; k < cfg_.highdim.sparsity; ++k) truth(static_cast<Eigen::Index>(k)) = coef(truth_rng);
        model_.emplace(cfg_.model_spec(truth));
        omega_ = spd_inverse(model_->covariance());

        const auto& hp = cfg_.highdim;
        solver_cfg_.regression = radar_config(hp.regression, truth, hp.sparsity);
        solver_cfg_.nodewise_for = [omega = omega_, p = hp.nodewise](Eigen::Index j) {
            const Vector target = nodewise_target(omega, j);
            return radar_config(p, target, support_size(target));
        };
        solver_cfg_.sigma = cfg_.sigma;
        solver_cfg_.q = cfg_.q;
    }

    [[nodiscard]] const ScenarioConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const Vector& truth() const { return model_->x_star(); }
    [[nodiscard]] const Matrix& precision() const noexcept { return omega_; }

    [[nodiscard]] std::vector<std::string> estimators() const { return {"Debiased S0", "Debiased S0c"}; }

    // Mean over the subset of 2 z sigma sqrt(Omega_jj / n).
    [[nodiscard]] double oracle_length(bool active) const {
        const std::size_t s0 = cfg_.highdim.sparsity, d = cfg_.design.dimension;
        const std::size_t first = active ? 0 : s0, last = active ? s0 : d;
        if (first == last) return std::numeric_limits<double>::quiet_NaN();
        const double z = two_sided_critical_value(cfg_.q);
        double total = 0.0;
        for (std::size_t j = first; j < last; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            total += 2.0 * z * cfg_.sigma * std::sqrt(omega_(jj, jj) / static_cast<double>(cfg_.n));
        }
        return total / static_cast<double>(last - first);
    }

    [[nodiscard]] Replication run_replication(std::size_t index) const {
        Replication rep;
        rep.index = index;
        rep.seed = derive_seed(seed_, index);
        Rng rng(rep.seed);
        std::optional<Rng> design_rng;
        if (fixed_design_) design_rng.emplace(derive_seed(seed_, kDesignStream));

        highdim::HighDimResult res;
        try {
            highdim::OnePassDebiasedLasso pipeline(model_->dim(), cfg_.n, solver_cfg_);
            DataPoint p;
            for (std::size_t t = 0; t < cfg_.n; ++t) {
                if (design_rng) {
                    model_->sample_covariate(*design_rng, p.a);
                    model_->sample_response(rng, p);
                } else {
                    model_->sample_into(rng, p);
                }
                pipeline.ingest(p.a, p.b);
            }
            res = pipeline.finish();
        } catch (const Error& e) {
            rep.failure = e.what();
            return rep;
        }

        const Vector& x = truth();
        res.report.mark(x);
        const std::size_t s0 = cfg_.highdim.sparsity, d = cfg_.design.dimension;
        rep.records.push_back(summarize("Debiased S0", res.report, 0, s0));
        if (s0 < d) rep.records.push_back(summarize("Debiased S0c", res.report, s0, d));

        const auto s = static_cast<Eigen::Index>(s0);
        const double lasso_err = (res.x_hat - x).head(s).lpNorm<Eigen::Infinity>();
        const double debiased_err = (res.x_debiased - x).head(s).lpNorm<Eigen::Infinity>();
        rep.extras = {{"lasso_l1_error", (res.x_hat - x).lpNorm<1>()},
                      {"lasso_sup_error_S0", lasso_err},
                      {"debiased_sup_error_S0", debiased_err},
                      {"omega_asymmetry", (res.precision.omega - res.precision.omega.transpose()).lpNorm<Eigen::Infinity>()}};
        return rep;
    }

    [[nodiscard]] nlohmann::json describe() const {
        const auto& hp = cfg_.highdim;
        auto radar = [](const RadarParams& p) {
            return nlohmann::json{{"epoch_constant", p.epoch_constant}, {"lambda_constant", p.lambda_constant},
                                  {"step_scale", p.step_scale},         {"radius_factor", p.radius_factor},
                                  {"radius_floor", p.radius_floor}};
        };
        std::vector<double> truth_vals(truth().data(), truth().data() + hp.sparsity);
        return {{"mode", "highdim"},
                {"design", to_string(cfg_.design.kind)},
                {"rho", cfg_.design.rho},
                {"dimension", cfg_.design.dimension},
                {"n", cfg_.n},
                {"sigma", cfg_.sigma},
                {"q", cfg_.q},
                {"sparsity", hp.sparsity},
                {"active_coefficients", truth_vals},
                {"radar", radar(hp.regression)},
                {"nodewise", radar(hp.nodewise)}};
    }

private:
    ScenarioConfig cfg_;
    std::uint64_t seed_;
    bool fixed_design_;
    std::optional<LossModel> model_;
    Matrix omega_;
    highdim::HighDimConfig solver_cfg_;
};

}  // namespace sgdinf::sim
