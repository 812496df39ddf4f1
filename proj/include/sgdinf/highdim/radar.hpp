#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "sgdinf/errors.hpp"
#include "sgdinf/highdim/lp_prox.hpp"
#include "sgdinf/linalg.hpp"

namespace sgdinf::highdim {

struct RadarConfig {
    double initial_radius = 1.0;   // R_1, an upper bound on ||x*||_1
    double epoch_constant = 1.0;   // c_1 in T_i >= c_1 s^2 log d / R_i^2
    double lambda_constant = 1.0;  // c in lambda_i^2 = c R_i sqrt(log d) / (s sqrt(T_i))
    double sparsity = 1.0;         // assumed s = ||x*||_0
    std::size_t total_n = 0;       // iteration budget shared by all epochs
    double step_scale = 1.0;       // multiplies the dual-averaging step (divides beta_t)
};

struct Epoch {
    std::size_t length;  // T_i
    double radius;       // R_i
    double lambda;       // lambda_i
};

inline double log_dim(Eigen::Index d) { return std::log(std::max<double>(2.0, static_cast<double>(d))); }

/// Epoch lengths T_i = ceil(c_1 s^2 log d / R_i^2) with R_{i+1} = R_i / sqrt(2),
/// taken in order while the budget lasts; the remainder (shorter than the next
/// epoch would need) is folded into the last epoch so the lengths sum to total_n.
inline std::vector<Epoch> plan_epochs(const RadarConfig& cfg, Eigen::Index d) {
    if (!(cfg.initial_radius > 0.0)) throw InvalidArgument("RADAR: initial radius must be positive");
    if (!(cfg.epoch_constant > 0.0) || !(cfg.lambda_constant >= 0.0))
        throw InvalidArgument("RADAR: epoch and lambda constants must be positive");
    const double s = std::max(1.0, cfg.sparsity);
    const double ld = log_dim(d);

    auto length_for = [&](double r) {
        const double t = std::ceil(cfg.epoch_constant * s * s * ld / (r * r));
        return t >= 1e15 ? std::size_t{1'000'000'000'000'000} : std::max<std::size_t>(1, static_cast<std::size_t>(t));
    };
    auto lambda_for = [&](double r, std::size_t t) {
        return std::sqrt(cfg.lambda_constant * r * std::sqrt(ld) / (s * std::sqrt(static_cast<double>(t))));
    };

    std::vector<Epoch> plan;
    std::size_t remaining = cfg.total_n;
    double r = cfg.initial_radius;
    while (true) {
        const std::size_t t = length_for(r);
        if (t > remaining) break;
        plan.push_back({t, r, 0.0});
        remaining -= t;
        r /= std::numbers::sqrt2;
    }
    if (plan.empty())
        throw ConfigError("RADAR: budget of " + std::to_string(cfg.total_n) + " points cannot cover the first epoch (" +
                          std::to_string(length_for(cfg.initial_radius)) + " needed)");
    plan.back().length += remaining;
    for (auto& e : plan) e.lambda = lambda_for(e.radius, e.length);
    return plan;
}

struct EpochRecord {
    Epoch epoch;
    Vector center_out;  // y_{i+1}
};

/// Regularization-annealed epoch dual averaging, driven one gradient at a
/// time. Callers evaluate the stochastic gradient at `iterate()` and pass it
/// to `step()`; `solution()` is the last prox center.
///
/// Within epoch i the dual-averaging update is
///     x_t = argmin_{||x - y_i||_p <= R_i} <g_bar_t, x> + lambda_i ||x||_1 + (beta_t / 2) ||x - y_i||_p^2
/// with g_bar_t the mean epoch gradient and beta_t = G sqrt(2) / (R_i sqrt((p-1) t)),
/// G being the running RMS of ||g||_q (q the dual exponent). The epoch output
/// y_{i+1} is the average of x_1..x_{T_i}.
class RadarSolver {
public:
    RadarSolver(Eigen::Index d, const RadarConfig& cfg, Vector start = {})
        : plan_(plan_epochs(cfg, d)), prox_(prox_exponent(d)), d_(d), step_scale_(cfg.step_scale) {
        if (!(step_scale_ > 0.0)) throw InvalidArgument("RADAR: step scale must be positive");
        center_ = start.size() == 0 ? Vector::Zero(d) : std::move(start);
        if (center_.size() != d) throw InvalidArgument("RADAR: start point has wrong dimension");
        q_ = prox_.p() / (prox_.p() - 1.0);
        begin_epoch();
    }

    [[nodiscard]] const Vector& iterate() const noexcept { return x_; }
    [[nodiscard]] bool finished() const noexcept { return epoch_ >= plan_.size(); }
    [[nodiscard]] const Vector& solution() const noexcept { return center_; }
    [[nodiscard]] const std::vector<Epoch>& plan() const noexcept { return plan_; }
    [[nodiscard]] const std::vector<EpochRecord>& history() const noexcept { return history_; }
    [[nodiscard]] double prox_p() const noexcept { return prox_.p(); }
    // Largest ||x_t - y_i||_p - R_i seen so far (<= 0 means always feasible).
    [[nodiscard]] double max_constraint_violation() const noexcept { return max_violation_; }

    void step(const Vector& g) {
        if (finished()) throw ProtocolError("RADAR: step after the budget was exhausted");
        if (g.size() != d_) throw InvalidArgument("RADAR: gradient has wrong dimension");
        const Epoch& e = plan_[epoch_];
        ++t_;
        grad_sum_ += g;
        const double gq = dual_norm(g);
        grad_sq_sum_ += gq * gq;
        total_seen_ += 1.0;
        const double g_scale = std::max(std::sqrt(grad_sq_sum_ / total_seen_), 1e-12);
        const double beta = g_scale * std::numbers::sqrt2 /
                            (e.radius * std::sqrt((prox_.p() - 1.0) * static_cast<double>(t_)) * step_scale_);

        x_ = prox_.solve(grad_sum_ / static_cast<double>(t_), e.lambda, beta, center_, e.radius);
        max_violation_ = std::max(max_violation_, lp_norm(x_ - center_, prox_.p()) - e.radius);
        iterate_sum_ += x_;

        if (t_ == e.length) {
            center_ = iterate_sum_ / static_cast<double>(t_);
            history_.push_back({e, center_});
            ++epoch_;
            if (!finished()) begin_epoch();
        }
    }

private:
    void begin_epoch() {
        t_ = 0;
        x_ = center_;
        grad_sum_ = Vector::Zero(d_);
        iterate_sum_ = Vector::Zero(d_);
    }

    [[nodiscard]] double dual_norm(const Vector& g) const { return lp_norm(g, q_); }

    std::vector<Epoch> plan_;
    LpBallProx prox_;
    Eigen::Index d_;
    double step_scale_;
    double q_ = 2.0;
    Vector center_;
    Vector x_;
    Vector grad_sum_;
    Vector iterate_sum_;
    std::vector<EpochRecord> history_;
    std::size_t epoch_ = 0;
    std::size_t t_ = 0;
    double grad_sq_sum_ = 0.0;
    double total_seen_ = 0.0;
    double max_violation_ = -std::numeric_limits<double>::infinity();
};

}  // namespace sgdinf::highdim
