#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sgdinf/covariance.hpp"
#include "sgdinf/errors.hpp"
#include "sgdinf/linalg.hpp"
#include "sgdinf/model.hpp"
#include "sgdinf/rng.hpp"

namespace sgdinf {

// eta_i = eta * i^{-alpha}, alpha in [1/2, 1).
class StepSchedule {
public:
    StepSchedule(double eta, double alpha) : eta_(eta), alpha_(alpha) {
        if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("step scale eta must be positive");
        if (!(alpha >= 0.5 && alpha < 1.0))
            throw InvalidArgument("step decay alpha must lie in [0.5, 1), got " + std::to_string(alpha));
    }

    [[nodiscard]] double eta() const noexcept { return eta_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double step(std::size_t i) const { return eta_ * std::pow(static_cast<double>(i), -alpha_); }

private:
    double eta_;
    double alpha_;
};

inline double default_eta(ModelKind kind) { return kind == ModelKind::LinearRegression ? 0.5 : 1.0; }

struct SgdState {
    std::size_t n = 0;
    Vector x;
    Vector x_bar;
    Vector x0;

    static SgdState start(const Vector& x0) { return {0, x0, Vector::Zero(x0.size()), x0}; }
};

// x <- x - eta_{n+1} g, then fold the new iterate into the running mean.
inline void sgd_step(SgdState& state, const StepSchedule& schedule, const Vector& g) {
    const std::size_t i = state.n + 1;
    state.x.noalias() -= schedule.step(i) * g;
    state.n = i;
    if (!state.x.allFinite()) throw DivergenceError(i);
    state.x_bar += (state.x - state.x_bar) / static_cast<double>(i);
}

// What a sink sees at step i: the new iterate x_i and the stochastic gradient
// (plus Hessian, when requested) evaluated at the pre-step iterate x_{i-1}.
struct Observation {
    std::size_t index;
    const Vector& iterate;
    const Vector& gradient;
    const Matrix* hessian;
};

class EstimatorSink {
public:
    virtual ~EstimatorSink() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual bool needs_hessian() const { return false; }
    virtual void observe(const Observation& obs) = 0;
    [[nodiscard]] virtual CovarianceEstimate finalize() const = 0;
};

struct RunOptions {
    // CSV trace "iteration,x_1,...,x_d" written every `trace_every` steps.
    std::ostream* trace = nullptr;
    std::size_t trace_every = 0;
    // Called after every step with the updated state.
    std::function<void(const SgdState&)> on_step;
    // If set, covariates come from this stream and only responses from the run
    // rng, so two runs sharing it see the same design sequence.
    Rng* covariate_rng = nullptr;
};

struct SinkOutcome {
    std::string sink;
    std::optional<CovarianceEstimate> estimate;
    std::string error;

    [[nodiscard]] bool ok() const noexcept { return estimate.has_value(); }
};

struct RunResult {
    SgdState state;
    std::vector<SinkOutcome> outcomes;
};

/// Runs n SGD steps on fresh samples from `model`, feeding every sink once per
/// step, then finalizes each sink. Hessians are evaluated only if some sink
/// asks for them. A divergence aborts the run with DivergenceError; a sink that
/// fails to finalize is reported in its outcome instead.
inline RunResult run(const LossModel& model, std::size_t n, const StepSchedule& schedule, const Vector& x0,
                     std::span<EstimatorSink* const> sinks, Rng& rng, const RunOptions& options = {}) {
    if (n < 1) throw InvalidArgument("run: need at least one iteration");
    if (x0.size() != model.dim()) throw InvalidArgument("run: x0 dimension does not match model");

    bool want_hessian = false;
    for (const auto* s : sinks) want_hessian = want_hessian || s->needs_hessian();

    const Eigen::Index d = model.dim();
    SgdState state = SgdState::start(x0);
    DataPoint point;
    point.a.resize(d);
    Vector g(d);
    Matrix h;
    if (want_hessian) h.resize(d, d);

    if (options.trace) *options.trace << std::setprecision(17);

    for (std::size_t i = 1; i <= n; ++i) {
        if (options.covariate_rng) {
            model.sample_covariate(*options.covariate_rng, point.a);
            model.sample_response(rng, point);
        } else {
            model.sample_into(rng, point);
        }
        model.grad_into(state.x, point, g);
        if (want_hessian) model.hessian_into(state.x, point, h);
        sgd_step(state, schedule, g);

        const Observation obs{i, state.x, g, want_hessian ? &h : nullptr};
        for (auto* s : sinks) s->observe(obs);

        if (options.on_step) options.on_step(state);
        if (options.trace && options.trace_every && i % options.trace_every == 0) {
            *options.trace << i;
            for (Eigen::Index k = 0; k < d; ++k) *options.trace << ',' << state.x(k);
            *options.trace << '\n';
        }
    }

    RunResult result{std::move(state), {}};
    result.outcomes.reserve(sinks.size());
    for (const auto* s : sinks) {
        SinkOutcome out{s->name(), std::nullopt, {}};
        try {
            out.estimate = s->finalize();
        } catch (const Error& e) {
            out.error = e.what();
        }
        result.outcomes.push_back(std::move(out));
    }
    return result;
}

}  // namespace sgdinf
