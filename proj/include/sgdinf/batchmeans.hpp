#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sgdinf/covariance.hpp"
#include "sgdinf/errors.hpp"
#include "sgdinf/linalg.hpp"
#include "sgdinf/sgd.hpp"

namespace sgdinf {

// Batch k covers iterates (e_{k-1}, e_k]; batch 0 = [1, e_0] is burn-in.
struct BatchSchedule {
    std::size_t M = 0;
    double N = 0.0;
    double alpha = 0.5;
    std::vector<std::size_t> boundaries;  // e_0 < e_1 < ... < e_M = n

    [[nodiscard]] std::size_t n() const { return boundaries.back(); }
    [[nodiscard]] std::size_t batch_size(std::size_t k) const {
        return k == 0 ? boundaries[0] : boundaries[k] - boundaries[k - 1];
    }
};

// M = round(n^c), the batch-count rule used in the simulations.
inline std::size_t batches_for_exponent(std::size_t n, double c) {
    return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), c) + 0.5));
}

/// Increasing batch sizes e_k = ((k+1) N)^{1/(1-alpha)} with N = n^{1-alpha}/(M+1).
/// Boundaries are rounded half-up, forced strictly increasing, and e_M is set to n.
inline BatchSchedule make_schedule(std::size_t n, std::size_t M, double alpha) {
    if (M < 1) throw ScheduleError("batch schedule needs M >= 1");
    if (!(alpha >= 0.5 && alpha < 1.0)) throw ScheduleError("batch schedule needs alpha in [0.5, 1)");
    if (n < (M + 1) * (M + 1))
        throw ScheduleError("batch schedule needs n >= (M+1)^2 (n=" + std::to_string(n) + ", M=" + std::to_string(M) +
                            ")");

    BatchSchedule s;
    s.M = M;
    s.alpha = alpha;
    s.N = std::pow(static_cast<double>(n), 1.0 - alpha) / static_cast<double>(M + 1);
    s.boundaries.resize(M + 1);
    const double power = 1.0 / (1.0 - alpha);
    for (std::size_t k = 0; k < M; ++k) {
        const double e = std::pow(static_cast<double>(k + 1) * s.N, power);
        auto ek = static_cast<std::size_t>(std::floor(e + 0.5));
        const std::size_t lo = k == 0 ? 1 : s.boundaries[k - 1] + 1;
        s.boundaries[k] = std::max(ek, lo);
    }
    s.boundaries[M] = n;
    if (s.boundaries[M - 1] >= n)
        throw ScheduleError("degenerate batch schedule: last batch would be empty (n=" + std::to_string(n) +
                            ", M=" + std::to_string(M) + ")");
    return s;
}

inline nlohmann::json to_json(const BatchSchedule& s) {
    return {{"n", s.n()}, {"M", s.M}, {"N", s.N}, {"alpha", s.alpha}, {"boundaries", s.boundaries}};
}

struct BatchMean {
    std::size_t size;
    Vector mean;
};

/// Streams iterates into per-batch means. Holds O(d M) numbers, never the trace.
class BatchAccumulator {
public:
    BatchAccumulator(BatchSchedule schedule, Eigen::Index d, bool diagonal_only = false)
        : schedule_(std::move(schedule)),
          current_sum_(Vector::Zero(d)),
          overall_sum_(Vector::Zero(d)),
          diagonal_only_(diagonal_only) {
        if (d < 1) throw InvalidArgument("batch-means dimension must be >= 1");
        if (schedule_.boundaries.size() != schedule_.M + 1) throw ScheduleError("schedule has wrong boundary count");
        batches_.reserve(schedule_.M);
    }

    void observe(std::size_t i, const Vector& x) {
        if (i != next_) throw ProtocolError("batch-means: expected iterate " + std::to_string(next_) + ", got " +
                                            std::to_string(i));
        if (i > schedule_.n()) throw ProtocolError("batch-means: iterate " + std::to_string(i) + " is past e_M");
        if (x.size() != current_sum_.size()) throw InvalidArgument("batch-means observe: dimension mismatch");
        current_sum_ += x;
        ++current_count_;
        ++next_;
        if (i == schedule_.boundaries[batch_]) close_batch();
    }

    [[nodiscard]] bool complete() const noexcept { return batch_ > schedule_.M; }
    [[nodiscard]] const BatchSchedule& schedule() const noexcept { return schedule_; }
    [[nodiscard]] const std::vector<BatchMean>& batches() const noexcept { return batches_; }
    [[nodiscard]] const Vector& burn_in_mean() const noexcept { return burn_in_mean_; }
    [[nodiscard]] std::size_t overall_count() const noexcept { return overall_count_; }
    [[nodiscard]] Vector overall_mean() const { return overall_sum_ / static_cast<double>(overall_count_); }

    // Number of doubles currently held; bounded by (M + 4) d + M.
    [[nodiscard]] std::size_t stored_values() const noexcept {
        const auto d = static_cast<std::size_t>(current_sum_.size());
        return batches_.size() * (d + 1) + 2 * d + static_cast<std::size_t>(burn_in_mean_.size());
    }

    [[nodiscard]] CovarianceEstimate finalize() const {
        if (!complete()) throw EstimatorError("batch-means finalized before all batches closed");
        if (batches_.empty()) throw EstimatorError("batch-means: no usable batches");
        const Eigen::Index d = current_sum_.size();
        const Vector grand = overall_mean();
        Matrix est = Matrix::Zero(d, d);
        for (const auto& b : batches_) {
            const Vector dev = b.mean - grand;
            const auto w = static_cast<double>(b.size);
            if (diagonal_only_)
                est.diagonal() += w * dev.cwiseAbs2();
            else
                est.noalias() += w * dev * dev.transpose();
        }
        est /= static_cast<double>(batches_.size());
        CovarianceEstimate out;
        out.matrix = symmetrized(est);
        out.estimator = "batchmeans";
        out.n = schedule_.n();
        out.parameters = {{"M", schedule_.M},
                          {"N", schedule_.N},
                          {"alpha", schedule_.alpha},
                          {"burn_in", schedule_.boundaries[0]},
                          {"diagonal_only", diagonal_only_}};
        return out;
    }

private:
    void close_batch() {
        Vector mean = current_sum_ / static_cast<double>(current_count_);
        if (batch_ == 0) {
            burn_in_mean_ = std::move(mean);
        } else {
            overall_sum_ += current_sum_;
            overall_count_ += current_count_;
            batches_.push_back({current_count_, std::move(mean)});
        }
        current_sum_.setZero();
        current_count_ = 0;
        ++batch_;
    }

    BatchSchedule schedule_;
    Vector current_sum_;
    Vector overall_sum_;
    Vector burn_in_mean_;
    std::vector<BatchMean> batches_;
    std::size_t batch_ = 0;
    std::size_t current_count_ = 0;
    std::size_t overall_count_ = 0;
    std::size_t next_ = 1;
    bool diagonal_only_;
};

class BatchMeansSink final : public EstimatorSink {
public:
    BatchMeansSink(BatchSchedule schedule, Eigen::Index d, std::string label = "batchmeans",
                   bool diagonal_only = false)
        : acc_(std::move(schedule), d, diagonal_only), label_(std::move(label)) {}

    [[nodiscard]] std::string name() const override { return label_; }
    void observe(const Observation& obs) override { acc_.observe(obs.index, obs.iterate); }
    [[nodiscard]] CovarianceEstimate finalize() const override { return acc_.finalize(); }
    [[nodiscard]] const BatchAccumulator& accumulator() const noexcept { return acc_; }

private:
    BatchAccumulator acc_;
    std::string label_;
};

}  // namespace sgdinf
