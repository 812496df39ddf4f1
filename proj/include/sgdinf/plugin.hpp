#pragma once

#include <cstddef>
#include <string>

#include "sgdinf/covariance.hpp"
#include "sgdinf/errors.hpp"
#include "sgdinf/linalg.hpp"
#include "sgdinf/sgd.hpp"

namespace sgdinf {

struct ThresholdedHessian {
    Matrix matrix;   // A~ = Psi max(D, lambda_A / 2) Psi^T
    Matrix inverse;  // A~^{-1}
    std::size_t clamped = 0;
};

/// Eigenvalue floor at lambda_A / 2. If nothing is below the floor the input
/// is returned unchanged (bit for bit); otherwise the clamped reassembly.
inline ThresholdedHessian threshold_eigen_with_inverse(const Matrix& a, double lambda_a) {
    if (!(lambda_a > 0.0)) throw InvalidArgument("lambda_A must be positive");
    if (a.rows() != a.cols()) throw InvalidArgument("threshold_eigen: matrix is not square");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("threshold_eigen: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("threshold_eigen: eigendecomposition failed");

    const double floor = 0.5 * lambda_a;
    Vector clamped = es.eigenvalues();
    std::size_t count = 0;
    for (Eigen::Index k = 0; k < clamped.size(); ++k) {
        if (clamped(k) < floor) {
            clamped(k) = floor;
            ++count;
        }
    }
    const Matrix& psi = es.eigenvectors();
    ThresholdedHessian out;
    out.clamped = count;
    out.matrix = count == 0 ? a : symmetrized(psi * clamped.asDiagonal() * psi.transpose());
    out.inverse = symmetrized(psi * clamped.cwiseInverse().asDiagonal() * psi.transpose());
    return out;
}

inline Matrix threshold_eigen(const Matrix& a, double lambda_a) {
    return threshold_eigen_with_inverse(a, lambda_a).matrix;
}

/// Running sums for A_n = mean of Hessians and S_n = mean of gradient outer
/// products, both evaluated at the pre-step iterate.
class PluginAccumulator {
public:
    PluginAccumulator(Eigen::Index d, double lambda_a)
        : sum_h_(Matrix::Zero(d, d)), sum_g_(Matrix::Zero(d, d)), lambda_a_(lambda_a) {
        if (d < 1) throw InvalidArgument("plug-in accumulator dimension must be >= 1");
        if (!(lambda_a > 0.0)) throw InvalidArgument("lambda_A must be positive");
    }

    void observe(const Vector& g, const Matrix& h) {
        const Eigen::Index d = sum_h_.rows();
        if (g.size() != d || h.rows() != d || h.cols() != d)
            throw InvalidArgument("plug-in observe: dimension mismatch");
        sum_g_.noalias() += g * g.transpose();
        sum_h_ += h;
        ++count_;
    }

    [[nodiscard]] std::size_t count() const noexcept { return count_; }
    [[nodiscard]] double lambda_a() const noexcept { return lambda_a_; }
    [[nodiscard]] const Matrix& sum_hessian() const noexcept { return sum_h_; }
    [[nodiscard]] const Matrix& sum_grad_outer() const noexcept { return sum_g_; }

    [[nodiscard]] Matrix hessian_mean() const { return symmetrized(sum_h_ / static_cast<double>(count_)); }
    [[nodiscard]] Matrix grad_outer_mean() const { return symmetrized(sum_g_ / static_cast<double>(count_)); }

    [[nodiscard]] CovarianceEstimate finalize() const {
        if (count_ == 0) throw EstimatorError("plug-in estimator finalized with no observations");
        const auto thr = threshold_eigen_with_inverse(hessian_mean(), lambda_a_);
        const Matrix s = grad_outer_mean();
        CovarianceEstimate est;
        est.matrix = symmetrized(thr.inverse * s * thr.inverse);
        est.estimator = "plugin";
        est.n = count_;
        est.parameters = {{"lambda_A", lambda_a_}, {"clamped_eigenvalues", thr.clamped}};
        return est;
    }

private:
    Matrix sum_h_;
    Matrix sum_g_;
    double lambda_a_;
    std::size_t count_ = 0;
};

class PluginSink final : public EstimatorSink {
public:
    PluginSink(Eigen::Index d, double lambda_a) : acc_(d, lambda_a) {}

    [[nodiscard]] std::string name() const override { return "plugin"; }
    [[nodiscard]] bool needs_hessian() const override { return true; }

    void observe(const Observation& obs) override {
        if (obs.index != acc_.count() + 1) throw ProtocolError("plug-in sink: observations out of order");
        if (!obs.hessian) throw ProtocolError("plug-in sink needs the Hessian at every step");
        acc_.observe(obs.gradient, *obs.hessian);
    }

    [[nodiscard]] CovarianceEstimate finalize() const override { return acc_.finalize(); }
    [[nodiscard]] const PluginAccumulator& accumulator() const noexcept { return acc_; }

private:
    PluginAccumulator acc_;
};

}  // namespace sgdinf
