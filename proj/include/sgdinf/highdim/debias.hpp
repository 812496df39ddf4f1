#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "sgdinf/errors.hpp"
#include "sgdinf/highdim/radar.hpp"
#include "sgdinf/inference.hpp"
#include "sgdinf/linalg.hpp"

namespace sgdinf::highdim {

// Node-wise coefficients, their residual scales and the assembled Omega = T C.
struct PrecisionEstimate {
    std::vector<Vector> gamma;  // gamma[j] has length d-1, coordinates k != j in order
    Vector tau;
    Matrix omega;
};

// Copies row `a` without coordinate j.
inline void drop_coordinate(const Eigen::Ref<const Vector>& a, Eigen::Index j, Vector& out) {
    const Eigen::Index d = a.size();
    out.resize(d - 1);
    out.head(j) = a.head(j);
    out.tail(d - 1 - j) = a.tail(d - 1 - j);
}

/// One pass of RADAR over the rows of (D, b) for min E (b - a^T x)^2 + lambda ||x||_1.
inline Vector radar_least_squares(const Matrix& D, const Vector& b, const RadarConfig& cfg,
                                  std::vector<EpochRecord>* history = nullptr) {
    if (D.rows() != b.size()) throw InvalidArgument("radar_least_squares: D and b disagree on n");
    RadarConfig c = cfg;
    c.total_n = static_cast<std::size_t>(D.rows());
    RadarSolver solver(D.cols(), c);
    Vector g(D.cols());
    for (Eigen::Index t = 0; t < D.rows(); ++t) {
        const auto a = D.row(t).transpose();
        g.noalias() = (a.dot(solver.iterate()) - b(t)) * a;
        solver.step(g);
    }
    if (history) *history = solver.history();
    return solver.solution();
}

/// RADAR fit of a_j on a_{-j}; each row of D is used once, in order.
inline Vector nodewise_fit(Eigen::Index j, const Matrix& D, const RadarConfig& cfg) {
    const Eigen::Index d = D.cols();
    if (j < 0 || j >= d) throw InvalidArgument("nodewise_fit: coordinate out of range");
    if (d < 2) throw InvalidArgument("nodewise_fit: need at least two columns");
    RadarConfig c = cfg;
    c.total_n = static_cast<std::size_t>(D.rows());
    RadarSolver solver(d - 1, c);
    Vector rest(d - 1), g(d - 1);
    for (Eigen::Index t = 0; t < D.rows(); ++t) {
        drop_coordinate(D.row(t).transpose(), j, rest);
        g.noalias() = (rest.dot(solver.iterate()) - D(t, j)) * rest;
        solver.step(g);
    }
    return solver.solution();
}

// tau_j = (1/n) (D_j - D_{-j} gamma_j)^T D_j, the estimate of 1 / Omega_jj.
inline double tau_hat(Eigen::Index j, const Matrix& D, const Vector& gamma_j) {
    const Eigen::Index d = D.cols();
    if (gamma_j.size() != d - 1) throw InvalidArgument("tau_hat: gamma has wrong length");
    Vector fitted = Vector::Zero(D.rows());
    if (j > 0) fitted.noalias() += D.leftCols(j) * gamma_j.head(j);
    if (j < d - 1) fitted.noalias() += D.rightCols(d - 1 - j) * gamma_j.tail(d - 1 - j);
    const double tau = (D.col(j) - fitted).dot(D.col(j)) / static_cast<double>(D.rows());
    if (!(tau > 0.0)) throw NumericalError("tau_hat: non-positive residual scale for coordinate " + std::to_string(j));
    return tau;
}

// C has unit diagonal and -gamma^j_k off the diagonal in row j; Omega_j = C_j / tau_j.
inline PrecisionEstimate build_omega(std::vector<Vector> gammas, Vector taus) {
    const auto d = static_cast<Eigen::Index>(gammas.size());
    if (taus.size() != d) throw InvalidArgument("build_omega: need one tau per row");
    Matrix omega(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (gammas[j].size() != d - 1) throw InvalidArgument("build_omega: gamma has wrong length");
        if (!(taus(j) > 0.0)) throw NumericalError("build_omega: tau must be positive");
        omega(j, j) = 1.0;
        for (Eigen::Index k = 0, m = 0; k < d; ++k) {
            if (k == j) continue;
            omega(j, k) = -gammas[j](m++);
        }
        omega.row(j) /= taus(j);
    }
    return {std::move(gammas), std::move(taus), std::move(omega)};
}

// x_d = x_hat + (1/n) Omega D^T (b - D x_hat)
inline Vector debias(const Vector& x_hat, const Matrix& omega, const Matrix& D, const Vector& b) {
    if (D.cols() != x_hat.size() || omega.rows() != x_hat.size() || omega.cols() != x_hat.size() ||
        D.rows() != b.size())
        throw InvalidArgument("debias: dimension mismatch");
    const Vector residual = b - D * x_hat;
    return x_hat + omega * (D.transpose() * residual) / static_cast<double>(D.rows());
}

/// x_d_j +/- z_{q/2} sigma sqrt((Omega A Omega^T)_jj / n) with A = D^T D / n.
inline CiReport highdim_ci(const Vector& x_d, const Matrix& omega, const Matrix& D, double sigma, double q) {
    const auto n = static_cast<double>(D.rows());
    const Matrix a_hat = D.transpose() * D / n;
    const Matrix v = omega * a_hat * omega.transpose();
    const double z = two_sided_critical_value(q);
    Vector hw(x_d.size());
    for (Eigen::Index j = 0; j < x_d.size(); ++j) hw(j) = z * sigma * std::sqrt(std::max(v(j, j), 0.0) / n);
    return make_report(x_d, hw, q);
}

// sqrt(RSS / (n - |support|)); optional stand-in when sigma is not known.
inline double residual_sigma(const Matrix& D, const Vector& b, const Vector& x_hat) {
    const double rss = (b - D * x_hat).squaredNorm();
    const auto support = static_cast<double>((x_hat.array() != 0.0).count());
    const double dof = std::max(1.0, static_cast<double>(D.rows()) - support);
    return std::sqrt(rss / dof);
}

struct HighDimConfig {
    RadarConfig regression;  // total_n is set from the data
    RadarConfig nodewise;    // template; initial_radius/sparsity may be overridden per row
    std::function<RadarConfig(Eigen::Index j)> nodewise_for;  // optional per-coordinate override
    double sigma = 1.0;
    double q = 0.05;
};

struct HighDimResult {
    Vector x_hat;
    Vector x_debiased;
    PrecisionEstimate precision;
    CiReport report;
};

/// Streaming form of the one-pass procedure: every ingested point advances the
/// regression solver and all d node-wise solvers by one step, and is appended
/// to the stored design for the final debiasing.
class OnePassDebiasedLasso {
public:
    OnePassDebiasedLasso(Eigen::Index d, std::size_t n, HighDimConfig cfg) : cfg_(std::move(cfg)), d_(d), n_(n) {
        if (d < 2) throw InvalidArgument("high-dimensional pipeline needs d >= 2");
        if (n < 1) throw InvalidArgument("high-dimensional pipeline needs n >= 1");
        D_.resize(static_cast<Eigen::Index>(n), d);
        b_.resize(static_cast<Eigen::Index>(n));
        RadarConfig rc = cfg_.regression;
        rc.total_n = n;
        regression_.emplace(d, rc);
        nodewise_.reserve(static_cast<std::size_t>(d));
        for (Eigen::Index j = 0; j < d; ++j) {
            RadarConfig nc = cfg_.nodewise_for ? cfg_.nodewise_for(j) : cfg_.nodewise;
            nc.total_n = n;
            nodewise_.emplace_back(d - 1, nc);
        }
        g_.resize(d);
        rest_.resize(d - 1);
        gj_.resize(d - 1);
    }

    void ingest(const Vector& a, double b) {
        if (rows_ >= n_) throw ProtocolError("one-pass pipeline: more points than the declared budget");
        if (a.size() != d_) throw InvalidArgument("one-pass pipeline: covariate has wrong dimension");
        const auto t = static_cast<Eigen::Index>(rows_++);
        D_.row(t) = a.transpose();
        b_(t) = b;

        g_.noalias() = (a.dot(regression_->iterate()) - b) * a;
        regression_->step(g_);
        for (Eigen::Index j = 0; j < d_; ++j) {
            auto& solver = nodewise_[static_cast<std::size_t>(j)];
            drop_coordinate(a, j, rest_);
            gj_.noalias() = (rest_.dot(solver.iterate()) - a(j)) * rest_;
            solver.step(gj_);
        }
    }

    [[nodiscard]] HighDimResult finish() const {
        if (rows_ != n_) throw ProtocolError("one-pass pipeline: finished before the budget was consumed");
        std::vector<Vector> gammas;
        gammas.reserve(static_cast<std::size_t>(d_));
        Vector taus(d_);
        for (Eigen::Index j = 0; j < d_; ++j) {
            gammas.push_back(nodewise_[static_cast<std::size_t>(j)].solution());
            taus(j) = tau_hat(j, D_, gammas.back());
        }
        HighDimResult r;
        r.x_hat = regression_->solution();
        r.precision = build_omega(std::move(gammas), std::move(taus));
        r.x_debiased = debias(r.x_hat, r.precision.omega, D_, b_);
        r.report = highdim_ci(r.x_debiased, r.precision.omega, D_, cfg_.sigma, cfg_.q);
        return r;
    }

    [[nodiscard]] const Matrix& design() const noexcept { return D_; }
    [[nodiscard]] const Vector& response() const noexcept { return b_; }
    [[nodiscard]] const RadarSolver& regression_solver() const { return *regression_; }

private:
    HighDimConfig cfg_;
    Eigen::Index d_;
    std::size_t n_;
    std::size_t rows_ = 0;
    Matrix D_;
    Vector b_;
    std::optional<RadarSolver> regression_;
    std::vector<RadarSolver> nodewise_;
    Vector g_, rest_, gj_;
};

}  // namespace sgdinf::highdim
