#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "sgdinf/errors.hpp"
#include "sgdinf/linalg.hpp"
#include "sgdinf/normal.hpp"
#include "sgdinf/rng.hpp"

namespace sgdinf {

enum class DesignKind { Identity, Toeplitz, EquiCorr };
enum class ModelKind { LinearRegression, LogisticRegression };

inline std::string_view to_string(DesignKind k) {
    switch (k) {
        case DesignKind::Identity: return "identity";
        case DesignKind::Toeplitz: return "toeplitz";
        case DesignKind::EquiCorr: return "equicorr";
    }
    return "?";
}

inline std::string_view to_string(ModelKind k) {
    return k == ModelKind::LinearRegression ? "linear" : "logistic";
}

inline DesignKind parse_design_kind(std::string_view s) {
    if (s == "identity") return DesignKind::Identity;
    if (s == "toeplitz") return DesignKind::Toeplitz;
    if (s == "equicorr") return DesignKind::EquiCorr;
    throw InvalidArgument("unknown design kind '" + std::string(s) + "' (expected identity|toeplitz|equicorr)");
}

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "linear") return ModelKind::LinearRegression;
    if (s == "logistic") return ModelKind::LogisticRegression;
    throw InvalidArgument("unknown model kind '" + std::string(s) + "' (expected linear|logistic)");
}

// Covariate distribution N(0, Sigma). rho is the Toeplitz decay or the
// equi-correlation; it is ignored for Identity.
struct DesignSpec {
    DesignKind kind = DesignKind::Identity;
    std::size_t dimension = 1;
    double rho = 0.0;
};

inline void validate(const DesignSpec& spec) {
    if (spec.dimension < 1) throw InvalidDesign("design dimension must be >= 1");
    if (spec.kind != DesignKind::Identity && !(spec.rho >= 0.0 && spec.rho < 1.0))
        throw InvalidDesign("design rho must lie in [0,1) for " + std::string(to_string(spec.kind)) +
                            " (got " + std::to_string(spec.rho) + "); matrix would not be positive definite");
}

inline Matrix make_covariance(const DesignSpec& spec) {
    validate(spec);
    const auto d = static_cast<Eigen::Index>(spec.dimension);
    Matrix sigma = Matrix::Identity(d, d);
    switch (spec.kind) {
        case DesignKind::Identity: break;
        case DesignKind::Toeplitz:
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j)
                    sigma(i, j) = std::pow(spec.rho, static_cast<double>(std::abs(i - j)));
            break;
        case DesignKind::EquiCorr:
            sigma.setConstant(spec.rho);
            sigma.diagonal().setOnes();
            break;
    }
    return sigma;
}

struct ModelSpec {
    ModelKind kind = ModelKind::LinearRegression;
    DesignSpec design;
    Vector x_star;
    std::optional<double> sigma;  // noise s.d., linear regression only

    // Order of the gradient-noise covariance expansion around x*.
    [[nodiscard]] int kappa() const noexcept { return kind == ModelKind::LinearRegression ? 2 : 1; }
    [[nodiscard]] std::size_t dimension() const noexcept { return design.dimension; }
};

inline void validate(const ModelSpec& spec) {
    validate(spec.design);
    if (static_cast<std::size_t>(spec.x_star.size()) != spec.design.dimension)
        throw InvalidArgument("x_star has length " + std::to_string(spec.x_star.size()) + ", design dimension is " +
                              std::to_string(spec.design.dimension));
    if (spec.kind == ModelKind::LinearRegression) {
        if (!spec.sigma || !(*spec.sigma >= 0.0) || !std::isfinite(*spec.sigma))
            throw InvalidArgument("linear regression requires a finite noise sigma >= 0");
    } else if (spec.sigma) {
        throw InvalidArgument("logistic regression takes no noise sigma");
    }
}

// Coordinates (j-1)/(d-1), j = 1..d: evenly spaced with both endpoints 0 and 1.
inline Vector linspace_truth(std::size_t d) {
    if (d == 1) return Vector::Zero(1);
    return Vector::LinSpaced(static_cast<Eigen::Index>(d), 0.0, 1.0);
}

struct DataPoint {
    Vector a;
    double b = 0.0;
};

// phi(t) = 1 / (1 + e^{-t}), branch on sign so neither side overflows.
inline double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// log(1 + e^t)
inline double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

/// A loss model ready for sampling: validated spec plus the Cholesky factor of
/// the design covariance (computed once, O(d^2) per draw afterwards).
class LossModel {
public:
    explicit LossModel(ModelSpec spec) : spec_(std::move(spec)) {
        validate(spec_);
        covariance_ = make_covariance(spec_.design);
        if (spec_.design.kind != DesignKind::Identity) {
            Eigen::LLT<Matrix> llt(covariance_);
            if (llt.info() != Eigen::Success) throw InvalidDesign("design covariance is not positive definite");
            chol_ = llt.matrixL();
        }
    }

    [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] ModelKind kind() const noexcept { return spec_.kind; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(spec_.design.dimension); }
    [[nodiscard]] const Matrix& covariance() const noexcept { return covariance_; }
    [[nodiscard]] const Vector& x_star() const noexcept { return spec_.x_star; }

    // Draws a ~ N(0, Sigma) into `a` (resized if needed).
    void sample_covariate(Rng& rng, Vector& a) const {
        const Eigen::Index d = dim();
        if (a.size() != d) a.resize(d);
        std::normal_distribution<double> normal;
        if (chol_.size() == 0) {
            for (Eigen::Index k = 0; k < d; ++k) a(k) = normal(rng);
            return;
        }
        thread_local Vector z;
        z.resize(d);
        for (Eigen::Index k = 0; k < d; ++k) z(k) = normal(rng);
        a.noalias() = chol_.triangularView<Eigen::Lower>() * z;
    }

    void sample_into(Rng& rng, DataPoint& p) const {
        sample_covariate(rng, p.a);
        sample_response(rng, p);
    }

    // Draws b given the covariate already stored in p.a.
    void sample_response(Rng& rng, DataPoint& p) const {
        const double u = p.a.dot(spec_.x_star);
        if (spec_.kind == ModelKind::LinearRegression) {
            const double s = *spec_.sigma;
            p.b = s == 0.0 ? u : u + s * std::normal_distribution<double>{}(rng);
        } else {
            p.b = std::uniform_real_distribution<double>{}(rng) < sigmoid(u) ? 1.0 : -1.0;
        }
    }

    [[nodiscard]] DataPoint sample(Rng& rng) const {
        DataPoint p;
        sample_into(rng, p);
        return p;
    }

    // Pointwise loss f(x, zeta): half squared residual or logistic deviance.
    [[nodiscard]] double loss(const Vector& x, const DataPoint& p) const {
        const double u = p.a.dot(x);
        if (spec_.kind == ModelKind::LinearRegression) return 0.5 * (u - p.b) * (u - p.b);
        return softplus(-p.b * u);
    }

    void grad_into(const Vector& x, const DataPoint& p, Vector& g) const {
        const double u = p.a.dot(x);
        if (spec_.kind == ModelKind::LinearRegression) {
            g.noalias() = (u - p.b) * p.a;
        } else {
            g.noalias() = (-sigmoid(-p.b * u) * p.b) * p.a;
        }
    }

    // Scalar w with hessian = w * a a^T.
    [[nodiscard]] double hessian_weight(const Vector& x, const DataPoint& p) const {
        if (spec_.kind == ModelKind::LinearRegression) return 1.0;
        const double u = p.a.dot(x);
        return sigmoid(u) * sigmoid(-u);
    }

    void hessian_into(const Vector& x, const DataPoint& p, Matrix& h) const {
        const double w = hessian_weight(x, p);
        // Scaling after the outer product keeps h exactly symmetric.
        h.noalias() = p.a * p.a.transpose();
        if (w != 1.0) h *= w;
    }

    [[nodiscard]] Vector grad(const Vector& x, const DataPoint& p) const {
        check_dim(x);
        Vector g(dim());
        grad_into(x, p, g);
        return g;
    }

    [[nodiscard]] Matrix hessian(const Vector& x, const DataPoint& p) const {
        check_dim(x);
        Matrix h(dim(), dim());
        hessian_into(x, p, h);
        return h;
    }

private:
    void check_dim(const Vector& x) const {
        if (x.size() != dim()) throw InvalidArgument("point dimension does not match model dimension");
    }

    ModelSpec spec_;
    Matrix covariance_;
    Matrix chol_;
};

enum class OracleMethod { ClosedForm, MonteCarloHessian };

struct OracleCovariance {
    Matrix matrix;  // A^{-1} S A^{-1}
    OracleMethod method = OracleMethod::ClosedForm;
};

inline constexpr std::size_t kDefaultOracleSamples = 1'000'000;

/// True asymptotic covariance of sqrt(n)(x_bar - x*).
///
/// Linear: A = Sigma, S = sigma^2 Sigma, so the sandwich is sigma^2 Sigma^{-1}.
/// Logistic: the model is well specified so S = A and the sandwich collapses to
/// A^{-1}; A is estimated from `mc_samples` Hessians at x* drawn from `rng`.
inline OracleCovariance oracle_covariance(const LossModel& model, std::size_t mc_samples, Rng& rng) {
    const Eigen::Index d = model.dim();
    if (model.kind() == ModelKind::LinearRegression) {
        const double s = *model.spec().sigma;
        return {s * s * spd_inverse(model.covariance()), OracleMethod::ClosedForm};
    }
    if (mc_samples == 0) throw OracleFailure("logistic oracle needs at least one Monte-Carlo sample");

    // Accumulate in blocks as a dense product: A += W^T W with rows sqrt(w_i) a_i.
    constexpr std::size_t block = 2048;
    Matrix a_hat = Matrix::Zero(d, d);
    Matrix rows(static_cast<Eigen::Index>(block), d);
    Vector a(d);
    std::size_t done = 0;
    while (done < mc_samples) {
        const std::size_t m = std::min(block, mc_samples - done);
        for (std::size_t r = 0; r < m; ++r) {
            model.sample_covariate(rng, a);
            const double u = a.dot(model.x_star());
            rows.row(static_cast<Eigen::Index>(r)) = std::sqrt(sigmoid(u) * sigmoid(-u)) * a.transpose();
        }
        const auto top = rows.topRows(static_cast<Eigen::Index>(m));
        a_hat.selfadjointView<Eigen::Lower>().rankUpdate(top.transpose());
        done += m;
    }
    a_hat = a_hat.selfadjointView<Eigen::Lower>();
    a_hat /= static_cast<double>(mc_samples);

    const double cond = spd_condition_number(a_hat);
    if (!(cond <= 1e12)) throw OracleFailure("Monte-Carlo Hessian is numerically singular (condition number " +
                                             std::to_string(cond) + ")");
    return {spd_inverse(a_hat), OracleMethod::MonteCarloHessian};
}

// Full length 2 z_{q/2} sqrt(oracle_jj / n) of the oracle interval for coordinate j.
inline double oracle_ci_length(const OracleCovariance& oracle, std::size_t j, double n, double q) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (jj >= oracle.matrix.rows()) throw InvalidArgument("oracle_ci_length: coordinate out of range");
    return 2.0 * two_sided_critical_value(q) * std::sqrt(oracle.matrix(jj, jj) / n);
}

inline double mean_oracle_ci_length(const OracleCovariance& oracle, double n, double q) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < oracle.matrix.rows(); ++j) total += oracle_ci_length(oracle, j, n, q);
    return total / static_cast<double>(oracle.matrix.rows());
}

}  // namespace sgdinf
