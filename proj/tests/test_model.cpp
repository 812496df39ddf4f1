#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "sgdinf/model.hpp"

using namespace sgdinf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ModelSpec linear(DesignKind k, std::size_t d, double rho = 0.0, double sigma = 1.0) {
    return {ModelKind::LinearRegression, {k, d, rho}, linspace_truth(d), sigma};
}

ModelSpec logistic(DesignKind k, std::size_t d, double rho = 0.0) {
    return {ModelKind::LogisticRegression, {k, d, rho}, linspace_truth(d), std::nullopt};
}

}  // namespace

TEST_CASE("design covariances") {
    CHECK(make_covariance({DesignKind::Identity, 3, 0.0}) == Matrix::Identity(3, 3));
    Matrix t(2, 2);
    t << 1, 0.5, 0.5, 1;
    CHECK(make_covariance({DesignKind::Toeplitz, 2, 0.5}) == t);
    const Matrix e = make_covariance({DesignKind::EquiCorr, 3, 0.2});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(e(i, j) == (i == j ? 1.0 : 0.2));
    CHECK(make_covariance({DesignKind::Toeplitz, 4, 0.5})(0, 3) == 0.125);
}

TEST_CASE("invalid rho is rejected") {
    CHECK_THROWS_AS(make_covariance({DesignKind::Toeplitz, 3, 1.0}), InvalidDesign);
    CHECK_THROWS_AS(make_covariance({DesignKind::EquiCorr, 3, -0.1}), InvalidDesign);
    CHECK_NOTHROW(make_covariance({DesignKind::Identity, 3, 7.0}));
}

TEST_CASE("covariances are positive definite up to d = 100") {
    for (auto k : {DesignKind::Identity, DesignKind::Toeplitz, DesignKind::EquiCorr})
        for (std::size_t d : {1, 2, 5, 20, 100})
            for (double rho : {0.0, 0.2, 0.5, 0.9}) {
                const Matrix s = make_covariance({k, d, rho});
                CHECK(oracle::jacobi_eigenvalues(s).minCoeff() > 0.0);
            }
}

TEST_CASE("spec validation") {
    auto bad = linear(DesignKind::Identity, 3);
    bad.sigma.reset();
    CHECK_THROWS_AS(LossModel(bad), InvalidArgument);
    auto bad2 = logistic(DesignKind::Identity, 3);
    bad2.sigma = 1.0;
    CHECK_THROWS_AS(LossModel(bad2), InvalidArgument);
    auto bad3 = linear(DesignKind::Identity, 3);
    bad3.x_star = Vector::Zero(2);
    CHECK_THROWS_AS(LossModel(bad3), InvalidArgument);
    CHECK(linear(DesignKind::Identity, 2).kappa() == 2);
    CHECK(logistic(DesignKind::Identity, 2).kappa() == 1);
}

TEST_CASE("linspace truth has endpoints 0 and 1") {
    const Vector x = linspace_truth(5);
    CHECK(x(0) == 0.0);
    CHECK(x(4) == 1.0);
    CHECK_THAT(x(1), WithinAbs(0.25, 1e-15));
}

TEST_CASE("noiseless linear responses are exact") {
    LossModel m(linear(DesignKind::Toeplitz, 4, 0.5, 0.0));
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto p = m.sample(rng);
        CHECK(p.b == p.a.dot(m.x_star()));
        CHECK(m.grad(m.x_star(), p).norm() == 0.0);
    }
}

TEST_CASE("identity sampler has unit covariance") {
    LossModel m(linear(DesignKind::Identity, 4));
    Rng rng(2);
    Matrix acc = Matrix::Zero(4, 4);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto p = m.sample(rng);
        acc += p.a * p.a.transpose();
    }
    CHECK(((acc / n) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("logistic sampler") {
    Vector xs(2);
    xs << 0.7, -0.4;
    ModelSpec spec{ModelKind::LogisticRegression, {DesignKind::Identity, 2, 0.0}, xs, std::nullopt};
    LossModel m(spec);
    Rng rng(4);
    DataPoint p;
    p.a = Vector(2);
    p.a << 1.3, 0.5;
    int plus = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        m.sample_response(rng, p);
        CHECK((p.b == 1.0 || p.b == -1.0));
        plus += p.b > 0;
    }
    CHECK_THAT(static_cast<double>(plus) / n, WithinAbs(1.0 / (1.0 + std::exp(-p.a.dot(xs))), 0.01));

    ModelSpec zero{ModelKind::LogisticRegression, {DesignKind::Identity, 2, 0.0}, Vector::Zero(2), std::nullopt};
    LossModel m0(zero);
    plus = 0;
    for (int i = 0; i < n; ++i) plus += m0.sample(rng).b > 0;
    CHECK_THAT(static_cast<double>(plus) / n, WithinAbs(0.5, 0.01));
}

TEST_CASE("gradient and Hessian hand values") {
    LossModel lg(logistic(DesignKind::Identity, 2));
    DataPoint p{Vector(2), 1.0};
    p.a << 1, 0;
    const Vector g = lg.grad(Vector::Zero(2), p);
    CHECK_THAT(g(0), WithinAbs(-0.5, 1e-15));
    CHECK(g(1) == 0.0);
    const Matrix h0 = lg.hessian(Vector::Zero(2), p);
    CHECK_THAT(h0(0, 0), WithinAbs(0.25, 1e-15));

    LossModel ln(linear(DesignKind::Identity, 2));
    p.a << 1, 2;
    Matrix expect(2, 2);
    expect << 1, 2, 2, 4;
    CHECK(ln.hessian(Vector::Zero(2), p) == expect);
}

TEST_CASE("sigmoid is stable at large arguments") {
    CHECK(sigmoid(1e4) == 1.0);
    CHECK(sigmoid(-1e4) == 0.0);
    CHECK(std::isfinite(softplus(1e4)));
    CHECK_THAT(softplus(-1e4), WithinAbs(0.0, 1e-300));
    LossModel lg(logistic(DesignKind::Identity, 1));
    DataPoint p{Vector::Constant(1, 1.0), -1.0};
    const Vector g = lg.grad(Vector::Constant(1, 1e4), p);
    CHECK(g.allFinite());
    CHECK_THAT(g(0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("gradient and Hessian match finite differences") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    for (auto spec : {linear(DesignKind::Toeplitz, 4, 0.5), logistic(DesignKind::EquiCorr, 4, 0.2)}) {
        LossModel m(spec);
        Rng srng(5);
        for (int rep = 0; rep < 25; ++rep) {
            const DataPoint p = m.sample(srng);
            Vector x(4);
            for (int k = 0; k < 4; ++k) x(k) = z(rng);
            const Vector g = m.grad(x, p);
            const Vector fd = oracle::fd_gradient([&](const Vector& y) { return m.loss(y, p); }, x);
            CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
            const Matrix h = m.hessian(x, p);
            const Matrix fh = oracle::fd_jacobian([&](const Vector& y) { return m.grad(y, p); }, x);
            CHECK((h - fh).norm() <= 1e-5 * std::max(1.0, h.norm()));
            CHECK(h == h.transpose());
            CHECK(oracle::jacobi_eigenvalues(h).minCoeff() >= -1e-10);
        }
    }
}

TEST_CASE("linear oracles") {
    Rng rng(0);
    const auto id = oracle_covariance(LossModel(linear(DesignKind::Identity, 3)), 0, rng);
    CHECK(id.method == OracleMethod::ClosedForm);
    CHECK((id.matrix - Matrix::Identity(3, 3)).norm() < 1e-14);

    const auto tp = oracle_covariance(LossModel(linear(DesignKind::Toeplitz, 5, 0.5)), 0, rng);
    const double expect[] = {4.0 / 3, 5.0 / 3, 5.0 / 3, 5.0 / 3, 4.0 / 3};
    for (int j = 0; j < 5; ++j) CHECK_THAT(tp.matrix(j, j), WithinAbs(expect[j], 1e-12));
    CHECK_THAT(tp.matrix(0, 2), WithinAbs(0.0, 1e-12));  // tridiagonal

    // Sherman-Morrison: ((1-r) I + r 1 1^T)^{-1} = (I - r/(1-r+d r) 1 1^T) / (1-r)
    const double r = 0.2;
    const int d = 5;
    const auto eq = oracle_covariance(LossModel(linear(DesignKind::EquiCorr, d, r)), 0, rng);
    const Matrix sm = (Matrix::Identity(d, d) - r / (1 - r + d * r) * Matrix::Ones(d, d)) / (1 - r);
    CHECK((eq.matrix - sm).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((eq.matrix - oracle::gauss_jordan_inverse(make_covariance({DesignKind::EquiCorr, 5, r}))).cwiseAbs().maxCoeff() <
          1e-12);

    const auto s2 = oracle_covariance(LossModel(linear(DesignKind::Identity, 2, 0.0, 2.0)), 0, rng);
    CHECK((s2.matrix - 4.0 * Matrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("oracle interval lengths") {
    Rng rng(0);
    const auto id = oracle_covariance(LossModel(linear(DesignKind::Identity, 5)), 0, rng);
    CHECK_THAT(oracle_ci_length(id, 0, 1e5, 0.05), WithinAbs(1.2396e-2, 5e-7));
    CHECK_THAT(oracle_ci_length(id, 0, 4e5, 0.05), WithinRel(oracle_ci_length(id, 0, 1e5, 0.05) / 2, 1e-14));
    const auto tp = oracle_covariance(LossModel(linear(DesignKind::Toeplitz, 5, 0.5)), 0, rng);
    CHECK_THAT(mean_oracle_ci_length(tp, 1e5, 0.05), WithinAbs(1.533e-2, 5e-6));
    CHECK_THROWS_AS(oracle_ci_length(id, 5, 1e5, 0.05), InvalidArgument);
}

TEST_CASE("logistic oracle at x* = 0 is 4 Sigma^{-1}") {
    ModelSpec spec{ModelKind::LogisticRegression, {DesignKind::Toeplitz, 3, 0.5}, Vector::Zero(3), std::nullopt};
    LossModel m(spec);
    Rng rng(9);
    const auto o = oracle_covariance(m, 200000, rng);
    CHECK(o.method == OracleMethod::MonteCarloHessian);
    const Matrix expect = 4.0 * oracle::gauss_jordan_inverse(make_covariance(spec.design));
    CHECK((o.matrix - expect).cwiseAbs().maxCoeff() < 0.05);
    CHECK((o.matrix - o.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * o.matrix.cwiseAbs().maxCoeff());
    CHECK_THROWS_AS(oracle_covariance(m, 0, rng), OracleFailure);
}

TEST_CASE("logistic oracle detects a singular Hessian") {
    // Huge coefficients underflow every weight sigma(u) sigma(-u) to zero.
    ModelSpec spec{ModelKind::LogisticRegression, {DesignKind::Identity, 2, 0.0}, Vector::Constant(2, 1e8), std::nullopt};
    Rng rng(1);
    CHECK_THROWS_AS(oracle_covariance(LossModel(spec), 1000, rng), OracleFailure);
}
