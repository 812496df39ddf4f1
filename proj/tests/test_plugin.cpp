#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sgdinf/plugin.hpp"
#include "sgdinf/sgd.hpp"

using namespace sgdinf;
using Catch::Matchers::WithinAbs;

TEST_CASE("accumulator hand arithmetic") {
    PluginAccumulator one(1, 1.0);
    one.observe(Vector::Constant(1, 2.0), Matrix::Constant(1, 1, 3.0));
    CHECK(one.hessian_mean()(0, 0) == 3.0);
    CHECK(one.grad_outer_mean()(0, 0) == 4.0);

    PluginAccumulator two(2, 1.0);
    two.observe(Vector::Unit(2, 0), Matrix::Identity(2, 2));
    two.observe(Vector::Unit(2, 1), Matrix::Identity(2, 2));
    CHECK(two.count() == 2);
    CHECK(two.hessian_mean() == Matrix::Identity(2, 2));
    CHECK(two.grad_outer_mean() == 0.5 * Matrix::Identity(2, 2));
    CHECK_THROWS_AS(two.observe(Vector::Zero(3), Matrix::Identity(2, 2)), InvalidArgument);
    CHECK_THROWS_AS(PluginAccumulator(2, 1.0).finalize(), EstimatorError);
    CHECK_THROWS_AS(PluginAccumulator(2, 0.0), InvalidArgument);
}

TEST_CASE("eigenvalue thresholding") {
    CHECK(threshold_eigen(Matrix::Identity(3, 3), 1.0) == Matrix::Identity(3, 3));
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << 0.1, 2.0;
    const Matrix t = threshold_eigen(a, 1.0);
    CHECK_THAT(t(0, 0), WithinAbs(0.5, 1e-14));
    CHECK_THAT(t(1, 1), WithinAbs(2.0, 1e-14));
    CHECK_THAT(t(0, 1), WithinAbs(0.0, 1e-14));

    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 0.3;
    CHECK_THROWS(threshold_eigen(asym, 1.0));
}

TEST_CASE("thresholding on random matrices, checked against Jacobi") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const Matrix a = oracle::random_symmetric(5, rng);
        const double lambda = 0.5;
        const auto thr = threshold_eigen_with_inverse(a, lambda);
        const Vector ev_in = oracle::jacobi_eigenvalues(a);
        const Vector ev_out = oracle::jacobi_eigenvalues(thr.matrix);
        CHECK(ev_out.minCoeff() >= lambda / 2 - 1e-12);
        for (int k = 0; k < 5; ++k) CHECK_THAT(ev_out(k), WithinAbs(std::max(ev_in(k), lambda / 2), 1e-10));
        CHECK(oracle::jacobi_eigenvalues(thr.matrix - a).minCoeff() >= -1e-10);
        CHECK((thr.inverse * thr.matrix - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(oracle::spectral_norm(thr.inverse) <= 2.0 / lambda + 1e-9);
    }
}

TEST_CASE("sandwich hand values") {
    PluginAccumulator acc(2, 1.0);
    acc.observe(Vector::Unit(2, 0) * std::sqrt(2.0), 2.0 * Matrix::Identity(2, 2));
    acc.observe(Vector::Unit(2, 1) * std::sqrt(2.0), 2.0 * Matrix::Identity(2, 2));
    // A = 2I, S = I
    CHECK((acc.finalize().matrix - 0.25 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

    PluginAccumulator id(2, 1.0);
    id.observe(Vector::Unit(2, 0) * std::sqrt(2.0), Matrix::Identity(2, 2));
    id.observe(Vector::Unit(2, 1) * std::sqrt(2.0), Matrix::Identity(2, 2));
    const auto est = id.finalize();
    CHECK((est.matrix - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(est.estimator == "plugin");
    CHECK(est.n == 2);
}

TEST_CASE("streaming plug-in equals dense recomputation from a trace") {
    LossModel m({ModelKind::LogisticRegression, {DesignKind::Toeplitz, 4, 0.5}, linspace_truth(4), std::nullopt});
    Rng rng(12);
    std::vector<std::pair<Vector, Matrix>> trace;
    PluginAccumulator acc(4, 0.02);
    Vector x = Vector::Zero(4);
    for (int i = 0; i < 1000; ++i) {
        const auto p = m.sample(rng);
        const Vector g = m.grad(x, p);
        const Matrix h = m.hessian(x, p);
        acc.observe(g, h);
        trace.emplace_back(g, h);
        x -= 0.5 / std::sqrt(i + 1.0) * g;
    }
    Matrix a = Matrix::Zero(4, 4), s = Matrix::Zero(4, 4);
    for (const auto& [g, h] : trace) {
        a += h;
        s += g * g.transpose();
    }
    a /= 1000.0;
    s /= 1000.0;
    const Vector ev = oracle::jacobi_eigenvalues(a);
    REQUIRE(ev.minCoeff() > 0.01);  // no clamping needed, so the dense version is a plain inverse
    const Matrix ai = oracle::gauss_jordan_inverse(a);
    const Matrix dense = ai * s * ai;
    CHECK((acc.finalize().matrix - dense).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("plug-in output bounds") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 50; ++rep) {
        PluginAccumulator acc(3, 1.0);
        for (int i = 0; i < 20; ++i) {
            Vector g(3), a(3);
            for (int k = 0; k < 3; ++k) {
                g(k) = z(rng);
                a(k) = z(rng);
            }
            acc.observe(g, 0.2 * a * a.transpose());
        }
        const Matrix out = acc.finalize().matrix;
        const Vector ev = oracle::jacobi_eigenvalues(out);
        CHECK(ev.minCoeff() > 0.0);
        CHECK(ev.maxCoeff() <= 4.0 * oracle::jacobi_eigenvalues(acc.grad_outer_mean()).maxCoeff() + 1e-9);
        CHECK(out == out.transpose());
    }
}

TEST_CASE("plug-in sink needs Hessians and ordered input") {
    PluginSink sink(2, 1.0);
    CHECK(sink.needs_hessian());
    const Vector x = Vector::Zero(2), g = Vector::Ones(2);
    const Matrix h = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(sink.observe({1, x, g, nullptr}), ProtocolError);
    sink.observe({1, x, g, &h});
    CHECK_THROWS_AS(sink.observe({3, x, g, &h}), ProtocolError);
}

TEST_CASE("plug-in is consistent on the linear model") {
    LossModel m({ModelKind::LinearRegression, {DesignKind::Identity, 5, 0.0}, linspace_truth(5), 1.0});
    auto median_error = [&](std::size_t n, int seeds) {
        std::vector<double> e;
        for (int s = 0; s < seeds; ++s) {
            PluginSink sink(5, 1.0);
            std::vector<EstimatorSink*> sinks{&sink};
            Rng rng(1000 + s);
            const auto res = run(m, n, StepSchedule(0.5, 0.5), Vector::Zero(5), sinks, rng);
            e.push_back(oracle::spectral_norm(res.outcomes[0].estimate->matrix - Matrix::Identity(5, 5)));
        }
        std::nth_element(e.begin(), e.begin() + e.size() / 2, e.end());
        return e[e.size() / 2];
    };
    const double e3 = median_error(1000, 30), e5 = median_error(100000, 30);
    INFO("median error n=1e3: " << e3 << ", n=1e5: " << e5);
    CHECK(e5 < 0.1);
    CHECK(e3 / e5 >= 3.0);
}
