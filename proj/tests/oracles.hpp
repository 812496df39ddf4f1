#pragma once

// Reference implementations used only by tests. They avoid Eigen's
// decompositions and the library's own numerics so that agreement means
// something.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Cyclic Jacobi rotations; returns the eigenvalues sorted ascending.
inline Vec jacobi_eigenvalues(Mat a, int sweeps = 100) {
    const auto n = a.rows();
    for (int s = 0; s < sweeps; ++s) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
            }
    }
    Vec ev = a.diagonal();
    std::sort(ev.data(), ev.data() + ev.size());
    return ev;
}

// Gauss-Jordan with partial pivoting.
inline Mat gauss_jordan_inverse(Mat a) {
    const auto n = a.rows();
    Mat inv = Mat::Identity(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index piv = c;
        for (Eigen::Index r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        a.row(c).swap(a.row(piv));
        inv.row(c).swap(inv.row(piv));
        const double d = a(c, c);
        a.row(c) /= d;
        inv.row(c) /= d;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a(r, c);
            a.row(r) -= f * a.row(c);
            inv.row(r) -= f * inv.row(c);
        }
    }
    return inv;
}

// Spectral norm of a general matrix via power iteration on M^T M.
inline double spectral_norm(const Mat& m, int iters = 2000) {
    Vec v = Vec::Ones(m.cols()) / std::sqrt(static_cast<double>(m.cols()));
    double lambda = 0.0;
    for (int i = 0; i < iters; ++i) {
        Vec w = m.transpose() * (m * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        lambda = nw;
    }
    return std::sqrt(lambda);
}

// Phi(x) from the Maclaurin series of erf (|x| small) or the continued fraction tail.
inline double normal_cdf_series(double x) {
    const double z = x / std::sqrt(2.0);
    if (std::abs(z) < 3.0) {
        double term = z, sum = z;
        for (int k = 1; k < 200; ++k) {
            term *= -z * z / k;
            const double add = term / (2 * k + 1);
            sum += add;
            if (std::abs(add) < 1e-18) break;
        }
        return 0.5 * (1.0 + 2.0 / std::sqrt(std::numbers::pi) * sum);
    }
    // Lentz continued fraction for erfc on the tail.
    const double az = std::abs(z);
    double f = az, c = az, d = 0.0;
    for (int k = 1; k < 500; ++k) {
        const double ak = k / 2.0;
        d = az + ak * d;
        d = 1.0 / d;
        c = az + ak / c;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    const double erfc_v = std::exp(-az * az) / std::sqrt(std::numbers::pi) / f;
    return z > 0 ? 1.0 - 0.5 * erfc_v : 0.5 * erfc_v;
}

inline double bisect_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf_series(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Central differences of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
    Vec g(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        g(k) = (f(xp) - f(xm)) / (2 * h);
    }
    return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6) {
    const auto n = x.size();
    Mat j(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        j.col(k) = (f(xp) - f(xm)) / (2 * h);
    }
    return j;
}

// Random symmetric matrix with entries in [-1, 1].
template <class Rng>
Mat random_symmetric(Eigen::Index d, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(rng);
    return m;
}

// Dense batch-means from a stored trace x_1..x_n (rows) and explicit boundaries.
inline Mat batch_means_dense(const Mat& trace, const std::vector<std::size_t>& ends) {
    const auto d = trace.cols();
    const std::size_t m = ends.size() - 1;
    const std::size_t start = ends[0];
    const std::size_t n = ends.back();
    Vec grand = Vec::Zero(d);
    for (std::size_t i = start; i < n; ++i) grand += trace.row(static_cast<Eigen::Index>(i)).transpose();
    grand /= static_cast<double>(n - start);
    Mat est = Mat::Zero(d, d);
    for (std::size_t k = 1; k <= m; ++k) {
        Vec mean = Vec::Zero(d);
        for (std::size_t i = ends[k - 1]; i < ends[k]; ++i) mean += trace.row(static_cast<Eigen::Index>(i)).transpose();
        const double nk = static_cast<double>(ends[k] - ends[k - 1]);
        mean /= nk;
        est += nk * (mean - grand) * (mean - grand).transpose();
    }
    return est / static_cast<double>(m);
}

}  // namespace oracle
