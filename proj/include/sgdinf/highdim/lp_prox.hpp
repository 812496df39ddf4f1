#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgdinf/errors.hpp"
#include "sgdinf/linalg.hpp"

namespace sgdinf::highdim {

// p = 2 log d / (2 log d - 1), the exponent that makes ||.||_p^2 / (2(p-1))
// a strongly convex prox function with log d scaling. Below d = 3 the formula
// leaves (1, 2]; those tiny problems fall back to p = 2.
inline double prox_exponent(Eigen::Index d) {
    if (d < 3) return 2.0;
    const double l = std::log(static_cast<double>(d));
    return 2.0 * l / (2.0 * l - 1.0);
}

inline double lp_norm(const Vector& v, double p) {
    const double m = v.cwiseAbs().maxCoeff();
    if (m == 0.0 || !std::isfinite(m)) return m;
    double s = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) s += std::pow(std::abs(v(k)) / m, p);
    return m * std::pow(s, 1.0 / p);
}

/// Solves
///     min_x  <theta, x> + lambda ||x||_1 + (beta / 2) ||x - y||_p^2
///     s.t.   ||x - y||_p <= radius
/// for p in (1, 2].
///
/// With u = x - y the optimality condition separates once the scalar
/// kappa = (beta + nu) ||u||_p^{2-p} is fixed (nu the ball multiplier): each
/// coordinate then minimizes theta_k u + lambda |u + y_k| + (kappa / p) |u|^p,
/// which has a closed form. ||u(kappa)||_p is non-increasing in kappa, so the
/// unconstrained kappa and the ball-active kappa are both found by bisection
/// in log space.
class LpBallProx {
public:
    explicit LpBallProx(double p) : p_(p), inv_pm1_(1.0 / (p - 1.0)) {
        if (!(p > 1.0 && p <= 2.0)) throw InvalidArgument("prox exponent must lie in (1, 2]");
    }

    [[nodiscard]] double p() const noexcept { return p_; }

    Vector solve(const Vector& theta, double lambda, double beta, const Vector& y, double radius) const {
        if (theta.size() != y.size()) throw InvalidArgument("prox: dimension mismatch");
        if (!(beta > 0.0)) throw InvalidArgument("prox: beta must be positive");
        if (!(radius >= 0.0)) throw InvalidArgument("prox: radius must be non-negative");
        Vector u(y.size());
        if (radius == 0.0) return y;

        // Unconstrained: root of h(kappa) = kappa - beta * N(kappa)^{2-p}, h increasing.
        auto h = [&](double log_kappa) {
            const double kappa = std::exp(log_kappa);
            coordinates(theta, lambda, y, kappa, u);
            const double nrm = lp_norm(u, p_);
            return kappa - beta * std::pow(nrm, 2.0 - p_);
        };
        double lo = std::log(beta), hi = lo;
        int guard = 0;
        while (h(lo) > 0.0 && guard++ < 150) lo -= 2.0;
        guard = 0;
        while (h(hi) < 0.0 && guard++ < 150) hi += 2.0;
        double root = bisect(h, lo, hi);

        coordinates(theta, lambda, y, std::exp(root), u);
        if (lp_norm(u, p_) > radius) {
            // Ball is active: find kappa with N(kappa) = radius. N is non-increasing.
            auto g = [&](double log_kappa) {
                coordinates(theta, lambda, y, std::exp(log_kappa), u);
                return radius - lp_norm(u, p_);
            };
            double a = root, b = root;
            guard = 0;
            while (g(b) < 0.0 && guard++ < 150) b += 2.0;
            root = bisect(g, a, b);
            coordinates(theta, lambda, y, std::exp(root), u);
            // Bisection ends on the feasible side up to round-off; pull back onto the ball if needed.
            const double nrm = lp_norm(u, p_);
            if (nrm > radius) u *= radius / nrm;
        }
        return y + u;
    }

    // argmin_u theta_k u + lambda |u + y_k| + (kappa / p) |u|^p, coordinate-wise.
    void coordinates(const Vector& theta, double lambda, const Vector& y, double kappa, Vector& u) const {
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            const double yk = y(k);
            // Branch x > 0: derivative theta + lambda + kappa sgn(u)|u|^{p-1}.
            const double up = stationary(theta(k) + lambda, kappa);
            if (up + yk > 0.0) {
                u(k) = up;
                continue;
            }
            const double un = stationary(theta(k) - lambda, kappa);
            if (un + yk < 0.0) {
                u(k) = un;
                continue;
            }
            u(k) = -yk;  // kink: x_k = 0
        }
    }

private:
    // Root of c + kappa sgn(u)|u|^{p-1} = 0.
    [[nodiscard]] double stationary(double c, double kappa) const {
        if (c == 0.0) return 0.0;
        const double mag = std::pow(std::abs(c) / kappa, inv_pm1_);
        return c > 0.0 ? -mag : mag;
    }

    // f increasing in its argument with f(lo) <= 0 <= f(hi).
    template <class F>
    static double bisect(F&& f, double lo, double hi) {
        for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    double p_;
    double inv_pm1_;
};

}  // namespace sgdinf::highdim
