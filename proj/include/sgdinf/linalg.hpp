#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgdinf/errors.hpp"

namespace sgdinf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline Vector symmetric_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
    return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix& m) { return symmetric_eigenvalues(symmetrized(m)).minCoeff(); }

inline double max_eigenvalue(const Matrix& m) { return symmetric_eigenvalues(symmetrized(m)).maxCoeff(); }

// Spectral norm (largest singular value); works for non-symmetric input.
inline double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

// 2-norm condition number of a symmetric positive definite matrix; +inf if singular.
inline double spd_condition_number(const Matrix& m) {
    const Vector ev = symmetric_eigenvalues(symmetrized(m));
    const double lo = ev.minCoeff();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return ev.maxCoeff() / lo;
}

inline Matrix spd_inverse(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite");
    return symmetrized(llt.solve(Matrix::Identity(m.rows(), m.cols())));
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace sgdinf
