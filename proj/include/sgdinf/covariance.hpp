#pragma once

#include <cstddef>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sgdinf/linalg.hpp"

namespace sgdinf {

// d x d estimate of A^{-1} S A^{-1} together with where it came from.
struct CovarianceEstimate {
    Matrix matrix;
    std::string estimator;          // "plugin", "batchmeans", "oracle", ...
    std::size_t n = 0;              // iterations the estimate is based on
    nlohmann::json parameters = nlohmann::json::object();
};

// Row-major CSV, one matrix row per line, full round-trip precision.
inline void write_csv(std::ostream& os, const Matrix& m) {
    std::ostringstream line;
    line << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        line.str({});
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) line << ',';
            line << m(i, j);
        }
        os << line.str() << '\n';
    }
}

inline void write_csv(std::ostream& os, const CovarianceEstimate& est) { write_csv(os, est.matrix); }

inline nlohmann::json matrix_to_json(const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw InvalidArgument("ragged matrix in JSON");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

inline nlohmann::json to_json(const CovarianceEstimate& est) {
    return {{"estimator", est.estimator},
            {"n", est.n},
            {"dimension", est.matrix.rows()},
            {"parameters", est.parameters},
            {"matrix", matrix_to_json(est.matrix)}};
}

inline CovarianceEstimate covariance_from_json(const nlohmann::json& j) {
    CovarianceEstimate est;
    est.estimator = j.at("estimator").get<std::string>();
    est.n = j.at("n").get<std::size_t>();
    est.parameters = j.value("parameters", nlohmann::json::object());
    est.matrix = matrix_from_json(j.at("matrix"));
    return est;
}

}  // namespace sgdinf
