#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "sgdinf/covariance.hpp"
#include "sgdinf/errors.hpp"
#include "sgdinf/linalg.hpp"
#include "sgdinf/normal.hpp"

namespace sgdinf {

inline double z_quantile(double p) { return normal_quantile(p); }

struct Interval {
    double center = 0.0;
    double half_width = 0.0;

    [[nodiscard]] double lower() const noexcept { return center - half_width; }
    [[nodiscard]] double upper() const noexcept { return center + half_width; }
    [[nodiscard]] double length() const noexcept { return 2.0 * half_width; }
    [[nodiscard]] bool contains(double v) const noexcept { return lower() <= v && v <= upper(); }
};

struct CiReport {
    double q = 0.05;
    std::vector<Interval> intervals;
    std::optional<Vector> truth;
    std::vector<bool> hits;

    [[nodiscard]] std::size_t dimension() const noexcept { return intervals.size(); }

    void mark(const Vector& t) {
        if (static_cast<std::size_t>(t.size()) != intervals.size())
            throw InvalidArgument("truth vector dimension does not match the report");
        truth = t;
        hits.resize(intervals.size());
        for (std::size_t j = 0; j < intervals.size(); ++j) hits[j] = intervals[j].contains(t(static_cast<Eigen::Index>(j)));
    }

    [[nodiscard]] double mean_length() const {
        double s = 0.0;
        for (const auto& iv : intervals) s += iv.length();
        return intervals.empty() ? 0.0 : s / static_cast<double>(intervals.size());
    }
};

inline CiReport make_report(const Vector& centers, const Vector& half_widths, double q) {
    CiReport r;
    r.q = q;
    r.intervals.reserve(static_cast<std::size_t>(centers.size()));
    for (Eigen::Index j = 0; j < centers.size(); ++j) r.intervals.push_back({centers(j), half_widths(j)});
    return r;
}

/// x_bar_j +/- z_{q/2} sqrt(cov_jj / n). Diagonal entries in (-1e-8, 0) are
/// treated as round-off and give a degenerate interval; anything more negative
/// means the estimate is corrupt.
inline CiReport confidence_interval(const Vector& x_bar, const Matrix& cov, double n, double q) {
    if (cov.rows() != x_bar.size() || cov.cols() != x_bar.size())
        throw InvalidArgument("confidence_interval: covariance dimension does not match the estimate");
    if (!(n >= 1.0)) throw InvalidArgument("confidence_interval: n must be >= 1");
    const double z = two_sided_critical_value(q);
    Vector hw(x_bar.size());
    for (Eigen::Index j = 0; j < x_bar.size(); ++j) {
        const double v = cov(j, j);
        if (!(v >= -1e-8)) throw EstimatorError("covariance estimate has negative diagonal entry " + std::to_string(v));
        hw(j) = z * std::sqrt(std::max(v, 0.0) / n);
    }
    return make_report(x_bar, hw, q);
}

inline CiReport confidence_interval(const Vector& x_bar, const CovarianceEstimate& cov, double n, double q) {
    return confidence_interval(x_bar, cov.matrix, n, q);
}

struct ZTest {
    double statistic;
    double p_value;
};

// Two-sided test of H0: x*_j = null_value.
inline ZTest z_test(double x_bar_j, double cov_jj, double n, double null_value) {
    if (!(cov_jj > 0.0)) throw InvalidArgument("z_test: variance must be positive");
    const double z = std::sqrt(n) * (x_bar_j - null_value) / std::sqrt(cov_jj);
    return {z, std::erfc(std::abs(z) / std::numbers::sqrt2)};
}

inline void write_csv(std::ostream& os, const CiReport& r) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "coordinate,center,half_width,lower,upper";
    if (r.truth) out << ",truth,hit";
    out << '\n';
    for (std::size_t j = 0; j < r.intervals.size(); ++j) {
        const auto& iv = r.intervals[j];
        out << j + 1 << ',' << iv.center << ',' << iv.half_width << ',' << iv.lower() << ',' << iv.upper();
        if (r.truth) out << ',' << (*r.truth)(static_cast<Eigen::Index>(j)) << ',' << (r.hits[j] ? 1 : 0);
        out << '\n';
    }
    os << out.str();
}

inline nlohmann::json to_json(const CiReport& r) {
    auto rows = nlohmann::json::array();
    for (std::size_t j = 0; j < r.intervals.size(); ++j) {
        const auto& iv = r.intervals[j];
        nlohmann::json row = {{"coordinate", j + 1},
                              {"center", iv.center},
                              {"half_width", iv.half_width},
                              {"lower", iv.lower()},
                              {"upper", iv.upper()}};
        if (r.truth) {
            row["truth"] = (*r.truth)(static_cast<Eigen::Index>(j));
            row["hit"] = static_cast<bool>(r.hits[j]);
        }
        rows.push_back(std::move(row));
    }
    return {{"q", r.q}, {"intervals", std::move(rows)}};
}

}  // namespace sgdinf
