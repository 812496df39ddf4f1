#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgdinf/errors.hpp"
#include "sgdinf/inference.hpp"

namespace sgdinf::sim {

// One estimator's intervals in one replication. `coordinates` restricts the
// summary to a subset (the high-dimensional S0 / S0^c split); empty means all.
struct EstimatorRecord {
    std::string estimator;
    bool ok = false;
    std::string error;
    std::size_t hits = 0;
    std::size_t coordinates = 0;
    double total_length = 0.0;
};

struct Replication {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
    std::size_t divergence_step = 0;
    std::string failure;  // replication-level error other than divergence
    std::vector<EstimatorRecord> records;
    nlohmann::json extras = nlohmann::json::object();

    [[nodiscard]] bool ok() const noexcept { return !diverged && failure.empty(); }
};

// Summary of a marked report over the coordinates [first, last).
inline EstimatorRecord summarize(std::string name, const CiReport& r, std::size_t first, std::size_t last) {
    if (!r.truth) throw InvalidArgument("summarize: report has no truth marked");
    if (first > last || last > r.intervals.size()) throw InvalidArgument("summarize: coordinate range out of bounds");
    EstimatorRecord rec{std::move(name), true, {}, 0, last - first, 0.0};
    for (std::size_t j = first; j < last; ++j) {
        rec.hits += r.hits[j] ? 1 : 0;
        rec.total_length += r.intervals[j].length();
    }
    return rec;
}

inline EstimatorRecord summarize(std::string name, const CiReport& r) {
    return summarize(std::move(name), r, 0, r.intervals.size());
}

inline EstimatorRecord failed_record(std::string name, std::string error) {
    return {std::move(name), false, std::move(error), 0, 0, 0.0};
}

struct AggregateRow {
    std::string scenario;
    std::string estimator;
    double cov_rate = 0.0;  // percent
    double avg_len = 0.0;
    double oracle_len = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_sim = 0;  // replications attempted
    std::size_t n_ok = 0;   // replications that produced this estimator
    double std_err = 0.0;   // sqrt(p(1-p)/(n_ok * coordinates)) * 100
    double wall_time = 0.0; // seconds for the whole scenario; kept out of the CSV
};

/// Pools hit flags and lengths over replications, per estimator, in the order
/// estimators first appear. Rows whose estimator never succeeded are an error.
inline std::vector<AggregateRow> aggregate(const std::string& scenario, const std::vector<Replication>& reps,
                                           const std::vector<std::string>& estimators) {
    std::vector<AggregateRow> rows;
    for (const auto& name : estimators) {
        AggregateRow row;
        row.scenario = scenario;
        row.estimator = name;
        row.n_sim = reps.size();
        std::size_t hits = 0, coords = 0;
        double length = 0.0;
        for (const auto& rep : reps) {
            if (!rep.ok()) continue;
            for (const auto& rec : rep.records) {
                if (rec.estimator != name || !rec.ok) continue;
                ++row.n_ok;
                hits += rec.hits;
                coords += rec.coordinates;
                length += rec.total_length;
            }
        }
        if (row.n_ok == 0 || coords == 0)
            throw EstimatorError("scenario " + scenario + ": no successful replication for " + name);
        const double p = static_cast<double>(hits) / static_cast<double>(coords);
        row.cov_rate = 100.0 * p;
        row.avg_len = length / static_cast<double>(coords);
        row.std_err = 100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(coords));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline const char* csv_header() { return "scenario,estimator,cov_rate,avg_len,oracle_len,n_sim,n_ok,std_err"; }

// 6 significant digits; NaN is written as "nan" so the output stays parseable.
inline std::string format_sig6(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
    std::ostringstream out;
    out << csv_header() << '\n';
    for (const auto& r : rows)
        out << r.scenario << ',' << r.estimator << ',' << format_sig6(r.cov_rate) << ',' << format_sig6(r.avg_len) << ','
            << format_sig6(r.oracle_len) << ',' << r.n_sim << ',' << r.n_ok << ',' << format_sig6(r.std_err) << '\n';
    os << out.str();
}

inline nlohmann::json to_json(const AggregateRow& r) {
    nlohmann::json j = {{"scenario", r.scenario}, {"estimator", r.estimator}, {"cov_rate", r.cov_rate},
                        {"avg_len", r.avg_len},   {"n_sim", r.n_sim},         {"n_ok", r.n_ok},
                        {"std_err", r.std_err},   {"wall_time_s", r.wall_time}};
    j["oracle_len"] = std::isnan(r.oracle_len) ? nlohmann::json(nullptr) : nlohmann::json(r.oracle_len);
    return j;
}

inline nlohmann::json failures_json(const std::vector<Replication>& reps) {
    auto out = nlohmann::json::array();
    for (const auto& rep : reps) {
        if (rep.diverged)
            out.push_back({{"replication", rep.index}, {"seed", rep.seed}, {"diverged_at", rep.divergence_step}});
        else if (!rep.failure.empty())
            out.push_back({{"replication", rep.index}, {"seed", rep.seed}, {"error", rep.failure}});
        else
            for (const auto& rec : rep.records)
                if (!rec.ok)
                    out.push_back(
                        {{"replication", rep.index}, {"seed", rep.seed}, {"estimator", rec.estimator}, {"error", rec.error}});
    }
    return out;
}

}  // namespace sgdinf::sim
