#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "sgdinf/errors.hpp"
#include "sgdinf/model.hpp"
#include "sgdinf/sgd.hpp"

namespace sgdinf::sim {

enum class Mode { LowDim, HighDim };

// Constants for one family of RADAR fits. R1 comes from the truth in simulation
// mode: radius_factor * ||x*||_1, never below radius_floor.
struct RadarParams {
    double epoch_constant = 1.0;
    double lambda_constant = 1.0;
    double step_scale = 1.0;
    double radius_factor = 1.1;
    double radius_floor = 0.0;
};

struct HighDimParams {
    std::size_t sparsity = 3;  // s0, active set {1..s0}
    double coef_max = 25.0;    // x*_j ~ U[0, coef_max] on the active set, drawn once
    RadarParams regression{1000.0, 1.0, 5.0, 1.1, 0.0};
    RadarParams nodewise{1.0, 1.0, 1.0, 1.1, 1.0};
};

struct ScenarioConfig {
    std::string id;
    Mode mode = Mode::LowDim;
    ModelKind model = ModelKind::LinearRegression;
    DesignSpec design;
    double sigma = 1.0;  // linear and high-dim only
    std::size_t n = 0;
    double alpha = 0.5;
    double eta = 0.5;
    double q = 0.05;
    std::size_t n_sim = 0;
    bool plugin = true;
    bool oracle = true;
    std::vector<double> batch_exponents{0.2, 0.25, 0.3};
    std::size_t oracle_samples = kDefaultOracleSamples;
    HighDimParams highdim;

    [[nodiscard]] ModelSpec model_spec(const Vector& truth) const {
        ModelSpec m{model, design, truth, std::nullopt};
        if (model == ModelKind::LinearRegression) m.sigma = sigma;
        return m;
    }
};

struct SimConfig {
    std::string source;  // file the config came from, for messages
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string out = "results";
    bool fixed_design = false;
    std::vector<ScenarioConfig> scenarios;
};

inline double default_rho(DesignKind k) {
    switch (k) {
        case DesignKind::Toeplitz: return 0.5;
        case DesignKind::EquiCorr: return 0.2;
        default: return 0.0;
    }
}

namespace detail {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
        std::ostringstream os;
        os << source_;
        if (at.IsDefined()) {
            const auto m = at.Mark();
            if (m.line >= 0) os << ':' << m.line + 1 << ':' << m.column + 1;
        }
        os << ": " << msg;
        throw ConfigError(os.str());
    }

    void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) const {
        if (!map.IsMap()) fail(map, where + " must be a mapping");
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
        }
    }

    template <class T>
    T scalar(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
        }
    }

    template <class T>
    T required(const YAML::Node& map, const std::string& key) const {
        const auto node = map[key];
        if (!node) fail(map, "missing required key '" + key + "'");
        return scalar<T>(node, key);
    }

    template <class T>
    T optional(const YAML::Node& map, const std::string& key, T fallback) const {
        const auto node = map[key];
        return node ? scalar<T>(node, key) : fallback;
    }

    double positive(const YAML::Node& map, const std::string& key, std::optional<double> fallback = {}) const {
        const double v = fallback ? optional<double>(map, key, *fallback) : required<double>(map, key);
        if (!(v > 0.0) || !std::isfinite(v)) fail(map[key] ? map[key] : map, "'" + key + "' must be positive");
        return v;
    }

    [[nodiscard]] const std::string& source() const noexcept { return source_; }

private:
    std::string source_;
};

inline RadarParams read_radar(const Reader& r, const YAML::Node& node, RadarParams p, const std::string& where) {
    if (!node) return p;
    r.check_keys(node, {"epoch_constant", "lambda_constant", "step_scale", "radius_factor", "radius_floor"}, where);
    p.epoch_constant = r.positive(node, "epoch_constant", p.epoch_constant);
    p.lambda_constant = r.positive(node, "lambda_constant", p.lambda_constant);
    p.step_scale = r.positive(node, "step_scale", p.step_scale);
    p.radius_factor = r.positive(node, "radius_factor", p.radius_factor);
    p.radius_floor = r.optional<double>(node, "radius_floor", p.radius_floor);
    if (!(p.radius_floor >= 0.0)) r.fail(node["radius_floor"], "'radius_floor' must be >= 0");
    return p;
}

inline ScenarioConfig read_scenario(const Reader& r, const YAML::Node& node) {
    static const std::set<std::string> keys{
        "id", "mode", "model", "design", "rho", "dimension", "sigma", "n", "alpha", "eta", "q", "n_sim",
        "estimators", "batch_exponents", "oracle_samples", "sparsity", "coef_max", "radar", "nodewise"};
    r.check_keys(node, keys, "scenario");
    ScenarioConfig s;
    s.id = r.required<std::string>(node, "id");

    const auto mode = r.optional<std::string>(node, "mode", "lowdim");
    if (mode == "lowdim")
        s.mode = Mode::LowDim;
    else if (mode == "highdim")
        s.mode = Mode::HighDim;
    else
        r.fail(node["mode"], "mode must be lowdim or highdim, got '" + mode + "'");

    const auto model = r.optional<std::string>(node, "model", "linear");
    try {
        s.model = parse_model_kind(model);
    } catch (const Error& e) {
        r.fail(node["model"], e.what());
    }
    if (s.mode == Mode::HighDim && s.model != ModelKind::LinearRegression)
        r.fail(node["model"], "high-dimensional mode supports linear regression only");
    const auto design = r.required<std::string>(node, "design");
    try {
        s.design.kind = parse_design_kind(design);
    } catch (const Error& e) {
        r.fail(node["design"], e.what());
    }
    s.design.rho = r.optional<double>(node, "rho", default_rho(s.design.kind));
    s.design.dimension = r.required<std::size_t>(node, "dimension");
    try {
        validate(s.design);
    } catch (const Error& e) {
        r.fail(node["rho"] ? node["rho"] : node["dimension"], e.what());
    }
    if (s.mode == Mode::HighDim && s.design.dimension < 2)
        r.fail(node["dimension"], "high-dimensional mode needs dimension >= 2");

    if (node["sigma"] && s.model == ModelKind::LogisticRegression)
        r.fail(node["sigma"], "logistic regression takes no noise sigma");
    s.sigma = r.optional<double>(node, "sigma", 1.0);
    if (!(s.sigma >= 0.0) || !std::isfinite(s.sigma)) r.fail(node["sigma"], "'sigma' must be >= 0");

    s.n = r.required<std::size_t>(node, "n");
    if (s.n < 1) r.fail(node["n"], "'n' must be >= 1");
    s.n_sim = r.required<std::size_t>(node, "n_sim");
    if (s.n_sim < 1) r.fail(node["n_sim"], "'n_sim' must be >= 1");
    s.q = r.optional<double>(node, "q", 0.05);
    if (!(s.q > 0.0 && s.q < 1.0)) r.fail(node["q"], "'q' must lie in (0, 1)");

    if (s.mode == Mode::HighDim) {
        s.highdim.sparsity = r.optional<std::size_t>(node, "sparsity", s.highdim.sparsity);
        if (s.highdim.sparsity < 1 || s.highdim.sparsity > s.design.dimension)
            r.fail(node["sparsity"] ? node["sparsity"] : node, "'sparsity' must lie in [1, dimension]");
        s.highdim.coef_max = r.positive(node, "coef_max", s.highdim.coef_max);
        s.highdim.regression = read_radar(r, node["radar"], s.highdim.regression, "radar");
        s.highdim.nodewise = read_radar(r, node["nodewise"], s.highdim.nodewise, "nodewise");
        for (const char* k : {"alpha", "eta", "estimators", "batch_exponents", "oracle_samples"})
            if (node[k]) r.fail(node[k], std::string("'") + k + "' does not apply to high-dimensional scenarios");
        return s;
    }
    for (const char* k : {"sparsity", "coef_max", "radar", "nodewise"})
        if (node[k]) r.fail(node[k], std::string("'") + k + "' applies to high-dimensional scenarios only");

    s.alpha = r.optional<double>(node, "alpha", 0.5);
    if (!(s.alpha >= 0.5 && s.alpha < 1.0)) r.fail(node["alpha"], "'alpha' must lie in [0.5, 1)");
    s.eta = r.positive(node, "eta", default_eta(s.model));
    s.oracle_samples = r.optional<std::size_t>(node, "oracle_samples", s.oracle_samples);

    if (const auto est = node["estimators"]) {
        if (!est.IsSequence() || est.size() == 0) r.fail(est, "'estimators' must be a non-empty list");
        s.plugin = s.oracle = false;
        bool bm = false;
        for (const auto& e : est) {
            const auto name = r.scalar<std::string>(e, "estimators");
            if (name == "plugin")
                s.plugin = true;
            else if (name == "batchmeans")
                bm = true;
            else if (name == "oracle")
                s.oracle = true;
            else
                r.fail(e, "unknown estimator '" + name + "' (expected plugin, batchmeans or oracle)");
        }
        if (!bm) s.batch_exponents.clear();
    }
    if (const auto ex = node["batch_exponents"]) {
        if (s.batch_exponents.empty()) r.fail(ex, "'batch_exponents' given but batchmeans is not among the estimators");
        if (!ex.IsSequence() || ex.size() == 0) r.fail(ex, "'batch_exponents' must be a non-empty list");
        s.batch_exponents.clear();
        for (const auto& e : ex) {
            const double c = r.scalar<double>(e, "batch_exponents");
            if (!(c > 0.0 && c < 0.5)) r.fail(e, "batch exponent must lie in (0, 0.5)");
            s.batch_exponents.push_back(c);
        }
    }
    return s;
}

}  // namespace detail

inline SimConfig parse_config(const std::string& text, const std::string& source) {
    detail::Reader r(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        std::ostringstream os;
        os << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
        throw ConfigError(os.str());
    }
    if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");
    r.check_keys(root, {"seed", "workers", "out", "fixed_design", "scenarios"}, "top level");

    SimConfig cfg;
    cfg.source = source;
    cfg.seed = r.optional<std::uint64_t>(root, "seed", 0);
    cfg.workers = r.optional<std::size_t>(root, "workers", 1);
    if (cfg.workers < 1) r.fail(root["workers"], "'workers' must be >= 1");
    cfg.out = r.optional<std::string>(root, "out", cfg.out);
    cfg.fixed_design = r.optional<bool>(root, "fixed_design", false);

    const auto list = root["scenarios"];
    if (!list) r.fail(root, "missing required key 'scenarios'");
    if (!list.IsSequence() || list.size() == 0) r.fail(list, "'scenarios' must be a non-empty list");
    std::set<std::string> ids;
    for (const auto& node : list) {
        auto s = detail::read_scenario(r, node);
        if (!ids.insert(s.id).second) r.fail(node["id"], "duplicate scenario id '" + s.id + "'");
        cfg.scenarios.push_back(std::move(s));
    }
    return cfg;
}

inline SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

}  // namespace sgdinf::sim
