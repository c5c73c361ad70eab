#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "boselearn/protocols.hpp"
#include "boselearn/version.hpp"

namespace boselearn {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// experiment configuration (file format, schema_version 1)
// ---------------------------------------------------------------------------

struct ModelSpec {
    std::string type = "single";  // single | chain | grid | edges
    int num_modes = 1;
    int rows = 0, cols = 0;
    // explicit edges: [i, j, re, im]; for chain/grid the couplings come from
    // `h` below or the random rule
    std::vector<std::array<double, 4>> edges;
    std::vector<double> omega, xi;        // empty = random per trial
    std::vector<std::array<double, 2>> h;  // per generated edge when not using explicit edges
    bool random_params = false;
    double param_bound = 1.0;
    std::uint64_t param_seed = 7;
};

struct CampaignSpec {
    int trials = 4;
    std::uint64_t seed = 1;
    int workers = 0;  // 0 = hardware concurrency
};

struct OutputSpec {
    std::string directory = "out";
    bool trials_csv = true;
};

struct ExperimentConfig {
    int schema_version = 1;
    ModelSpec model;
    ProtocolConfig protocol;
    CampaignSpec campaign;
    OutputSpec outputs;
};

// ---------------------------------------------------------------------------
// JSON (de)serialization; field order is fixed so reports hash stably
// ---------------------------------------------------------------------------

inline ordered_json to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["schema_version"] = c.schema_version;
    auto& m = j["model"];
    m["type"] = c.model.type;
    m["num_modes"] = c.model.num_modes;
    m["rows"] = c.model.rows;
    m["cols"] = c.model.cols;
    m["edges"] = c.model.edges;
    m["omega"] = c.model.omega;
    m["xi"] = c.model.xi;
    m["h"] = c.model.h;
    m["random_params"] = c.model.random_params;
    m["param_bound"] = c.model.param_bound;
    m["param_seed"] = c.model.param_seed;
    auto& p = j["protocol"];
    p["epsilon"] = c.protocol.epsilon;
    p["alpha"] = c.protocol.alpha;
    p["alpha1"] = c.protocol.alpha1;
    p["alpha2"] = c.protocol.alpha2;
    p["M_omega"] = c.protocol.M_omega;
    p["M_xi"] = c.protocol.M_xi;
    p["eta1_omega"] = c.protocol.eta1_omega;
    p["eta1_xi"] = c.protocol.eta1_xi;
    p["eta0"] = c.protocol.eta0;
    p["W_single"] = c.protocol.W_single;
    p["W_rotated"] = c.protocol.W_rotated;
    p["spam_strength"] = c.protocol.spam_strength;
    p["spam_kick_radius"] = c.protocol.spam_kick_radius;
    p["spam_variants"] = c.protocol.spam_variants;
    p["cutoff"] = c.protocol.cutoff;
    p["leak_tol"] = c.protocol.leak_tol;
    p["grid_dx"] = c.protocol.grid_dx;
    p["enforce_sufficient_bounds"] = c.protocol.enforce_sufficient_bounds;
    auto& ca = j["campaign"];
    ca["trials"] = c.campaign.trials;
    ca["seed"] = c.campaign.seed;
    ca["workers"] = c.campaign.workers;
    auto& o = j["outputs"];
    o["directory"] = c.outputs.directory;
    o["trials_csv"] = c.outputs.trials_csv;
    return j;
}

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline ExperimentConfig config_from_json(const ordered_json& j) {
    ExperimentConfig c;
    try {
        c.schema_version = j.at("schema_version").get<int>();
        if (c.schema_version != 1) throw ConfigError("unsupported schema_version");
        const auto& m = j.at("model");
        c.model.type = m.at("type").get<std::string>();
        c.model.num_modes = m.value("num_modes", 1);
        c.model.rows = m.value("rows", 0);
        c.model.cols = m.value("cols", 0);
        if (m.contains("edges")) c.model.edges = m.at("edges").get<std::vector<std::array<double, 4>>>();
        if (m.contains("omega")) c.model.omega = m.at("omega").get<std::vector<double>>();
        if (m.contains("xi")) c.model.xi = m.at("xi").get<std::vector<double>>();
        if (m.contains("h")) c.model.h = m.at("h").get<std::vector<std::array<double, 2>>>();
        c.model.random_params = m.value("random_params", false);
        c.model.param_bound = m.value("param_bound", 1.0);
        c.model.param_seed = m.value("param_seed", std::uint64_t{7});
        const auto& p = j.at("protocol");
        c.protocol.epsilon = p.value("epsilon", 1e-2);
        c.protocol.alpha = p.value("alpha", 0.4);
        c.protocol.alpha1 = p.value("alpha1", 0.5);
        c.protocol.alpha2 = p.value("alpha2", 0.9);
        c.protocol.M_omega = p.value("M_omega", 0.0);
        c.protocol.M_xi = p.value("M_xi", 6.0);
        c.protocol.eta1_omega = p.value("eta1_omega", 0.1);
        c.protocol.eta1_xi = p.value("eta1_xi", 0.04);
        c.protocol.eta0 = p.value("eta0", 1e-3);
        c.protocol.W_single = p.value("W_single", 1.05);
        c.protocol.W_rotated = p.value("W_rotated", 2.05);
        c.protocol.spam_strength = p.value("spam_strength", 0.0);
        c.protocol.spam_kick_radius = p.value("spam_kick_radius", 0.1);
        c.protocol.spam_variants = p.value("spam_variants", 6);
        c.protocol.cutoff = p.value("cutoff", 0);
        c.protocol.leak_tol = p.value("leak_tol", 1e-8);
        c.protocol.grid_dx = p.value("grid_dx", 0.01);
        c.protocol.enforce_sufficient_bounds = p.value("enforce_sufficient_bounds", false);
        const auto& ca = j.at("campaign");
        c.campaign.trials = ca.value("trials", 4);
        c.campaign.seed = ca.value("seed", std::uint64_t{1});
        c.campaign.workers = ca.value("workers", 0);
        if (j.contains("outputs")) {
            c.outputs.directory = j.at("outputs").value("directory", "out");
            c.outputs.trials_csv = j.at("outputs").value("trials_csv", true);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config JSON error: ") + e.what());
    }
    return config_from_json(j);
}

inline std::string config_hash(const ExperimentConfig& c) {
    const std::string dump = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// model materialization (per trial when parameters are random)
// ---------------------------------------------------------------------------

inline void validate_model_spec(const ModelSpec& m) {
    if (m.type != "single" && m.type != "chain" && m.type != "grid" && m.type != "edges")
        throw ConfigError("model.type must be single|chain|grid|edges");
    if (m.type == "single" && m.num_modes != 1) throw ConfigError("single model must have num_modes = 1");
    if (m.type == "chain" && m.num_modes < 2) throw ConfigError("chain needs num_modes >= 2");
    if (m.type == "grid" && (m.rows < 1 || m.cols < 1)) throw ConfigError("grid needs rows, cols >= 1");
    if (m.type == "edges" && m.num_modes < 1) throw ConfigError("edges model needs num_modes >= 1");
    if (m.param_bound <= 0 || m.param_bound > 1.0) throw ConfigError("param_bound must lie in (0, 1]");
    if (!m.random_params) {
        const std::size_t n = static_cast<std::size_t>(m.type == "grid" ? m.rows * m.cols : m.num_modes);
        if (m.omega.size() != n) throw ConfigError("omega must list one value per mode (or use random_params)");
        if (m.xi.size() != n) throw ConfigError("xi must list one value per mode");
    }
}

inline LatticeModel materialize_model(const ModelSpec& spec, int trial) {
    validate_model_spec(spec);
    const int n = (spec.type == "grid") ? spec.rows * spec.cols : spec.num_modes;
    LatticeModel m(std::max(1, n));
    if (spec.type == "chain") {
        m = LatticeModel::chain(n);
    } else if (spec.type == "grid") {
        m = LatticeModel::grid(spec.rows, spec.cols);
    } else if (spec.type == "edges") {
        for (const auto& e : spec.edges)
            m.add_edge(static_cast<int>(e[0]), static_cast<int>(e[1]), cplx(e[2], e[3]));
    }
    RngStream rng = RngStream(spec.param_seed).derive(0x6d6f64, static_cast<std::uint64_t>(trial));
    const double b = spec.param_bound;
    for (int i = 0; i < m.num_modes; ++i) {
        m.omega[static_cast<std::size_t>(i)] =
            spec.random_params ? rng.uniform(-b, b) : spec.omega[static_cast<std::size_t>(i)];
        m.xi[static_cast<std::size_t>(i)] = spec.random_params ? rng.uniform(-b, b) : spec.xi[static_cast<std::size_t>(i)];
    }
    if (spec.type != "edges") {
        for (std::size_t e = 0; e < m.edges.size(); ++e) {
            if (spec.random_params) {
                const double r = rng.uniform(0.0, b / std::sqrt(2.0));
                const double ph = rng.uniform(0.0, 2 * M_PI);
                m.h[e] = cplx(r * std::cos(ph), r * std::sin(ph));
            } else if (e < spec.h.size()) {
                m.h[e] = cplx(spec.h[e][0], spec.h[e][1]);
            }
        }
    } else if (spec.random_params) {
        for (auto& he : m.h) {
            const double r = rng.uniform(0.0, b / std::sqrt(2.0));
            const double ph = rng.uniform(0.0, 2 * M_PI);
            he = cplx(r * std::cos(ph), r * std::sin(ph));
        }
    }
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// campaign runner (deterministic trial-level parallelism)
// ---------------------------------------------------------------------------

inline EstimationReport run_single_trial(const ExperimentConfig& cfg, int trial) {
    LatticeModel model = materialize_model(cfg.model, trial);
    ProtocolConfig p = cfg.protocol;
    p.seed = detail::mix_key(cfg.campaign.seed, static_cast<std::uint64_t>(trial));
    if (model.num_modes == 1)
        return learn_single_mode(model, p);
    return learn_lattice(model, p);
}

inline std::vector<EstimationReport> run_campaign(const ExperimentConfig& cfg) {
    const int trials = cfg.campaign.trials;
    std::vector<EstimationReport> out(static_cast<std::size_t>(trials));
    int workers = cfg.campaign.workers > 0 ? cfg.campaign.workers
                                           : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, trials));
    if (workers == 1) {
        for (int k = 0; k < trials; ++k) out[static_cast<std::size_t>(k)] = run_single_trial(cfg, k);
        return out;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::string> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (;;) {
                const int k = next.fetch_add(1);
                if (k >= trials) return;
                try {
                    out[static_cast<std::size_t>(k)] = run_single_trial(cfg, k);
                } catch (const std::exception& e) {
                    errors[static_cast<std::size_t>(w)] = e.what();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error("campaign trial failed: " + e);
    return out;
}

// ---------------------------------------------------------------------------
// report writers (stable formatting: '.' decimal separator, %.17g)
// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CampaignSummary {
    std::map<std::string, double> rmse;       // per parameter name
    std::map<std::string, double> max_abs;    // per parameter name
    double mean_evolution_time = 0.0;
    double mean_experiments = 0.0;
    double total_wall_ms = 0.0;
};

inline CampaignSummary summarize(const std::vector<EstimationReport>& reports) {
    CampaignSummary s;
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& r : reports) {
        for (const auto& p : r.params) {
            auto& a = acc[p.name];
            a.first += p.error * p.error;
            a.second += 1;
            auto& mx = s.max_abs[p.name];
            mx = std::max(mx, std::abs(p.error));
        }
        s.mean_evolution_time += r.evolution_time;
        s.mean_experiments += static_cast<double>(r.experiments);
        s.total_wall_ms += r.wall_ms;
    }
    for (const auto& [name, a] : acc) s.rmse[name] = std::sqrt(a.first / a.second);
    if (!reports.empty()) {
        s.mean_evolution_time /= static_cast<double>(reports.size());
        s.mean_experiments /= static_cast<double>(reports.size());
    }
    return s;
}

inline ordered_json report_json(const ExperimentConfig& cfg, const std::vector<EstimationReport>& reports) {
    const auto s = summarize(reports);
    ordered_json j;
    j["schema_version"] = 1;
    j["library_version"] = kVersion;
    j["config_hash"] = config_hash(cfg);
    j["trials"] = reports.size();
    j["campaign_seed"] = cfg.campaign.seed;
    j["cutoff"] = reports.empty() ? 0 : reports.front().cutoff;
    ordered_json params = ordered_json::array();
    if (!reports.empty())
        for (const auto& p : reports.front().params) {
            ordered_json e;
            e["name"] = p.name;
            e["rmse"] = s.rmse.at(p.name);
            e["max_abs_error"] = s.max_abs.at(p.name);
            e["last_estimate"] = reports.back().find(p.name)->estimate;
            e["truth_last_trial"] = reports.back().find(p.name)->truth;
            params.push_back(e);
        }
    j["parameters"] = params;
    // wall-clock time is timing metadata and stays out of the report body so
    // identical (config, seed) runs are byte-identical
    j["totals"]["mean_evolution_time"] = s.mean_evolution_time;
    j["totals"]["mean_experiments"] = s.mean_experiments;
    return j;
}

inline void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

// '#'-prefixed provenance lines, then the fixed documented header row.
inline std::string csv_provenance(const ExperimentConfig& cfg) {
    return "# config_hash=" + config_hash(cfg) + "\n# library_version=" + std::string(kVersion) + "\n";
}

inline std::string trials_csv(const ExperimentConfig& cfg, const std::vector<EstimationReport>& reports) {
    std::string csv = csv_provenance(cfg) + "trial,parameter,truth,estimate,error\n";
    for (std::size_t k = 0; k < reports.size(); ++k)
        for (const auto& p : reports[k].params)
            csv += std::to_string(k) + "," + p.name + "," + fmt_double(p.truth) + "," + fmt_double(p.estimate) + "," +
                   fmt_double(p.error) + "\n";
    return csv;
}

}  // namespace boselearn
