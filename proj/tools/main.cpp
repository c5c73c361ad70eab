// Command-line front end: experiment-config ingestion, learning campaigns,
// scaling sweeps with an SQL control, and the bound-verification suites.
//
// Exit codes: 0 success, 2 config/validation error, 3 runtime failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "boselearn/config.hpp"
#include "boselearn/verify.hpp"

namespace fs = std::filesystem;
using namespace boselearn;

namespace {

std::string resolve_out_dir(const std::string& from_config, const std::string& from_flag) {
    if (!from_flag.empty()) return from_flag;
    if (const char* env = std::getenv("BOSELEARN_OUT_DIR")) return env;
    return from_config;
}

void apply_overrides(ExperimentConfig& cfg, double epsilon, int trials, std::int64_t seed, double spam,
                     int cutoff) {
    if (epsilon > 0) cfg.protocol.epsilon = epsilon;
    if (trials > 0) cfg.campaign.trials = trials;
    if (seed >= 0) cfg.campaign.seed = static_cast<std::uint64_t>(seed);
    if (spam >= 0) cfg.protocol.spam_strength = spam;
    if (cutoff > 0) cfg.protocol.cutoff = cutoff;
}

int validate_or_report(const ExperimentConfig& cfg) {
    validate_model_spec(cfg.model);
    const auto rep = validate_protocol_config(cfg.protocol);
    for (const auto& item : rep.items) {
        if (!item.ok && item.hard) {
            std::cerr << "validation failure: " << item.name << " (" << item.message << "; have "
                      << fmt_double(item.lhs) << ", need vs " << fmt_double(item.rhs) << ")\n";
        } else if (!item.ok) {
            std::cerr << "advisory: " << item.name << " not satisfied (" << item.message << ")\n";
        }
    }
    return rep.hard_ok() ? 0 : 2;
}

int cmd_learn(const std::string& config_path, const std::string& out_flag, double epsilon, int trials,
              std::int64_t seed, double spam, int cutoff) {
    ExperimentConfig cfg = load_config(config_path);
    apply_overrides(cfg, epsilon, trials, seed, spam, cutoff);
    if (const int rc = validate_or_report(cfg)) return rc;

    const auto reports = run_campaign(cfg);
    const std::string dir = resolve_out_dir(cfg.outputs.directory, out_flag);
    fs::create_directories(dir);
    write_text(dir + "/report.json", report_json(cfg, reports).dump(2) + "\n");
    if (cfg.outputs.trials_csv) write_text(dir + "/trials.csv", trials_csv(cfg, reports));

    const auto s = summarize(reports);
    std::cout << "learn: " << reports.size() << " trials, mean evolution time " << fmt_double(s.mean_evolution_time)
              << ", mean experiments " << fmt_double(s.mean_experiments) << "\n";
    for (const auto& [name, rmse] : s.rmse) std::cout << "  rmse " << name << " = " << fmt_double(rmse) << "\n";
    std::cout << "wrote " << dir << "/report.json\n";
    return 0;
}

struct ClassRmse {
    double omega = 0.0, xi = 0.0, h = 0.0;
};

ClassRmse class_rmse(const std::vector<EstimationReport>& reports) {
    double se_w = 0, se_x = 0, se_h = 0;
    int n_w = 0, n_x = 0, n_h = 0;
    for (const auto& r : reports)
        for (const auto& p : r.params) {
            if (p.name.rfind("omega_", 0) == 0) {
                se_w += p.error * p.error;
                ++n_w;
            } else if (p.name.rfind("xi_", 0) == 0) {
                se_x += p.error * p.error;
                ++n_x;
            } else {
                se_h += p.error * p.error;
                ++n_h;
            }
        }
    ClassRmse out;
    out.omega = n_w ? std::sqrt(se_w / n_w) : 0.0;
    out.xi = n_x ? std::sqrt(se_x / n_x) : 0.0;
    out.h = n_h ? std::sqrt(se_h / n_h) : 0.0;
    return out;
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag, std::vector<double> epsilons,
              bool with_sql, std::int64_t seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (seed >= 0) cfg.campaign.seed = static_cast<std::uint64_t>(seed);
    if (epsilons.empty()) epsilons = {0.1, 0.05, 0.02, 0.01};
    if (const int rc = validate_or_report(cfg)) return rc;

    std::vector<double> times, eps_used;
    std::string csv = csv_provenance(cfg) +
                      "epsilon,rmse_omega,rmse_xi,rmse_h,mean_evolution_time,mean_experiments,sql_samples\n";
    ordered_json rows = ordered_json::array();

    std::vector<SqlBaselinePoint> sql;
    if (with_sql) {
        const auto m0 = materialize_model(cfg.model, 0);
        std::vector<double> desc = epsilons;
        std::sort(desc.begin(), desc.end(), std::greater<>());
        sql = sql_baseline_curve(desc, m0.omega[0], m0.xi[0], cfg.protocol.alpha, cfg.campaign.seed ^ 0x5154);
    }

    for (const double eps : epsilons) {
        ExperimentConfig point = cfg;
        point.protocol.epsilon = eps;
        const auto reports = run_campaign(point);
        const auto s = summarize(reports);
        const auto cls = class_rmse(reports);
        std::int64_t sql_samples = 0;
        for (const auto& p : sql)
            if (p.epsilon == eps) sql_samples = p.samples;
        csv += fmt_double(eps) + "," + fmt_double(cls.omega) + "," + fmt_double(cls.xi) + "," + fmt_double(cls.h) +
               "," + fmt_double(s.mean_evolution_time) + "," + fmt_double(s.mean_experiments) + "," +
               std::to_string(sql_samples) + "\n";
        ordered_json row;
        row["epsilon"] = eps;
        row["rmse_omega"] = cls.omega;
        row["rmse_xi"] = cls.xi;
        row["rmse_h"] = cls.h;
        row["mean_evolution_time"] = s.mean_evolution_time;
        row["mean_experiments"] = s.mean_experiments;
        row["sql_samples"] = sql_samples;
        rows.push_back(row);
        times.push_back(s.mean_evolution_time);
        eps_used.push_back(eps);
        std::cout << "eps=" << fmt_double(eps) << " rmse(omega)=" << fmt_double(cls.omega)
                  << " rmse(xi)=" << fmt_double(cls.xi) << " T=" << fmt_double(s.mean_evolution_time) << "\n";
    }

    ordered_json j;
    j["schema_version"] = 1;
    j["library_version"] = kVersion;
    j["config_hash"] = config_hash(cfg);
    j["rows"] = rows;
    const bool fit_available = epsilons.size() >= 3;
    j["fit_available"] = fit_available;
    if (fit_available) {
        std::vector<double> inv_eps;
        for (const double e : eps_used) inv_eps.push_back(1.0 / e);
        double se_t = 0;
        const double slope_t = fit_loglog_slope(inv_eps, times, &se_t);
        j["time_slope"] = slope_t;
        j["time_slope_stderr"] = se_t;
        csv += "# fit_time_slope=" + fmt_double(slope_t) + " stderr=" + fmt_double(se_t) + "\n";
        std::cout << "total-evolution-time slope vs 1/eps: " << fmt_double(slope_t) << "\n";
        if (with_sql && sql.size() >= 3) {
            std::vector<double> inv, counts;
            for (const auto& p : sql) {
                inv.push_back(1.0 / p.epsilon);
                counts.push_back(static_cast<double>(p.samples));
            }
            double se_s = 0;
            const double slope_s = fit_loglog_slope(inv, counts, &se_s);
            j["sql_slope"] = slope_s;
            j["sql_slope_stderr"] = se_s;
            csv += "# fit_sql_slope=" + fmt_double(slope_s) + " stderr=" + fmt_double(se_s) + "\n";
            std::cout << "SQL-control sample-count slope vs 1/eps: " << fmt_double(slope_s) << "\n";
        }
    } else {
        csv += "# fit unavailable: need at least 3 epsilon points\n";
        std::cout << "fit unavailable (need >= 3 epsilon points)\n";
    }

    const std::string dir = resolve_out_dir(cfg.outputs.directory, out_flag);
    fs::create_directories(dir);
    write_text(dir + "/scaling.csv", csv);
    write_text(dir + "/sweep.json", j.dump(2) + "\n");
    std::cout << "wrote " << dir << "/scaling.csv\n";
    return 0;
}

int cmd_verify_bounds(const std::string& config_path, const std::string& out_flag, std::int64_t seed) {
    std::string dir = "out";
    std::uint64_t sd = 2718;
    if (!config_path.empty()) {
        const ExperimentConfig cfg = load_config(config_path);
        dir = cfg.outputs.directory;
        sd = cfg.campaign.seed;
    }
    if (seed >= 0) sd = static_cast<std::uint64_t>(seed);
    const auto rows = verify_all(sd);
    ordered_json suites = ordered_json::array();
    bool all_pass = true;
    std::printf("%-20s %-58s %14s %14s %6s\n", "suite", "check", "value", "target", "pass");
    for (const auto& r : rows) {
        std::printf("%-20s %-58s %14.6g %14.6g %6s\n", r.suite.c_str(), r.check.c_str(), r.value, r.target,
                    r.pass ? "yes" : "NO");
        ordered_json e;
        e["suite"] = r.suite;
        e["check"] = r.check;
        e["value"] = r.value;
        e["target"] = r.target;
        e["pass"] = r.pass;
        suites.push_back(e);
        all_pass = all_pass && r.pass;
    }
    ordered_json j;
    j["schema_version"] = 1;
    j["library_version"] = kVersion;
    j["seed"] = sd;
    j["rows"] = suites;
    dir = resolve_out_dir(dir, out_flag);
    fs::create_directories(dir);
    write_text(dir + "/verify.json", j.dump(2) + "\n");
    std::cout << (all_pass ? "all suites passed\n" : "suite failures present\n");
    return all_pass ? 0 : 1;
}

int cmd_gen_config(const std::string& path, const std::string& type, int modes) {
    ExperimentConfig cfg;
    cfg.model.type = type;
    cfg.model.num_modes = modes;
    if (type == "grid") {
        cfg.model.rows = 2;
        cfg.model.cols = (modes + 1) / 2;
    }
    cfg.model.random_params = true;
    write_text(path, to_json(cfg).dump(2) + "\n");
    std::cout << "wrote " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heisenberg-limited learning of interacting bosonic Hamiltonians (simulation harness)"};
    app.require_subcommand(1);

    std::string config_path, out_dir, gen_path, gen_type = "single";
    double epsilon = -1, spam = -1;
    int trials = -1, cutoff = -1, gen_modes = 1;
    std::int64_t seed = -1;
    std::vector<double> epsilons;
    bool no_sql = false;

    auto* learn = app.add_subcommand("learn", "run a learning campaign from a config file");
    learn->add_option("config", config_path, "experiment config (JSON)")->required();
    learn->add_option("--out", out_dir, "output directory (overrides config and BOSELEARN_OUT_DIR)");
    learn->add_option("--epsilon", epsilon, "target RMSE override");
    learn->add_option("--trials", trials, "trial count override");
    learn->add_option("--seed", seed, "campaign seed override");
    learn->add_option("--spam", spam, "SPAM strength override");
    learn->add_option("--cutoff", cutoff, "Fock cutoff override");

    auto* sweep = app.add_subcommand("sweep", "epsilon sweep with slope fits and the SQL control");
    sweep->add_option("config", config_path, "experiment config (JSON)")->required();
    sweep->add_option("--epsilons", epsilons, "epsilon grid (descending)");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--seed", seed, "campaign seed override");
    sweep->add_flag("--no-sql", no_sql, "skip the SQL-control column");

    auto* verify = app.add_subcommand("verify-bounds", "run the bound-verification suites");
    verify->add_option("config", config_path, "optional config (seed / output directory)");
    verify->add_option("--out", out_dir, "output directory");
    verify->add_option("--seed", seed, "suite seed");

    auto* gen = app.add_subcommand("gen-config", "write a default experiment config");
    gen->add_option("path", gen_path, "output path")->required();
    gen->add_option("--type", gen_type, "single | chain | grid | edges");
    gen->add_option("--modes", gen_modes, "number of modes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (learn->parsed()) return cmd_learn(config_path, out_dir, epsilon, trials, seed, spam, cutoff);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, epsilons, !no_sql, seed);
        if (verify->parsed()) return cmd_verify_bounds(config_path, out_dir, seed);
        if (gen->parsed()) return cmd_gen_config(gen_path, gen_type, gen_modes);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
