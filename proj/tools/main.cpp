#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "cdiff/config.hpp"
#include "cdiff/csv.hpp"
#include "cdiff/driftdiff.hpp"
#include "cdiff/errors.hpp"
#include "cdiff/inference.hpp"
#include "cdiff/simulate.hpp"

namespace {

using cdiff::RunConfig;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitIo = 5;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir, family, estimator, input, null_model;
    std::optional<int> n, threads, bootstrap, replications, sieve_knots, grid_points;
    std::optional<double> delta, rho1, bandwidth_factor;
    std::vector<double> theta;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON config file");
    cmd->add_option("--seed", ov.seed, "master seed (all randomness flows from it)");
    cmd->add_option("--out-dir", ov.out_dir, "output directory");
    cmd->add_option("--threads", ov.threads, "parallel workers for replication loops");
    cmd->add_option("--family", ov.family, "UPD family: ou | cir");
    cmd->add_option("--estimator", ov.estimator,
                    "pmle | kernel-pmle | euler-pmle | smle | ppmle | do | ew");
    cmd->add_option("--input", ov.input, "input series CSV");
    cmd->add_option("--n", ov.n, "number of increments");
    cmd->add_option("--delta", ov.delta, "sampling interval");
    cmd->add_option("--rho1", ov.rho1, "target lag-1 autocorrelation (sets delta)");
    cmd->add_option("--theta", ov.theta, "model parameters");
    cmd->add_option("--bandwidth-factor", ov.bandwidth_factor, "Silverman multiplier");
    cmd->add_option("--bootstrap", ov.bootstrap, "bootstrap draws B");
    cmd->add_option("--replications", ov.replications, "Monte Carlo replications R");
    cmd->add_option("--sieve-knots", ov.sieve_knots, "sieve basis size");
    cmd->add_option("--grid-points", ov.grid_points, "export grid size");
    cmd->add_option("--null-model", ov.null_model, "lr-test null: do | ew");
}

RunConfig build_config(const Overrides& ov, const std::string& subcommand) {
    RunConfig cfg;
    if (!ov.config_path.empty()) cfg = cdiff::load_run_config(ov.config_path);
    cfg.subcommand = subcommand;
    if (ov.seed) cfg.seed = ov.seed;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.family) cfg.family = *ov.family;
    if (ov.estimator) cfg.estimator = *ov.estimator;
    if (ov.input) cfg.input = *ov.input;
    if (ov.null_model) cfg.null_model = *ov.null_model;
    if (ov.n) cfg.n = *ov.n;
    if (ov.threads) cfg.threads = *ov.threads;
    if (ov.bootstrap) cfg.bootstrap = *ov.bootstrap;
    if (ov.replications) cfg.replications = *ov.replications;
    if (ov.sieve_knots) cfg.sieve_knots = *ov.sieve_knots;
    if (ov.grid_points) cfg.grid_points = *ov.grid_points;
    if (ov.delta) cfg.delta = *ov.delta;
    if (ov.rho1) cfg.rho1 = *ov.rho1;
    if (ov.bandwidth_factor) cfg.bandwidth_factor = *ov.bandwidth_factor;
    if (!ov.theta.empty()) cfg.theta = ov.theta;
    cdiff::finalize_run_config(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

void echo_config(const RunConfig& cfg, const std::string& name) {
    std::ofstream out(std::filesystem::path(cfg.out_dir) / name);
    if (!out) throw cdiff::IoError("cannot write config echo");
    out << cdiff::run_config_to_json(cfg) << '\n';
}

cdiff::FitOptions fit_options(const RunConfig& cfg) {
    cdiff::FitOptions opts;
    opts.bandwidth_factor = cfg.bandwidth_factor;
    opts.sieve.knots = cfg.sieve_knots;
    if (cfg.seed) opts.seed = *cfg.seed;
    return opts;
}

cdiff::Structure dgp_structure(const RunConfig& cfg) {
    cdiff::UpdFamily fam = cdiff::family_from_string(cfg.family);
    cdiff::SkstParams phi = cfg.phi.value_or(cdiff::calibrated_skst());
    return cdiff::skst_structure(fam, cfg.theta, phi);
}

int cmd_simulate(const RunConfig& cfg) {
    cdiff::PathConfig pc;
    pc.n = cfg.n;
    pc.delta = cfg.delta;
    pc.seed = *cfg.seed;
    pc.init = cdiff::InitKind::StationaryDraw;
    std::vector<double> y = cdiff::simulate_transformed(dgp_structure(cfg), pc);
    auto path = std::filesystem::path(cfg.out_dir) / "series.csv";
    cdiff::write_series_csv(path.string(), y, cfg.delta);
    echo_config(cfg, "simulate_config.json");
    std::cout << path.string() << '\n';
    std::cerr << "simulated " << y.size() << " observations at delta=" << cfg.delta << '\n';
    return 0;
}

json fit_to_json(const cdiff::FitResult& fit, std::size_t n_obs) {
    json est = json::object(), se = json::object();
    for (std::size_t i = 0; i < fit.theta.size(); ++i) {
        est[fit.param_names[i]] = fit.theta[i];
        if (i < fit.se.size()) se[fit.param_names[i]] = fit.se[i];
    }
    json j{{"estimates", est},
           {"standard_errors", se},
           {"LL", fit.objective * static_cast<double>(n_obs - 1)},
           {"avg_loglik", fit.objective},
           {"converged", fit.converged},
           {"evaluations", fit.evaluations},
           {"delta", fit.delta}};
    if (!fit.phi.empty())
        j["phi"] = {{"m", fit.phi[0]}, {"v", fit.phi[1]}, {"lambda", fit.phi[2]},
                    {"tau", fit.phi[3]}};
    if (!fit.message.empty()) j["message"] = fit.message;
    return j;
}

cdiff::FitResult run_estimator(const RunConfig& cfg, std::span<const double> data) {
    using cdiff::CdfVariant;
    cdiff::UpdFamily fam = cdiff::family_from_string(cfg.family);
    cdiff::FitOptions opts = fit_options(cfg);
    double d = cfg.delta;
    const std::string& e = cfg.estimator;
    if (e == "pmle") return cdiff::fit_pmle(data, fam, d, opts);
    if (e == "kernel-pmle") return cdiff::fit_pmle(data, fam, d, opts, CdfVariant::Kernel);
    if (e == "euler-pmle") return cdiff::fit_euler_pmle(data, fam, d, opts);
    if (e == "smle") return cdiff::fit_smle(data, fam, d, opts.sieve, opts).fit;
    if (e == "ppmle")
        return cdiff::fit_parametric(data,
                                     fam == cdiff::UpdFamily::NormalizedOU
                                         ? cdiff::ParametricModel::OuSkstTwoStage
                                         : cdiff::ParametricModel::CirSkstTwoStage,
                                     d, opts);
    if (e == "do") return cdiff::fit_parametric(data, cdiff::ParametricModel::DO, d, opts);
    if (e == "ew") return cdiff::fit_parametric(data, cdiff::ParametricModel::EW, d, opts);
    throw cdiff::ConfigError("unknown estimator: " + e);
}

int cmd_fit(const RunConfig& cfg) {
    if (cfg.input.empty()) throw cdiff::ConfigError("fit requires --input");
    cdiff::SeriesData series = cdiff::read_series_csv(cfg.input);
    cdiff::FitResult fit = run_estimator(cfg, series.values);

    json report = fit_to_json(fit, series.values.size());
    report["estimator"] = cfg.estimator;
    report["n_observations"] = series.values.size();
    report["config"] = json::parse(cdiff::run_config_to_json(cfg));
    auto path = std::filesystem::path(cfg.out_dir) / "fit_report.json";
    std::ofstream out(path);
    if (!out) throw cdiff::IoError("cannot write " + path.string());
    out << report.dump(2) << '\n';
    std::cout << path.string() << '\n';
    return 0;
}

int cmd_lr_test(const RunConfig& cfg) {
    if (cfg.input.empty()) throw cdiff::ConfigError("lr-test requires --input");
    cdiff::SeriesData series = cdiff::read_series_csv(cfg.input);
    cdiff::ParametricModel null_model = cfg.null_model == "ew" ? cdiff::ParametricModel::EW
                                                               : cdiff::ParametricModel::DO;
    cdiff::UpdFamily alt = cfg.null_model == "ew" ? cdiff::UpdFamily::NormalizedCIR
                                                  : cdiff::UpdFamily::NormalizedOU;
    if (!cfg.family.empty()) alt = cdiff::family_from_string(cfg.family);

    cdiff::LrTestReport rep =
        cdiff::pseudo_lr_test(series.values, null_model, alt, cfg.delta, cfg.bootstrap,
                              *cfg.seed, cfg.bandwidth_factor, fit_options(cfg), cfg.threads);

    json j{{"LR", rep.lr},
           {"CV_0.05", rep.cv05},
           {"CV_0.01", rep.cv01},
           {"p-value", rep.p_value},
           {"pseudo_LL", rep.pseudo_ll_sum},
           {"null_LL", rep.null_ll_sum},
           {"bandwidth", rep.bandwidth},
           {"bootstrap_requested", rep.b_requested},
           {"bootstrap_completed", rep.b_completed},
           {"bootstrap_excluded", rep.b_failed},
           {"null_fit", fit_to_json(rep.null_fit, series.values.size())},
           {"alt_fit", fit_to_json(rep.alt_fit, series.values.size())},
           {"config", json::parse(cdiff::run_config_to_json(cfg))}};
    auto path = std::filesystem::path(cfg.out_dir) / "lr_test_report.json";
    std::ofstream out(path);
    if (!out) throw cdiff::IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    std::cout << path.string() << '\n';
    return 0;
}

int cmd_mc_tables(const RunConfig& cfg) {
    cdiff::UpdFamily fam = cdiff::family_from_string(cfg.family);
    cdiff::SkstParams phi = cfg.phi.value_or(cdiff::calibrated_skst());
    cdiff::FitOptions opts = fit_options(cfg);
    opts.compute_se = false;
    opts.restarts = 2;  // replication loops; the start values are informed

    std::vector<std::vector<double>> cols(11);
    std::vector<std::string> estimators;
    std::size_t scenario_index = 0;
    for (const cdiff::ScenarioConfig& sc : cfg.scenarios) {
        cdiff::McScenario mc;
        mc.family = fam;
        mc.theta_true = fam == cdiff::UpdFamily::NormalizedOU
                            ? std::vector<double>{sc.kappa}
                            : std::vector<double>{sc.kappa, sc.alpha};
        mc.rho1 = sc.rho1;
        mc.n = sc.n;
        mc.phi = phi;
        std::uint64_t scenario_seed = *cfg.seed + 1000003ULL * scenario_index++;
        auto rows = cdiff::mc_experiment(mc, cfg.replications, scenario_seed, opts, cfg.threads);
        for (const cdiff::McRow& r : rows) {
            cols[0].push_back(sc.kappa);
            cols[1].push_back(sc.alpha);
            cols[2].push_back(sc.rho1);
            cols[3].push_back(sc.n);
            cols[4].push_back(r.estimator == "PPMLE" ? 0.0 : 1.0);
            cols[5].push_back(r.true_value);
            cols[6].push_back(r.rel_bias);
            cols[7].push_back(r.rel_rmse);
            cols[8].push_back(r.mean_rho1);
            cols[9].push_back(r.replications);
            cols[10].push_back(r.failed);
            estimators.push_back(r.estimator + "/" + r.param);
        }
        std::cerr << "scenario kappa=" << sc.kappa << " n=" << sc.n << " done\n";
    }

    auto path = std::filesystem::path(cfg.out_dir) / "mc_table.csv";
    std::ofstream out(path);
    if (!out) throw cdiff::IoError("cannot write " + path.string());
    out.precision(10);
    out << "kappa,alpha,rho1_target,n,estimator,param,true_value,rel_bias,rel_rmse,"
           "mean_rho1,replications,failed\n";
    for (std::size_t i = 0; i < estimators.size(); ++i) {
        auto slash = estimators[i].find('/');
        out << cols[0][i] << ',' << cols[1][i] << ',' << cols[2][i] << ',' << cols[3][i] << ','
            << estimators[i].substr(0, slash) << ',' << estimators[i].substr(slash + 1) << ','
            << cols[5][i] << ',' << cols[6][i] << ',' << cols[7][i] << ',' << cols[8][i] << ','
            << cols[9][i] << ',' << cols[10][i] << '\n';
    }
    echo_config(cfg, "mc_config.json");
    std::cout << path.string() << '\n';
    return 0;
}

int cmd_export_functions(const RunConfig& cfg) {
    if (cfg.input.empty()) throw cdiff::ConfigError("export-functions requires --input");
    cdiff::SeriesData series = cdiff::read_series_csv(cfg.input);
    std::span<const double> data = series.values;
    cdiff::UpdFamily fam = cdiff::family_from_string(cfg.family);
    cdiff::FitResult fit = run_estimator(cfg, data);

    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted[static_cast<std::size_t>(0.01 * (sorted.size() - 1))];
    double hi = sorted[static_cast<std::size_t>(0.99 * (sorted.size() - 1))];
    std::vector<double> grid(cfg.grid_points);
    for (int i = 0; i < cfg.grid_points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (cfg.grid_points - 1);

    double h = cdiff::silverman_bandwidth(data, cfg.bandwidth_factor);
    cdiff::DriftDiffEstimate est = cdiff::estimate_drift_diffusion(data, fit, fam, grid, h);

    std::vector<double> mu_true(grid.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> sigma2_true = mu_true;
    if (cfg.phi) {
        cdiff::Structure truth = dgp_structure(cfg);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            auto [mu, s2] = cdiff::transformed_drift_diffusion(truth, grid[i]);
            mu_true[i] = mu;
            sigma2_true[i] = s2;
        }
    }
    auto path = std::filesystem::path(cfg.out_dir) / "functions.csv";
    cdiff::write_table_csv(path.string(), {"y", "mu_hat", "sigma2_hat", "mu_true", "sigma2_true"},
                           {est.grid, est.mu_hat, est.sigma2_hat, mu_true, sigma2_true});
    std::cout << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"copula-transformed diffusion models: simulation, estimation and testing"};
    app.require_subcommand(1);

    std::map<std::string, Overrides> ov;
    std::map<std::string, CLI::App*> cmds;
    for (const char* name :
         {"simulate", "fit", "lr-test", "mc-tables", "export-functions"}) {
        cmds[name] = app.add_subcommand(name);
        add_common_flags(cmds[name], ov[name]);
    }
    cmds["simulate"]->description("simulate a transformed diffusion sample to CSV");
    cmds["fit"]->description("fit an estimator to an observed series");
    cmds["lr-test"]->description("parametric-bootstrap pseudo-likelihood-ratio test");
    cmds["mc-tables"]->description("bias/RMSE Monte Carlo tables");
    cmds["export-functions"]->description("export drift/diffusion function grids");

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto& [name, cmd] : cmds) {
            if (!cmd->parsed()) continue;
            RunConfig cfg = build_config(ov[name], name);
            if (name == "simulate") return cmd_simulate(cfg);
            if (name == "fit") return cmd_fit(cfg);
            if (name == "lr-test") return cmd_lr_test(cfg);
            if (name == "mc-tables") return cmd_mc_tables(cfg);
            if (name == "export-functions") return cmd_export_functions(cfg);
        }
    } catch (const cdiff::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cdiff::ParamError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cdiff::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const cdiff::DomainError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const cdiff::DegenerateSampleError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const cdiff::NonConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const cdiff::ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const cdiff::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const cdiff::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
