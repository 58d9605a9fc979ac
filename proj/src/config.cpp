#include "cdiff/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cdiff/errors.hpp"

namespace cdiff {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

SkstParams phi_from_json(const json& j) {
    SkstParams p;
    p.m = j.at("m").get<double>();
    p.v = j.at("v").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.tau = j.at("tau").get<double>();
    return p;
}

json phi_to_json(const SkstParams& p) {
    return json{{"m", p.m}, {"v", p.v}, {"lambda", p.lambda}, {"tau", p.tau}};
}

}  // namespace

SkstParams calibrated_skst() { return SkstParams{0.0835, 0.0358, 0.5193, 25.3708}; }

std::vector<ScenarioConfig> default_scenarios(UpdFamily family) {
    // persistence ladder: base kappa scaled by 1, 5, 10, 20
    std::vector<ScenarioConfig> out;
    if (family == UpdFamily::NormalizedOU) {
        const double kappas[] = {1.1376, 5.6882, 11.377, 22.753};
        const double rhos[] = {0.9944, 0.9758, 0.9531, 0.9093};
        for (int i = 0; i < 4; ++i)
            for (int n : {2202, 5505}) out.push_back({kappas[i], 0.0, rhos[i], n});
    } else {
        const double kappas[] = {0.7653, 3.8267, 7.6533, 15.307};
        const double rhos[] = {0.9921, 0.9675, 0.9399, 0.8917};
        for (int i = 0; i < 4; ++i)
            for (int n : {2202, 5505}) out.push_back({kappas[i], 1.1653, rhos[i], n});
    }
    return out;
}

UpdFamily family_from_string(const std::string& s) {
    if (s == "ou" || s == "nptou") return UpdFamily::NormalizedOU;
    if (s == "cir" || s == "nptcir") return UpdFamily::NormalizedCIR;
    throw ConfigError("unknown family: " + s);
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig cfg;
    cfg.raw_json = buf.str();
    json j;
    try {
        j = json::parse(cfg.raw_json);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        read_if(j, "subcommand", cfg.subcommand);
        read_if(j, "family", cfg.family);
        read_if(j, "estimator", cfg.estimator);
        read_if(j, "null_model", cfg.null_model);
        read_if(j, "theta", cfg.theta);
        if (j.contains("phi")) cfg.phi = phi_from_json(j.at("phi"));
        read_if(j, "delta", cfg.delta);
        read_if(j, "rho1", cfg.rho1);
        read_if(j, "n", cfg.n);
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        read_if(j, "bandwidth_factor", cfg.bandwidth_factor);
        read_if(j, "sieve_knots", cfg.sieve_knots);
        read_if(j, "bootstrap", cfg.bootstrap);
        read_if(j, "replications", cfg.replications);
        read_if(j, "input", cfg.input);
        read_if(j, "out_dir", cfg.out_dir);
        read_if(j, "threads", cfg.threads);
        read_if(j, "grid_points", cfg.grid_points);
        if (j.contains("scenarios")) {
            for (const auto& s : j.at("scenarios")) {
                ScenarioConfig sc;
                read_if(s, "kappa", sc.kappa);
                read_if(s, "alpha", sc.alpha);
                read_if(s, "rho1", sc.rho1);
                read_if(s, "n", sc.n);
                cfg.scenarios.push_back(sc);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    return cfg;
}

void finalize_run_config(RunConfig& cfg) {
    UpdFamily fam = family_from_string(cfg.family);
    if (cfg.theta.empty()) {
        if (fam == UpdFamily::NormalizedOU)
            cfg.theta = {1.1376};
        else
            cfg.theta = {0.7653, 1.1653};
    }
    if (cfg.delta <= 0.0) {
        if (cfg.rho1 > 0.0 && cfg.rho1 < 1.0 && !cfg.theta.empty() && cfg.theta[0] > 0.0)
            cfg.delta = -std::log(cfg.rho1) / cfg.theta[0];
        else
            throw ConfigError("either delta or (rho1, theta[0]) must be set");
    }
    if (cfg.n < 2) throw ConfigError("n must be at least 2");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    if (cfg.bandwidth_factor <= 0.0) throw ConfigError("bandwidth_factor must be positive");
    if (cfg.scenarios.empty() && cfg.subcommand == "mc-tables")
        cfg.scenarios = default_scenarios(fam);
    bool needs_seed = cfg.subcommand == "simulate" || cfg.subcommand == "mc-tables" ||
                      cfg.subcommand == "lr-test";
    if (needs_seed && !cfg.seed)
        throw ConfigError(cfg.subcommand + " requires an explicit seed (no silent nondeterminism)");
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j{{"subcommand", cfg.subcommand},
           {"family", cfg.family},
           {"estimator", cfg.estimator},
           {"null_model", cfg.null_model},
           {"theta", cfg.theta},
           {"delta", cfg.delta},
           {"rho1", cfg.rho1},
           {"n", cfg.n},
           {"bandwidth_factor", cfg.bandwidth_factor},
           {"sieve_knots", cfg.sieve_knots},
           {"bootstrap", cfg.bootstrap},
           {"replications", cfg.replications},
           {"input", cfg.input},
           {"out_dir", cfg.out_dir},
           {"threads", cfg.threads},
           {"grid_points", cfg.grid_points}};
    if (cfg.phi) j["phi"] = phi_to_json(*cfg.phi);
    if (cfg.seed) j["seed"] = *cfg.seed;
    if (!cfg.scenarios.empty()) {
        json arr = json::array();
        for (const auto& s : cfg.scenarios)
            arr.push_back(json{{"kappa", s.kappa}, {"alpha", s.alpha}, {"rho1", s.rho1}, {"n", s.n}});
        j["scenarios"] = arr;
    }
    return j.dump(2);
}

std::string model_to_json(const UpdModel& m, const TransitionDensitySpec& spec) {
    json j;
    switch (m.kind()) {
        case UpdKind::OU: j["kind"] = "ou"; break;
        case UpdKind::CIR: j["kind"] = "cir"; break;
        case UpdKind::NLDCEV: j["kind"] = "nldcev"; break;
        case UpdKind::ZeroDriftFlexible: j["kind"] = "zero_drift"; break;
        case UpdKind::UnitDiffusionPolynomial: j["kind"] = "unit_diffusion_poly"; break;
        case UpdKind::Custom: throw ConfigError("custom models are not serializable");
    }
    j["theta"] = m.theta();
    j["mirrored"] = m.is_mirrored();
    j["domain"] = {m.domain().lo, m.domain().hi};
    j["x_star"] = m.x_star();
    if (m.kind() == UpdKind::NLDCEV) {
        j["k"] = m.nldcev_k();
        j["l"] = m.nldcev_l();
    }
    switch (spec.method) {
        case TransitionMethod::ClosedFormGaussian: j["method"] = "gaussian"; break;
        case TransitionMethod::ClosedFormBessel: j["method"] = "bessel"; break;
        case TransitionMethod::EulerSubstep: j["method"] = "euler"; break;
        case TransitionMethod::QuadratureChapmanKolmogorov: j["method"] = "ck"; break;
    }
    j["delta"] = spec.delta;
    j["substeps"] = spec.substeps;
    return j.dump(2);
}

std::pair<UpdModel, TransitionDensitySpec> model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("model spec parse error: ") + e.what());
    }
    std::string kind = j.at("kind").get<std::string>();
    std::vector<double> theta = j.at("theta").get<std::vector<double>>();
    UpdModel m = [&]() {
        if (kind == "ou") return UpdModel::ou(theta.at(0), theta.at(1), theta.at(2));
        if (kind == "cir") return UpdModel::cir(theta.at(0), theta.at(1), theta.at(2));
        if (kind == "nldcev") {
            int k = j.at("k").get<int>(), l = j.at("l").get<int>();
            std::vector<double> alphas(theta.begin(), theta.end() - 2);
            return UpdModel::nldcev(alphas, k, l, theta[theta.size() - 2], theta.back());
        }
        if (kind == "zero_drift") return UpdModel::zero_drift_flexible(theta);
        if (kind == "unit_diffusion_poly") return UpdModel::unit_diffusion_polynomial(theta);
        throw ConfigError("unknown model kind: " + kind);
    }();
    if (j.value("mirrored", false)) m = UpdModel::mirrored(m);

    TransitionDensitySpec spec;
    spec.delta = j.value("delta", 1.0);
    spec.substeps = j.value("substeps", 1);
    std::string method = j.value("method", "euler");
    if (method == "gaussian") spec.method = TransitionMethod::ClosedFormGaussian;
    else if (method == "bessel") spec.method = TransitionMethod::ClosedFormBessel;
    else if (method == "euler") spec.method = TransitionMethod::EulerSubstep;
    else if (method == "ck") spec.method = TransitionMethod::QuadratureChapmanKolmogorov;
    else throw ConfigError("unknown transition method: " + method);
    return {std::move(m), spec};
}

}  // namespace cdiff
