#ifndef CDIFF_CONFIG_HPP
#define CDIFF_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdiff/estimate.hpp"
#include "cdiff/inference.hpp"
#include "cdiff/skst.hpp"
#include "cdiff/upd.hpp"

namespace cdiff {

/// A Monte Carlo table scenario as configured (kappa values and target
/// autocorrelations follow the study design; delta = -log(rho1)/kappa).
struct ScenarioConfig {
    double kappa = 1.0;
    double alpha = 1.0;  // CIR only
    double rho1 = 0.99;
    int n = 2202;
};

/// Everything a CLI run needs; parsed from a JSON config file with
/// command-line flag overrides (flags win).
struct RunConfig {
    std::string subcommand;
    std::string family = "ou";       // ou | cir
    std::string estimator = "pmle";  // pmle | kernel-pmle | euler-pmle | smle | ppmle | do | ew
    std::string null_model = "do";   // lr-test: do | ew
    std::vector<double> theta;       // DGP parameters (simulate) or start values (fit)
    std::optional<SkstParams> phi;   // SKST marginal of the DGP
    double delta = 0.0;              // sampling interval; 0 derives it from rho1
    double rho1 = 0.0;
    int n = 2202;
    std::optional<std::uint64_t> seed;
    double bandwidth_factor = 1.5;
    int sieve_knots = 8;
    int bootstrap = 99;
    int replications = 100;
    std::string input;
    std::string out_dir = ".";
    int threads = 1;
    int grid_points = 41;
    std::vector<ScenarioConfig> scenarios;  // mc-tables; defaults per family when empty

    std::string raw_json;  // verbatim config echo for report provenance
};

RunConfig load_run_config(const std::string& path);
/// Applies defaults that depend on other fields (delta from rho1, default
/// scenario grids) and validates; throws ConfigError.
void finalize_run_config(RunConfig& cfg);

std::string run_config_to_json(const RunConfig& cfg);

/// Model spec (de)serialization: kind, theta, domain, x_star, transition
/// method and substeps.
std::string model_to_json(const UpdModel& m, const TransitionDensitySpec& spec);
std::pair<UpdModel, TransitionDensitySpec> model_from_json(const std::string& text);

/// Default Monte Carlo scenario grids (persistence ladder of the study).
std::vector<ScenarioConfig> default_scenarios(UpdFamily family);
/// Calibrated SKST marginal parameters of the study design.
SkstParams calibrated_skst();

UpdFamily family_from_string(const std::string& s);

}  // namespace cdiff

#endif  // CDIFF_CONFIG_HPP
