#ifndef CDIFF_INFERENCE_HPP
#define CDIFF_INFERENCE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cdiff/estimate.hpp"
#include "cdiff/skst.hpp"

namespace cdiff {

/// Sample lag-1 autocorrelation (demeaned, biased normalization).
double acf1(std::span<const double> series);

/// Structure of the SKST-transformed data generating processes used in the
/// Monte Carlo design.
Structure skst_structure(UpdFamily family, std::span<const double> theta, const SkstParams& phi);

/// One Monte Carlo scenario: family, true parameters, persistence target
/// (the sampling interval is delta = -log(rho1)/kappa) and sample size.
struct McScenario {
    UpdFamily family = UpdFamily::NormalizedOU;
    std::vector<double> theta_true;
    double rho1 = 0.9;
    int n = 2202;
    SkstParams phi;
};

struct McRow {
    std::string estimator;
    std::string param;
    double true_value = 0.0;
    double rel_bias = 0.0;
    double rel_rmse = 0.0;
    double mean_rho1 = 0.0;
    int replications = 0;
    int failed = 0;
};

/// Raw per-replication estimates, one inner vector per estimator parameter.
struct McDraws {
    std::vector<std::vector<double>> ppmle;  // [param][replication]
    std::vector<std::vector<double>> pmle;
    std::vector<double> rho1;
    int failed = 0;
};

McDraws mc_draws(const McScenario& sc, int replications, std::uint64_t seed,
                 const FitOptions& opts, int threads = 1);

/// Relative bias and RMSE rows for both estimators, Tables 1-3 style.
std::vector<McRow> mc_experiment(const McScenario& sc, int replications, std::uint64_t seed,
                                 const FitOptions& opts, int threads = 1);

struct LrTestReport {
    double lr = 0.0;  // summed pseudo log-likelihood minus summed log-likelihood
    double cv05 = 0.0;
    double cv01 = 0.0;
    double p_value = 0.0;
    int b_requested = 0;
    int b_completed = 0;
    int b_failed = 0;
    std::vector<double> boot_lrs;
    FitResult null_fit;
    FitResult alt_fit;
    double pseudo_ll_sum = 0.0;
    double null_ll_sum = 0.0;
    double bandwidth = 0.0;
};

/// Parametric-bootstrap pseudo-likelihood-ratio test of a parametric
/// transformed diffusion against its semiparametric alternative. The
/// bandwidth (Silverman x factor) is recomputed for every bootstrap draw.
LrTestReport pseudo_lr_test(std::span<const double> data, ParametricModel null_model,
                            UpdFamily alt_family, double delta, int bootstrap, std::uint64_t seed,
                            double bandwidth_factor, const FitOptions& opts, int threads = 1);

/// Order-statistic quantile with linear interpolation.
double sample_quantile(std::vector<double> values, double p);

}  // namespace cdiff

#endif  // CDIFF_INFERENCE_HPP
