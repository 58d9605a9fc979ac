#ifndef CDIFF_DRIFTDIFF_HPP
#define CDIFF_DRIFTDIFF_HPP

#include <span>
#include <vector>

#include "cdiff/estimate.hpp"

namespace cdiff {

/// Asymptotic smoothing bias/variance of the kernel-based drift and
/// diffusion estimators, evaluated from the marginal density of Y (and its
/// derivatives) and sigma_Y^2. kappa2, int K^2 and int (K')^2 refer to the
/// kernel in use.
double drift_smoothing_bias(double sigma2_y, double fy, double fy3, double kappa2);
double drift_smoothing_variance(double sigma2_y, double fy, double kernel_deriv_l2);
double diffusion_smoothing_bias(double sigma2_y, double fy, double fy2, double kappa2);
double diffusion_smoothing_variance(double sigma2_y, double fy, double kernel_l2);

/// Three-step kernel estimates of mu_Y and sigma_Y^2 on a grid, with the
/// plug-in smoothing-bias/variance diagnostics.
struct DriftDiffEstimate {
    std::vector<double> grid;
    std::vector<double> mu_hat;
    std::vector<double> sigma2_hat;
    double h = 0.0;
    std::vector<double> bias_mu;
    std::vector<double> var_mu;
    std::vector<double> bias_sigma2;
    std::vector<double> var_sigma2;
    int tail_points = 0;  // grid points outside the 1st-99th percentile band
};

DriftDiffEstimate estimate_drift_diffusion(std::span<const double> data, const FitResult& fit,
                                           UpdFamily family, std::span<const double> grid,
                                           double h);

}  // namespace cdiff

#endif  // CDIFF_DRIFTDIFF_HPP
