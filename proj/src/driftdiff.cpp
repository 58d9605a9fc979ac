#include "cdiff/driftdiff.hpp"

#include <algorithm>
#include <cmath>

#include "cdiff/errors.hpp"

namespace cdiff {

double drift_smoothing_bias(double sigma2_y, double fy, double fy3, double kappa2) {
    return -kappa2 * sigma2_y * fy3 / (4.0 * fy);
}

double drift_smoothing_variance(double sigma2_y, double fy, double kernel_deriv_l2) {
    return sigma2_y * sigma2_y / (4.0 * fy) * kernel_deriv_l2;
}

double diffusion_smoothing_bias(double sigma2_y, double fy, double fy2, double kappa2) {
    return -kappa2 * sigma2_y * fy2 / fy;
}

double diffusion_smoothing_variance(double sigma2_y, double fy, double kernel_l2) {
    return 4.0 * sigma2_y * sigma2_y / fy * kernel_l2;
}

DriftDiffEstimate estimate_drift_diffusion(std::span<const double> data, const FitResult& fit,
                                           UpdFamily family, std::span<const double> grid,
                                           double h) {
    if (!(h > 0.0)) throw BandwidthError("estimate_drift_diffusion: bandwidth must be positive");
    UpdModel model = family_build(family, fit.theta);
    auto kernel = std::make_shared<KernelMarginal>(
        KernelEstimate(std::vector<double>(data.begin(), data.end()), h));
    Structure s = make_structure(model, std::make_shared<MarginalInducedTransform>(kernel, model));

    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    double q01 = sorted[static_cast<std::size_t>(0.01 * (sorted.size() - 1))];
    double q99 = sorted[static_cast<std::size_t>(0.99 * (sorted.size() - 1))];

    DriftDiffEstimate out;
    out.grid.assign(grid.begin(), grid.end());
    out.h = h;
    for (double y : grid) {
        auto [mu, s2] = transformed_drift_diffusion(s, y);
        out.mu_hat.push_back(mu);
        out.sigma2_hat.push_back(s2);
        double fy = kernel->pdf(y);
        double fy2 = kernel->pdf_deriv(y, 2);
        double fy3 = kernel->pdf_deriv(y, 3);
        out.bias_mu.push_back(drift_smoothing_bias(s2, fy, fy3, KernelEstimate::kappa2()));
        out.var_mu.push_back(drift_smoothing_variance(s2, fy, KernelEstimate::kernel_deriv_l2()));
        out.bias_sigma2.push_back(diffusion_smoothing_bias(s2, fy, fy2, KernelEstimate::kappa2()));
        out.var_sigma2.push_back(diffusion_smoothing_variance(s2, fy, KernelEstimate::kernel_l2()));
        if (y < q01 || y > q99) ++out.tail_points;
    }
    return out;
}

}  // namespace cdiff
