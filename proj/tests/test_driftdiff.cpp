#include <doctest.h>

#include <cmath>

#include "cdiff/driftdiff.hpp"
#include "cdiff/errors.hpp"
#include "cdiff/inference.hpp"
#include "cdiff/marginals.hpp"
#include "cdiff/simulate.hpp"
#include "cdiff/special.hpp"

using namespace cdiff;

namespace {
const SkstParams kCalibrated{0.0835, 0.0358, 0.5193, 25.3708};
}

TEST_CASE("plug-in with the oracle marginal recovers the model functions exactly") {
    auto ou = UpdModel::normalized_ou(3.0);
    Structure s = make_structure(
        ou, std::make_shared<MarginalInducedTransform>(std::make_shared<StationaryMarginal>(ou),
                                                       ou));
    for (double y : {-1.2, -0.1, 0.6, 1.8}) {
        auto [mu, s2] = transformed_drift_diffusion(s, y);
        CHECK(mu == doctest::Approx(ou.drift(y)).epsilon(1e-8));
        CHECK(s2 == doctest::Approx(ou.sigma2(y)).epsilon(1e-8));
    }
}

TEST_CASE("theorem-style smoothing variance formula is a direct identity") {
    double sigma2 = 0.7, fy = 1.9;
    CHECK(diffusion_smoothing_variance(sigma2, fy, KernelEstimate::kernel_l2()) ==
          doctest::Approx(4.0 * sigma2 * sigma2 / fy * (1.0 / (2.0 * std::sqrt(kPi))))
              .epsilon(1e-14));
    CHECK(drift_smoothing_variance(sigma2, fy, KernelEstimate::kernel_deriv_l2()) ==
          doctest::Approx(sigma2 * sigma2 / (4.0 * fy) * (1.0 / (4.0 * std::sqrt(kPi))))
              .epsilon(1e-14));
    CHECK(drift_smoothing_bias(sigma2, fy, 0.4, 1.0) ==
          doctest::Approx(-0.4 * sigma2 / (4.0 * fy)).epsilon(1e-14));
    CHECK(diffusion_smoothing_bias(sigma2, fy, 0.4, 1.0) ==
          doctest::Approx(-0.4 * sigma2 / fy).epsilon(1e-14));
}

TEST_CASE("kernel-based three-step estimator on OU-SKST data") {
    double kappa = 22.753, delta = -std::log(0.9093) / kappa;
    Structure dgp = skst_structure(UpdFamily::NormalizedOU, std::vector<double>{kappa},
                                   kCalibrated);
    PathConfig cfg;
    cfg.n = 5505;
    cfg.delta = delta;
    cfg.seed = 404;
    auto y = simulate_transformed(dgp, cfg);

    FitOptions opts;
    opts.restarts = 2;
    opts.compute_se = false;
    FitResult fit = fit_pmle(y, UpdFamily::NormalizedOU, delta, opts);

    double h = silverman_bandwidth(y);
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(0.04 + (0.14 - 0.04) * i / 8.0);
    DriftDiffEstimate est = estimate_drift_diffusion(y, fit, UpdFamily::NormalizedOU, grid, h);

    REQUIRE(est.grid.size() == grid.size());
    CHECK(est.tail_points == 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(est.sigma2_hat[i] > 0.0);
        CHECK(std::isfinite(est.mu_hat[i]));
        CHECK(est.var_sigma2[i] > 0.0);
        // the variance diagnostic is the documented closed expression
        double fy = KernelEstimate(std::vector<double>(y.begin(), y.end()), h).pdf(grid[i]);
        CHECK(est.var_sigma2[i] ==
              doctest::Approx(4.0 * est.sigma2_hat[i] * est.sigma2_hat[i] / fy *
                              KernelEstimate::kernel_l2())
                  .epsilon(1e-10));
    }

    // interior accuracy: the estimated diffusion tracks the truth loosely
    for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
        auto [mu_t, s2_t] = transformed_drift_diffusion(dgp, grid[i]);
        (void)mu_t;
        CHECK(std::abs(est.sigma2_hat[i] - s2_t) / s2_t < 0.5);
    }

    CHECK_THROWS_AS(estimate_drift_diffusion(y, fit, UpdFamily::NormalizedOU, grid, -1.0),
                    BandwidthError);
}

TEST_CASE("u-hat derivative matches a finite difference of the kernel cdf transform") {
    double kappa = 11.377, delta = 0.0042;
    Structure dgp = skst_structure(UpdFamily::NormalizedOU, std::vector<double>{kappa},
                                   kCalibrated);
    PathConfig cfg;
    cfg.n = 2202;
    cfg.delta = delta;
    cfg.seed = 7;
    auto y = simulate_transformed(dgp, cfg);

    double h = silverman_bandwidth(y);
    auto kern = std::make_shared<KernelMarginal>(
        KernelEstimate(std::vector<double>(y.begin(), y.end()), h));
    auto ou = UpdModel::normalized_ou(kappa);
    MarginalInducedTransform t(kern, ou);
    for (double yy : {0.06, 0.0835, 0.12}) {
        double step = 1e-5;
        double fd = (t.u(yy + step) - t.u(yy - step)) / (2.0 * step);
        CHECK(std::abs(t.u_prime(yy) - fd) < 1e-6);
    }
}
