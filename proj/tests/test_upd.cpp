#include <doctest.h>

#include <cmath>

#include "cdiff/errors.hpp"
#include "cdiff/quad.hpp"
#include "cdiff/special.hpp"
#include "cdiff/upd.hpp"

using namespace cdiff;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double gamma_pdf_oracle(double x, double shape, double rate) {
    return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                    std::lgamma(shape));
}
}  // namespace

TEST_CASE("drift and diffusion closed forms") {
    auto ou = UpdModel::normalized_ou(2.0);
    auto [mu, s2] = eval_drift_diffusion(ou, 0.0);
    CHECK(mu == 0.0);
    CHECK(s2 == doctest::Approx(4.0));

    auto cir = UpdModel::cir(1.0, 1.0, 1.0);
    auto [mu2, s22] = eval_drift_diffusion(cir, 1.0);
    CHECK(mu2 == 0.0);
    CHECK(s22 == doctest::Approx(1.0));

    // direct polynomial evaluation: drift 1 - 2x at x=4, diffusion (0.5 x^0.5)^2
    auto nld = UpdModel::nldcev({1.0, -2.0}, 0, 1, 0.5, 0.5);
    auto [mu3, s23] = eval_drift_diffusion(nld, 4.0);
    CHECK(mu3 == doctest::Approx(-7.0));
    CHECK(s23 == doctest::Approx(1.0));

    CHECK_THROWS_AS(eval_drift_diffusion(cir, -1.0), DomainError);
    CustomDynamics dyn;
    dyn.drift = [](double) { return 0.0; };
    dyn.sigma = [](double x) { return x; };  // vanishes at 0
    auto bad = UpdModel::custom(dyn, Domain{-1.0, 1.0}, 0.5);
    CHECK_THROWS_AS(eval_drift_diffusion(bad, 0.0), ParamError);
}

TEST_CASE("scale density and measure") {
    auto zero = UpdModel::zero_drift_flexible({});
    auto [s, S] = scale_density_and_measure(zero, 0.7);
    CHECK(s == doctest::Approx(1.0));
    CHECK(S == doctest::Approx(0.7));

    // normalized OU: s(x) = exp(x^2 / 2) regardless of kappa
    for (double kappa : {1.0, 3.0}) {
        auto ou = UpdModel::normalized_ou(kappa);
        auto [s1, S1] = scale_density_and_measure(ou, 1.2);
        (void)S1;
        CHECK(s1 == doctest::Approx(std::exp(1.2 * 1.2 / 2.0)).epsilon(1e-8));
        CHECK(scale_density_and_measure(ou, ou.x_star()).second == 0.0);
    }
}

TEST_CASE("stationary laws: OU and CIR closed forms") {
    auto ou = UpdModel::normalized_ou(5.0);  // N(0,1) regardless of kappa
    CHECK(stationary_density(ou, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(stationary_quantile(ou, 0.5) == doctest::Approx(0.0));
    CHECK(stationary_cdf(ou, 1.959964) == doctest::Approx(0.975).epsilon(1e-8));

    auto cir = UpdModel::normalized_cir(0.7653, 1.1653);  // Gamma(1.1653, 1)
    CHECK(stationary_density(cir, 1.0) ==
          doctest::Approx(gamma_pdf_oracle(1.0, 1.1653, 1.0)).epsilon(1e-12));
    auto cir2 = UpdModel::normalized_cir(1.0, 2.0);
    CHECK(stationary_cdf(cir2, stationary_quantile(cir2, 0.3)) ==
          doctest::Approx(0.3).epsilon(1e-9));

    double mass = integrate([&](double x) { return stationary_density(cir, x); }, 0.0, kInf);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("numeric stationary law matches a known gaussian") {
    // dX = -X dt + dW has stationary law N(0, 1/2)
    auto poly = UpdModel::unit_diffusion_polynomial({-1.0});
    const StationaryLaw& law = poly.stationary();
    double sd = std::sqrt(0.5);
    for (double x : {-1.0, -0.3, 0.0, 0.8, 1.7}) {
        CHECK(law.pdf(x) == doctest::Approx(norm_pdf(x / sd) / sd).epsilon(1e-7));
        CHECK(law.cdf(x) == doctest::Approx(norm_cdf(x / sd)).epsilon(1e-7));
    }
    CHECK(law.quantile(0.8) == doctest::Approx(sd * norm_quantile(0.8)).epsilon(1e-7));
    // derivative identities of the numeric branch
    double h = 1e-5;
    CHECK(law.pdf_deriv(0.4) ==
          doctest::Approx((law.pdf(0.4 + h) - law.pdf(0.4 - h)) / (2 * h)).epsilon(1e-5));
    CHECK(law.pdf_second(0.4) ==
          doctest::Approx((law.pdf_deriv(0.4 + h) - law.pdf_deriv(0.4 - h)) / (2 * h))
              .epsilon(1e-5));
}

TEST_CASE("stationary law detects non-stationary models") {
    CHECK_THROWS_AS(UpdModel::ou(-0.5, 0.0, 1.0).stationary(), NonStationaryError);
    // zero drift on the real line: the normalizer diverges
    CHECK_THROWS_AS(UpdModel::zero_drift_flexible({}).stationary(), NonStationaryError);
}

TEST_CASE("mpdf identity: f sigma^2 s = xi") {
    auto check_identity = [](const UpdModel& m, std::initializer_list<double> points) {
        const StationaryLaw& law = m.stationary();
        for (double x : points) {
            auto [s, S] = scale_density_and_measure(m, x);
            (void)S;
            CHECK(law.pdf(x) * m.sigma2(x) * s == doctest::Approx(law.xi()).epsilon(1e-8));
        }
    };
    check_identity(UpdModel::normalized_ou(1.5), {-1.0, 0.0, 0.5, 1.3});
    check_identity(UpdModel::normalized_cir(0.7653, 1.1653), {0.4, 1.0, 2.1});
    check_identity(UpdModel::unit_diffusion_polynomial({-1.0}), {-0.8, 0.1, 0.9});
}

TEST_CASE("OU transition density closed form") {
    auto ou = UpdModel::normalized_ou(1.0);
    auto spec = TransitionDensitySpec::auto_for(ou, 1.0);
    CHECK(spec.method == TransitionMethod::ClosedFormGaussian);
    CHECK(transition_density(ou, 0.0, 0.0, spec) ==
          doctest::Approx(0.4290285534).epsilon(1e-8));
    // ergodic limit at kappa * delta = 20
    auto far = TransitionDensitySpec::auto_for(ou, 20.0);
    for (double x : {-1.5, 0.0, 0.7})
        CHECK(transition_density(ou, x, 0.3, far) ==
              doctest::Approx(stationary_density(ou, x)).epsilon(1e-4));
}

TEST_CASE("CIR transition density: normalization and ergodic limit") {
    double kappa = 0.7653, alpha = 1.1653;
    auto cir = UpdModel::normalized_cir(kappa, alpha);
    auto spec = TransitionDensitySpec::auto_for(cir, 0.01);
    CHECK(spec.method == TransitionMethod::ClosedFormBessel);
    double mass =
        integrate([&](double x) { return transition_density(cir, x, 1.0, spec); }, 0.0, kInf);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

    auto far = TransitionDensitySpec::auto_for(cir, 20.0 / kappa);
    for (double x : {0.5, 1.0, 2.0})
        CHECK(transition_density(cir, x, 0.8, far) ==
              doctest::Approx(stationary_density(cir, x)).epsilon(1e-4));
}

TEST_CASE("Chapman-Kolmogorov for the closed forms") {
    auto ou = UpdModel::normalized_ou(1.0);
    auto one = TransitionDensitySpec::auto_for(ou, 0.4);
    auto two = TransitionDensitySpec::auto_for(ou, 0.8);
    for (double x : {-0.5, 0.6}) {
        double composed = integrate(
            [&](double z) {
                return transition_density(ou, x, z, one) * transition_density(ou, z, 0.2, one);
            },
            -kInf, kInf);
        CHECK(composed == doctest::Approx(transition_density(ou, x, 0.2, two)).epsilon(1e-4));
    }

    auto cir = UpdModel::normalized_cir(1.0, 1.1653);
    auto cone = TransitionDensitySpec::auto_for(cir, 0.3);
    auto ctwo = TransitionDensitySpec::auto_for(cir, 0.6);
    for (double x : {0.7, 1.4}) {
        double composed = integrate(
            [&](double z) {
                return transition_density(cir, x, z, cone) * transition_density(cir, z, 1.0, cone);
            },
            0.0, kInf);
        CHECK(composed == doctest::Approx(transition_density(cir, x, 1.0, ctwo)).epsilon(1e-4));
    }
}

TEST_CASE("quadrature Chapman-Kolmogorov method agrees with the closed form") {
    auto ou = UpdModel::normalized_ou(1.3);
    TransitionDensitySpec ck{TransitionMethod::QuadratureChapmanKolmogorov, 0.5, 1};
    auto closed = TransitionDensitySpec::auto_for(ou, 0.5);
    CHECK(transition_density(ou, 0.4, -0.2, ck) ==
          doctest::Approx(transition_density(ou, 0.4, -0.2, closed)).epsilon(1e-6));
}

TEST_CASE("OU eigenfunctions: conditional hermite moments") {
    double kappa = 1.4, delta = 0.6;
    auto ou = UpdModel::normalized_ou(kappa);
    auto spec = TransitionDensitySpec::auto_for(ou, delta);
    for (int k : {1, 2, 3}) {
        for (double x0 : {-0.7, 0.9}) {
            double moment = integrate(
                [&](double x) { return hermite_he(k, x) * transition_density(ou, x, x0, spec); },
                -kInf, kInf);
            double expected = std::exp(-k * kappa * delta) * hermite_he(k, x0);
            CHECK(moment == doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("euler transition density") {
    auto ou = UpdModel::normalized_ou(1.0);
    double delta = 0.001;
    // peak at the conditional mean
    double x0 = 0.5;
    double mode = x0 + ou.drift(x0) * delta;
    CHECK(euler_transition_density(ou, mode, x0, delta) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * kPi * ou.sigma2(x0) * delta)).epsilon(1e-12));
    double mass = integrate([&](double x) { return euler_transition_density(ou, x, x0, delta); },
                            -kInf, kInf);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    // high-frequency agreement with the exact kernel
    auto exact = TransitionDensitySpec::auto_for(ou, delta);
    for (double x : {0.45, 0.5, 0.55}) {
        double e = euler_transition_density(ou, x, x0, delta);
        double t = transition_density(ou, x, x0, exact);
        CHECK(std::abs(e - t) / t < 0.01);
    }
}

TEST_CASE("CIR bessel form matches sub-stepped euler composition") {
    auto cir = UpdModel::normalized_cir(0.7653, 1.1653);
    auto closed = TransitionDensitySpec::auto_for(cir, 0.05);
    TransitionDensitySpec euler{TransitionMethod::EulerSubstep, 0.05, 32};
    for (double x : {0.8, 1.0, 1.3}) {
        double a = transition_density(cir, x, 1.0, closed);
        double b = transition_density(cir, x, 1.0, euler);
        CHECK(std::abs(a - b) / a < 0.01);
    }
}

TEST_CASE("transition densities are nonnegative and normalized across models") {
    auto nld = UpdModel::nldcev({0.3, 0.5, -0.6}, 1, 1, 0.5, 0.4);
    auto spec = TransitionDensitySpec::auto_for(nld, 0.25);
    CHECK(spec.method == TransitionMethod::EulerSubstep);
    double mass =
        integrate([&](double x) { return transition_density(nld, x, 1.0, spec); }, 0.0, kInf,
                  {1e-10, 1e-7, 15});
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(transition_density(nld, 0.9, 1.0, spec) >= 0.0);
}

TEST_CASE("mirrored models reflect all evaluators") {
    auto cir = UpdModel::cir(1.2, 0.9, 0.8);
    auto mir = UpdModel::mirrored(cir);
    CHECK(mir.domain().lo == -kInf);
    CHECK(mir.domain().hi == 0.0);
    CHECK(mir.drift(-0.5) == doctest::Approx(-cir.drift(0.5)));
    CHECK(mir.sigma(-0.5) == doctest::Approx(cir.sigma(0.5)));
    CHECK(mir.stationary().pdf(-0.5) == doctest::Approx(cir.stationary().pdf(0.5)));
    CHECK(mir.stationary().cdf(-0.5) == doctest::Approx(1.0 - cir.stationary().cdf(0.5)));
    CHECK(mir.stationary().quantile(0.3) == doctest::Approx(-cir.stationary().quantile(0.7)));
    auto spec = TransitionDensitySpec::auto_for(mir, 0.2);
    auto base_spec = TransitionDensitySpec::auto_for(cir, 0.2);
    CHECK(transition_density(mir, -0.8, -1.0, spec) ==
          doctest::Approx(transition_density(cir, 0.8, 1.0, base_spec)));
    // double mirror restores the original
    auto back = UpdModel::mirrored(mir);
    CHECK(back.drift(0.5) == doctest::Approx(cir.drift(0.5)));
}

TEST_CASE("feller violation is permitted") {
    auto cir = UpdModel::cir(1.0, 0.2, 1.0);  // 2 k a / s^2 = 0.4 < 1
    CHECK(cir.stationary().pdf(0.5) > 0.0);
    auto spec = TransitionDensitySpec::auto_for(cir, 0.1);
    CHECK(std::isfinite(std::log(transition_density(cir, 0.3, 0.5, spec))));
}
