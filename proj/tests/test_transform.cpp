#include <doctest.h>

#include <cmath>

#include "cdiff/errors.hpp"
#include "cdiff/normalize.hpp"
#include "cdiff/quad.hpp"
#include "cdiff/special.hpp"
#include "cdiff/transform.hpp"

using namespace cdiff;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const SkstParams kCalibrated{0.0835, 0.0358, 0.5193, 25.3708};
}  // namespace

TEST_CASE("marginal-induced transform with F_Y = F_X is the identity") {
    auto ou = UpdModel::normalized_ou(1.7);
    auto t = MarginalInducedTransform(std::make_shared<StationaryMarginal>(ou), ou);
    for (double y : {-1.4, -0.3, 0.0, 0.8, 2.1}) {
        CHECK(t.u(y) == doctest::Approx(y).epsilon(1e-10));
        CHECK(t.u_prime(y) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(t.u_second(y) == doctest::Approx(0.0).epsilon(1e-8));
    }
}

TEST_CASE("marginal-induced transform: skst marginal over the normalized OU") {
    auto ou = UpdModel::normalized_ou(22.753);
    auto skst = std::make_shared<SkstMarginal>(kCalibrated);
    MarginalInducedTransform t(skst, ou);

    SUBCASE("symmetric skst maps its median to zero") {
        SkstParams sym{0.0, 1.0, 0.0, 8.0};
        MarginalInducedTransform ts(std::make_shared<SkstMarginal>(sym), ou);
        CHECK(ts.u(0.0) == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("round trip and inverse-derivative identities") {
        for (int i = 0; i < 20; ++i) {
            double x = -2.2 + 4.4 * i / 19.0;
            double y = t.v(x);
            CHECK(t.u(y) == doctest::Approx(x).epsilon(1e-10));
            // V'(U(y)) * U'(y) = 1 with V' by finite differences
            double h = 1e-6 * std::max(1.0, std::abs(x));
            double vp = (t.v(x + h) - t.v(x - h)) / (2 * h);
            CHECK(vp * t.u_prime(y) == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(t.u_prime(y) > 0.0);
        }
    }

    SUBCASE("chain-rule derivatives match finite differences of u") {
        for (double y : {0.05, 0.0835, 0.13}) {
            double h = 2e-6;
            double fd1 = (t.u(y + h) - t.u(y - h)) / (2 * h);
            CHECK(t.u_prime(y) == doctest::Approx(fd1).epsilon(1e-6));
            double fd2 = (t.u_prime(y + h) - t.u_prime(y - h)) / (2 * h);
            CHECK(t.u_second(y) == doctest::Approx(fd2).epsilon(1e-5));
            double fd3 = (t.u_second(y + h) - t.u_second(y - h)) / (2 * h);
            CHECK(t.u_third(y) == doctest::Approx(fd3).epsilon(1e-4));
        }
    }
}

TEST_CASE("transformed drift and diffusion") {
    auto ou = UpdModel::ou(1.3, 0.4, 0.9);

    SUBCASE("identity transform returns the model functions") {
        Structure s{ou, std::make_shared<IdentityTransform>(ou.domain())};
        auto [mu, s2] = transformed_drift_diffusion(s, 0.7);
        CHECK(mu == doctest::Approx(ou.drift(0.7)));
        CHECK(s2 == doctest::Approx(ou.sigma2(0.7)));
    }

    SUBCASE("affine transform scales drift and diffusion") {
        double a = 0.3, b = 2.0;
        Structure s{ou, std::make_shared<AffineTransform>(a, b, ou.domain())};
        double y = 1.1;
        double x = (y - a) / b;
        auto [mu, s2] = transformed_drift_diffusion(s, y);
        CHECK(mu == doctest::Approx(b * ou.drift(x)).epsilon(1e-12));
        CHECK(std::sqrt(s2) == doctest::Approx(b * ou.sigma(x)).epsilon(1e-12));
    }

    SUBCASE("exponential transform gives sigma_Y = sigma * y") {
        Structure s{ou, std::make_shared<ExpTransform>(ou.domain())};
        for (double y : {0.5, 1.0, 3.7}) {
            auto [mu, s2] = transformed_drift_diffusion(s, y);
            (void)mu;
            CHECK(std::sqrt(s2) == doctest::Approx(0.9 * y).epsilon(1e-12));
        }
    }
}

TEST_CASE("transformed transition and stationary densities") {
    auto ou = UpdModel::normalized_ou(1.1376);
    Structure s = make_marginal_structure(ou, std::make_shared<SkstMarginal>(kCalibrated));
    auto spec = TransitionDensitySpec::auto_for(ou, 0.00494);

    SUBCASE("identity structure reduces to p_X and f_X") {
        Structure id{ou, std::make_shared<IdentityTransform>(ou.domain())};
        CHECK(transformed_transition_density(id, 0.3, -0.2, spec) ==
              doctest::Approx(transition_density(ou, 0.3, -0.2, spec)));
        CHECK(transformed_stationary_density(id, 0.3) ==
              doctest::Approx(stationary_density(ou, 0.3)));
    }

    SUBCASE("stationary density of the OU-SKST structure is the skst density") {
        for (double y : {0.03, 0.0835, 0.15})
            CHECK(transformed_stationary_density(s, y) ==
                  doctest::Approx(skst_pdf(y, kCalibrated)).epsilon(1e-8));
        double mass = integrate([&](double y) { return transformed_stationary_density(s, y); },
                                0.02, 0.4, {1e-11, 1e-8, 15});
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));  // support is effectively (0.02, 0.4)
    }

    SUBCASE("transition density integrates to one") {
        double mass = integrate(
            [&](double y) { return transformed_transition_density(s, y, 0.09, spec); }, -kInf,
            kInf, {1e-10, 1e-7, 15});
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("copula form of the transition density") {
        SkstEval eval(kCalibrated);
        for (double y : {0.05, 0.1}) {
            double lhs = transformed_transition_density(s, y, 0.08, spec);
            double rhs = skst_pdf(y, kCalibrated) *
                         copula_density(ou, eval.cdf(0.08), eval.cdf(y), spec);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
        }
    }
}

TEST_CASE("copula density") {
    SUBCASE("gaussian copula closed form at the median point") {
        double kappa = 1.0, delta = std::log(2.0);  // e^{-kappa delta} = 1/2
        auto ou = UpdModel::normalized_ou(kappa);
        CHECK(copula_density(ou, 0.5, 0.5, delta) ==
              doctest::Approx(1.1547005384).epsilon(1e-8));
    }
    SUBCASE("independence in the ergodic limit") {
        auto ou = UpdModel::normalized_ou(1.0);
        for (double u : {0.2, 0.5, 0.8})
            CHECK(copula_density(ou, 0.3, u, 25.0) == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("uniform conditional margin for the CIR copula") {
        auto cir = UpdModel::normalized_cir(0.7653, 1.1653);
        double mass = integrate([&](double u) { return copula_density(cir, 0.4, u, 0.5); },
                                1e-10, 1.0 - 1e-10, {1e-10, 1e-8, 15});
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        double mass0 = integrate([&](double u0) { return copula_density(cir, u0, 0.4, 0.5); },
                                 1e-10, 1.0 - 1e-10, {1e-10, 1e-8, 15});
        CHECK(mass0 == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("arguments restricted to the unit interval") {
        auto ou = UpdModel::normalized_ou(1.0);
        CHECK_THROWS_AS(copula_density(ou, 0.0, 0.5, 1.0), DomainError);
    }
}

TEST_CASE("lamperti normalization") {
    SUBCASE("OU closed form") {
        auto lt = lamperti_normalize(UpdModel::ou(2.3, 0.0, 1.4));
        for (double x : {-1.0, 0.5, 2.0}) {
            CHECK(lt.drift(x) == doctest::Approx(-2.3 * x).epsilon(1e-12));
            CHECK(lt.sigma(x) == doctest::Approx(1.0));
        }
    }
    SUBCASE("CIR closed form at the reference point") {
        auto lt = lamperti_normalize(UpdModel::cir(1.0, 1.0, 1.0));  // alpha* = 1
        CHECK(lt.drift(1.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lt.sigma(0.7) == doctest::Approx(1.0));
    }
    SUBCASE("numeric pipeline matches the CIR closed form") {
        auto cir = UpdModel::cir(0.9, 1.3, 0.8);
        auto closed = lamperti_normalize(cir);
        auto numeric = lamperti_normalize_numeric(cir);
        for (int i = 0; i < 10; ++i) {
            double shift = -0.8 + 1.8 * i / 9.0;
            double x = closed.x_star() + shift;
            CHECK(numeric.drift(x + numeric.x_star() - closed.x_star()) ==
                  doctest::Approx(closed.drift(x)).epsilon(1e-6));
        }
    }
    SUBCASE("numeric pipeline matches the NLDCEV closed form") {
        auto nld = UpdModel::nldcev({0.4, 0.5, -0.3}, 1, 1, 0.5, 0.6);
        auto closed = lamperti_normalize(nld);
        auto numeric = lamperti_normalize_numeric(nld);
        for (int i = 0; i < 10; ++i) {
            double shift = -0.9 + 2.2 * i / 9.0;
            double x = closed.x_star() + shift;
            if (x <= 0.05) continue;
            CHECK(numeric.drift(x + numeric.x_star() - closed.x_star()) ==
                  doctest::Approx(closed.drift(x)).epsilon(1e-6));
        }
    }
    SUBCASE("idempotence on unit-diffusion models") {
        auto poly = UpdModel::unit_diffusion_polynomial({-0.7, 0.0, -0.1});
        auto lt = lamperti_normalize(poly);
        for (double x : {-1.0, 0.2, 1.5}) {
            CHECK(lt.sigma(x) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(lt.drift(x) == doctest::Approx(poly.drift(x)).epsilon(1e-10));
        }
    }
}

TEST_CASE("natural-scale normalization") {
    SUBCASE("zero-drift model is returned unchanged") {
        auto zd = UpdModel::zero_drift_flexible({0.2, -0.1});
        auto ns = natural_scale_normalize(zd);
        for (double x : {-0.8, 0.3})
            CHECK(ns.sigma(x) == doctest::Approx(zd.sigma(x)).epsilon(1e-12));
    }
    SUBCASE("drift vanishes and the OU diffusion matches s^2 sigma^2") {
        double kappa = 0.5;
        auto ou = UpdModel::normalized_ou(kappa);  // sigma^2 = 2 kappa = 1
        auto ns = natural_scale_normalize(ou);
        auto [s1, S1] = scale_density_and_measure(ou, 1.0);
        (void)s1;
        CHECK(ns.drift(S1) == 0.0);
        CHECK(ns.sigma2(S1) == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
    }
}

TEST_CASE("cdf-scheme normalization") {
    SUBCASE("OU closed form on the unit interval") {
        double kappa = 1.0;
        auto cn = cdf_normalize(UpdModel::normalized_ou(kappa));
        CHECK(cn.drift(0.5) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(cn.sigma2(0.5) == doctest::Approx(0.3183098862).epsilon(1e-8));
        for (double xb : {0.2, 0.7}) {
            double z = norm_quantile(xb);
            CHECK(cn.drift(xb) ==
                  doctest::Approx(-2.0 * kappa * z * norm_pdf(z)).epsilon(1e-8));
            double sig = std::sqrt(2.0 * kappa) * norm_pdf(z);
            CHECK(cn.sigma2(xb) == doctest::Approx(sig * sig).epsilon(1e-8));
        }
    }
    SUBCASE("CIR matches the incomplete-gamma closed form") {
        double kappa = 0.7653, alpha = 1.1653;
        auto cir = UpdModel::normalized_cir(kappa, alpha);  // omega = 1, nu = alpha
        auto cn = cdf_normalize(cir);
        for (double xb : {0.2, 0.5, 0.8}) {
            double g = gamma_p_inv(alpha, xb);
            double dens = std::exp((alpha - 1.0) * std::log(g) - g - std::lgamma(alpha));
            double mu = (kappa * (alpha - g) + kappa * ((alpha - 1.0) - g)) * dens;
            double s2 = 2.0 * kappa * g * dens * dens;
            CHECK(cn.drift(xb) == doctest::Approx(mu).epsilon(1e-6));
            CHECK(cn.sigma2(xb) == doctest::Approx(s2).epsilon(1e-6));
        }
    }
}

TEST_CASE("observational equivalence checks") {
    auto ou = UpdModel::normalized_ou(1.9);
    Structure s = make_marginal_structure(ou, std::make_shared<SkstMarginal>(kCalibrated));
    auto grid = default_equivalence_grid(s, 41);

    SUBCASE("a structure is equivalent to itself") {
        CHECK(equivalence_check(s, s, grid) == 0.0);
    }

    SUBCASE("lamperti rewrite is observationally equivalent") {
        // X = T(Xbar) with T(x) = sigma x (the inverse of gamma(x) = x / sigma)
        double sigma = std::sqrt(2.0 * 1.9);
        SmoothMap T;
        T.f = [sigma](double x) { return sigma * x; };
        T.fprime = [sigma](double) { return sigma; };
        T.fsecond = [](double) { return 0.0; };
        T.finv = [sigma](double x) { return x / sigma; };
        Structure rewritten = rewrite_structure(s, T, Domain{-kInf, kInf});
        CHECK(equivalence_check(s, rewritten, grid) < 1e-6);
    }

    SUBCASE("a nonlinear latent reparameterization is also equivalent") {
        SmoothMap T;
        T.f = [](double x) { return std::sinh(x); };
        T.fprime = [](double x) { return std::cosh(x); };
        T.fsecond = [](double x) { return std::sinh(x); };
        T.finv = [](double x) { return std::asinh(x); };
        Structure rewritten = rewrite_structure(s, T, Domain{-kInf, kInf});
        CHECK(equivalence_check(s, rewritten, grid) < 1e-6);
    }

    SUBCASE("shifted OU location is detectably different under the identity transform") {
        auto a = UpdModel::ou(1.0, 0.0, 1.0);
        auto b = UpdModel::ou(1.0, 0.5, 1.0);
        Structure sa{a, std::make_shared<IdentityTransform>(a.domain())};
        Structure sb{b, std::make_shared<IdentityTransform>(b.domain())};
        CHECK(equivalence_check(sa, sb, default_equivalence_grid(sa, 21)) > 0.1);
    }
}

TEST_CASE("ew transform is increasing with the mirrored CIR") {
    EwTransform t(0.19, 0.0072);
    auto [lo, hi] = t.y_domain();
    CHECK(lo == doctest::Approx(0.19));
    CHECK(hi == doctest::Approx(0.19 + 1.0 / 0.0072));
    for (double y : {5.0, 20.0, 60.0}) {
        CHECK(t.u_prime(y) > 0.0);
        double h = 1e-5;
        CHECK(t.u_prime(y) == doctest::Approx((t.u(y + h) - t.u(y - h)) / (2 * h)).epsilon(1e-6));
        CHECK(t.v(t.u(y)) == doctest::Approx(y).epsilon(1e-10));
        CHECK(t.u(y) < 0.0);  // mirrored half-line
    }
}

TEST_CASE("transform provenance without third derivatives reports DerivativeError") {
    auto ou = UpdModel::normalized_ou(1.0);
    SmoothMap m;
    m.f = [](double x) { return x; };
    m.fprime = [](double) { return 1.0; };
    m.fsecond = [](double) { return 0.0; };
    m.finv = [](double x) { return x; };
    ComposedTransform t(std::make_shared<IdentityTransform>(ou.domain()), m);
    CHECK_THROWS_AS(t.u_third(0.3), DerivativeError);
}
