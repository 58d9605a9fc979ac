#include <doctest.h>

#include <cmath>

#include "cdiff/errors.hpp"
#include "cdiff/quad.hpp"
#include "cdiff/skst.hpp"
#include "cdiff/special.hpp"

using namespace cdiff;

namespace {
const SkstParams kCalibrated{0.0835, 0.0358, 0.5193, 25.3708};

// standardized student-t with location m, scale v (unit variance construction)
double standardized_t_pdf(double y, double m, double v, double tau) {
    double c = std::sqrt(tau / (tau - 2.0));
    double z = (y - m) / v;
    return student_t_pdf(z * c, tau) * c / v;
}
}  // namespace

TEST_CASE("skst density values") {
    SkstParams p{0.0, 1.0, 0.0, 5.0};
    CHECK(skst_pdf(0.0, p) == doctest::Approx(0.4900701293).epsilon(1e-9));
    // symmetry when lambda = 0
    CHECK(skst_pdf(0.7, p) == doctest::Approx(skst_pdf(-0.7, p)).epsilon(1e-14));
    // reduction to the standardized student-t, pointwise
    SkstParams q{0.3, 1.7, 0.0, 7.5};
    for (double y : {-2.0, -0.4, 0.3, 1.1, 4.0})
        CHECK(skst_pdf(y, q) ==
              doctest::Approx(standardized_t_pdf(y, q.m, q.v, q.tau)).epsilon(1e-12));
}

TEST_CASE("skst density integrates to one at the calibrated parameters") {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double bp = kCalibrated.breakpoint();
    double mass = integrate([&](double y) { return skst_pdf(y, kCalibrated); }, -inf, bp) +
                  integrate([&](double y) { return skst_pdf(y, kCalibrated); }, bp, inf);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("skst moments match the location/scale interpretation") {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double bp = kCalibrated.breakpoint();
    auto moment = [&](auto&& g) {
        return integrate([&](double y) { return g(y) * skst_pdf(y, kCalibrated); }, -inf, bp) +
               integrate([&](double y) { return g(y) * skst_pdf(y, kCalibrated); }, bp, inf);
    };
    double mean = moment([](double y) { return y; });
    CHECK(mean == doctest::Approx(kCalibrated.m).epsilon(1e-6));
    double var = moment([&](double y) { return (y - kCalibrated.m) * (y - kCalibrated.m); });
    CHECK(std::sqrt(var) == doctest::Approx(kCalibrated.v).epsilon(1e-6));
}

TEST_CASE("skst cdf and quantile") {
    SkstParams sym{1.3, 0.4, 0.0, 6.0};
    CHECK(skst_cdf(1.3, sym) == doctest::Approx(0.5).epsilon(1e-12));

    for (double u : {0.01, 0.3, 0.5193, 0.97})
        CHECK(skst_cdf(skst_quantile(u, kCalibrated), kCalibrated) ==
              doctest::Approx(u).epsilon(1e-10));

    // cdf against quadrature of the density at probe points
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (double y : {0.02, 0.06, 0.0835, 0.12, 0.2}) {
        double bp = kCalibrated.breakpoint();
        double q = (y < bp)
                       ? integrate([&](double t) { return skst_pdf(t, kCalibrated); }, -inf, y)
                       : integrate([&](double t) { return skst_pdf(t, kCalibrated); }, -inf, bp) +
                             integrate([&](double t) { return skst_pdf(t, kCalibrated); }, bp, y);
        CHECK(skst_cdf(y, kCalibrated) == doctest::Approx(q).epsilon(1e-7));
    }
}

TEST_CASE("skst density is continuous at the breakpoint") {
    double bp = kCalibrated.breakpoint();
    CHECK(skst_pdf(bp - 1e-10, kCalibrated) ==
          doctest::Approx(skst_pdf(bp + 1e-10, kCalibrated)).epsilon(1e-6));
}

TEST_CASE("skst derivatives match finite differences") {
    const double h = 1e-6;
    for (double y : {0.03, 0.0835, 0.11}) {  // away from the breakpoint kink
        double fd1 = (skst_pdf(y + h, kCalibrated) - skst_pdf(y - h, kCalibrated)) / (2 * h);
        CHECK(skst_pdf_deriv(y, kCalibrated, 1) == doctest::Approx(fd1).epsilon(1e-5));
        double fd2 = (skst_pdf_deriv(y + h, kCalibrated, 1) -
                      skst_pdf_deriv(y - h, kCalibrated, 1)) /
                     (2 * h);
        CHECK(skst_pdf_deriv(y, kCalibrated, 2) == doctest::Approx(fd2).epsilon(1e-5));
        double fd3 = (skst_pdf_deriv(y + h, kCalibrated, 2) -
                      skst_pdf_deriv(y - h, kCalibrated, 2)) /
                     (2 * h);
        CHECK(skst_pdf_deriv(y, kCalibrated, 3) == doctest::Approx(fd3).epsilon(1e-4));
    }
}

TEST_CASE("skst parameter validation") {
    CHECK_THROWS_AS(skst_pdf(0.0, SkstParams{0.0, -1.0, 0.0, 5.0}), ParamError);
    CHECK_THROWS_AS(skst_pdf(0.0, SkstParams{0.0, 1.0, 1.2, 5.0}), ParamError);
    CHECK_THROWS_AS(skst_pdf(0.0, SkstParams{0.0, 1.0, 0.0, 1.9}), ParamError);
    CHECK_THROWS_AS(skst_quantile(1.5, kCalibrated), DomainError);
}
