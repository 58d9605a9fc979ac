#include "cdiff/special.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "cdiff/errors.hpp"

namespace cdiff {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}

double norm_cdf(double z) { return boost::math::cdf(kStdNormal, z); }

double norm_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("norm_quantile: u must lie in (0,1)");
    return boost::math::quantile(kStdNormal, u);
}

double student_t_pdf(double x, double nu) {
    return boost::math::pdf(boost::math::students_t_distribution<double>(nu), x);
}

double student_t_cdf(double x, double nu) {
    return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

double student_t_quantile(double u, double nu) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("student_t_quantile: u must lie in (0,1)");
    return boost::math::quantile(boost::math::students_t_distribution<double>(nu), u);
}

double gamma_p(double a, double x) { return boost::math::gamma_p(a, x); }

double gamma_p_inv(double a, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("gamma_p_inv: p must lie in (0,1)");
    return boost::math::gamma_p_inv(a, p);
}

double gamma_pdf(double x, double shape, double rate) {
    if (x <= 0.0) return 0.0;
    return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                    std::lgamma(shape));
}

namespace {

// Series: I_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k r_k,
// r_0 = 1, r_{k+1} = r_k * (x^2/4) / ((k+1)(nu+k+1)). All terms positive for
// nu > -1, so the log-space accumulation below is cancellation-free.
double log_bessel_i_series(double nu, double x) {
    const double log_quarter_x2 = 2.0 * std::log(x / 2.0);
    double log_term = 0.0;
    double log_sum = 0.0;
    for (int k = 0; k < 40000; ++k) {
        log_term += log_quarter_x2 - std::log(static_cast<double>(k + 1)) - std::log(nu + k + 1.0);
        log_sum = logaddexp(log_sum, log_term);
        if (log_term < log_sum - 40.0) {
            return nu * std::log(x / 2.0) - std::lgamma(nu + 1.0) + log_sum;
        }
    }
    throw BesselOverflowError("log_bessel_i: series did not converge");
}

// Large-argument expansion: I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k a_k with
// a_0 = 1, a_{k+1} = -a_k (mu - (2k+1)^2) / (8 x (k+1)), mu = 4 nu^2.
// Returns NaN when the truncated tail is not negligible.
double log_bessel_i_asymptotic(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev_abs = 1.0;
    for (int k = 0; k < 50; ++k) {
        double odd = 2.0 * k + 1.0;
        term *= -(mu - odd * odd) / (8.0 * x * (k + 1));
        if (std::abs(term) >= prev_abs) return std::numeric_limits<double>::quiet_NaN();
        sum += term;
        prev_abs = std::abs(term);
        if (std::abs(term) < 1e-17 * std::abs(sum)) {
            if (sum <= 0.0) return std::numeric_limits<double>::quiet_NaN();
            return x - 0.5 * std::log(2.0 * kPi * x) + std::log(sum);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double log_bessel_i(double nu, double x) {
    if (x < 0.0) throw DomainError("log_bessel_i: x must be nonnegative");
    if (nu <= -1.0) throw DomainError("log_bessel_i: order must exceed -1");
    if (x == 0.0) {
        if (nu == 0.0) return 0.0;
        return -std::numeric_limits<double>::infinity();
    }
    if (x >= 30.0 && x >= nu * nu) {
        double r = log_bessel_i_asymptotic(nu, x);
        if (std::isfinite(r)) return r;
    }
    return log_bessel_i_series(nu, x);
}

double hermite_he(int k, double x) {
    switch (k) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return x * x - 1.0;
        case 3: return x * (x * x - 3.0);
        case 4: return x * x * (x * x - 6.0) + 3.0;
        default: throw DomainError("hermite_he: order not supported");
    }
}

}  // namespace cdiff
