#ifndef CDIFF_SPECIAL_HPP
#define CDIFF_SPECIAL_HPP

#include <cmath>

namespace cdiff {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

/// log(exp(a) + exp(b)) without overflow.
inline double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = a > b ? a : b;
    double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

/// Standard normal density and its logarithm.
inline double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }
inline double log_norm_pdf(double z) { return -0.5 * z * z - 0.5 * kLogTwoPi; }

/// Log-density of N(mean, var) at x.
inline double log_gaussian(double x, double mean, double var) {
    double d = x - mean;
    return -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * d * d / var;
}

double norm_cdf(double z);
double norm_quantile(double u);

/// Student-t distribution with nu degrees of freedom.
double student_t_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
double student_t_quantile(double u, double nu);

/// Regularized lower incomplete gamma P(a, x), its inverse in x, and the
/// Gamma(shape, rate) density.
double gamma_p(double a, double x);
double gamma_p_inv(double a, double p);
double gamma_pdf(double x, double shape, double rate);

/// log I_nu(x), modified Bessel function of the first kind, nu > -1, x >= 0.
/// Power series for small arguments, large-argument asymptotic expansion
/// otherwise; the series path is kept as a fallback whenever the asymptotic
/// series fails to converge.
double log_bessel_i(double nu, double x);

/// Probabilists' Hermite polynomial He_k, k <= 4.
double hermite_he(int k, double x);

}  // namespace cdiff

#endif  // CDIFF_SPECIAL_HPP
