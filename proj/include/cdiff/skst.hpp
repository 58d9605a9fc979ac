#ifndef CDIFF_SKST_HPP
#define CDIFF_SKST_HPP

#include <cmath>

namespace cdiff {

/// Hansen's skewed Student-t: location m, scale v (the standard deviation),
/// skewness lambda in (-1,1), degrees of freedom tau > 2. The standardized
/// variate has mean 0 and variance 1 by construction of (a, b, q).
struct SkstParams {
    double m = 0.0;
    double v = 1.0;
    double lambda = 0.0;
    double tau = 5.0;

    void validate() const;

    double a() const;
    double b() const;
    double q() const;
    /// Branch point of the piecewise density, y = m - a v / b.
    double breakpoint() const;
};

double skst_pdf(double y, const SkstParams& p);
double skst_log_pdf(double y, const SkstParams& p);
double skst_cdf(double y, const SkstParams& p);
double skst_quantile(double u, const SkstParams& p);
/// d^order/dy^order of the density, order in {1, 2, 3}.
double skst_pdf_deriv(double y, const SkstParams& p, int order);

/// Evaluator with the derived constants (a, b, q) cached; use this inside
/// estimation loops where the same parameters are hit thousands of times.
class SkstEval {
public:
    explicit SkstEval(const SkstParams& p);

    const SkstParams& params() const { return p_; }
    double log_pdf(double y) const;
    double pdf(double y) const { return std::exp(log_pdf(y)); }
    double cdf(double y) const;
    double quantile(double u) const;
    double pdf_deriv(double y, int order) const;

private:
    SkstParams p_;
    double a_, b_, q_, log_bqv_;
};

}  // namespace cdiff

#endif  // CDIFF_SKST_HPP
