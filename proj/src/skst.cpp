#include "cdiff/skst.hpp"

#include <cmath>

#include "cdiff/errors.hpp"
#include "cdiff/special.hpp"

namespace cdiff {

void SkstParams::validate() const {
    if (!(v > 0.0)) throw ParamError("skst: v must be positive");
    if (!(tau > 2.0)) throw ParamError("skst: tau must exceed 2");
    if (!(lambda > -1.0 && lambda < 1.0)) throw ParamError("skst: lambda must lie in (-1,1)");
    double aa = a();
    if (!(1.0 + 3.0 * lambda * lambda - aa * aa > 0.0))
        throw ParamError("skst: derived b^2 is not positive");
}

double SkstParams::q() const {
    return std::exp(std::lgamma(0.5 * (tau + 1.0)) - std::lgamma(0.5 * tau)) /
           std::sqrt(kPi * (tau - 2.0));
}

double SkstParams::a() const { return 4.0 * lambda * q() * (tau - 2.0) / (tau - 1.0); }

double SkstParams::b() const {
    double aa = a();
    return std::sqrt(1.0 + 3.0 * lambda * lambda - aa * aa);
}

double SkstParams::breakpoint() const { return m - a() * v / b(); }

SkstEval::SkstEval(const SkstParams& p) : p_(p) {
    p_.validate();
    q_ = p_.q();
    a_ = 4.0 * p_.lambda * q_ * (p_.tau - 2.0) / (p_.tau - 1.0);
    b_ = std::sqrt(1.0 + 3.0 * p_.lambda * p_.lambda - a_ * a_);
    log_bqv_ = std::log(b_ * q_ / p_.v);
}

double SkstEval::log_pdf(double y) const {
    double w = (y - p_.m) / p_.v;
    double side = (w < -a_ / b_) ? (1.0 - p_.lambda) : (1.0 + p_.lambda);
    double z = (b_ * w + a_) / side;
    return log_bqv_ - 0.5 * (p_.tau + 1.0) * std::log1p(z * z / (p_.tau - 2.0));
}

double SkstEval::cdf(double y) const {
    double w = (y - p_.m) / p_.v;
    bool left = w < -a_ / b_;
    double side = left ? (1.0 - p_.lambda) : (1.0 + p_.lambda);
    double z = (b_ * w + a_) / side;
    double t = z * std::sqrt(p_.tau / (p_.tau - 2.0));
    if (left) return (1.0 - p_.lambda) * student_t_cdf(t, p_.tau);
    return 0.5 * (1.0 - p_.lambda) + (1.0 + p_.lambda) * (student_t_cdf(t, p_.tau) - 0.5);
}

double SkstEval::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("skst_quantile: u must lie in (0,1)");
    double half_left = 0.5 * (1.0 - p_.lambda);
    double t, side;
    if (u < half_left) {
        side = 1.0 - p_.lambda;
        t = student_t_quantile(u / (1.0 - p_.lambda), p_.tau);
    } else {
        side = 1.0 + p_.lambda;
        t = student_t_quantile((u - half_left) / (1.0 + p_.lambda) + 0.5, p_.tau);
    }
    double z = t * std::sqrt((p_.tau - 2.0) / p_.tau);
    return p_.m + p_.v * (z * side - a_) / b_;
}

double SkstEval::pdf_deriv(double y, int order) const {
    if (order < 1 || order > 3) throw DomainError("skst_pdf_deriv: order must be 1, 2 or 3");
    double w = (y - p_.m) / p_.v;
    double side = (w < -a_ / b_) ? (1.0 - p_.lambda) : (1.0 + p_.lambda);
    double z = (b_ * w + a_) / side;
    const double c = 1.0 / (p_.tau - 2.0);
    const double pw = 0.5 * (p_.tau + 1.0);
    const double base = 1.0 + c * z * z;
    const double A = std::pow(base, -pw - 1.0);
    const double B = std::pow(base, -pw - 2.0);
    const double C = std::pow(base, -pw - 3.0);
    double g;
    switch (order) {
        case 1:
            g = -2.0 * pw * c * z * A;
            break;
        case 2:
            g = -2.0 * pw * c * A + 4.0 * pw * (pw + 1.0) * c * c * z * z * B;
            break;
        default:
            g = 12.0 * pw * (pw + 1.0) * c * c * z * B -
                8.0 * pw * (pw + 1.0) * (pw + 2.0) * c * c * c * z * z * z * C;
            break;
    }
    double dz = b_ / (p_.v * side);
    return std::exp(log_bqv_) * std::pow(dz, order) * g;
}

double skst_log_pdf(double y, const SkstParams& p) { return SkstEval(p).log_pdf(y); }
double skst_pdf(double y, const SkstParams& p) { return SkstEval(p).pdf(y); }
double skst_cdf(double y, const SkstParams& p) { return SkstEval(p).cdf(y); }
double skst_quantile(double u, const SkstParams& p) { return SkstEval(p).quantile(u); }
double skst_pdf_deriv(double y, const SkstParams& p, int order) {
    return SkstEval(p).pdf_deriv(y, order);
}

}  // namespace cdiff
