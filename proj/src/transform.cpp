#include "cdiff/transform.hpp"

#include <algorithm>
#include <cmath>

#include "cdiff/errors.hpp"
#include "cdiff/special.hpp"

namespace cdiff {

namespace {
constexpr double kProbGuard = 1e-12;  // keeps quantile arguments inside (0,1)
}

double Transformation::u_third(double) const {
    throw DerivativeError("u_third not available for this transform provenance");
}

AffineTransform::AffineTransform(double a, double b, Domain x_domain)
    : a_(a), b_(b), d_(x_domain) {
    if (!(b > 0.0)) throw MonotonicityError("affine transform: slope must be positive");
}

std::pair<double, double> AffineTransform::y_domain() const {
    return {a_ + b_ * d_.lo, a_ + b_ * d_.hi};
}

std::pair<double, double> ExpTransform::y_domain() const {
    return {std::exp(d_.lo), std::isfinite(d_.hi) ? std::exp(d_.hi)
                                                  : std::numeric_limits<double>::infinity()};
}

EwTransform::EwTransform(double rho, double delta) : rho_(rho), delta_(delta) {
    if (!(delta > 0.0)) throw ParamError("ew transform: delta must be positive");
}

double EwTransform::u_prime(double y) const {
    double d = y - rho_;
    return 1.0 / (d * d);
}

double EwTransform::u_second(double y) const {
    double d = y - rho_;
    return -2.0 / (d * d * d);
}

double EwTransform::u_third(double y) const {
    double d = y - rho_;
    return 6.0 / (d * d * d * d);
}

MarginalInducedTransform::MarginalInducedTransform(
    std::shared_ptr<const MarginalDistribution> f_y, UpdModel model)
    : f_y_(std::move(f_y)), model_(std::move(model)) {
    model_.stationary();  // materialize (and validate) the stationary law now
}

double MarginalInducedTransform::u(double y) const {
    double p = std::clamp(f_y_->cdf(y), kProbGuard, 1.0 - kProbGuard);
    return model_.stationary().quantile(p);
}

double MarginalInducedTransform::v(double x) const {
    double p = std::clamp(model_.stationary().cdf(x), kProbGuard, 1.0 - kProbGuard);
    return f_y_->quantile(p);
}

double MarginalInducedTransform::u_prime(double y) const {
    return f_y_->pdf(y) / model_.stationary().pdf(u(y));
}

double MarginalInducedTransform::u_second(double y) const {
    const StationaryLaw& law = model_.stationary();
    double x = u(y);
    double g = f_y_->pdf(y), gp = f_y_->pdf_deriv(y, 1);
    double F = law.pdf(x), Fp = law.pdf_deriv(x);
    return gp / F - Fp * g * g / (F * F * F);
}

double MarginalInducedTransform::u_third(double y) const {
    const StationaryLaw& law = model_.stationary();
    double x = u(y);
    double g = f_y_->pdf(y), gp = f_y_->pdf_deriv(y, 1), gpp = f_y_->pdf_deriv(y, 2);
    double F = law.pdf(x), Fp = law.pdf_deriv(x), Fpp = law.pdf_second(x);
    double F3 = F * F * F;
    return gpp / F - 3.0 * g * gp * Fp / F3 - Fpp * g * g * g / (F3 * F) +
           3.0 * Fp * Fp * g * g * g / (F3 * F * F);
}

ComposedTransform::ComposedTransform(std::shared_ptr<const Transformation> inner, SmoothMap map)
    : inner_(std::move(inner)), map_(std::move(map)) {
    if (!map_.f || !map_.fprime || !map_.fsecond || !map_.finv)
        throw ParamError("composed transform: map must provide f, f', f'' and the inverse");
}

double ComposedTransform::u_prime(double y) const {
    return map_.fprime(inner_->u(y)) * inner_->u_prime(y);
}

double ComposedTransform::u_second(double y) const {
    double uy = inner_->u(y), up = inner_->u_prime(y);
    return map_.fsecond(uy) * up * up + map_.fprime(uy) * inner_->u_second(y);
}

double ComposedTransform::u_third(double y) const {
    if (!map_.fthird) throw DerivativeError("composed transform: third derivative of map missing");
    double uy = inner_->u(y), up = inner_->u_prime(y), us = inner_->u_second(y);
    return map_.fthird(uy) * up * up * up + 3.0 * map_.fsecond(uy) * up * us +
           map_.fprime(uy) * inner_->u_third(y);
}

Structure make_structure(UpdModel model, std::shared_ptr<const Transformation> transform) {
    return Structure{std::move(model), std::move(transform)};
}

Structure make_marginal_structure(UpdModel model,
                                  std::shared_ptr<const MarginalDistribution> f_y) {
    auto t = std::make_shared<MarginalInducedTransform>(std::move(f_y), model);
    return Structure{std::move(model), std::move(t)};
}

std::pair<double, double> transformed_drift_diffusion(const Structure& s, double y) {
    double up = s.transform->u_prime(y);
    if (!(up > 0.0)) throw MonotonicityError("transformed drift: U' must be positive");
    double x = s.transform->u(y);
    double us = s.transform->u_second(y);
    double mu_x = s.model.drift(x);
    double s2_x = s.model.sigma2(x);
    double mu_y = mu_x / up - 0.5 * s2_x * us / (up * up * up);
    double sig_y = std::sqrt(s2_x) / up;
    return {mu_y, sig_y * sig_y};
}

double log_transformed_transition_density(const Structure& s, double y, double y0,
                                          const TransitionDensitySpec& spec) {
    double up = s.transform->u_prime(y);
    return std::log(up) + log_transition_density(s.model, s.transform->u(y),
                                                 s.transform->u(y0), spec);
}

double transformed_transition_density(const Structure& s, double y, double y0,
                                      const TransitionDensitySpec& spec) {
    return std::exp(log_transformed_transition_density(s, y, y0, spec));
}

double transformed_stationary_density(const Structure& s, double y) {
    return s.transform->u_prime(y) * s.model.stationary().pdf(s.transform->u(y));
}

double copula_density(const UpdModel& m, double u0, double u,
                      const TransitionDensitySpec& spec) {
    if (!(u0 > 0.0 && u0 < 1.0 && u > 0.0 && u < 1.0))
        throw DomainError("copula_density: arguments must lie in (0,1)");
    const StationaryLaw& law = m.stationary();
    double x0 = law.quantile(u0);
    double x = law.quantile(u);
    return std::exp(log_transition_density(m, x, x0, spec) - law.log_pdf(x));
}

double copula_density(const UpdModel& m, double u0, double u, double delta) {
    return copula_density(m, u0, u, TransitionDensitySpec::auto_for(m, delta));
}

double equivalence_check(const Structure& s1, const Structure& s2,
                         std::span<const double> grid) {
    double worst = 0.0;
    for (double y : grid) {
        auto [mu1, s21] = transformed_drift_diffusion(s1, y);
        auto [mu2, s22] = transformed_drift_diffusion(s2, y);
        double disc = std::abs(mu1 - mu2) + std::abs(std::sqrt(s21) - std::sqrt(s22));
        worst = std::max(worst, disc);
    }
    return worst;
}

std::vector<double> default_equivalence_grid(const Structure& s, int n) {
    std::vector<double> grid;
    grid.reserve(n);
    const StationaryLaw& law = s.model.stationary();
    for (int i = 0; i < n; ++i) {
        double u = 0.01 + 0.98 * static_cast<double>(i) / (n - 1);
        grid.push_back(s.transform->v(law.quantile(u)));
    }
    return grid;
}

}  // namespace cdiff
