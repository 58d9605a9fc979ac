#include "cdiff/upd.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "cdiff/errors.hpp"
#include "cdiff/quad.hpp"
#include "cdiff/roots.hpp"
#include "cdiff/special.hpp"

namespace cdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double poly_eval(const std::vector<double>& coeffs, int lowest_power, double x) {
    double acc = 0.0;
    int p = lowest_power;
    for (double c : coeffs) acc += c * std::pow(x, p++);
    return acc;
}

double poly_eval_deriv(const std::vector<double>& coeffs, int lowest_power, double x) {
    double acc = 0.0;
    int p = lowest_power;
    for (double c : coeffs) {
        if (p != 0) acc += c * p * std::pow(x, p - 1);
        ++p;
    }
    return acc;
}

}  // namespace

UpdModel UpdModel::ou(double kappa, double alpha, double sigma) {
    if (!(sigma > 0.0)) throw ParamError("ou: sigma must be positive");
    UpdModel m;
    m.kind_ = UpdKind::OU;
    m.theta_ = {kappa, alpha, sigma};
    m.domain_ = {-kInf, kInf};
    m.x_star_ = alpha;  // stationary median
    m.label_ = "ou";
    return m;
}

UpdModel UpdModel::normalized_ou(double kappa) {
    if (!(kappa > 0.0)) throw ParamError("normalized_ou: kappa must be positive");
    return ou(kappa, 0.0, std::sqrt(2.0 * kappa));
}

UpdModel UpdModel::cir(double kappa, double alpha, double sigma) {
    if (!(sigma > 0.0)) throw ParamError("cir: sigma must be positive");
    if (!(alpha > 0.0)) throw ParamError("cir: alpha must be positive");
    if (kappa > 0.0 && 2.0 * kappa * alpha < sigma * sigma) {
        static bool warned = false;  // estimation may visit such theta repeatedly
        if (!warned) {
            warned = true;
            std::cerr << "cdiff warning: CIR parameters violate the Feller condition "
                         "(2 kappa alpha / sigma^2 < 1); boundary attainable\n";
        }
    }
    UpdModel m;
    m.kind_ = UpdKind::CIR;
    m.theta_ = {kappa, alpha, sigma};
    m.domain_ = {0.0, kInf};
    double nu = 2.0 * kappa * alpha / (sigma * sigma);
    double omega = 2.0 * kappa / (sigma * sigma);
    m.x_star_ = (kappa > 0.0) ? gamma_p_inv(nu, 0.5) / omega : 1.0;  // stationary median
    m.label_ = "cir";
    return m;
}

UpdModel UpdModel::normalized_cir(double kappa, double alpha) {
    if (!(kappa > 0.0)) throw ParamError("normalized_cir: kappa must be positive");
    return cir(kappa, alpha, std::sqrt(2.0 * kappa));
}

UpdModel UpdModel::nldcev(std::vector<double> alphas, int k, int l, double beta, double sigma) {
    if (static_cast<int>(alphas.size()) != k + l + 1)
        throw ParamError("nldcev: expected k + l + 1 drift coefficients");
    if (!(sigma > 0.0)) throw ParamError("nldcev: sigma must be positive");
    UpdModel m;
    m.kind_ = UpdKind::NLDCEV;
    m.theta_ = std::move(alphas);
    m.theta_.push_back(beta);
    m.theta_.push_back(sigma);
    m.nldcev_k_ = k;
    m.nldcev_l_ = l;
    m.domain_ = {0.0, kInf};
    m.x_star_ = 1.0;
    m.label_ = "nldcev";
    return m;
}

UpdModel UpdModel::zero_drift_flexible(std::vector<double> betas) {
    UpdModel m;
    m.kind_ = UpdKind::ZeroDriftFlexible;
    m.theta_ = std::move(betas);
    m.domain_ = {-kInf, kInf};
    m.x_star_ = 0.0;
    m.label_ = "zero_drift";
    return m;
}

UpdModel UpdModel::unit_diffusion_polynomial(std::vector<double> alphas) {
    UpdModel m;
    m.kind_ = UpdKind::UnitDiffusionPolynomial;
    m.theta_ = std::move(alphas);
    m.domain_ = {-kInf, kInf};
    m.x_star_ = 0.0;
    m.label_ = "unit_diffusion_poly";
    return m;
}

UpdModel UpdModel::custom(CustomDynamics dyn, Domain domain, double x_star, std::string label) {
    if (!dyn.drift || !dyn.sigma) throw ParamError("custom: drift and sigma are required");
    if (!(x_star > domain.lo && x_star < domain.hi))
        throw ParamError("custom: x_star must lie strictly inside the domain");
    UpdModel m;
    m.kind_ = UpdKind::Custom;
    m.dyn_ = std::move(dyn);
    m.domain_ = domain;
    m.x_star_ = x_star;
    m.label_ = std::move(label);
    return m;
}

UpdModel UpdModel::mirrored(const UpdModel& base) {
    UpdModel m = base;
    m.mirrored_ = !base.mirrored_;
    m.domain_ = {-base.domain_.hi, -base.domain_.lo};
    m.x_star_ = -base.x_star_;
    m.stat_.reset();
    m.label_ = base.label_ + "_mirrored";
    return m;
}

double UpdModel::base_drift(double x) const {
    switch (kind_) {
        case UpdKind::OU:
        case UpdKind::CIR:
            return theta_[0] * (theta_[1] - x);
        case UpdKind::NLDCEV: {
            std::vector<double> coeffs(theta_.begin(), theta_.end() - 2);
            return poly_eval(coeffs, -nldcev_k_, x);
        }
        case UpdKind::ZeroDriftFlexible:
            return 0.0;
        case UpdKind::UnitDiffusionPolynomial:
            return poly_eval(theta_, 1, x);
        case UpdKind::Custom:
            return dyn_.drift(x);
    }
    return 0.0;
}

double UpdModel::base_sigma(double x) const {
    switch (kind_) {
        case UpdKind::OU:
            return theta_[2];
        case UpdKind::CIR:
            return theta_[2] * std::sqrt(x);
        case UpdKind::NLDCEV:
            return theta_.back() * std::pow(x, theta_[theta_.size() - 2]);
        case UpdKind::ZeroDriftFlexible: {
            const int l = static_cast<int>(theta_.size());
            double expo = 0.0;
            for (int i = 1; i < l; ++i) expo += theta_[i - 1] * std::pow(x, i);
            if (l >= 1) expo += theta_[l - 1] * std::pow(std::abs(x), l);
            return std::exp(expo);
        }
        case UpdKind::UnitDiffusionPolynomial:
            return 1.0;
        case UpdKind::Custom:
            return dyn_.sigma(x);
    }
    return 1.0;
}

double UpdModel::base_drift_deriv(double x) const {
    switch (kind_) {
        case UpdKind::OU:
        case UpdKind::CIR:
            return -theta_[0];
        case UpdKind::NLDCEV: {
            std::vector<double> coeffs(theta_.begin(), theta_.end() - 2);
            return poly_eval_deriv(coeffs, -nldcev_k_, x);
        }
        case UpdKind::ZeroDriftFlexible:
            return 0.0;
        case UpdKind::UnitDiffusionPolynomial:
            return poly_eval_deriv(theta_, 1, x);
        case UpdKind::Custom: {
            if (dyn_.drift_deriv) return dyn_.drift_deriv(x);
            double h = 1e-6 * std::max(1.0, std::abs(x));
            return (dyn_.drift(x + h) - dyn_.drift(x - h)) / (2.0 * h);
        }
    }
    return 0.0;
}

double UpdModel::base_sigma_deriv(double x) const {
    switch (kind_) {
        case UpdKind::OU:
            return 0.0;
        case UpdKind::CIR:
            return 0.5 * theta_[2] / std::sqrt(x);
        case UpdKind::NLDCEV: {
            double beta = theta_[theta_.size() - 2];
            return theta_.back() * beta * std::pow(x, beta - 1.0);
        }
        case UpdKind::ZeroDriftFlexible: {
            const int l = static_cast<int>(theta_.size());
            double dexpo = 0.0;
            for (int i = 1; i < l; ++i) dexpo += theta_[i - 1] * i * std::pow(x, i - 1);
            if (l >= 1)
                dexpo += theta_[l - 1] * l * std::pow(std::abs(x), l - 1) * (x < 0.0 ? -1.0 : 1.0);
            return base_sigma(x) * dexpo;
        }
        case UpdKind::UnitDiffusionPolynomial:
            return 0.0;
        case UpdKind::Custom: {
            if (dyn_.sigma_deriv) return dyn_.sigma_deriv(x);
            double h = 1e-6 * std::max(1.0, std::abs(x));
            return (dyn_.sigma(x + h) - dyn_.sigma(x - h)) / (2.0 * h);
        }
    }
    return 0.0;
}

double UpdModel::base_sigma_second(double x) const {
    switch (kind_) {
        case UpdKind::OU:
        case UpdKind::UnitDiffusionPolynomial:
            return 0.0;
        case UpdKind::CIR:
            return -0.25 * theta_[2] * std::pow(x, -1.5);
        case UpdKind::NLDCEV: {
            double beta = theta_[theta_.size() - 2];
            return theta_.back() * beta * (beta - 1.0) * std::pow(x, beta - 2.0);
        }
        default: {
            if (kind_ == UpdKind::Custom && dyn_.sigma_second) return dyn_.sigma_second(x);
            double h = 1e-5 * std::max(1.0, std::abs(x));
            return (base_sigma_deriv(x + h) - base_sigma_deriv(x - h)) / (2.0 * h);
        }
    }
}

double UpdModel::drift(double x) const {
    return mirrored_ ? -base_drift(-x) : base_drift(x);
}

double UpdModel::sigma(double x) const { return mirrored_ ? base_sigma(-x) : base_sigma(x); }

double UpdModel::sigma2(double x) const {
    double s = sigma(x);
    return s * s;
}

double UpdModel::drift_deriv(double x) const {
    return mirrored_ ? base_drift_deriv(-x) : base_drift_deriv(x);
}

double UpdModel::sigma_deriv(double x) const {
    return mirrored_ ? -base_sigma_deriv(-x) : base_sigma_deriv(x);
}

double UpdModel::sigma2_deriv(double x) const { return 2.0 * sigma(x) * sigma_deriv(x); }

double UpdModel::sigma2_second(double x) const {
    double sd = sigma_deriv(x);
    double ss = mirrored_ ? base_sigma_second(-x) : base_sigma_second(x);
    return 2.0 * (sd * sd + sigma(x) * ss);
}

void UpdModel::check_point(double x) const {
    if (!domain_.contains(x))
        throw DomainError("point " + std::to_string(x) + " outside model domain");
    double s2 = sigma2(x);
    if (!(s2 > 0.0) || !std::isfinite(s2))
        throw ParamError("sigma^2 not strictly positive at x = " + std::to_string(x));
    if (!std::isfinite(drift(x)))
        throw ParamError("drift not finite at x = " + std::to_string(x));
}

bool UpdModel::has_closed_stationary() const {
    return kind_ == UpdKind::OU || kind_ == UpdKind::CIR;
}

bool UpdModel::has_closed_transition() const {
    return kind_ == UpdKind::OU || kind_ == UpdKind::CIR;
}

const StationaryLaw& UpdModel::stationary() const {
    if (!stat_) stat_ = std::make_shared<StationaryLaw>(StationaryLaw::compute(*this));
    return *stat_;
}

std::pair<double, double> eval_drift_diffusion(const UpdModel& m, double x) {
    m.check_point(x);
    return {m.drift(x), m.sigma2(x)};
}

std::pair<double, double> scale_density_and_measure(const UpdModel& m, double x) {
    if (!m.domain().contains(x)) throw DomainError("scale_density_and_measure: x outside domain");
    auto log_s = [&m](double z) {
        return -integrate([&m](double w) { return 2.0 * m.drift(w) / m.sigma2(w); }, m.x_star(), z);
    };
    double s = std::exp(log_s(x));
    double S = (x == m.x_star())
                   ? 0.0
                   : integrate([&](double z) { return std::exp(log_s(z)); }, m.x_star(), x);
    if (!std::isfinite(s) || !std::isfinite(S))
        throw QuadratureError("scale_density_and_measure: non-finite result");
    return {s, S};
}

// ---------------------------------------------------------------------------
// StationaryLaw

StationaryLaw StationaryLaw::compute(const UpdModel& m) {
    StationaryLaw law;
    law.mirrored_ = m.is_mirrored();
    const auto& th = m.theta();
    switch (m.kind()) {
        case UpdKind::OU: {
            double kappa = th[0], alpha = th[1], sigma = th[2];
            if (!(kappa > 0.0)) throw NonStationaryError("OU stationary law requires kappa > 0");
            law.form_ = Form::Normal;
            law.a_ = alpha;
            law.b_ = sigma / std::sqrt(2.0 * kappa);
            break;
        }
        case UpdKind::CIR: {
            double kappa = th[0], alpha = th[1], sigma = th[2];
            if (!(kappa > 0.0)) throw NonStationaryError("CIR stationary law requires kappa > 0");
            law.form_ = Form::Gamma;
            law.a_ = 2.0 * kappa * alpha / (sigma * sigma);  // shape
            law.b_ = 2.0 * kappa / (sigma * sigma);          // rate
            break;
        }
        default:
            law.form_ = Form::Numeric;
            break;
    }
    if (law.form_ != Form::Numeric) {
        // s(x_star) = 1, so f sigma^2 s = xi pins xi at the reference point.
        law.xi_ = law.pdf(m.x_star()) * m.sigma2(m.x_star());
        return law;
    }
    law.model_ = std::make_shared<UpdModel>(m);
    law.mirrored_ = false;  // the model itself carries any mirroring
    const Domain& d = m.domain();
    double mass = integrate([&law](double x) { return std::exp(law.numeric_log_unnorm(x)); },
                            d.lo, d.hi, {1e-12, 1e-9, 15});
    if (!std::isfinite(mass) || !(mass > 0.0))
        throw NonStationaryError("stationary normalizer diverges");
    law.xi_ = 1.0 / mass;
    return law;
}

double StationaryLaw::numeric_log_unnorm(double x) const {
    const UpdModel& m = *model_;
    double integral =
        integrate([&m](double z) { return 2.0 * m.drift(z) / m.sigma2(z); }, m.x_star(), x);
    return integral - std::log(m.sigma2(x));
}

double StationaryLaw::pdf(double x) const {
    switch (form_) {
        case Form::Normal: {
            double z = ((mirrored_ ? -x : x) - a_) / b_;
            return norm_pdf(z) / b_;
        }
        case Form::Gamma: {
            double y = mirrored_ ? -x : x;
            return gamma_pdf(y, a_, b_);
        }
        case Form::Numeric:
            if (!model_->domain().contains(x)) return 0.0;
            return xi_ * std::exp(numeric_log_unnorm(x));
    }
    return 0.0;
}

double StationaryLaw::log_pdf(double x) const {
    switch (form_) {
        case Form::Normal: {
            double z = ((mirrored_ ? -x : x) - a_) / b_;
            return log_norm_pdf(z) - std::log(b_);
        }
        case Form::Gamma: {
            double y = mirrored_ ? -x : x;
            if (y <= 0.0) return -kInf;
            return a_ * std::log(b_) + (a_ - 1.0) * std::log(y) - b_ * y - std::lgamma(a_);
        }
        case Form::Numeric:
            if (!model_->domain().contains(x)) return -kInf;
            return std::log(xi_) + numeric_log_unnorm(x);
    }
    return -kInf;
}

double StationaryLaw::pdf_deriv(double x) const {
    double sign = mirrored_ ? -1.0 : 1.0;
    switch (form_) {
        case Form::Normal: {
            double y = mirrored_ ? -x : x;
            double z = (y - a_) / b_;
            return sign * (-z / b_) * norm_pdf(z) / b_;
        }
        case Form::Gamma: {
            double y = mirrored_ ? -x : x;
            if (y <= 0.0) return 0.0;
            return sign * gamma_pdf(y, a_, b_) * ((a_ - 1.0) / y - b_);
        }
        case Form::Numeric: {
            // d log f / dx = 2 mu / sigma^2 - (sigma^2)' / sigma^2
            const UpdModel& m = *model_;
            double g = 2.0 * m.drift(x) / m.sigma2(x) - m.sigma2_deriv(x) / m.sigma2(x);
            return pdf(x) * g;
        }
    }
    return 0.0;
}

double StationaryLaw::pdf_second(double x) const {
    switch (form_) {
        case Form::Normal: {
            double y = mirrored_ ? -x : x;
            double z = (y - a_) / b_;
            return (z * z - 1.0) / (b_ * b_) * norm_pdf(z) / b_;
        }
        case Form::Gamma: {
            double y = mirrored_ ? -x : x;
            if (y <= 0.0) return 0.0;
            double g = (a_ - 1.0) / y - b_;
            double gp = -(a_ - 1.0) / (y * y);
            return gamma_pdf(y, a_, b_) * (g * g + gp);
        }
        case Form::Numeric: {
            const UpdModel& m = *model_;
            double s2 = m.sigma2(x);
            double g = 2.0 * m.drift(x) / s2 - m.sigma2_deriv(x) / s2;
            double gp = 2.0 * m.drift_deriv(x) / s2 -
                        2.0 * m.drift(x) * m.sigma2_deriv(x) / (s2 * s2) -
                        m.sigma2_second(x) / s2 +
                        m.sigma2_deriv(x) * m.sigma2_deriv(x) / (s2 * s2);
            return pdf(x) * (g * g + gp);
        }
    }
    return 0.0;
}

double StationaryLaw::cdf(double x) const {
    switch (form_) {
        case Form::Normal: {
            double p = norm_cdf(((mirrored_ ? -x : x) - a_) / b_);
            return mirrored_ ? 1.0 - p : p;
        }
        case Form::Gamma: {
            double y = mirrored_ ? -x : x;
            double p = (y <= 0.0) ? 0.0 : gamma_p(a_, b_ * y);
            return mirrored_ ? 1.0 - p : p;
        }
        case Form::Numeric: {
            const Domain& d = model_->domain();
            if (x <= d.lo) return 0.0;
            if (x >= d.hi) return 1.0;
            // Integrate over the shorter tail.
            double med_guess = model_->x_star();
            if (x <= med_guess) {
                return std::clamp(
                    integrate([this](double z) { return pdf(z); }, d.lo, x, {1e-12, 1e-9, 15}),
                    0.0, 1.0);
            }
            return std::clamp(
                1.0 - integrate([this](double z) { return pdf(z); }, x, d.hi, {1e-12, 1e-9, 15}),
                0.0, 1.0);
        }
    }
    return 0.0;
}

double StationaryLaw::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("stationary quantile: u must lie in (0,1)");
    switch (form_) {
        case Form::Normal: {
            double q = a_ + b_ * norm_quantile(mirrored_ ? 1.0 - u : u);
            return mirrored_ ? -q : q;
        }
        case Form::Gamma: {
            double q = gamma_p_inv(a_, mirrored_ ? 1.0 - u : u) / b_;
            return mirrored_ ? -q : q;
        }
        case Form::Numeric: {
            const Domain& d = model_->domain();
            auto g = [this, u](double x) { return cdf(x) - u; };
            double step = std::max(1.0, std::abs(model_->x_star()));
            RootOptions opts;
            opts.f_tol = 1e-10;  // tolerance in probability
            opts.x_tol = 1e-12;
            return find_root_expanding(g, model_->x_star(), 0.5 * step, d.lo, d.hi, opts);
        }
    }
    return 0.0;
}

std::pair<double, double> StationaryLaw::support() const {
    switch (form_) {
        case Form::Normal:
            return {-kInf, kInf};
        case Form::Gamma:
            return mirrored_ ? std::make_pair(-kInf, 0.0) : std::make_pair(0.0, kInf);
        case Form::Numeric:
            return {model_->domain().lo, model_->domain().hi};
    }
    return {-kInf, kInf};
}

double stationary_density(const UpdModel& m, double x) { return m.stationary().pdf(x); }
double stationary_cdf(const UpdModel& m, double x) { return m.stationary().cdf(x); }
double stationary_quantile(const UpdModel& m, double u) { return m.stationary().quantile(u); }

// ---------------------------------------------------------------------------
// Transition densities

TransitionDensitySpec TransitionDensitySpec::auto_for(const UpdModel& m, double delta) {
    TransitionDensitySpec spec;
    spec.delta = delta;
    if (m.kind() == UpdKind::OU) {
        spec.method = TransitionMethod::ClosedFormGaussian;
        return spec;
    }
    if (m.kind() == UpdKind::CIR) {
        spec.method = TransitionMethod::ClosedFormBessel;
        return spec;
    }
    spec.method = TransitionMethod::EulerSubstep;
    // keep the per-step mean-reversion move small: kappa_eff * delta / m <= 0.05
    double kappa_eff = std::abs(m.drift_deriv(m.x_star()));
    spec.substeps = std::clamp(static_cast<int>(std::ceil(kappa_eff * delta / 0.05)), 1, 64);
    return spec;
}

namespace {

double log_ou_transition(double kappa, double alpha, double sigma, double x, double x0,
                         double delta) {
    double rho = std::exp(-kappa * delta);
    double mean = alpha + (x0 - alpha) * rho;
    // (1 - e^{-2 kappa d}) / (2 kappa), continuous at kappa = 0
    double scale = (kappa == 0.0) ? delta : -std::expm1(-2.0 * kappa * delta) / (2.0 * kappa);
    return log_gaussian(x, mean, sigma * sigma * scale);
}

double log_cir_transition(double kappa, double alpha, double sigma, double x, double x0,
                          double delta) {
    if (x <= 0.0) return -kInf;
    double em = -std::expm1(-kappa * delta);  // 1 - e^{-kappa delta}
    double c = (kappa == 0.0) ? 2.0 / (sigma * sigma * delta) : 2.0 * kappa / (sigma * sigma * em);
    double q = 2.0 * kappa * alpha / (sigma * sigma) - 1.0;
    double u = c * x0 * std::exp(-kappa * delta);
    double v = c * x;
    return std::log(c) - u - v + 0.5 * q * (std::log(v) - std::log(u)) +
           log_bessel_i(q, 2.0 * std::sqrt(u * v));
}

// Sub-stepped Euler composed by Chapman-Kolmogorov on a fixed quadrature grid.
double log_euler_ck(const UpdModel& m, double x, double x0, double delta, int substeps) {
    const double dt = delta / substeps;
    if (substeps == 1) return log_euler_transition_density(m, x, x0, dt);
    // envelope of the deterministic flow plus a wide diffusion band
    double mean = x0, var = 0.0;
    double lo_env = std::min(x0, x), hi_env = std::max(x0, x);
    for (int s = 0; s < substeps; ++s) {
        var += m.sigma2(mean) * dt;
        mean += m.drift(mean) * dt;
        double sd = std::sqrt(var);
        lo_env = std::min(lo_env, mean - 10.0 * sd);
        hi_env = std::max(hi_env, mean + 10.0 * sd);
    }
    double width = hi_env - lo_env;
    lo_env -= 0.1 * width;
    hi_env += 0.1 * width;
    const Domain& d = m.domain();
    if (std::isfinite(d.lo)) lo_env = std::max(lo_env, d.lo + 1e-12 * std::max(1.0, std::abs(d.lo) + width));
    if (std::isfinite(d.hi)) hi_env = std::min(hi_env, d.hi - 1e-12 * std::max(1.0, std::abs(d.hi) + width));

    GaussLegendreGrid grid(lo_env, hi_env, 32, 4);
    const std::size_t g = grid.nodes.size();
    std::vector<double> f(g);
    for (std::size_t j = 0; j < g; ++j)
        f[j] = std::exp(log_euler_transition_density(m, grid.nodes[j], x0, dt));
    std::vector<double> next(g);
    for (int s = 1; s < substeps; ++s) {
        for (std::size_t j = 0; j < g; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < g; ++k) {
                acc += grid.weights[k] * f[k] *
                       std::exp(log_euler_transition_density(m, grid.nodes[j], grid.nodes[k], dt));
            }
            next[j] = acc;
        }
        f.swap(next);
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < g; ++k)
        acc += grid.weights[k] * f[k] * std::exp(log_euler_transition_density(m, x, grid.nodes[k], dt));
    return std::log(acc);
}

}  // namespace

double log_euler_transition_density(const UpdModel& m, double x, double x0, double delta) {
    if (!(delta > 0.0)) throw ParamError("euler transition: delta must be positive");
    m.check_point(x0);
    // Gaussian in x with mean x0 + mu dt, variance sigma^2 dt
    return log_gaussian(x, x0 + m.drift(x0) * delta, m.sigma2(x0) * delta);
}

double euler_transition_density(const UpdModel& m, double x, double x0, double delta) {
    return std::exp(log_euler_transition_density(m, x, x0, delta));
}

double log_transition_density(const UpdModel& m, double x, double x0,
                              const TransitionDensitySpec& spec) {
    if (!(spec.delta > 0.0)) throw ParamError("transition: delta must be positive");
    if (!m.domain().contains(x0)) throw DomainError("transition: x0 outside domain");
    if (!m.domain().contains(x)) return -kInf;

    double xe = x, x0e = x0;
    const UpdModel* me = &m;
    UpdModel base = m;  // reused when mirrored
    if (m.is_mirrored() && m.kind() != UpdKind::Custom) {
        base = UpdModel::mirrored(m);  // undo the mirroring
        me = &base;
        xe = -x;
        x0e = -x0;
    }

    const auto& th = me->theta();
    switch (spec.method) {
        case TransitionMethod::ClosedFormGaussian:
            if (me->kind() != UpdKind::OU)
                throw ParamError("ClosedFormGaussian requires an OU model");
            return log_ou_transition(th[0], th[1], th[2], xe, x0e, spec.delta);
        case TransitionMethod::ClosedFormBessel:
            if (me->kind() != UpdKind::CIR)
                throw ParamError("ClosedFormBessel requires a CIR model");
            return log_cir_transition(th[0], th[1], th[2], xe, x0e, spec.delta);
        case TransitionMethod::EulerSubstep:
            if (spec.substeps <= 1) return log_euler_transition_density(*me, xe, x0e, spec.delta);
            return log_euler_ck(*me, xe, x0e, spec.delta, spec.substeps);
        case TransitionMethod::QuadratureChapmanKolmogorov: {
            TransitionDensitySpec half = TransitionDensitySpec::auto_for(*me, 0.5 * spec.delta);
            const UpdModel& mm = *me;
            double lo = mm.domain().lo, hi = mm.domain().hi;
            double val = integrate(
                [&](double z) {
                    double a = log_transition_density(mm, xe, z, half);
                    double b = log_transition_density(mm, z, x0e, half);
                    return std::exp(a + b);
                },
                lo, hi, {1e-12, 1e-8, 15});
            return std::log(val);
        }
    }
    return -kInf;
}

double transition_density(const UpdModel& m, double x, double x0,
                          const TransitionDensitySpec& spec) {
    return std::exp(log_transition_density(m, x, x0, spec));
}

}  // namespace cdiff
