#include "cdiff/normalize.hpp"

#include <cmath>

#include "cdiff/errors.hpp"
#include "cdiff/quad.hpp"
#include "cdiff/roots.hpp"

namespace cdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// gamma(x) = int_{x*}^{x} dz / sigma(z)
double lamperti_gamma(const UpdModel& m, double x) {
    return integrate([&m](double z) { return 1.0 / m.sigma(z); }, m.x_star(), x);
}

double probe_near(double boundary, double interior, bool lower) {
    if (!std::isfinite(boundary)) return lower ? interior - 1e6 : interior + 1e6;
    double off = 1e-9 * std::max(1.0, std::abs(boundary) + std::abs(interior));
    return lower ? boundary + off : boundary - off;
}

double mapped_bound(double value) { return std::abs(value) > 1e8 ? std::copysign(kInf, value) : value; }

}  // namespace

UpdModel lamperti_normalize(const UpdModel& m) {
    if (m.is_mirrored()) return UpdModel::mirrored(lamperti_normalize(UpdModel::mirrored(m)));
    const auto& th = m.theta();
    switch (m.kind()) {
        case UpdKind::OU: {
            // gamma(x) = x / sigma: an OU process with unit diffusion
            double kappa = th[0], alpha = th[1], sigma = th[2];
            return UpdModel::ou(kappa, alpha / sigma, 1.0);
        }
        case UpdKind::CIR: {
            double kappa = th[0], sigma = th[2];
            double alpha_star = th[1] / (sigma * sigma);
            CustomDynamics dyn;
            dyn.drift = [kappa, alpha_star](double x) {
                return kappa * (2.0 * alpha_star / x - 0.5 * x) - 0.5 / x;
            };
            dyn.drift_deriv = [kappa, alpha_star](double x) {
                return -2.0 * kappa * alpha_star / (x * x) - 0.5 * kappa + 0.5 / (x * x);
            };
            dyn.sigma = [](double) { return 1.0; };
            dyn.sigma_deriv = [](double) { return 0.0; };
            dyn.sigma_second = [](double) { return 0.0; };
            double x_star_bar = 2.0 * std::sqrt(m.x_star()) / sigma;
            return UpdModel::custom(std::move(dyn), Domain{0.0, kInf}, x_star_bar, "cir_lamperti");
        }
        case UpdKind::NLDCEV: {
            double sigma = th.back();
            double beta = th[th.size() - 2];
            if (!(beta < 1.0)) return lamperti_normalize_numeric(m);
            int k = m.nldcev_k(), l = m.nldcev_l();
            std::vector<double> alpha_star(th.begin(), th.end() - 2);
            for (int i = -k; i <= l; ++i) {
                double e1 = (i - 1.0) / (1.0 - beta);
                double e2 = (i - beta) / (1.0 - beta);
                alpha_star[i + k] *= std::pow(sigma, e1) * std::pow(1.0 - beta, e2);
            }
            CustomDynamics dyn;
            dyn.drift = [alpha_star, k, l, beta](double x) {
                double acc = -0.5 * beta / (1.0 - beta) / x;
                for (int i = -k; i <= l; ++i)
                    acc += alpha_star[i + k] * std::pow(x, (i - beta) / (1.0 - beta));
                return acc;
            };
            dyn.sigma = [](double) { return 1.0; };
            dyn.sigma_deriv = [](double) { return 0.0; };
            dyn.sigma_second = [](double) { return 0.0; };
            double x_star_bar = std::pow(m.x_star(), 1.0 - beta) / (sigma * (1.0 - beta));
            return UpdModel::custom(std::move(dyn), Domain{0.0, kInf}, x_star_bar,
                                    "nldcev_lamperti");
        }
        case UpdKind::UnitDiffusionPolynomial:
            return m;  // already unit diffusion with gamma = identity shift
        default:
            return lamperti_normalize_numeric(m);
    }
}

UpdModel lamperti_normalize_numeric(const UpdModel& m) {
    UpdModel base = m;  // copy shared by the callables below
    const Domain d = m.domain();
    double lo_bar = mapped_bound(lamperti_gamma(base, probe_near(d.lo, m.x_star(), true)));
    double hi_bar = mapped_bound(lamperti_gamma(base, probe_near(d.hi, m.x_star(), false)));

    auto gamma_inv = [base, d](double xbar) {
        auto g = [&base, xbar](double x) { return lamperti_gamma(base, x) - xbar; };
        double step = std::max(1.0, std::abs(base.x_star()));
        return find_root_expanding(g, base.x_star(), 0.5 * step, d.lo, d.hi);
    };

    CustomDynamics dyn;
    dyn.drift = [base, gamma_inv](double xbar) {
        double x = gamma_inv(xbar);
        return base.drift(x) / base.sigma(x) - 0.5 * base.sigma_deriv(x);
    };
    dyn.sigma = [](double) { return 1.0; };
    dyn.sigma_deriv = [](double) { return 0.0; };
    dyn.sigma_second = [](double) { return 0.0; };
    return UpdModel::custom(std::move(dyn), Domain{lo_bar, hi_bar}, 0.0,
                            base.label() + "_lamperti_numeric");
}

UpdModel natural_scale_normalize(const UpdModel& m) {
    if (m.kind() == UpdKind::ZeroDriftFlexible && m.x_star() == 0.0) return m;

    UpdModel base = m;
    const Domain d = m.domain();
    auto scale_measure = [base](double x) { return scale_density_and_measure(base, x).second; };
    double lo_bar = mapped_bound(scale_measure(probe_near(d.lo, m.x_star(), true)));
    double hi_bar = mapped_bound(scale_measure(probe_near(d.hi, m.x_star(), false)));

    auto s_inv = [base, scale_measure, d](double xbar) {
        auto g = [&](double x) { return scale_measure(x) - xbar; };
        double step = std::max(1.0, std::abs(base.x_star()));
        return find_root_expanding(g, base.x_star(), 0.5 * step, d.lo, d.hi);
    };

    CustomDynamics dyn;
    dyn.drift = [](double) { return 0.0; };
    dyn.drift_deriv = [](double) { return 0.0; };
    dyn.sigma = [base, s_inv](double xbar) {
        double x = s_inv(xbar);
        auto [s, S] = scale_density_and_measure(base, x);
        (void)S;
        return s * base.sigma(x);
    };
    return UpdModel::custom(std::move(dyn), Domain{lo_bar, hi_bar}, 0.0,
                            base.label() + "_natural_scale");
}

UpdModel cdf_normalize(const UpdModel& m) {
    UpdModel base = m;
    base.stationary();  // fail fast when no stationary law exists

    CustomDynamics dyn;
    dyn.drift = [base](double xbar) {
        const StationaryLaw& law = base.stationary();
        double x = law.quantile(xbar);
        return base.drift(x) * law.pdf(x) + 0.5 * base.sigma2(x) * law.pdf_deriv(x);
    };
    dyn.sigma = [base](double xbar) {
        const StationaryLaw& law = base.stationary();
        double x = law.quantile(xbar);
        return base.sigma(x) * law.pdf(x);
    };
    return UpdModel::custom(std::move(dyn), Domain{0.0, 1.0}, 0.5, base.label() + "_cdf_scheme");
}

Structure rewrite_structure(const Structure& s, const SmoothMap& T, Domain new_domain) {
    if (!T.f || !T.fprime || !T.fsecond || !T.finv)
        throw ParamError("rewrite_structure: T must provide f, f', f'' and the inverse");
    UpdModel base = s.model;
    SmoothMap t = T;

    CustomDynamics dyn;
    dyn.drift = [base, t](double x) {
        double tx = t.f(x), tp = t.fprime(x), tpp = t.fsecond(x);
        return base.drift(tx) / tp - 0.5 * base.sigma2(tx) * tpp / (tp * tp * tp);
    };
    dyn.sigma = [base, t](double x) { return base.sigma(t.f(x)) / t.fprime(x); };
    UpdModel rewritten = UpdModel::custom(std::move(dyn), new_domain, t.finv(s.model.x_star()),
                                          base.label() + "_rewritten");

    // U~(y) = T^{-1}(U(y))
    SmoothMap inv;
    inv.f = t.finv;
    inv.fprime = [t](double x) { return 1.0 / t.fprime(t.finv(x)); };
    inv.fsecond = [t](double x) {
        double u = t.finv(x), tp = t.fprime(u);
        return -t.fsecond(u) / (tp * tp * tp);
    };
    inv.finv = t.f;
    auto composed = std::make_shared<ComposedTransform>(s.transform, std::move(inv));
    return Structure{std::move(rewritten), std::move(composed)};
}

}  // namespace cdiff
