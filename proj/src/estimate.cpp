#include "cdiff/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdiff/errors.hpp"
#include "cdiff/inference.hpp"
#include "cdiff/optim.hpp"
#include "cdiff/special.hpp"

namespace cdiff {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kProbGuard = 1e-12;

double sample_mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    double m = sample_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / (static_cast<double>(x.size()) - 1.0));
}

void require_varying(std::span<const double> data, const char* who) {
    if (data.size() < 3) throw DegenerateSampleError(std::string(who) + ": sample too short");
    if (std::adjacent_find(data.begin(), data.end(), std::not_equal_to<>()) == data.end())
        throw DegenerateSampleError(std::string(who) + ": sample is constant");
}

// elementwise reparameterizations for the optimizer
enum class Rep { Free, Log, Atanh, LogShift2 };

std::vector<double> to_eta(std::span<const double> theta, std::span<const Rep> reps) {
    std::vector<double> eta(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        switch (reps[i]) {
            case Rep::Free: eta[i] = theta[i]; break;
            case Rep::Log: eta[i] = std::log(theta[i]); break;
            case Rep::Atanh: eta[i] = std::atanh(theta[i]); break;
            case Rep::LogShift2: eta[i] = std::log(theta[i] - 2.0); break;
        }
    }
    return eta;
}

std::vector<double> to_theta(std::span<const double> eta, std::span<const Rep> reps) {
    std::vector<double> theta(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        switch (reps[i]) {
            case Rep::Free: theta[i] = eta[i]; break;
            case Rep::Log: theta[i] = std::exp(eta[i]); break;
            case Rep::Atanh: theta[i] = std::tanh(eta[i]); break;
            case Rep::LogShift2: theta[i] = 2.0 + std::exp(eta[i]); break;
        }
    }
    return theta;
}

MultiStartOptions optimizer_options(const FitOptions& opts) {
    MultiStartOptions ms;
    ms.restarts = std::max(1, opts.restarts);
    ms.seed = opts.seed;
    ms.nm.f_tol = opts.tolerance;
    ms.nm.max_iter = opts.max_iterations;
    ms.polish = opts.optimizer == FitOptions::Optimizer::NelderMead ||
                opts.optimizer == FitOptions::Optimizer::QuasiNewtonNumericGrad;
    return ms;
}

// maximize obj over natural theta through the reparameterization
OptimResult maximize(const std::function<double(std::span<const double>)>& obj,
                     std::span<const double> theta0, std::span<const Rep> reps,
                     const FitOptions& opts) {
    std::vector<Rep> rep_copy(reps.begin(), reps.end());
    auto neg = [&obj, rep_copy](const std::vector<double>& eta) {
        std::vector<double> theta = to_theta(eta, rep_copy);
        return -obj(theta);
    };
    OptimResult r = minimize_multistart(neg, to_eta(theta0, reps), optimizer_options(opts));
    r.x = to_theta(r.x, reps);
    r.fmin = -r.fmin;  // back to a maximum
    return r;
}

}  // namespace

int family_dim(UpdFamily f) { return f == UpdFamily::NormalizedOU ? 1 : 2; }

std::vector<std::string> family_param_names(UpdFamily f) {
    if (f == UpdFamily::NormalizedOU) return {"kappa"};
    return {"kappa", "alpha"};
}

UpdModel family_build(UpdFamily f, std::span<const double> theta) {
    if (f == UpdFamily::NormalizedOU) {
        if (theta.size() != 1) throw ParamError("NormalizedOU expects theta = (kappa)");
        return UpdModel::normalized_ou(theta[0]);
    }
    if (theta.size() != 2) throw ParamError("NormalizedCIR expects theta = (kappa, alpha)");
    return UpdModel::normalized_cir(theta[0], theta[1]);
}

// ---------------------------------------------------------------------------
// CopulaObjective

CopulaObjective::CopulaObjective(std::vector<double> probs, UpdFamily family, double delta,
                                 bool euler_density)
    : probs_(std::move(probs)), family_(family), delta_(delta), euler_(euler_density) {
    if (probs_.size() < 2) throw DegenerateSampleError("copula objective: need at least 2 points");
    for (double p : probs_) {
        if (!(p > 0.0 && p < 1.0)) throw DomainError("copula objective: probs must lie in (0,1)");
    }
    if (family_ == UpdFamily::NormalizedOU) {
        z_.resize(probs_.size());
        for (std::size_t i = 0; i < probs_.size(); ++i) z_[i] = norm_quantile(probs_[i]);
        for (std::size_t i = 1; i < z_.size(); ++i) {
            sum_sq_lead_ += z_[i] * z_[i];
            sum_sq_lag_ += z_[i - 1] * z_[i - 1];
            sum_cross_ += z_[i] * z_[i - 1];
        }
    } else {
        rank_order_.resize(probs_.size());
        std::iota(rank_order_.begin(), rank_order_.end(), std::size_t{0});
        std::sort(rank_order_.begin(), rank_order_.end(),
                  [this](std::size_t a, std::size_t b) { return probs_[a] < probs_[b]; });
    }
}

double CopulaObjective::value(std::span<const double> theta) const {
    const double n = static_cast<double>(n_terms());
    if (family_ == UpdFamily::NormalizedOU) {
        double kappa = theta[0];
        if (!(kappa > 0.0) || !std::isfinite(kappa)) return kNegInf;
        double rho, v;
        if (euler_) {
            rho = 1.0 - kappa * delta_;  // Euler mean coefficient
            v = 2.0 * kappa * delta_;    // Euler variance
        } else {
            rho = std::exp(-kappa * delta_);
            v = -std::expm1(-2.0 * kappa * delta_);
        }
        if (!(v > 0.0)) return kNegInf;
        double quad = sum_sq_lead_ - 2.0 * rho * sum_cross_ + rho * rho * sum_sq_lag_;
        double total = -0.5 * n * std::log(v) - quad / (2.0 * v) + 0.5 * sum_sq_lead_;
        return total / n;
    }
    return cir_value(theta, std::nullopt);
}

double CopulaObjective::term(std::size_t i, std::span<const double> theta) const {
    if (family_ == UpdFamily::NormalizedOU) {
        double kappa = theta[0];
        if (!(kappa > 0.0)) return kNegInf;
        double rho, v;
        if (euler_) {
            rho = 1.0 - kappa * delta_;
            v = 2.0 * kappa * delta_;
        } else {
            rho = std::exp(-kappa * delta_);
            v = -std::expm1(-2.0 * kappa * delta_);
        }
        double z1 = z_[i + 1], z0 = z_[i];
        double d = z1 - rho * z0;
        return -0.5 * std::log(v) - d * d / (2.0 * v) + 0.5 * z1 * z1;
    }
    return cir_value(theta, i);
}

// Gamma(alpha, 1) quantiles of all probs: walk the sorted ranks and polish
// each root by Newton warm-started from its neighbor.
std::vector<double> CopulaObjective::quantiles(double alpha) const {
    std::vector<double> x(probs_.size());
    double prev = -1.0, prev_p = -1.0;
    for (std::size_t idx : rank_order_) {
        double p = probs_[idx];
        if (p == prev_p) {
            x[idx] = prev;
            continue;
        }
        double xi;
        if (prev <= 0.0) {
            xi = gamma_p_inv(alpha, p);
        } else {
            xi = prev;
            bool done = false;
            for (int iter = 0; iter < 24; ++iter) {
                double err = gamma_p(alpha, xi) - p;
                if (std::abs(err) < 1e-13) {
                    done = true;
                    break;
                }
                double f = gamma_pdf(xi, alpha, 1.0);
                if (!(f > 0.0)) break;
                double next = xi - err / f;
                if (next <= 0.0) next = 0.5 * xi;
                if (std::abs(next - xi) < 1e-14 * xi) {
                    xi = next;
                    done = std::abs(gamma_p(alpha, xi) - p) < 1e-11;
                    break;
                }
                xi = next;
            }
            if (!done) xi = gamma_p_inv(alpha, p);
        }
        x[idx] = xi;
        prev = xi;
        prev_p = p;
    }
    return x;
}

double CopulaObjective::cir_value(std::span<const double> theta,
                                  std::optional<std::size_t> only) const {
    double kappa = theta[0], alpha = theta[1];
    if (!(kappa > 0.0) || !(alpha > 0.0) || !std::isfinite(kappa) || !std::isfinite(alpha))
        return kNegInf;
    const double rho = std::exp(-kappa * delta_);
    const double em = -std::expm1(-kappa * delta_);
    const double c = 1.0 / em;  // 2 kappa / (sigma^2 (1 - rho)) with sigma^2 = 2 kappa
    const double log_c = -std::log(em);
    const double q = alpha - 1.0;
    const double lgam_alpha = std::lgamma(alpha);

    auto one_term = [&](double x0, double x1) {
        double log_trans;
        if (euler_) {
            double mean = x0 + kappa * (alpha - x0) * delta_;
            double var = 2.0 * kappa * x0 * delta_;
            log_trans = log_gaussian(x1, mean, var);
        } else {
            double u = c * rho * x0;
            double v = c * x1;
            log_trans = log_c - u - v + 0.5 * q * (std::log(v) - std::log(u)) +
                        log_bessel_i(q, 2.0 * std::sqrt(u * v));
        }
        double log_marg = q * std::log(x1) - x1 - lgam_alpha;
        return log_trans - log_marg;
    };

    if (only) {
        double x0 = gamma_p_inv(alpha, probs_[*only]);
        double x1 = gamma_p_inv(alpha, probs_[*only + 1]);
        return one_term(x0, x1);
    }
    std::vector<double> x = quantiles(alpha);
    double total = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        double t = one_term(x[i - 1], x[i]);
        if (!std::isfinite(t)) return kNegInf;
        total += t;
    }
    return total / static_cast<double>(n_terms());
}

// ---------------------------------------------------------------------------
// Objectives and likelihoods

double loglik_full(std::span<const double> data, const UpdModel& model,
                   const Transformation& transform, double delta) {
    if (data.size() < 2) throw DegenerateSampleError("loglik_full: need at least 2 observations");
    TransitionDensitySpec spec = TransitionDensitySpec::auto_for(model, delta);
    double total = 0.0;
    double x_prev = transform.u(data[0]);
    for (std::size_t i = 1; i < data.size(); ++i) {
        double x = transform.u(data[i]);
        if (!model.domain().contains(x) || !model.domain().contains(x_prev))
            throw DomainError("loglik_full: transformed point outside model domain");
        double term = log_transition_density(model, x, x_prev, spec) +
                      std::log(transform.u_prime(data[i]));
        if (!std::isfinite(term))
            throw NonFiniteLikelihoodError(
                "loglik_full: non-finite contribution at index " + std::to_string(i),
                static_cast<long>(i));
        total += term;
        x_prev = x;
    }
    return total / static_cast<double>(data.size() - 1);
}

std::vector<double> variant_probs(std::span<const double> data, CdfVariant variant,
                                  double bandwidth_factor) {
    if (variant == CdfVariant::Empirical) return EmpiricalCdf::pseudo_probs(data);
    double h = silverman_bandwidth(data, bandwidth_factor);
    KernelEstimate kde(std::vector<double>(data.begin(), data.end()), h);
    std::vector<double> probs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        probs[i] = std::clamp(kde.cdf(data[i]), kProbGuard, 1.0 - kProbGuard);
    return probs;
}

double pmle_objective(std::span<const double> data, UpdFamily family, double delta,
                      std::span<const double> theta, CdfVariant variant,
                      double bandwidth_factor) {
    CopulaObjective obj(variant_probs(data, variant, bandwidth_factor), family, delta);
    return obj.value(theta);
}

namespace {

std::vector<double> family_start(const CopulaObjective& obj, UpdFamily family, double delta) {
    // kappa from the lag-1 autocorrelation of the uniformized scores
    std::vector<double> z(obj.probs().size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = norm_quantile(obj.probs()[i]);
    double rho = std::clamp(acf1(z), 0.01, 0.995);
    double kappa0 = -std::log(rho) / delta;
    if (family == UpdFamily::NormalizedOU) return {kappa0};
    return {kappa0, 1.0};
}

FitResult finish_family_fit(const CopulaObjective& obj, UpdFamily family, double delta,
                            const FitOptions& opts, EstimatorKind kind,
                            std::span<const double> start) {
    std::vector<Rep> reps(family_dim(family), Rep::Log);
    auto value = [&obj](std::span<const double> th) { return obj.value(th); };
    OptimResult best = maximize(value, start, reps, opts);
    if (!std::isfinite(best.fmin))
        throw NonConvergenceError("family fit: objective non-finite at every visited point");

    FitResult fit;
    fit.kind = kind;
    fit.param_names = family_param_names(family);
    fit.theta = best.x;
    fit.objective = best.fmin;
    fit.converged = best.converged;
    fit.evaluations = best.evaluations;
    fit.delta = delta;
    if (!fit.converged) fit.message = "optimizer hit its iteration cap";
    if (opts.compute_se) {
        PerObsObjective per;
        per.n_terms = obj.n_terms();
        per.term = [&obj](std::size_t i, std::span<const double> th) { return obj.term(i, th); };
        fit.se = sandwich_se(per, fit.theta);
    }
    return fit;
}

}  // namespace

FitResult fit_pmle(std::span<const double> data, UpdFamily family, double delta,
                   const FitOptions& opts, CdfVariant variant) {
    require_varying(data, "fit_pmle");
    CopulaObjective obj(variant_probs(data, variant, opts.bandwidth_factor), family, delta);
    auto start = family_start(obj, family, delta);
    return finish_family_fit(obj, family, delta, opts, EstimatorKind::PMLE, start);
}

FitResult fit_euler_pmle(std::span<const double> data, UpdFamily family, double delta,
                         const FitOptions& opts, CdfVariant variant) {
    require_varying(data, "fit_euler_pmle");
    CopulaObjective obj(variant_probs(data, variant, opts.bandwidth_factor), family, delta, true);
    auto start = family_start(obj, family, delta);
    return finish_family_fit(obj, family, delta, opts, EstimatorKind::EulerPMLE, start);
}

FitResult fit_skst(std::span<const double> data, const FitOptions& opts) {
    require_varying(data, "fit_skst");
    std::vector<double> vec(data.begin(), data.end());
    auto obj = [&vec](std::span<const double> th) {
        SkstParams p{th[0], th[1], th[2], th[3]};
        if (!(p.v > 0.0) || !(p.tau > 2.0) || std::abs(p.lambda) >= 1.0) return kNegInf;
        double total = 0.0;
        try {
            SkstEval eval(p);
            for (double y : vec) total += eval.log_pdf(y);
        } catch (const ParamError&) {
            return kNegInf;
        }
        return total / static_cast<double>(vec.size());
    };
    std::vector<Rep> reps{Rep::Free, Rep::Log, Rep::Atanh, Rep::LogShift2};
    std::vector<double> start{sample_mean(data), sample_sd(data), 0.05, 8.0};
    OptimResult best = maximize(obj, start, reps, opts);
    if (!std::isfinite(best.fmin)) throw NonConvergenceError("fit_skst: no finite objective");

    FitResult fit;
    fit.kind = EstimatorKind::MLE;
    fit.param_names = {"m", "v", "lambda", "tau"};
    fit.theta = best.x;
    fit.objective = best.fmin;
    fit.converged = best.converged;
    fit.evaluations = best.evaluations;
    if (opts.compute_se) {
        PerObsObjective per;
        per.n_terms = vec.size();
        per.term = [&vec](std::size_t i, std::span<const double> th) {
            SkstParams p{th[0], th[1], th[2], th[3]};
            return SkstEval(p).log_pdf(vec[i]);
        };
        fit.se = sandwich_se(per, fit.theta);
    }
    return fit;
}

namespace {

FitResult fit_do_model(std::span<const double> data, double delta, const FitOptions& opts) {
    std::vector<double> x(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!(data[i] > 0.0)) throw DomainError("DO fit: data must be positive");
        x[i] = std::log(data[i]);
    }
    require_varying(x, "DO fit");
    double jacobian = 0.0;  // sum_{i>=1} log U'(y_i) = -sum_{i>=1} log y_i, theta-free
    for (std::size_t i = 1; i < x.size(); ++i) jacobian -= x[i];
    const double n = static_cast<double>(x.size() - 1);

    auto obj = [&x, delta, jacobian, n](std::span<const double> th) {
        double kappa = th[0], alpha = th[1], s2 = th[2];
        if (!(kappa > 0.0) || !(s2 > 0.0)) return kNegInf;
        double rho = std::exp(-kappa * delta);
        double v = s2 * -std::expm1(-2.0 * kappa * delta) / (2.0 * kappa);
        double total = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i)
            total += log_gaussian(x[i], alpha + (x[i - 1] - alpha) * rho, v);
        return (total + jacobian) / n;
    };

    // AR(1) moment start
    double xb = sample_mean(x);
    double rho0 = std::clamp(acf1(x), 0.01, 0.995);
    double kappa0 = -std::log(rho0) / delta;
    double var0 = sample_sd(x);
    var0 *= var0;
    double s20 = 2.0 * kappa0 * var0;
    std::vector<Rep> reps{Rep::Log, Rep::Free, Rep::Log};
    std::vector<double> start{kappa0, xb, s20};
    OptimResult best = maximize(obj, start, reps, opts);
    if (!std::isfinite(best.fmin)) throw NonConvergenceError("DO fit: no finite objective");

    FitResult fit;
    fit.kind = EstimatorKind::MLE;
    fit.param_names = {"kappa", "alpha", "sigma2"};
    fit.theta = best.x;
    fit.objective = best.fmin;
    fit.converged = best.converged;
    fit.evaluations = best.evaluations;
    fit.delta = delta;
    if (opts.compute_se) {
        PerObsObjective per;
        per.n_terms = x.size() - 1;
        per.term = [&x, delta](std::size_t i, std::span<const double> th) {
            double kappa = th[0], alpha = th[1], s2 = th[2];
            if (!(kappa > 0.0) || !(s2 > 0.0)) return kNegInf;
            double rho = std::exp(-kappa * delta);
            double v = s2 * -std::expm1(-2.0 * kappa * delta) / (2.0 * kappa);
            return log_gaussian(x[i + 1], alpha + (x[i] - alpha) * rho, v) - x[i + 1];
        };
        fit.se = sandwich_se(per, fit.theta);
    }
    return fit;
}

FitResult fit_ew_model(std::span<const double> data, double delta, const FitOptions& opts) {
    require_varying(data, "EW fit");
    std::vector<double> y(data.begin(), data.end());
    double y_min = *std::min_element(y.begin(), y.end());
    double y_max = *std::max_element(y.begin(), y.end());
    const double n = static_cast<double>(y.size() - 1);

    auto obj = [&y, delta, n](std::span<const double> th) {
        double kappa = th[0], alpha = th[1], s2 = th[2], rho_p = th[3], dshift = th[4];
        if (!(kappa > 0.0) || !(alpha > 0.0) || !(s2 > 0.0) || !(dshift > 0.0)) return kNegInf;
        UpdModel cir = UpdModel::cir(kappa, alpha, std::sqrt(s2));
        TransitionDensitySpec spec = TransitionDensitySpec::auto_for(cir, delta);
        double total = 0.0;
        double x_prev = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            double gap = y[i] - rho_p;
            if (!(gap > 0.0)) return kNegInf;
            double x = 1.0 / gap - dshift;  // latent CIR state
            if (!(x > 0.0)) return kNegInf;
            if (i > 0) {
                double t = log_transition_density(cir, x, x_prev, spec) - 2.0 * std::log(gap);
                if (!std::isfinite(t)) return kNegInf;
                total += t;
            }
            x_prev = x;
        }
        return total / n;
    };

    double rho0 = 0.5 * y_min;
    double d0 = 0.5 / (y_max - rho0);
    std::vector<double> x0s(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x0s[i] = 1.0 / (y[i] - rho0) - d0;
    double mx = sample_mean(x0s), vx = sample_sd(x0s);
    double rho_acf = std::clamp(acf1(x0s), 0.01, 0.995);
    double kappa0 = -std::log(rho_acf) / delta;
    double alpha0 = std::max(mx, 1e-4);
    double s20 = std::max(2.0 * kappa0 * vx * vx / alpha0, 1e-8);

    std::vector<Rep> reps{Rep::Log, Rep::Log, Rep::Log, Rep::Free, Rep::Log};
    std::vector<double> start{kappa0, alpha0, s20, rho0, d0};
    OptimResult best = maximize(obj, start, reps, opts);
    if (!std::isfinite(best.fmin)) throw NonConvergenceError("EW fit: no finite objective");

    FitResult fit;
    fit.kind = EstimatorKind::MLE;
    fit.param_names = {"kappa", "alpha", "sigma2", "rho", "delta_shift"};
    fit.theta = best.x;
    fit.objective = best.fmin;
    fit.converged = best.converged;
    fit.evaluations = best.evaluations;
    fit.delta = delta;
    if (opts.compute_se) {
        PerObsObjective per;
        per.n_terms = y.size() - 1;
        per.term = [&y, delta](std::size_t i, std::span<const double> th) {
            double kappa = th[0], alpha = th[1], s2 = th[2], rho_p = th[3], dshift = th[4];
            if (!(kappa > 0.0) || !(alpha > 0.0) || !(s2 > 0.0) || !(dshift > 0.0)) return kNegInf;
            double gap0 = y[i] - rho_p, gap1 = y[i + 1] - rho_p;
            if (!(gap0 > 0.0 && gap1 > 0.0)) return kNegInf;
            double x0 = 1.0 / gap0 - dshift, x1 = 1.0 / gap1 - dshift;
            if (!(x0 > 0.0 && x1 > 0.0)) return kNegInf;
            UpdModel cir = UpdModel::cir(kappa, alpha, std::sqrt(s2));
            TransitionDensitySpec spec = TransitionDensitySpec::auto_for(cir, delta);
            return log_transition_density(cir, x1, x0, spec) - 2.0 * std::log(gap1);
        };
        fit.se = sandwich_se(per, fit.theta);
    }
    return fit;
}

FitResult fit_skst_two_stage(std::span<const double> data, UpdFamily family, double delta,
                             const FitOptions& opts) {
    FitOptions stage1 = opts;
    stage1.compute_se = false;
    FitResult marg = fit_skst(data, stage1);
    SkstParams phi{marg.theta[0], marg.theta[1], marg.theta[2], marg.theta[3]};

    SkstEval eval(phi);
    std::vector<double> probs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        probs[i] = std::clamp(eval.cdf(data[i]), kProbGuard, 1.0 - kProbGuard);

    CopulaObjective obj(std::move(probs), family, delta);
    auto start = family_start(obj, family, delta);
    FitResult fit = finish_family_fit(obj, family, delta, opts, EstimatorKind::PPMLE, start);
    fit.phi = marg.theta;
    return fit;
}

}  // namespace

FitResult fit_parametric(std::span<const double> data, ParametricModel model, double delta,
                         const FitOptions& opts) {
    switch (model) {
        case ParametricModel::DO: return fit_do_model(data, delta, opts);
        case ParametricModel::EW: return fit_ew_model(data, delta, opts);
        case ParametricModel::OuSkstTwoStage:
            return fit_skst_two_stage(data, UpdFamily::NormalizedOU, delta, opts);
        case ParametricModel::CirSkstTwoStage:
            return fit_skst_two_stage(data, UpdFamily::NormalizedCIR, delta, opts);
    }
    throw ParamError("fit_parametric: unknown model");
}

Structure parametric_structure(ParametricModel model, std::span<const double> theta) {
    if (model == ParametricModel::DO) {
        UpdModel ou = UpdModel::ou(theta[0], theta[1], std::sqrt(theta[2]));
        auto t = std::make_shared<ExpTransform>(ou.domain());
        return make_structure(std::move(ou), std::move(t));
    }
    if (model == ParametricModel::EW) {
        UpdModel cir = UpdModel::cir(theta[0], theta[1], std::sqrt(theta[2]));
        UpdModel mirrored = UpdModel::mirrored(cir);
        auto t = std::make_shared<EwTransform>(theta[3], theta[4]);
        return make_structure(std::move(mirrored), std::move(t));
    }
    throw ParamError("parametric_structure: only DO and EW have closed structures");
}

// ---------------------------------------------------------------------------
// SMLE

SmleResult fit_smle(std::span<const double> data, UpdFamily family, double delta,
                    const SieveSpec& sieve, const FitOptions& opts) {
    require_varying(data, "fit_smle");
    BSplineBasis basis = sieve_basis_for_data(data, sieve);
    std::vector<double> c0 = initial_sieve_coeffs(data, basis);

    FitOptions warm = opts;
    warm.compute_se = false;
    warm.restarts = 1;
    FitResult pmle = fit_pmle(data, family, delta, warm);

    const int p = family_dim(family);
    const int k = basis.size();
    std::vector<double> y(data.begin(), data.end());
    const double n = static_cast<double>(y.size() - 1);

    auto obj = [&](const std::vector<double>& z) {
        std::vector<double> theta(z.begin(), z.begin() + p);
        for (double& t : theta) t = std::exp(t);
        std::vector<double> coeffs(z.begin() + p, z.end());
        try {
            SieveDensity dens(basis, coeffs, sieve.norm_grid);
            UpdModel model = family_build(family, theta);
            TransitionDensitySpec spec = TransitionDensitySpec::auto_for(model, delta);
            const StationaryLaw& law = model.stationary();
            double total = 0.0;
            double x_prev =
                law.quantile(std::clamp(dens.cdf(y[0]), kProbGuard, 1.0 - kProbGuard));
            for (std::size_t i = 1; i < y.size(); ++i) {
                double x = law.quantile(std::clamp(dens.cdf(y[i]), kProbGuard, 1.0 - kProbGuard));
                double t = log_transition_density(model, x, x_prev, spec) - law.log_pdf(x) +
                           dens.log_pdf(y[i]);
                if (!std::isfinite(t)) return std::numeric_limits<double>::infinity();
                total += t;
                x_prev = x;
            }
            return -total / n;
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::vector<double> z0;
    for (double t : pmle.theta) z0.push_back(std::log(t));
    z0.insert(z0.end(), c0.begin(), c0.end());

    MultiStartOptions ms = optimizer_options(opts);
    ms.restarts = std::min(ms.restarts, 2);  // the warm start is already good
    ms.nm.max_iter = std::max(opts.max_iterations, 4000);
    OptimResult best = minimize_multistart(obj, z0, ms);
    if (!std::isfinite(best.fmin)) throw NonConvergenceError("fit_smle: no finite objective");

    std::vector<double> theta(best.x.begin(), best.x.begin() + p);
    for (double& t : theta) t = std::exp(t);
    std::vector<double> coeffs(best.x.begin() + p, best.x.end());

    SmleResult out{FitResult{}, SieveDensity(basis, coeffs, sieve.norm_grid)};
    out.fit.kind = EstimatorKind::SMLE;
    out.fit.param_names = family_param_names(family);
    out.fit.theta = theta;
    out.fit.objective = -best.fmin;
    out.fit.converged = best.converged;
    out.fit.evaluations = best.evaluations;
    out.fit.delta = delta;
    return out;
}

// ---------------------------------------------------------------------------
// Sandwich standard errors

namespace {

std::vector<std::vector<double>> invert_spd(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12)
            throw SingularHessianError("sandwich: numerical Hessian is singular");
        std::swap(a[col], a[piv]);
        std::swap(inv[col], inv[piv]);
        double d = a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double fac = a[r][col];
            if (fac == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= fac * a[col][j];
                inv[r][j] -= fac * inv[col][j];
            }
        }
    }
    return inv;
}

}  // namespace

std::vector<double> sandwich_se(const PerObsObjective& obj, std::span<const double> theta_hat,
                                int nw_lags) {
    const std::size_t p = theta_hat.size();
    const std::size_t n = obj.n_terms;
    if (n < p + 2) throw DegenerateSampleError("sandwich: too few observations");

    std::vector<double> th(theta_hat.begin(), theta_hat.end());
    auto mean_obj = [&obj, n](const std::vector<double>& t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += obj.term(i, t);
        return acc / static_cast<double>(n);
    };
    auto hess = numeric_hessian(mean_obj, th, 1e-4);

    // per-observation scores by central differences
    std::vector<std::vector<double>> scores(n, std::vector<double>(p));
    std::vector<double> tp = th, tm = th;
    for (std::size_t j = 0; j < p; ++j) {
        double h = 1e-5 * std::max(1.0, std::abs(th[j]));
        tp[j] = th[j] + h;
        tm[j] = th[j] - h;
        for (std::size_t i = 0; i < n; ++i)
            scores[i][j] = (obj.term(i, tp) - obj.term(i, tm)) / (2.0 * h);
        tp[j] = th[j];
        tm[j] = th[j];
    }
    std::vector<double> mean_score(p, 0.0);
    for (const auto& s : scores)
        for (std::size_t j = 0; j < p; ++j) mean_score[j] += s[j] / static_cast<double>(n);

    int lags = nw_lags >= 0
                   ? nw_lags
                   : static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 2.0 / 9.0)));
    std::vector<std::vector<double>> lrv(p, std::vector<double>(p, 0.0));
    for (int lag = 0; lag <= lags; ++lag) {
        double w = (lag == 0) ? 1.0 : 1.0 - static_cast<double>(lag) / (lags + 1.0);
        for (std::size_t i = static_cast<std::size_t>(lag); i < n; ++i) {
            for (std::size_t a = 0; a < p; ++a) {
                for (std::size_t b = 0; b < p; ++b) {
                    double prod = (scores[i][a] - mean_score[a]) *
                                  (scores[i - lag][b] - mean_score[b]) / static_cast<double>(n);
                    lrv[a][b] += w * prod;
                    if (lag > 0) lrv[b][a] += w * prod;
                }
            }
        }
    }

    auto hinv = invert_spd(hess);
    std::vector<double> se(p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) acc += hinv[a][i] * lrv[i][j] * hinv[j][a];
        se[a] = std::sqrt(std::max(acc, 0.0) / static_cast<double>(n));
    }
    return se;
}

std::vector<double> delta_method_se(std::span<const double> se,
                                    std::span<const double> jacobian_diag) {
    if (se.size() != jacobian_diag.size())
        throw ParamError("delta_method_se: dimension mismatch");
    std::vector<double> out(se.size());
    for (std::size_t i = 0; i < se.size(); ++i) out[i] = std::abs(jacobian_diag[i]) * se[i];
    return out;
}

}  // namespace cdiff
