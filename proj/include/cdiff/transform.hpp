#ifndef CDIFF_TRANSFORM_HPP
#define CDIFF_TRANSFORM_HPP

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cdiff/marginals.hpp"
#include "cdiff/upd.hpp"

namespace cdiff {

/// Strictly increasing map V between the latent X-domain and the observed
/// Y-domain, exposed through its inverse U = V^{-1} and the derivatives of U.
class Transformation {
public:
    virtual ~Transformation() = default;

    virtual double u(double y) const = 0;
    virtual double v(double x) const = 0;
    virtual double u_prime(double y) const = 0;
    virtual double u_second(double y) const = 0;
    /// Third derivative; transforms without one throw DerivativeError.
    virtual double u_third(double y) const;
    virtual std::pair<double, double> y_domain() const = 0;
};

class IdentityTransform final : public Transformation {
public:
    explicit IdentityTransform(Domain d) : d_(d) {}
    double u(double y) const override { return y; }
    double v(double x) const override { return x; }
    double u_prime(double) const override { return 1.0; }
    double u_second(double) const override { return 0.0; }
    double u_third(double) const override { return 0.0; }
    std::pair<double, double> y_domain() const override { return {d_.lo, d_.hi}; }

private:
    Domain d_;
};

/// V(x) = a + b x with b > 0.
class AffineTransform final : public Transformation {
public:
    AffineTransform(double a, double b, Domain x_domain);
    double u(double y) const override { return (y - a_) / b_; }
    double v(double x) const override { return a_ + b_ * x; }
    double u_prime(double) const override { return 1.0 / b_; }
    double u_second(double) const override { return 0.0; }
    double u_third(double) const override { return 0.0; }
    std::pair<double, double> y_domain() const override;

private:
    double a_, b_;
    Domain d_;
};

/// V(x) = exp(x): the transformed-OU specification of the exponential
/// volatility model.
class ExpTransform final : public Transformation {
public:
    explicit ExpTransform(Domain x_domain) : d_(x_domain) {}
    double u(double y) const override { return std::log(y); }
    double v(double x) const override { return std::exp(x); }
    double u_prime(double y) const override { return 1.0 / y; }
    double u_second(double y) const override { return -1.0 / (y * y); }
    double u_third(double y) const override { return 2.0 / (y * y * y); }
    std::pair<double, double> y_domain() const override;

private:
    Domain d_;
};

/// V(x~) = 1/(delta - x~) + rho on the mirrored half-line x~ < 0. This is the
/// increasing rewrite of the decreasing map y = 1/(x + delta) + rho applied
/// to X; pair it with UpdModel::mirrored of the CIR process.
class EwTransform final : public Transformation {
public:
    EwTransform(double rho, double delta);
    double u(double y) const override { return delta_ - 1.0 / (y - rho_); }
    double v(double x) const override { return 1.0 / (delta_ - x) + rho_; }
    double u_prime(double y) const override;
    double u_second(double y) const override;
    double u_third(double y) const override;
    std::pair<double, double> y_domain() const override { return {rho_, rho_ + 1.0 / delta_}; }

private:
    double rho_, delta_;
};

/// U(y) = F_X^{-1}(F_Y(y); theta) built from a marginal law of Y and the
/// stationary law of the UPD; derivatives by the analytic chain rule on
/// (f_Y, f_Y', f_Y'') and (f_X, f_X', f_X'').
class MarginalInducedTransform final : public Transformation {
public:
    MarginalInducedTransform(std::shared_ptr<const MarginalDistribution> f_y, UpdModel model);
    double u(double y) const override;
    double v(double x) const override;
    double u_prime(double y) const override;
    double u_second(double y) const override;
    double u_third(double y) const override;
    std::pair<double, double> y_domain() const override { return f_y_->support(); }
    const MarginalDistribution& marginal() const { return *f_y_; }

private:
    std::shared_ptr<const MarginalDistribution> f_y_;
    UpdModel model_;
};

/// One-to-one reparameterization map of the X axis with enough derivatives
/// for the chain rules below.
struct SmoothMap {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
    std::function<double(double)> fsecond;
    std::function<double(double)> fthird;  // optional
    std::function<double(double)> finv;
};

/// U~(y) = map(U(y)); used to rewrite a structure under a change of the
/// latent coordinate.
class ComposedTransform final : public Transformation {
public:
    ComposedTransform(std::shared_ptr<const Transformation> inner, SmoothMap map);
    double u(double y) const override { return map_.f(inner_->u(y)); }
    double v(double x) const override { return inner_->v(map_.finv(x)); }
    double u_prime(double y) const override;
    double u_second(double y) const override;
    double u_third(double y) const override;
    std::pair<double, double> y_domain() const override { return inner_->y_domain(); }

private:
    std::shared_ptr<const Transformation> inner_;
    SmoothMap map_;
};

/// A full copula-diffusion model for the observed process: UPD parameters
/// plus the transformation.
struct Structure {
    UpdModel model;
    std::shared_ptr<const Transformation> transform;
};

Structure make_structure(UpdModel model, std::shared_ptr<const Transformation> transform);

/// Marginal-induced structure: Y has marginal f_y and copula dynamics of the
/// model.
Structure make_marginal_structure(UpdModel model, std::shared_ptr<const MarginalDistribution> f_y);

/// (mu_Y, sigma_Y^2) at y by Ito's lemma through the inverse transform.
std::pair<double, double> transformed_drift_diffusion(const Structure& s, double y);

double transformed_transition_density(const Structure& s, double y, double y0,
                                      const TransitionDensitySpec& spec);
double log_transformed_transition_density(const Structure& s, double y, double y0,
                                          const TransitionDensitySpec& spec);
double transformed_stationary_density(const Structure& s, double y);

/// Copula density implied by the discretely sampled UPD:
/// c(u0, u) = p_X(Q(u) | Q(u0)) / f_X(Q(u)), Q the stationary quantile.
double copula_density(const UpdModel& m, double u0, double u, double delta);
double copula_density(const UpdModel& m, double u0, double u, const TransitionDensitySpec& spec);

/// sup over the grid of |mu_1 - mu_2| + |sigma_1 - sigma_2|; values near zero
/// certify observational equivalence on the grid.
double equivalence_check(const Structure& s1, const Structure& s2, std::span<const double> grid);

/// Grid of n points between the 1st and 99th percentile of the stationary
/// law of Y implied by the structure.
std::vector<double> default_equivalence_grid(const Structure& s, int n = 41);

}  // namespace cdiff

#endif  // CDIFF_TRANSFORM_HPP
