#ifndef CDIFF_UPD_HPP
#define CDIFF_UPD_HPP

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cdiff {

enum class UpdKind { OU, CIR, NLDCEV, ZeroDriftFlexible, UnitDiffusionPolynomial, Custom };

/// Open interval (lo, hi); infinities allowed.
struct Domain {
    double lo;
    double hi;
    bool contains(double x) const { return x > lo && x < hi; }
};

/// Drift/diffusion callables for user-defined models. Derivative hooks are
/// optional; missing ones fall back to central differences.
struct CustomDynamics {
    std::function<double(double)> drift;
    std::function<double(double)> sigma;
    std::function<double(double)> drift_deriv;
    std::function<double(double)> sigma_deriv;
    std::function<double(double)> sigma_second;
};

class StationaryLaw;

/// A parametric scalar diffusion dX = mu(X; theta) dt + sigma(X; theta) dW on
/// an open interval. Instances are immutable after construction and safe to
/// share across threads once the stationary law has been materialized.
class UpdModel {
public:
    static UpdModel ou(double kappa, double alpha, double sigma);
    /// dX = -kappa X dt + sqrt(2 kappa) dW; stationary law N(0,1) for any kappa.
    static UpdModel normalized_ou(double kappa);
    static UpdModel cir(double kappa, double alpha, double sigma);
    /// dX = kappa (alpha - X) dt + sqrt(2 kappa X) dW; stationary Gamma(alpha, 1).
    static UpdModel normalized_cir(double kappa, double alpha);
    /// Drift sum_{i=-k}^{l} a_i x^i, diffusion sigma x^beta on (0, inf).
    /// `alphas` lists a_{-k}, ..., a_l in increasing power order.
    static UpdModel nldcev(std::vector<double> alphas, int k, int l, double beta, double sigma);
    /// Zero drift, sigma(x) = exp(sum_{i<l} b_i x^i + b_l |x|^l) on the real line.
    static UpdModel zero_drift_flexible(std::vector<double> betas);
    /// Drift sum_{i=1}^{l} a_i x^i, unit diffusion on the real line.
    static UpdModel unit_diffusion_polynomial(std::vector<double> alphas);
    static UpdModel custom(CustomDynamics dyn, Domain domain, double x_star,
                           std::string label = "custom");
    /// The sign-flipped process -X (used to rewrite decreasing transforms as
    /// increasing ones).
    static UpdModel mirrored(const UpdModel& base);

    UpdKind kind() const { return kind_; }
    const std::vector<double>& theta() const { return theta_; }
    const Domain& domain() const { return domain_; }
    double x_star() const { return x_star_; }
    bool is_mirrored() const { return mirrored_; }
    const std::string& label() const { return label_; }
    int nldcev_k() const { return nldcev_k_; }
    int nldcev_l() const { return nldcev_l_; }

    double drift(double x) const;
    double sigma(double x) const;
    double sigma2(double x) const;
    double drift_deriv(double x) const;
    double sigma_deriv(double x) const;
    double sigma2_deriv(double x) const;
    double sigma2_second(double x) const;

    /// Throws DomainError/ParamError per the module contract.
    void check_point(double x) const;

    bool has_closed_stationary() const;
    bool has_closed_transition() const;

    /// Stationary law, computed on first use and cached. Materialize it
    /// before sharing the instance across threads.
    const StationaryLaw& stationary() const;

private:
    UpdModel() = default;

    UpdKind kind_ = UpdKind::Custom;
    std::vector<double> theta_;
    Domain domain_{0.0, 0.0};
    double x_star_ = 0.0;
    bool mirrored_ = false;
    int nldcev_k_ = 0, nldcev_l_ = 0;
    CustomDynamics dyn_;
    std::string label_;
    mutable std::shared_ptr<const StationaryLaw> stat_;

    double base_drift(double x) const;
    double base_sigma(double x) const;
    double base_drift_deriv(double x) const;
    double base_sigma_deriv(double x) const;
    double base_sigma_second(double x) const;
};

/// (mu_X(x; theta), sigma^2_X(x; theta)).
std::pair<double, double> eval_drift_diffusion(const UpdModel& m, double x);

/// Scale density s(x) = exp(-int_{x*}^{x} 2 mu / sigma^2) and scale measure
/// S(x) = int_{x*}^{x} s, both by adaptive quadrature.
std::pair<double, double> scale_density_and_measure(const UpdModel& m, double x);

/// Stationary density, cdf and quantile of the model.
double stationary_density(const UpdModel& m, double x);
double stationary_cdf(const UpdModel& m, double x);
double stationary_quantile(const UpdModel& m, double u);

/// Marginal law of the model under stationarity: evaluators plus the
/// normalizer xi(theta) with f sigma^2 s = xi pointwise.
class StationaryLaw {
public:
    static StationaryLaw compute(const UpdModel& m);

    double xi() const { return xi_; }
    double pdf(double x) const;
    double log_pdf(double x) const;
    double pdf_deriv(double x) const;
    double pdf_second(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    std::pair<double, double> support() const;

private:
    enum class Form { Normal, Gamma, Numeric };
    Form form_ = Form::Numeric;
    bool mirrored_ = false;
    double a_ = 0.0, b_ = 1.0;  // Normal: mean, sd; Gamma: shape, rate
    double xi_ = 1.0;
    std::shared_ptr<const UpdModel> model_;  // Numeric form only

    double numeric_log_unnorm(double x) const;
};

enum class TransitionMethod {
    ClosedFormGaussian,
    ClosedFormBessel,
    EulerSubstep,
    QuadratureChapmanKolmogorov
};

/// How to evaluate p_X(x | x0) over a sampling interval delta.
struct TransitionDensitySpec {
    TransitionMethod method = TransitionMethod::EulerSubstep;
    double delta = 1.0;
    int substeps = 1;

    /// Closed form for OU/CIR; otherwise sub-stepped Euler with the step
    /// count chosen so the per-step mean-reversion move stays small.
    static TransitionDensitySpec auto_for(const UpdModel& m, double delta);
};

double log_transition_density(const UpdModel& m, double x, double x0,
                              const TransitionDensitySpec& spec);
double transition_density(const UpdModel& m, double x, double x0,
                          const TransitionDensitySpec& spec);

/// One-step Gaussian (Euler) approximation of the transition density.
double log_euler_transition_density(const UpdModel& m, double x, double x0, double delta);
double euler_transition_density(const UpdModel& m, double x, double x0, double delta);

}  // namespace cdiff

#endif  // CDIFF_UPD_HPP
