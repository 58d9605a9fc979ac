#ifndef CDIFF_ESTIMATE_HPP
#define CDIFF_ESTIMATE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdiff/sieve.hpp"
#include "cdiff/skst.hpp"
#include "cdiff/transform.hpp"
#include "cdiff/upd.hpp"

namespace cdiff {

/// Identified (normalized) UPD families the semiparametric estimators accept.
enum class UpdFamily { NormalizedOU, NormalizedCIR };

enum class CdfVariant { Empirical, Kernel };

enum class EstimatorKind { MLE, PPMLE, PMLE, SMLE, EulerPMLE };

enum class ParametricModel { DO, EW, OuSkstTwoStage, CirSkstTwoStage };

int family_dim(UpdFamily f);
std::vector<std::string> family_param_names(UpdFamily f);
UpdModel family_build(UpdFamily f, std::span<const double> theta);

struct FitOptions {
    enum class Optimizer { NelderMead, QuasiNewtonNumericGrad };
    Optimizer optimizer = Optimizer::NelderMead;
    int restarts = 5;
    double tolerance = 1e-10;
    int max_iterations = 2000;
    double bandwidth_factor = 1.0;
    SieveSpec sieve;
    std::uint64_t seed = 922337;  // restart jitter
    bool compute_se = true;
};

struct FitResult {
    EstimatorKind kind = EstimatorKind::PMLE;
    std::vector<std::string> param_names;
    std::vector<double> theta;  // natural parameters
    std::vector<double> se;     // sandwich standard errors (empty if skipped)
    double objective = 0.0;     // average log-likelihood at the optimum
    bool converged = false;
    long evaluations = 0;
    double delta = 0.0;
    std::vector<double> phi;  // stage-one SKST parameters for two-stage fits
    std::string message;
};

/// Exact average log-likelihood of the observed series for a known
/// transformation: (1/n) sum { log p_X(U(y_i) | U(y_{i-1})) + log U'(y_i) }.
/// Throws NonFiniteLikelihoodError naming the first offending index.
double loglik_full(std::span<const double> data, const UpdModel& model,
                   const Transformation& transform, double delta);

/// Average pseudo log-likelihood at theta with the marginal replaced by the
/// empirical (or kernel-smoothed) cdf.
double pmle_objective(std::span<const double> data, UpdFamily family, double delta,
                      std::span<const double> theta, CdfVariant variant,
                      double bandwidth_factor = 1.0);

/// Pseudo-observations per the chosen cdf variant (clamped empirical ranks or
/// the kernel-smoothed cdf at the data points).
std::vector<double> variant_probs(std::span<const double> data, CdfVariant variant,
                                  double bandwidth_factor = 1.0);

/// Shared engine: probabilities are fixed, theta moves. Used by the PMLE
/// (empirical/kernel probs), the parametric two-stage PMLE (parametric probs)
/// and the Euler variant.
class CopulaObjective {
public:
    CopulaObjective(std::vector<double> probs, UpdFamily family, double delta,
                    bool euler_density = false);

    /// Average pseudo log-likelihood; -inf on invalid theta.
    double value(std::span<const double> theta) const;
    /// One summand (index i in [0, n_terms)); used by the sandwich.
    double term(std::size_t i, std::span<const double> theta) const;
    std::size_t n_terms() const { return probs_.size() - 1; }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> probs_;
    UpdFamily family_;
    double delta_;
    bool euler_;
    std::vector<double> z_;  // NormalizedOU: cached standard-normal scores
    double sum_sq_lead_ = 0.0, sum_sq_lag_ = 0.0, sum_cross_ = 0.0;
    std::vector<std::size_t> rank_order_;  // NormalizedCIR: probs sorted ascending

    std::vector<double> quantiles(double alpha) const;
    double cir_value(std::span<const double> theta, std::optional<std::size_t> only) const;
};

FitResult fit_pmle(std::span<const double> data, UpdFamily family, double delta,
                   const FitOptions& opts = {}, CdfVariant variant = CdfVariant::Empirical);

FitResult fit_euler_pmle(std::span<const double> data, UpdFamily family, double delta,
                         const FitOptions& opts = {}, CdfVariant variant = CdfVariant::Empirical);

struct SmleResult {
    FitResult fit;
    SieveDensity density;
};

/// Joint sieve maximum likelihood over (theta, sieve coefficients).
SmleResult fit_smle(std::span<const double> data, UpdFamily family, double delta,
                    const SieveSpec& sieve, const FitOptions& opts = {});

/// SKST maximum likelihood on the marginal (observations treated as iid).
FitResult fit_skst(std::span<const double> data, const FitOptions& opts = {});

/// Fully parametric fits: DO/EW by exact MLE, the *-SKST models by the
/// two-stage parametric PMLE.
FitResult fit_parametric(std::span<const double> data, ParametricModel model, double delta,
                         const FitOptions& opts = {});

/// Structure implied by a parametric fit (for simulation and LR bootstrap).
Structure parametric_structure(ParametricModel model, std::span<const double> theta);
inline Structure parametric_structure(ParametricModel model, std::initializer_list<double> theta) {
    return parametric_structure(model, std::span<const double>(theta.begin(), theta.size()));
}

/// Per-observation decomposition of an average objective.
struct PerObsObjective {
    std::function<double(std::size_t, std::span<const double>)> term;
    std::size_t n_terms = 0;
};

/// Newey-West sandwich standard errors of an extremum estimator: numerical
/// Hessian and autocorrelation-robust score covariance. `nw_lags < 0` picks
/// floor(4 (n/100)^{2/9}).
std::vector<double> sandwich_se(const PerObsObjective& obj, std::span<const double> theta_hat,
                                int nw_lags = -1);

/// Delta method for elementwise reparameterizations: se_out = |dg/dx| * se_in.
std::vector<double> delta_method_se(std::span<const double> se,
                                    std::span<const double> jacobian_diag);

}  // namespace cdiff

#endif  // CDIFF_ESTIMATE_HPP
