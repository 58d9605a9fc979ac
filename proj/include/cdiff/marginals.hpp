#ifndef CDIFF_MARGINALS_HPP
#define CDIFF_MARGINALS_HPP

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cdiff/skst.hpp"
#include "cdiff/upd.hpp"

namespace cdiff {

/// Empirical cdf (1/(n+1)) sum 1{Y_i <= y}, clamped away from 0 and 1 so the
/// quantile transform downstream stays finite.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::span<const double> data);

    double operator()(double y) const;
    double clamp_lo() const { return eps_; }
    double clamp_hi() const { return 1.0 - eps_; }
    std::size_t size() const { return sorted_.size(); }

    /// Clamped probability of each input point, rank-based: strictly
    /// increasing transformations of the data leave the result bit-identical.
    static std::vector<double> pseudo_probs(std::span<const double> data);

private:
    std::vector<double> sorted_;
    double eps_;
};

/// Gaussian-kernel estimate of the cdf, density and density derivatives.
class KernelEstimate {
public:
    KernelEstimate(std::vector<double> data, double h);

    double cdf(double y) const;
    double pdf(double y) const;
    /// d^order/dy^order of the density estimate, order in {1, 2, 3}.
    double pdf_deriv(double y, int order) const;

    double bandwidth() const { return h_; }
    const std::vector<double>& data() const { return data_; }
    /// Second moment of the Gaussian kernel.
    static double kappa2() { return 1.0; }
    /// int K^2 and int (K')^2 for the Gaussian kernel.
    static double kernel_l2() { return 0.28209479177387814; }        // 1/(2 sqrt(pi))
    static double kernel_deriv_l2() { return 0.14104739588693907; }  // 1/(4 sqrt(pi))

private:
    std::vector<double> data_;
    double h_;
};

/// h = factor * 1.06 * sd(data) * n^{-1/5}.
double silverman_bandwidth(std::span<const double> data, double factor = 1.0);

/// Marginal law of the observed process: everything a marginal-induced
/// transformation needs.
class MarginalDistribution {
public:
    virtual ~MarginalDistribution() = default;
    virtual double cdf(double y) const = 0;
    virtual double pdf(double y) const = 0;
    virtual double pdf_deriv(double y, int order) const = 0;
    virtual double quantile(double u) const = 0;
    virtual std::pair<double, double> support() const = 0;
};

class SkstMarginal final : public MarginalDistribution {
public:
    explicit SkstMarginal(const SkstParams& p) : eval_(p) {}
    double cdf(double y) const override { return eval_.cdf(y); }
    double pdf(double y) const override { return eval_.pdf(y); }
    double pdf_deriv(double y, int order) const override { return eval_.pdf_deriv(y, order); }
    double quantile(double u) const override { return eval_.quantile(u); }
    std::pair<double, double> support() const override;
    const SkstParams& params() const { return eval_.params(); }

private:
    SkstEval eval_;
};

class KernelMarginal final : public MarginalDistribution {
public:
    explicit KernelMarginal(KernelEstimate est) : est_(std::move(est)) {}
    double cdf(double y) const override { return est_.cdf(y); }
    double pdf(double y) const override { return est_.pdf(y); }
    double pdf_deriv(double y, int order) const override { return est_.pdf_deriv(y, order); }
    double quantile(double u) const override;
    std::pair<double, double> support() const override;
    const KernelEstimate& estimate() const { return est_; }

private:
    KernelEstimate est_;
};

/// Marginal equal to the stationary law of a UPD (F_Y = F_X gives the
/// identity transformation).
class StationaryMarginal final : public MarginalDistribution {
public:
    explicit StationaryMarginal(const UpdModel& m) : model_(m) {}
    double cdf(double y) const override { return model_.stationary().cdf(y); }
    double pdf(double y) const override { return model_.stationary().pdf(y); }
    double pdf_deriv(double y, int order) const override;
    double quantile(double u) const override { return model_.stationary().quantile(u); }
    std::pair<double, double> support() const override { return model_.stationary().support(); }

private:
    UpdModel model_;
};

}  // namespace cdiff

#endif  // CDIFF_MARGINALS_HPP
