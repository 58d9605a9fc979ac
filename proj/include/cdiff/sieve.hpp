#ifndef CDIFF_SIEVE_HPP
#define CDIFF_SIEVE_HPP

#include <memory>
#include <span>
#include <vector>

#include "cdiff/marginals.hpp"

namespace cdiff {

/// Finite-dimensional sieve space for the marginal density of Y: log-density
/// spanned by a cubic B-spline basis on the padded data range.
struct SieveSpec {
    int knots = 8;            // number of basis functions
    double padding = 0.05;    // support padding as a fraction of the data range
    int norm_grid = 2001;     // normalization / cdf table resolution
};

/// Clamped cubic B-spline basis on [lo, hi].
class BSplineBasis {
public:
    BSplineBasis(double lo, double hi, int n_basis);

    int size() const { return n_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    /// Value or derivative (order <= 3) of basis function k at y.
    double eval(int k, double y, int order = 0) const;
    /// All basis values at y accumulated against coefficients.
    double combine(std::span<const double> coeffs, double y, int order = 0) const;

private:
    double lo_, hi_;
    int n_;
    std::vector<double> knots_;

    double bspline(int k, int degree, double y) const;
    double bspline_deriv(int k, int degree, double y, int order) const;
};

/// Normalized density exp(sum c_k B_k(y)) / Z on the basis support, with a
/// tabulated cdf for fast inversion.
class SieveDensity {
public:
    SieveDensity(BSplineBasis basis, std::vector<double> coeffs, int norm_grid = 2001);

    double pdf(double y) const;
    double log_pdf(double y) const;
    double pdf_deriv(double y, int order) const;
    double cdf(double y) const;
    double quantile(double u) const;
    std::pair<double, double> support() const { return {basis_.lo(), basis_.hi()}; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    const BSplineBasis& basis() const { return basis_; }

private:
    BSplineBasis basis_;
    std::vector<double> coeffs_;
    double log_z_ = 0.0;
    std::vector<double> grid_;
    std::vector<double> cdf_table_;
};

class SieveMarginal final : public MarginalDistribution {
public:
    explicit SieveMarginal(SieveDensity d) : d_(std::move(d)) {}
    double cdf(double y) const override { return d_.cdf(y); }
    double pdf(double y) const override { return d_.pdf(y); }
    double pdf_deriv(double y, int order) const override { return d_.pdf_deriv(y, order); }
    double quantile(double u) const override { return d_.quantile(u); }
    std::pair<double, double> support() const override { return d_.support(); }
    const SieveDensity& density() const { return d_; }

private:
    SieveDensity d_;
};

/// Basis over the padded data range per the sieve spec.
BSplineBasis sieve_basis_for_data(std::span<const double> data, const SieveSpec& spec);

/// Least-squares fit of the log kernel density estimate; a starting point
/// for sieve coefficient optimization.
std::vector<double> initial_sieve_coeffs(std::span<const double> data, const BSplineBasis& basis);

}  // namespace cdiff

#endif  // CDIFF_SIEVE_HPP
