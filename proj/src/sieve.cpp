#include "cdiff/sieve.hpp"

#include <algorithm>
#include <cmath>

#include "cdiff/errors.hpp"

namespace cdiff {

BSplineBasis::BSplineBasis(double lo, double hi, int n_basis)
    : lo_(lo), hi_(hi), n_(n_basis) {
    if (!(hi > lo)) throw ParamError("bspline basis: empty support");
    if (n_basis < 4) throw ParamError("bspline basis: need at least 4 basis functions");
    // clamped cubic knot vector: degree+1 copies at each end
    const int n_interior = n_ - 3;
    double step = (hi_ - lo_) / (n_interior + 1);
    for (int i = 0; i < 4; ++i) knots_.push_back(lo_);
    for (int i = 1; i <= n_interior; ++i) knots_.push_back(lo_ + i * step);
    for (int i = 0; i < 4; ++i) knots_.push_back(hi_);
}

double BSplineBasis::bspline(int k, int degree, double y) const {
    if (degree == 0) {
        // half-open cells, closed at the right end of the support
        bool inside = (y >= knots_[k] && y < knots_[k + 1]) ||
                      (y == hi_ && knots_[k] < hi_ && knots_[k + 1] == hi_);
        return inside ? 1.0 : 0.0;
    }
    double left = 0.0, right = 0.0;
    double dl = knots_[k + degree] - knots_[k];
    if (dl > 0.0) left = (y - knots_[k]) / dl * bspline(k, degree - 1, y);
    double dr = knots_[k + degree + 1] - knots_[k + 1];
    if (dr > 0.0) right = (knots_[k + degree + 1] - y) / dr * bspline(k + 1, degree - 1, y);
    return left + right;
}

double BSplineBasis::bspline_deriv(int k, int degree, double y, int order) const {
    if (order == 0) return bspline(k, degree, y);
    if (degree == 0) return 0.0;
    double left = 0.0, right = 0.0;
    double dl = knots_[k + degree] - knots_[k];
    if (dl > 0.0) left = bspline_deriv(k, degree - 1, y, order - 1) / dl;
    double dr = knots_[k + degree + 1] - knots_[k + 1];
    if (dr > 0.0) right = bspline_deriv(k + 1, degree - 1, y, order - 1) / dr;
    return degree * (left - right);
}

double BSplineBasis::eval(int k, double y, int order) const {
    if (k < 0 || k >= n_) throw DomainError("bspline basis: index out of range");
    if (y < lo_ || y > hi_) return 0.0;
    return order == 0 ? bspline(k, 3, y) : bspline_deriv(k, 3, y, order);
}

double BSplineBasis::combine(std::span<const double> coeffs, double y, int order) const {
    double acc = 0.0;
    for (int k = 0; k < n_; ++k) {
        if (coeffs[k] != 0.0) acc += coeffs[k] * eval(k, y, order);
    }
    return acc;
}

SieveDensity::SieveDensity(BSplineBasis basis, std::vector<double> coeffs, int norm_grid)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (static_cast<int>(coeffs_.size()) != basis_.size())
        throw ParamError("sieve density: coefficient count does not match the basis");
    // shift invariance: center the coefficients, the normalizer absorbs it
    double mean = 0.0;
    for (double c : coeffs_) mean += c;
    mean /= coeffs_.size();
    for (double& c : coeffs_) c -= mean;

    int g = std::max(201, norm_grid | 1);  // odd point count for Simpson weights
    grid_.resize(g);
    std::vector<double> raw(g);
    double step = (basis_.hi() - basis_.lo()) / (g - 1);
    for (int i = 0; i < g; ++i) {
        grid_[i] = basis_.lo() + i * step;
        raw[i] = std::exp(basis_.combine(coeffs_, grid_[i]));
    }
    // Simpson prefix integrals over consecutive point pairs
    cdf_table_.assign(g, 0.0);
    for (int i = 1; i < g; ++i) {
        double mid = std::exp(basis_.combine(coeffs_, 0.5 * (grid_[i - 1] + grid_[i])));
        cdf_table_[i] = cdf_table_[i - 1] + step / 6.0 * (raw[i - 1] + 4.0 * mid + raw[i]);
    }
    double z = cdf_table_.back();
    if (!(z > 0.0) || !std::isfinite(z)) throw ParamError("sieve density: normalizer not finite");
    log_z_ = std::log(z);
    for (double& v : cdf_table_) v /= z;
}

double SieveDensity::log_pdf(double y) const {
    if (y < basis_.lo() || y > basis_.hi()) return -std::numeric_limits<double>::infinity();
    return basis_.combine(coeffs_, y) - log_z_;
}

double SieveDensity::pdf(double y) const { return std::exp(log_pdf(y)); }

double SieveDensity::pdf_deriv(double y, int order) const {
    if (y < basis_.lo() || y > basis_.hi()) return 0.0;
    double l1 = basis_.combine(coeffs_, y, 1);
    if (order == 1) return pdf(y) * l1;
    double l2 = basis_.combine(coeffs_, y, 2);
    if (order == 2) return pdf(y) * (l1 * l1 + l2);
    double l3 = basis_.combine(coeffs_, y, 3);
    if (order == 3) return pdf(y) * (l1 * l1 * l1 + 3.0 * l1 * l2 + l3);
    throw DomainError("sieve pdf_deriv: order must be 1, 2 or 3");
}

double SieveDensity::cdf(double y) const {
    if (y <= basis_.lo()) return 0.0;
    if (y >= basis_.hi()) return 1.0;
    auto it = std::upper_bound(grid_.begin(), grid_.end(), y);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    double t = (y - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
    return cdf_table_[i - 1] + t * (cdf_table_[i] - cdf_table_[i - 1]);
}

double SieveDensity::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("sieve quantile: u must lie in (0,1)");
    auto it = std::lower_bound(cdf_table_.begin(), cdf_table_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf_table_.begin());
    if (i == 0) return grid_.front();
    double span = cdf_table_[i] - cdf_table_[i - 1];
    double t = span > 0.0 ? (u - cdf_table_[i - 1]) / span : 0.5;
    return grid_[i - 1] + t * (grid_[i] - grid_[i - 1]);
}

BSplineBasis sieve_basis_for_data(std::span<const double> data, const SieveSpec& spec) {
    if (data.empty()) throw DegenerateSampleError("sieve basis: empty sample");
    auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
    double range = *hi_it - *lo_it;
    if (!(range > 0.0)) throw DegenerateSampleError("sieve basis: constant sample");
    double pad = spec.padding * range;
    return BSplineBasis(*lo_it - pad, *hi_it + pad, spec.knots);
}

std::vector<double> initial_sieve_coeffs(std::span<const double> data, const BSplineBasis& basis) {
    const int n = basis.size();
    KernelEstimate kde(std::vector<double>(data.begin(), data.end()),
                       silverman_bandwidth(data));
    // collocation points spread over the support
    const int m = 4 * n;
    std::vector<double> ys(m), target(m);
    for (int i = 0; i < m; ++i) {
        ys[i] = basis.lo() + (basis.hi() - basis.lo()) * (i + 0.5) / m;
        target[i] = std::log(std::max(kde.pdf(ys[i]), 1e-12));
    }
    // normal equations of the least-squares basis fit
    std::vector<std::vector<double>> ata(n, std::vector<double>(n, 0.0));
    std::vector<double> atb(n, 0.0);
    for (int i = 0; i < m; ++i) {
        std::vector<double> row(n);
        for (int k = 0; k < n; ++k) row[k] = basis.eval(k, ys[i]);
        for (int k = 0; k < n; ++k) {
            if (row[k] == 0.0) continue;
            atb[k] += row[k] * target[i];
            for (int j = 0; j < n; ++j) ata[k][j] += row[k] * row[j];
        }
    }
    for (int k = 0; k < n; ++k) ata[k][k] += 1e-8;  // ridge for near-empty cells
    // Gaussian elimination with partial pivoting
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(ata[r][col]) > std::abs(ata[piv][col])) piv = r;
        std::swap(ata[col], ata[piv]);
        std::swap(atb[col], atb[piv]);
        double d = ata[col][col];
        for (int r = col + 1; r < n; ++r) {
            double fac = ata[r][col] / d;
            if (fac == 0.0) continue;
            for (int j = col; j < n; ++j) ata[r][j] -= fac * ata[col][j];
            atb[r] -= fac * atb[col];
        }
    }
    std::vector<double> coeffs(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = atb[r];
        for (int j = r + 1; j < n; ++j) acc -= ata[r][j] * coeffs[j];
        coeffs[r] = acc / ata[r][r];
    }
    return coeffs;
}

}  // namespace cdiff
