#include "cdiff/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdiff/errors.hpp"
#include "cdiff/roots.hpp"
#include "cdiff/special.hpp"

namespace cdiff {

EmpiricalCdf::EmpiricalCdf(std::span<const double> data)
    : sorted_(data.begin(), data.end()) {
    if (sorted_.empty()) throw DegenerateSampleError("empirical cdf: empty sample");
    std::sort(sorted_.begin(), sorted_.end());
    eps_ = 1.0 / (2.0 * static_cast<double>(sorted_.size()));
}

double EmpiricalCdf::operator()(double y) const {
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), y);
    double p = static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    return std::clamp(p, eps_, 1.0 - eps_);
}

std::vector<double> EmpiricalCdf::pseudo_probs(std::span<const double> data) {
    const std::size_t n = data.size();
    if (n == 0) throw DegenerateSampleError("pseudo_probs: empty sample");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&data](std::size_t a, std::size_t b) { return data[a] < data[b]; });
    // count of Y_j <= Y_i shared across tied values
    std::vector<double> probs(n);
    const double eps = 1.0 / (2.0 * static_cast<double>(n));
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && data[order[j + 1]] == data[order[i]]) ++j;
        double p = static_cast<double>(j + 1) / static_cast<double>(n);
        p = std::clamp(p, eps, 1.0 - eps);
        for (std::size_t k = i; k <= j; ++k) probs[order[k]] = p;
        i = j + 1;
    }
    return probs;
}

KernelEstimate::KernelEstimate(std::vector<double> data, double h)
    : data_(std::move(data)), h_(h) {
    if (data_.empty()) throw DegenerateSampleError("kernel estimate: empty sample");
    if (!(h_ > 0.0)) throw BandwidthError("kernel estimate: bandwidth must be positive");
}

double KernelEstimate::cdf(double y) const {
    double acc = 0.0;
    for (double yi : data_) acc += norm_cdf((y - yi) / h_);
    return acc / static_cast<double>(data_.size());
}

double KernelEstimate::pdf(double y) const {
    double acc = 0.0;
    for (double yi : data_) acc += norm_pdf((y - yi) / h_);
    return acc / (static_cast<double>(data_.size()) * h_);
}

double KernelEstimate::pdf_deriv(double y, int order) const {
    if (order < 1 || order > 3) throw DomainError("kernel pdf_deriv: order must be 1, 2 or 3");
    // K^(i)(z) = (-1)^i He_i(z) phi(z) for the Gaussian kernel
    double acc = 0.0;
    for (double yi : data_) {
        double z = (y - yi) / h_;
        acc += hermite_he(order, z) * norm_pdf(z);
    }
    double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return sign * acc / (static_cast<double>(data_.size()) * std::pow(h_, order + 1));
}

double silverman_bandwidth(std::span<const double> data, double factor) {
    if (data.size() < 2) throw DegenerateSampleError("silverman bandwidth: need at least 2 points");
    double mean = std::accumulate(data.begin(), data.end(), 0.0) / data.size();
    double ss = 0.0;
    for (double y : data) ss += (y - mean) * (y - mean);
    double sd = std::sqrt(ss / (data.size() - 1.0));
    if (!(sd > 0.0)) throw DegenerateSampleError("silverman bandwidth: sample is constant");
    return factor * 1.06 * sd * std::pow(static_cast<double>(data.size()), -0.2);
}

std::pair<double, double> SkstMarginal::support() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
}

double KernelMarginal::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("kernel quantile: u must lie in (0,1)");
    auto [lo, hi] = std::minmax_element(est_.data().begin(), est_.data().end());
    double width = std::max(*hi - *lo, est_.bandwidth());
    auto g = [this, u](double y) { return est_.cdf(y) - u; };
    RootOptions opts;
    opts.f_tol = 1e-12;
    return find_root_expanding(g, 0.5 * (*lo + *hi), 0.5 * width,
                               *lo - 60.0 * width, *hi + 60.0 * width, opts);
}

std::pair<double, double> KernelMarginal::support() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
}

double StationaryMarginal::pdf_deriv(double y, int order) const {
    const StationaryLaw& law = model_.stationary();
    switch (order) {
        case 1: return law.pdf_deriv(y);
        case 2: return law.pdf_second(y);
        case 3: {
            double h = 1e-5 * std::max(1.0, std::abs(y));
            return (law.pdf_second(y + h) - law.pdf_second(y - h)) / (2.0 * h);
        }
        default:
            throw DomainError("stationary marginal pdf_deriv: order must be 1, 2 or 3");
    }
}

}  // namespace cdiff
