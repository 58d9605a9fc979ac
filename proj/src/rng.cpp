#include "cdiff/rng.hpp"

#include <cmath>

#include "cdiff/errors.hpp"
#include "cdiff/special.hpp"

namespace cdiff {

namespace {

constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kPhiloxW = 0x9E3779B97F4A7C15ULL;

inline void mulwide(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace

void Philox::block(std::uint64_t& out0, std::uint64_t& out1) {
    std::uint64_t x0 = ctr_hi_, x1 = ctr_lo_, k = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi, lo;
        mulwide(x0, kPhiloxM, hi, lo);
        x0 = hi ^ k ^ x1;
        x1 = lo;
        k += kPhiloxW;
    }
    out0 = x0;
    out1 = x1;
    ++ctr_lo_;  // stays inside this stream's block (2^64 draws per stream)
}

std::uint64_t Philox::next_u64() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    std::uint64_t a, b;
    block(a, b);
    spare_ = b;
    have_spare_ = true;
    return a;
}

double Philox::uniform() {
    // 53 random bits, offset by half a lattice step: result lies in (0,1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return norm_quantile(gen_.uniform()); }

double RngStream::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw ParamError("gamma draw: shape, scale must be > 0");
    if (shape < 1.0) {
        // boost: G(a) = G(a+1) * U^{1/a}
        double u = uniform();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = uniform();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
}

long RngStream::poisson(double mean) {
    if (mean < 0.0) throw ParamError("poisson draw: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
        // inversion by multiplication
        double limit = std::exp(-mean);
        double prod = uniform();
        long k = 0;
        while (prod > limit) {
            prod *= uniform();
            ++k;
        }
        return k;
    }
    // Hormann's PTRS transformed rejection
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = uniform() - 0.5;
        double v = uniform();
        double us = 0.5 - std::abs(u);
        long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= v_r) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
        if (lhs <= rhs) return k;
    }
}

}  // namespace cdiff
