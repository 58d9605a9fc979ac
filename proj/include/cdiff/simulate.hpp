#ifndef CDIFF_SIMULATE_HPP
#define CDIFF_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include "cdiff/transform.hpp"
#include "cdiff/upd.hpp"

namespace cdiff {

enum class InitKind { StationaryDraw, Fixed };

/// Simulation request: n increments at spacing delta, reproducible from
/// (seed, stream). Parallel replications should differ in `stream` only.
struct PathConfig {
    int n = 100;
    double delta = 0.1;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    InitKind init = InitKind::StationaryDraw;
    double x0 = 0.0;
    int substeps = 1;
    int burn_in = -1;  // negative: default (0 for stationary draws, 1000 for fixed)
};

/// Exact OU sampling through its AR(1) representation; n+1 points.
std::vector<double> simulate_ou_exact(double kappa, double alpha, double sigma,
                                      const PathConfig& cfg);

/// Exact CIR sampling through the Poisson-gamma mixture of the noncentral
/// chi-square transition.
std::vector<double> simulate_cir_exact(double kappa, double alpha, double sigma,
                                       const PathConfig& cfg);

/// Euler-Maruyama fallback with `substeps` per observation interval;
/// reflects at a small interior buffer on half-line domains.
std::vector<double> simulate_euler(const UpdModel& m, const PathConfig& cfg);

/// Dispatches to the exact samplers when available.
std::vector<double> simulate_path(const UpdModel& m, const PathConfig& cfg);

/// Y = V(X) pointwise.
std::vector<double> simulate_transformed(const Structure& s, const PathConfig& cfg);

}  // namespace cdiff

#endif  // CDIFF_SIMULATE_HPP
