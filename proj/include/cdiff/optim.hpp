#ifndef CDIFF_OPTIM_HPP
#define CDIFF_OPTIM_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace cdiff {

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

struct OptimResult {
    std::vector<double> x;
    double fmin = 0.0;
    long evaluations = 0;
    int iterations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    double f_tol = 1e-10;
    double x_tol = 1e-9;
    int max_iter = 2000;
    double initial_step = 0.25;
};

/// Downhill simplex minimization. Non-finite objective values are treated as
/// rejected steps (+inf), so objectives may use an infinite sentinel freely.
OptimResult nelder_mead(const ObjectiveFn& f, const std::vector<double>& x0,
                        const NelderMeadOptions& opts = {});

struct BfgsOptions {
    double grad_tol = 1e-7;
    double f_tol = 1e-12;
    int max_iter = 200;
    double fd_step = 1e-6;
};

/// Quasi-Newton polish with central-difference gradients and Armijo
/// backtracking. Intended to refine a Nelder-Mead solution.
OptimResult bfgs_numeric(const ObjectiveFn& f, const std::vector<double>& x0,
                         const BfgsOptions& opts = {});

struct MultiStartOptions {
    int restarts = 5;
    double jitter = 0.3;
    std::uint64_t seed = 20200815;
    NelderMeadOptions nm;
    bool polish = true;
    BfgsOptions bfgs;
};

/// Nelder-Mead from x0 plus (restarts - 1) jittered starts, best result
/// polished by the quasi-Newton pass.
OptimResult minimize_multistart(const ObjectiveFn& f, const std::vector<double>& x0,
                                const MultiStartOptions& opts = {});

/// Central-difference gradient of f at x.
std::vector<double> numeric_gradient(const ObjectiveFn& f, const std::vector<double>& x,
                                     double step = 1e-6);

/// Central-difference Hessian of f at x (symmetrized).
std::vector<std::vector<double>> numeric_hessian(const ObjectiveFn& f,
                                                 const std::vector<double>& x,
                                                 double step = 1e-4);

}  // namespace cdiff

#endif  // CDIFF_OPTIM_HPP
