#include "cdiff/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cdiff/rng.hpp"

namespace cdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double guarded(const ObjectiveFn& f, const std::vector<double>& x, long& evals) {
    ++evals;
    double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

}  // namespace

OptimResult nelder_mead(const ObjectiveFn& f, const std::vector<double>& x0,
                        const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    OptimResult res;
    if (n == 0) return res;

    // adaptive coefficients (Gao & Han)
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / static_cast<double>(n);
    const double gamma = 0.75 - 0.5 / static_cast<double>(n);
    const double delta = 1.0 - 1.0 / static_cast<double>(n);

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        double step = opts.initial_step * std::max(1.0, std::abs(x0[i]));
        simplex[i + 1][i] += step;
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = guarded(f, simplex[i], res.evaluations);

    std::vector<std::size_t> order(n + 1);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        res.iterations = iter + 1;
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });

        double fbest = fv[order[0]], fworst = fv[order[n]];
        double spread = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            spread = std::max(spread, std::abs(simplex[order[0]][i] - simplex[order[n]][i]));
        if ((std::isfinite(fworst) && fworst - fbest < opts.f_tol && spread < opts.x_tol) ||
            (iter > 20 && !std::isfinite(fbest))) {
            res.converged = std::isfinite(fbest);
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[i]][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto point = [&](double coef) {
            std::vector<double> p(n);
            const auto& worst = simplex[order[n]];
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (centroid[j] - worst[j]);
            return p;
        };

        std::vector<double> xr = point(alpha);
        double fr = guarded(f, xr, res.evaluations);
        if (fr < fv[order[0]]) {
            std::vector<double> xe = point(alpha * beta);
            double fe = guarded(f, xe, res.evaluations);
            if (fe < fr) { simplex[order[n]] = std::move(xe); fv[order[n]] = fe; }
            else { simplex[order[n]] = std::move(xr); fv[order[n]] = fr; }
            continue;
        }
        if (fr < fv[order[n - 1]]) {
            simplex[order[n]] = std::move(xr);
            fv[order[n]] = fr;
            continue;
        }
        // contraction
        std::vector<double> xc;
        double fc;
        if (fr < fv[order[n]]) {
            xc = point(alpha * gamma);
            fc = guarded(f, xc, res.evaluations);
            if (fc <= fr) { simplex[order[n]] = std::move(xc); fv[order[n]] = fc; continue; }
        } else {
            xc = point(-gamma);
            fc = guarded(f, xc, res.evaluations);
            if (fc < fv[order[n]]) { simplex[order[n]] = std::move(xc); fv[order[n]] = fc; continue; }
        }
        // shrink toward the best vertex
        for (std::size_t i = 1; i <= n; ++i) {
            auto& v = simplex[order[i]];
            const auto& b = simplex[order[0]];
            for (std::size_t j = 0; j < n; ++j) v[j] = b[j] + delta * (v[j] - b[j]);
            fv[order[i]] = guarded(f, v, res.evaluations);
        }
    }

    std::size_t best = static_cast<std::size_t>(
        std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = simplex[best];
    res.fmin = fv[best];
    return res;
}

std::vector<double> numeric_gradient(const ObjectiveFn& f, const std::vector<double>& x,
                                     double step) {
    std::vector<double> g(x.size());
    std::vector<double> p = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = step * std::max(1.0, std::abs(x[i]));
        p[i] = x[i] + h;
        double fp = f(p);
        p[i] = x[i] - h;
        double fm = f(p);
        p[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

std::vector<std::vector<double>> numeric_hessian(const ObjectiveFn& f,
                                                 const std::vector<double>& x, double step) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
    std::vector<double> p = x;
    const double f0 = f(x);
    std::vector<double> hs(n);
    for (std::size_t i = 0; i < n; ++i) hs[i] = step * std::max(1.0, std::abs(x[i]));
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = x[i] + hs[i];
        double fp = f(p);
        p[i] = x[i] - hs[i];
        double fm = f(p);
        p[i] = x[i];
        h[i][i] = (fp - 2.0 * f0 + fm) / (hs[i] * hs[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            p[i] = x[i] + hs[i]; p[j] = x[j] + hs[j];
            double fpp = f(p);
            p[j] = x[j] - hs[j];
            double fpm = f(p);
            p[i] = x[i] - hs[i]; p[j] = x[j] + hs[j];
            double fmp = f(p);
            p[j] = x[j] - hs[j];
            double fmm = f(p);
            p[i] = x[i]; p[j] = x[j];
            h[i][j] = h[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * hs[i] * hs[j]);
        }
    }
    return h;
}

OptimResult bfgs_numeric(const ObjectiveFn& f, const std::vector<double>& x0,
                         const BfgsOptions& opts) {
    const std::size_t n = x0.size();
    OptimResult res;
    res.x = x0;
    res.fmin = f(x0);
    ++res.evaluations;
    if (!std::isfinite(res.fmin)) return res;

    // inverse-Hessian approximation, started at identity
    std::vector<std::vector<double>> hinv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) hinv[i][i] = 1.0;

    std::vector<double> g = numeric_gradient(f, res.x, opts.fd_step);
    res.evaluations += static_cast<long>(2 * n);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        res.iterations = iter + 1;
        double gnorm = 0.0;
        for (double gi : g) gnorm = std::max(gnorm, std::abs(gi));
        if (gnorm < opts.grad_tol) { res.converged = true; break; }

        std::vector<double> dir(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) dir[i] -= hinv[i][j] * g[j];
        double slope = std::inner_product(dir.begin(), dir.end(), g.begin(), 0.0);
        if (!(slope < 0.0)) {  // reset to steepest descent
            for (std::size_t i = 0; i < n; ++i) {
                std::fill(hinv[i].begin(), hinv[i].end(), 0.0);
                hinv[i][i] = 1.0;
                dir[i] = -g[i];
            }
            slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
        }

        double t = 1.0;
        std::vector<double> xn(n);
        double fn = kInf;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + t * dir[i];
            fn = f(xn);
            ++res.evaluations;
            if (std::isfinite(fn) && fn <= res.fmin + 1e-4 * t * slope) { accepted = true; break; }
            t *= 0.5;
        }
        if (!accepted) { res.converged = true; break; }  // no further descent possible

        std::vector<double> gn = numeric_gradient(f, xn, opts.fd_step);
        res.evaluations += static_cast<long>(2 * n);

        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = xn[i] - res.x[i];
            y[i] = gn[i] - g[i];
        }
        double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
        double improvement = res.fmin - fn;
        res.x = xn;
        res.fmin = fn;
        g = std::move(gn);
        if (improvement < opts.f_tol * (1.0 + std::abs(res.fmin))) { res.converged = true; break; }
        if (sy > 1e-12) {
            // BFGS inverse update
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) hy[i] += hinv[i][j] * y[j];
            double yhy = std::inner_product(y.begin(), y.end(), hy.begin(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    hinv[i][j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) -
                                  (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
    }
    return res;
}

OptimResult minimize_multistart(const ObjectiveFn& f, const std::vector<double>& x0,
                                const MultiStartOptions& opts) {
    RngStream rng(opts.seed, 0);
    OptimResult best;
    best.fmin = kInf;
    long total_evals = 0;
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        std::vector<double> start = x0;
        if (r > 0) {
            for (double& s : start) s += opts.jitter * std::max(1.0, std::abs(s)) * rng.normal();
        }
        OptimResult run = nelder_mead(f, start, opts.nm);
        total_evals += run.evaluations;
        if (run.fmin < best.fmin) best = std::move(run);
    }
    if (opts.polish && std::isfinite(best.fmin)) {
        OptimResult polished = bfgs_numeric(f, best.x, opts.bfgs);
        total_evals += polished.evaluations;
        if (polished.fmin <= best.fmin) {
            polished.converged = polished.converged || best.converged;
            best = std::move(polished);
        }
    }
    best.evaluations = total_evals;
    return best;
}

}  // namespace cdiff
