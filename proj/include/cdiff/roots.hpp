#ifndef CDIFF_ROOTS_HPP
#define CDIFF_ROOTS_HPP

#include <cmath>
#include <functional>
#include <utility>

#include "cdiff/errors.hpp"

namespace cdiff {

struct RootOptions {
    double x_tol = 1e-13;
    double f_tol = 1e-12;
    int max_iter = 200;
};

/// Brent's method on a sign-changing bracket [lo, hi].
template <typename F>
double find_root(F&& f, double lo, double hi, const RootOptions& opts = {}) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw ConvergenceError("find_root: endpoints do not bracket a root");
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * opts.x_tol;
        double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || std::abs(fb) <= opts.f_tol) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; d = b - a; e = d; }
    }
    throw ConvergenceError("find_root: iteration cap reached");
}

/// Root of a nondecreasing f: expands a bracket around x0 until f changes
/// sign, then runs Brent. The bracket never leaves (lo_limit, hi_limit).
template <typename F>
double find_root_expanding(F&& f, double x0, double step, double lo_limit, double hi_limit,
                           const RootOptions& opts = {}) {
    double f0 = f(x0);
    if (f0 == 0.0) return x0;
    double lo = x0, hi = x0, flo = f0, fhi = f0;
    double h = step;
    for (int i = 0; i < 200; ++i) {
        if (f0 < 0.0) {
            hi = std::min(hi + h, hi_limit);
            fhi = f(hi);
            if (fhi >= 0.0) return find_root(f, lo, hi, opts);
            lo = hi; flo = fhi;
            if (hi >= hi_limit) break;
        } else {
            lo = std::max(lo - h, lo_limit);
            flo = f(lo);
            if (flo <= 0.0) return find_root(f, lo, hi, opts);
            hi = lo; fhi = flo;
            if (lo <= lo_limit) break;
        }
        h *= 2.0;
    }
    (void)flo;
    (void)fhi;
    throw ConvergenceError("find_root_expanding: no sign change found");
}

}  // namespace cdiff

#endif  // CDIFF_ROOTS_HPP
