#include "cdiff/simulate.hpp"

#include <cmath>

#include "cdiff/errors.hpp"
#include "cdiff/rng.hpp"

namespace cdiff {

namespace {

int effective_burn_in(const PathConfig& cfg) {
    if (cfg.burn_in >= 0) return cfg.burn_in;
    return cfg.init == InitKind::Fixed ? 1000 : 0;
}

}  // namespace

std::vector<double> simulate_ou_exact(double kappa, double alpha, double sigma,
                                      const PathConfig& cfg) {
    if (cfg.n < 1 || !(cfg.delta > 0.0)) throw ParamError("simulate_ou_exact: bad path config");
    if (cfg.init == InitKind::StationaryDraw && !(kappa > 0.0))
        throw ParamError("simulate_ou_exact: stationary draw requires kappa > 0");
    RngStream rng(cfg.seed, cfg.stream);

    double rho = std::exp(-kappa * cfg.delta);
    double cond_sd =
        sigma * std::sqrt(kappa == 0.0 ? cfg.delta : -std::expm1(-2.0 * kappa * cfg.delta) /
                                                         (2.0 * kappa));
    double x = (cfg.init == InitKind::StationaryDraw)
                   ? alpha + sigma / std::sqrt(2.0 * kappa) * rng.normal()
                   : cfg.x0;
    for (int b = effective_burn_in(cfg); b > 0; --b)
        x = alpha + (x - alpha) * rho + cond_sd * rng.normal();

    std::vector<double> path(cfg.n + 1);
    path[0] = x;
    for (int i = 1; i <= cfg.n; ++i) {
        x = alpha + (x - alpha) * rho + cond_sd * rng.normal();
        path[i] = x;
    }
    return path;
}

std::vector<double> simulate_cir_exact(double kappa, double alpha, double sigma,
                                       const PathConfig& cfg) {
    if (cfg.n < 1 || !(cfg.delta > 0.0)) throw ParamError("simulate_cir_exact: bad path config");
    if (!(kappa > 0.0) || !(alpha > 0.0) || !(sigma > 0.0))
        throw ParamError("simulate_cir_exact: parameters must be positive");
    RngStream rng(cfg.seed, cfg.stream);

    const double s2 = sigma * sigma;
    const double em = -std::expm1(-kappa * cfg.delta);  // 1 - e^{-kappa delta}
    const double cbar = s2 * em / (4.0 * kappa);
    const double dof = 4.0 * kappa * alpha / s2;
    const double lam_coeff = 4.0 * kappa * std::exp(-kappa * cfg.delta) / (s2 * em);

    auto step = [&](double x) {
        long n_mix = rng.poisson(0.5 * lam_coeff * x);
        double g = rng.gamma(0.5 * dof + static_cast<double>(n_mix), 2.0);
        return cbar * g;
    };

    double x = (cfg.init == InitKind::StationaryDraw)
                   ? rng.gamma(2.0 * kappa * alpha / s2, s2 / (2.0 * kappa))
                   : cfg.x0;
    if (cfg.init == InitKind::Fixed && !(x > 0.0))
        throw ParamError("simulate_cir_exact: x0 must be positive");
    for (int b = effective_burn_in(cfg); b > 0; --b) x = step(x);

    std::vector<double> path(cfg.n + 1);
    path[0] = x;
    for (int i = 1; i <= cfg.n; ++i) {
        x = step(x);
        path[i] = x;
    }
    return path;
}

std::vector<double> simulate_euler(const UpdModel& m, const PathConfig& cfg) {
    if (cfg.n < 1 || !(cfg.delta > 0.0) || cfg.substeps < 1)
        throw ParamError("simulate_euler: bad path config");
    RngStream rng(cfg.seed, cfg.stream);
    const Domain& d = m.domain();

    // interior reflection buffer for half-line (and bounded) domains
    double scale = std::max(1.0, std::abs(m.x_star()));
    double lo_buf = std::isfinite(d.lo) ? d.lo + 1e-4 * scale : -std::numeric_limits<double>::infinity();
    double hi_buf = std::isfinite(d.hi) ? d.hi - 1e-4 * scale : std::numeric_limits<double>::infinity();

    long reflections = 0;
    long steps = 0;
    const double dt = cfg.delta / cfg.substeps;
    const double sqdt = std::sqrt(dt);

    auto step_once = [&](double x) {
        x += m.drift(x) * dt + m.sigma(x) * sqdt * rng.normal();
        ++steps;
        if (x < lo_buf) {
            x = 2.0 * lo_buf - x;
            if (x > hi_buf) x = lo_buf;  // degenerate double reflection
            ++reflections;
        } else if (x > hi_buf) {
            x = 2.0 * hi_buf - x;
            if (x < lo_buf) x = hi_buf;
            ++reflections;
        }
        return x;
    };
    auto advance = [&](double x) {
        for (int s = 0; s < cfg.substeps; ++s) x = step_once(x);
        return x;
    };

    double x;
    if (cfg.init == InitKind::StationaryDraw) {
        x = m.stationary().quantile(rng.uniform());
    } else {
        x = cfg.x0;
        if (!d.contains(x)) throw DomainError("simulate_euler: x0 outside domain");
    }
    for (int b = effective_burn_in(cfg); b > 0; --b) x = advance(x);

    std::vector<double> path(cfg.n + 1);
    path[0] = x;
    for (int i = 1; i <= cfg.n; ++i) {
        x = advance(x);
        path[i] = x;
    }
    if (steps > 0 && static_cast<double>(reflections) > 0.01 * static_cast<double>(steps))
        throw DomainEscapeError("simulate_euler: more than 1% of steps reflected at the boundary");
    return path;
}

std::vector<double> simulate_path(const UpdModel& m, const PathConfig& cfg) {
    const auto& th = m.theta();
    if (!m.is_mirrored()) {
        if (m.kind() == UpdKind::OU) return simulate_ou_exact(th[0], th[1], th[2], cfg);
        if (m.kind() == UpdKind::CIR) return simulate_cir_exact(th[0], th[1], th[2], cfg);
    } else if (m.kind() == UpdKind::OU || m.kind() == UpdKind::CIR) {
        PathConfig base_cfg = cfg;
        base_cfg.x0 = -cfg.x0;
        auto path = simulate_path(UpdModel::mirrored(m), base_cfg);
        for (double& x : path) x = -x;
        return path;
    }
    return simulate_euler(m, cfg);
}

std::vector<double> simulate_transformed(const Structure& s, const PathConfig& cfg) {
    std::vector<double> path = simulate_path(s.model, cfg);
    for (double& x : path) x = s.transform->v(x);
    return path;
}

}  // namespace cdiff
