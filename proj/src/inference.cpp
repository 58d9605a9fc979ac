#include "cdiff/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "cdiff/errors.hpp"
#include "cdiff/marginals.hpp"
#include "cdiff/simulate.hpp"

namespace cdiff {

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

double acf1(std::span<const double> series) {
    if (series.size() < 3) throw DegenerateSampleError("acf1: need at least 3 points");
    double mean = 0.0;
    for (double x : series) mean += x;
    mean /= static_cast<double>(series.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        double d = series[i] - mean;
        den += d * d;
        if (i + 1 < series.size()) num += d * (series[i + 1] - mean);
    }
    if (!(den > 0.0)) throw DegenerateSampleError("acf1: series is constant");
    return num / den;
}

double sample_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw DegenerateSampleError("sample_quantile: empty input");
    std::sort(values.begin(), values.end());
    double pos = p * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double w = pos - static_cast<double>(lo);
    return (1.0 - w) * values[lo] + w * values[hi];
}

Structure skst_structure(UpdFamily family, std::span<const double> theta, const SkstParams& phi) {
    UpdModel model = family_build(family, theta);
    return make_marginal_structure(std::move(model), std::make_shared<SkstMarginal>(phi));
}

McDraws mc_draws(const McScenario& sc, int replications, std::uint64_t seed,
                 const FitOptions& opts, int threads) {
    if (replications < 2) throw ParamError("mc_draws: need at least 2 replications");
    const double kappa = sc.theta_true.at(0);
    const double delta = -std::log(sc.rho1) / kappa;
    const int p = family_dim(sc.family);
    Structure dgp = skst_structure(sc.family, sc.theta_true, sc.phi);

    struct RepOut {
        std::vector<double> ppmle, pmle;
        double rho1 = 0.0;
        bool ok = false;
    };
    std::vector<RepOut> reps(replications);

    parallel_for(replications, threads, [&](int r) {
        try {
            PathConfig cfg;
            cfg.n = sc.n;
            cfg.delta = delta;
            cfg.seed = seed;
            cfg.stream = static_cast<std::uint64_t>(r);
            cfg.init = InitKind::StationaryDraw;
            std::vector<double> y = simulate_transformed(dgp, cfg);

            FitOptions fo = opts;
            fo.compute_se = false;
            fo.seed = seed ^ (0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(r));
            ParametricModel two_stage = sc.family == UpdFamily::NormalizedOU
                                            ? ParametricModel::OuSkstTwoStage
                                            : ParametricModel::CirSkstTwoStage;
            FitResult pp = fit_parametric(y, two_stage, delta, fo);
            FitResult pm = fit_pmle(y, sc.family, delta, fo);
            reps[r].ppmle = pp.theta;
            reps[r].pmle = pm.theta;
            reps[r].rho1 = acf1(y);
            reps[r].ok = true;
        } catch (const Error&) {
            reps[r].ok = false;
        }
    });

    McDraws out;
    out.ppmle.resize(p);
    out.pmle.resize(p);
    for (const RepOut& r : reps) {
        if (!r.ok) {
            ++out.failed;
            continue;
        }
        for (int j = 0; j < p; ++j) {
            out.ppmle[j].push_back(r.ppmle[j]);
            out.pmle[j].push_back(r.pmle[j]);
        }
        out.rho1.push_back(r.rho1);
    }
    if (out.rho1.empty()) throw NonConvergenceError("mc_draws: every replication failed");
    return out;
}

std::vector<McRow> mc_experiment(const McScenario& sc, int replications, std::uint64_t seed,
                                 const FitOptions& opts, int threads) {
    McDraws draws = mc_draws(sc, replications, seed, opts, threads);
    const auto names = family_param_names(sc.family);
    double mean_rho = 0.0;
    for (double r : draws.rho1) mean_rho += r;
    mean_rho /= static_cast<double>(draws.rho1.size());

    auto summarize = [&](const std::string& est, const std::vector<std::vector<double>>& by_param,
                         std::vector<McRow>& rows) {
        for (std::size_t j = 0; j < by_param.size(); ++j) {
            const auto& v = by_param[j];
            double truth = sc.theta_true[j];
            double bias = 0.0, mse = 0.0;
            for (double t : v) {
                bias += t - truth;
                mse += (t - truth) * (t - truth);
            }
            bias /= static_cast<double>(v.size());
            mse /= static_cast<double>(v.size());
            McRow row;
            row.estimator = est;
            row.param = names[j];
            row.true_value = truth;
            row.rel_bias = bias / truth;
            row.rel_rmse = std::sqrt(mse) / truth;
            row.mean_rho1 = mean_rho;
            row.replications = static_cast<int>(v.size());
            row.failed = draws.failed;
            rows.push_back(std::move(row));
        }
    };

    std::vector<McRow> rows;
    summarize("PPMLE", draws.ppmle, rows);
    summarize("PMLE", draws.pmle, rows);
    return rows;
}

namespace {

struct LrParts {
    double lr = 0.0;
    double pseudo_sum = 0.0;
    double null_sum = 0.0;
    double bandwidth = 0.0;
    FitResult null_fit;
    FitResult alt_fit;
};

LrParts lr_statistic(std::span<const double> data, ParametricModel null_model,
                     UpdFamily alt_family, double delta, double bandwidth_factor,
                     const FitOptions& opts) {
    LrParts parts;
    parts.null_fit = fit_parametric(data, null_model, delta, opts);
    parts.alt_fit = fit_pmle(data, alt_family, delta, opts);

    const double n_trans = static_cast<double>(data.size() - 1);
    parts.bandwidth = silverman_bandwidth(data, bandwidth_factor);
    KernelEstimate kde(std::vector<double>(data.begin(), data.end()), parts.bandwidth);
    double marg_sum = 0.0;
    for (std::size_t i = 1; i < data.size(); ++i) marg_sum += std::log(kde.pdf(data[i]));

    parts.pseudo_sum = n_trans * parts.alt_fit.objective + marg_sum;
    parts.null_sum = n_trans * parts.null_fit.objective;
    parts.lr = parts.pseudo_sum - parts.null_sum;
    return parts;
}

}  // namespace

LrTestReport pseudo_lr_test(std::span<const double> data, ParametricModel null_model,
                            UpdFamily alt_family, double delta, int bootstrap, std::uint64_t seed,
                            double bandwidth_factor, const FitOptions& opts, int threads) {
    if (null_model != ParametricModel::DO && null_model != ParametricModel::EW)
        throw ParamError("pseudo_lr_test: null must be DO or EW");
    FitOptions fo = opts;
    LrParts observed = lr_statistic(data, null_model, alt_family, delta, bandwidth_factor, fo);

    LrTestReport report;
    report.lr = observed.lr;
    report.pseudo_ll_sum = observed.pseudo_sum;
    report.null_ll_sum = observed.null_sum;
    report.bandwidth = observed.bandwidth;
    report.null_fit = observed.null_fit;
    report.alt_fit = observed.alt_fit;
    report.b_requested = bootstrap;
    if (bootstrap < 1) {
        report.p_value = std::numeric_limits<double>::quiet_NaN();
        report.cv05 = report.cv01 = std::numeric_limits<double>::quiet_NaN();
        return report;
    }

    Structure null_structure = parametric_structure(null_model, observed.null_fit.theta);
    const int n = static_cast<int>(data.size()) - 1;
    std::vector<double> lrs(bootstrap, std::numeric_limits<double>::quiet_NaN());

    FitOptions boot_opts = opts;
    boot_opts.compute_se = false;
    parallel_for(bootstrap, threads, [&](int b) {
        try {
            PathConfig cfg;
            cfg.n = n;
            cfg.delta = delta;
            cfg.seed = seed;
            cfg.stream = static_cast<std::uint64_t>(b) + 1;
            cfg.init = InitKind::StationaryDraw;
            std::vector<double> draw = simulate_transformed(null_structure, cfg);
            FitOptions fb = boot_opts;
            fb.seed = seed ^ (0xD2B74407B1CE6E93ULL + static_cast<std::uint64_t>(b));
            lrs[b] = lr_statistic(draw, null_model, alt_family, delta, bandwidth_factor, fb).lr;
        } catch (const Error&) {
            // excluded, counted below
        }
    });

    for (double v : lrs) {
        if (std::isfinite(v))
            report.boot_lrs.push_back(v);
        else
            ++report.b_failed;
    }
    report.b_completed = static_cast<int>(report.boot_lrs.size());
    if (report.b_completed == 0) throw NonConvergenceError("pseudo_lr_test: all draws failed");

    report.cv05 = sample_quantile(report.boot_lrs, 0.95);
    report.cv01 = sample_quantile(report.boot_lrs, 0.99);
    int count_ge = 0;
    for (double v : report.boot_lrs)
        if (v >= report.lr) ++count_ge;
    report.p_value = static_cast<double>(count_ge) / static_cast<double>(report.b_completed);
    return report;
}

}  // namespace cdiff
