#include "pod/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "pod/errors.hpp"

namespace pod {

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double gaussian_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0))
        throw ConfigError("gaussian_quantile: prob must lie strictly in (0, 1)");
    // Acklam's rational approximation followed by one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (prob < plow) {
        const double q = std::sqrt(-2 * std::log(prob));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1);
    } else if (prob <= phigh) {
        const double q = prob - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log(1 - prob));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1);
    }
    const double e = gaussian_cdf(x) - prob;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x -= u / (1.0 + x * u / 2.0);
    return x;
}

void PODConfig::validate() const {
    if (k_folds < 2) throw ConfigError("config: k_folds must be >= 2");
    if (d_max < 1) throw ConfigError("config: d_max must be >= 1");
    if (!(tau >= 0.0 && tau < 1.0)) throw ConfigError("config: tau must lie in [0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("config: alpha must lie in (0, 1)");
    if (learners.empty()) throw ConfigError("config: at least one learner is required");
    if (inner_folds < 2) throw ConfigError("config: inner_folds must be >= 2");
}

FoldPlan make_fold_plan(std::size_t n, int k_folds, double tau, std::uint64_t seed) {
    if (k_folds < 2) throw ConfigError("fold plan: k_folds must be >= 2");
    if (!(tau >= 0.0 && tau < 1.0)) throw ConfigError("fold plan: tau must lie in [0, 1)");
    const std::size_t min_n =
        static_cast<std::size_t>(k_folds) * (tau > 0.0 ? 3u : 2u);
    if (n < min_n)
        throw DataError("fold plan: need at least " + std::to_string(min_n) +
                        " observations for K=" + std::to_string(k_folds) +
                        ", tau=" + std::to_string(tau));

    Rng master(seed);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng plan_rng = master.child(stream::kFoldPlan);
    plan_rng.shuffle(perm);

    FoldPlan plan;
    plan.n = n;
    plan.tau_nominal = tau;
    const std::size_t base = n / static_cast<std::size_t>(k_folds);
    const std::size_t extra = n % static_cast<std::size_t>(k_folds);
    std::size_t pos = 0;
    double tau_sum = 0.0;
    for (int k = 0; k < k_folds; ++k) {
        const std::size_t m = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
        std::vector<int> fold(perm.begin() + static_cast<long>(pos),
                              perm.begin() + static_cast<long>(pos + m));
        pos += m;
        Rng split_rng = master.child(stream::kFoldSplit, static_cast<std::uint64_t>(k));
        split_rng.shuffle(fold);

        long s = std::lround((1.0 - tau) * static_cast<double>(m) / (2.0 - tau));
        s = std::max<long>(1, std::min<long>(s, static_cast<long>(m / 2)));
        const long o_count = static_cast<long>(m) - 2 * s;
        if (o_count < 0) throw DataError("fold plan: infeasible split for fold size " +
                                         std::to_string(m));

        std::vector<int> a(fold.begin(), fold.begin() + s);
        std::vector<int> b(fold.begin() + s, fold.begin() + 2 * s);
        std::vector<int> o(fold.begin() + 2 * s, fold.end());
        std::vector<int> ordered;
        ordered.reserve(m);
        ordered.insert(ordered.end(), a.begin(), a.end());
        ordered.insert(ordered.end(), b.begin(), b.end());
        ordered.insert(ordered.end(), o.begin(), o.end());

        const double t_k = static_cast<double>(o_count) / static_cast<double>(s + o_count);
        tau_sum += t_k;
        plan.fold_tau.push_back(t_k);
        plan.folds.push_back(std::move(ordered));
        plan.a.push_back(std::move(a));
        plan.b.push_back(std::move(b));
        plan.o.push_back(std::move(o));
    }
    plan.tau_realized = tau_sum / static_cast<double>(k_folds);
    return plan;
}

std::vector<int> FoldPlan::train_rows(int k) const {
    std::vector<int> out;
    out.reserve(n - folds[static_cast<std::size_t>(k)].size());
    std::vector<char> in_fold(n, 0);
    for (int r : folds[static_cast<std::size_t>(k)]) in_fold[static_cast<std::size_t>(r)] = 1;
    for (std::size_t i = 0; i < n; ++i)
        if (!in_fold[i]) out.push_back(static_cast<int>(i));
    return out;
}

FoldRisk fold_risk_from_losses(const std::vector<double>& losses, const FoldPlan& plan, int k,
                               Arm arm) {
    const std::size_t ku = static_cast<std::size_t>(k);
    const std::size_t s = plan.a[ku].size();
    const std::size_t m = plan.folds[ku].size();
    if (losses.size() != m) throw NumericError("fold risk: loss count does not match fold size");

    FoldRisk out;
    out.per_sample = losses;
    const std::size_t o_count = plan.o[ku].size();
    double sum_o = 0.0;
    for (std::size_t i = 2 * s; i < m; ++i) sum_o += losses[i];
    out.risk_o = o_count ? sum_o / static_cast<double>(o_count) : 0.0;

    const std::size_t arm_begin = arm == Arm::candidate ? 0 : s;
    double sum_arm = 0.0;
    for (std::size_t i = arm_begin; i < arm_begin + s; ++i) sum_arm += losses[i];
    out.risk_arm = sum_arm / static_cast<double>(s);

    const double tau_k = plan.fold_tau[ku];
    out.weighted = tau_k * out.risk_o + (1.0 - tau_k) * out.risk_arm;

    double mean = 0.0;
    for (double l : losses) mean += l;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double l : losses) var += (l - mean) * (l - mean);
    out.sigma2 = var / static_cast<double>(m);
    return out;
}

double psi_hat(const std::vector<FoldRisk>& arm_d, const std::vector<FoldRisk>& arm_dmax) {
    if (arm_d.size() != arm_dmax.size() || arm_d.empty())
        throw NumericError("psi_hat: fold counts disagree");
    double s = 0.0;
    for (std::size_t k = 0; k < arm_d.size(); ++k) s += arm_d[k].weighted - arm_dmax[k].weighted;
    return s / static_cast<double>(arm_d.size());
}

double variance_hat(const std::vector<FoldRisk>& arm_d, const std::vector<FoldRisk>& arm_dmax,
                    double tau_realized) {
    if (arm_d.size() != arm_dmax.size() || arm_d.empty())
        throw NumericError("variance_hat: fold counts disagree");
    double s = 0.0;
    for (std::size_t k = 0; k < arm_d.size(); ++k) s += arm_d[k].sigma2 + arm_dmax[k].sigma2;
    return (1.0 - tau_realized) * s / static_cast<double>(arm_d.size());
}

TStat t_stat(double psi, double nu2, std::size_t n, double tau_realized) {
    if (nu2 < 0.0) throw NumericError("t_stat: negative variance estimate");
    TStat out;
    if (nu2 == 0.0) {
        if (psi > 0.0) {
            out.t = std::numeric_limits<double>::infinity();
            out.p = 0.0;
        } else if (psi < 0.0) {
            out.t = -std::numeric_limits<double>::infinity();
            out.p = 1.0;
        } else {
            out.t = 0.0;
            out.p = 0.5;
        }
        return out;
    }
    out.t = std::sqrt(static_cast<double>(n) / (2.0 - tau_realized)) * psi / std::sqrt(nu2);
    out.p = 1.0 - gaussian_cdf(out.t);
    return out;
}

namespace {

template <typename F>
void for_each_fold(int k_folds, F&& fn) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k_folds));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < k_folds; ++k) {
        try {
            fn(k);
        } catch (...) {
            errors[static_cast<std::size_t>(k)] = std::current_exception();
        }
    }
    for (int k = 0; k < k_folds; ++k) {
        if (!errors[static_cast<std::size_t>(k)]) continue;
        try {
            std::rethrow_exception(errors[static_cast<std::size_t>(k)]);
        } catch (const ConfigError& e) {
            throw ConfigError("fold " + std::to_string(k) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("fold " + std::to_string(k) + ": " + e.what());
        } catch (const NumericError& e) {
            throw NumericError("fold " + std::to_string(k) + ": " + e.what());
        }
    }
}

Matrix gather(const Matrix& m, const std::vector<int>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(i, j) = m(static_cast<std::size_t>(rows[i]), j);
    return out;
}

std::vector<double> fold_losses(const Predictor& pred, const Matrix& scores,
                                const std::vector<int>& fold, const Dataset& data,
                                const Loss& loss) {
    std::vector<double> out;
    out.reserve(fold.size());
    for (int r : fold) {
        const Prediction yhat = pred.predict_row(scores.row(static_cast<std::size_t>(r)),
                                                 scores.cols());
        out.push_back(loss_eval(loss, data, static_cast<std::size_t>(r), yhat));
    }
    return out;
}

}  // namespace

EngineCache prepare_cache(const Dataset& data, const PODConfig& config, const FoldPlan& plan) {
    const int K = static_cast<int>(plan.folds.size());
    EngineCache cache;
    cache.reducers.resize(static_cast<std::size_t>(K));
    cache.scores.resize(static_cast<std::size_t>(K));
    cache.dmax_pred.resize(static_cast<std::size_t>(K));
    cache.dmax_risk.resize(static_cast<std::size_t>(K));

    const Rng master(config.seed);
    const std::size_t d_max = static_cast<std::size_t>(config.d_max);

    ReductionMap shared;
    if (config.reducer_fit == ReducerFit::once) {
        std::vector<int> all(data.n());
        std::iota(all.begin(), all.end(), 0);
        shared = fit_reducer(data, all, config.reducer, d_max);
    }

    for_each_fold(K, [&](int k) {
        const std::size_t ku = static_cast<std::size_t>(k);
        const std::vector<int> train = plan.train_rows(k);
        if (config.reducer_fit == ReducerFit::once)
            cache.reducers[ku] = shared;
        else
            cache.reducers[ku] = fit_reducer(data, train, config.reducer, d_max);
        cache.scores[ku] = apply(cache.reducers[ku], data.x);

        const Rng dim_rng = master.child(stream::kEngine, static_cast<std::uint64_t>(k),
                                         static_cast<std::uint64_t>(config.d_max));
        const Matrix r_train = gather(cache.scores[ku], train);
        cache.dmax_pred[ku] = select_and_fit(config.learners, r_train, data, train,
                                             config.d_max, config.loss, config.inner_folds,
                                             dim_rng);
        const std::vector<double> losses =
            fold_losses(cache.dmax_pred[ku], cache.scores[ku], plan.folds[ku], data, config.loss);
        cache.dmax_risk[ku] = fold_risk_from_losses(losses, plan, k, Arm::reference);
    });
    return cache;
}

std::vector<FoldRisk> crossfit_dimension(const Dataset& data, const PODConfig& config,
                                         const FoldPlan& plan, int d, const EngineCache& cache) {
    if (d < 0 || d > config.d_max) throw ConfigError("crossfit: d out of [0, d_max]");
    const int K = static_cast<int>(plan.folds.size());
    std::vector<FoldRisk> out(static_cast<std::size_t>(K));
    const Rng master(config.seed);

    for_each_fold(K, [&](int k) {
        const std::size_t ku = static_cast<std::size_t>(k);
        std::vector<double> losses;
        if (d == config.d_max) {
            losses = cache.dmax_risk[ku].per_sample;
        } else {
            const std::vector<int> train = plan.train_rows(k);
            const Rng dim_rng = master.child(stream::kEngine, static_cast<std::uint64_t>(k),
                                             static_cast<std::uint64_t>(d));
            const Matrix r_train = gather(cache.scores[ku], train);
            const Predictor pred = select_and_fit(config.learners, r_train, data, train, d,
                                                  config.loss, config.inner_folds, dim_rng);
            losses = fold_losses(pred, cache.scores[ku], plan.folds[ku], data, config.loss);
        }
        out[ku] = fold_risk_from_losses(losses, plan, k, Arm::candidate);
    });
    return out;
}

PODResult select_order(const Dataset& data, const PODConfig& config, TestMode mode) {
    config.validate();
    if (config.d_max > static_cast<int>(data.p()))
        throw ConfigError("config: d_max exceeds the predictor dimension");
    const auto start = std::chrono::steady_clock::now();

    const FoldPlan plan = make_fold_plan(data.n(), config.k_folds, config.tau, config.seed);
    const EngineCache cache = prepare_cache(data, config, plan);
    const double z_crit = gaussian_quantile(1.0 - config.alpha);

    PODResult result;
    result.n = data.n();
    result.tau_nominal = plan.tau_nominal;
    result.tau_realized = plan.tau_realized;
    result.d_hat = config.d_max;
    bool selected = false;

    for (int d = 0; d <= config.d_max; ++d) {
        const std::vector<FoldRisk> arm_d = crossfit_dimension(data, config, plan, d, cache);
        const double psi = psi_hat(arm_d, cache.dmax_risk);
        const double nu2 = variance_hat(arm_d, cache.dmax_risk, plan.tau_realized);
        const TStat ts = t_stat(psi, nu2, data.n(), plan.tau_realized);

        TestResult tr;
        tr.d = d;
        tr.psi = psi;
        tr.nu2 = nu2;
        tr.t = ts.t;
        tr.z_crit = z_crit;
        tr.p_value = ts.p;
        tr.reject = ts.t >= z_crit;
        result.trail.push_back(tr);

        if (!tr.reject && !selected) {
            result.d_hat = d;
            selected = true;
            if (mode == TestMode::sequential) break;
        }
    }

    result.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    return result;
}

}  // namespace pod
