#pragma once

#include <cstdint>
#include <vector>

#include "pod/dataset.hpp"
#include "pod/learners.hpp"
#include "pod/losses.hpp"
#include "pod/reducers.hpp"
#include "pod/rng.hpp"

namespace pod {

double gaussian_cdf(double x);
/// Standard normal quantile; prob must lie strictly inside (0, 1).
double gaussian_quantile(double prob);

enum class ReducerFit { per_fold, once };
enum class TestMode { sequential, per_step_all };

struct PODConfig {
    int k_folds = 5;
    int d_max = 8;
    double tau = 0.8;
    double alpha = 0.05;
    Loss loss = Loss::squared();
    ReducerSpec reducer;
    std::vector<LearnerSpec> learners;
    ReducerFit reducer_fit = ReducerFit::per_fold;
    int inner_folds = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// K disjoint folds covering [n]; each fold is stored as the concatenation
/// of its (a, b, o) parts. The realized overlap o/(s+o) is recorded per fold
/// and averaged into tau_realized, which all downstream statistics use.
struct FoldPlan {
    std::size_t n = 0;
    std::vector<std::vector<int>> folds;  // fold k = [a_k | b_k | o_k]
    std::vector<std::vector<int>> a, b, o;
    std::vector<double> fold_tau;
    double tau_nominal = 0.0;
    double tau_realized = 0.0;

    std::vector<int> train_rows(int k) const;
};

FoldPlan make_fold_plan(std::size_t n, int k_folds, double tau, std::uint64_t seed);

/// Risk pieces of one prediction rule evaluated on one fold.
struct FoldRisk {
    double risk_o = 0.0;    // mean loss on the shared part (0 when o is empty)
    double risk_arm = 0.0;  // mean loss on a (candidate arm) or b (reference arm)
    double weighted = 0.0;  // tau_k * risk_o + (1 - tau_k) * risk_arm
    double sigma2 = 0.0;    // population variance of the losses over all of I_k
    std::vector<double> per_sample;  // losses over I_k, in fold (a|b|o) order
};

enum class Arm { candidate, reference };

/// Aggregate a per-sample loss vector (in fold order) into a FoldRisk.
FoldRisk fold_risk_from_losses(const std::vector<double>& losses, const FoldPlan& plan, int k,
                               Arm arm);

/// psi_hat: mean over folds of (L_{d,k} - L_{dmax,k}).
double psi_hat(const std::vector<FoldRisk>& arm_d, const std::vector<FoldRisk>& arm_dmax);

/// nu2_hat: (1 - tau) K^{-1} sum_k (sigma2_{d,k} + sigma2_{dmax,k}).
double variance_hat(const std::vector<FoldRisk>& arm_d, const std::vector<FoldRisk>& arm_dmax,
                    double tau_realized);

struct TStat {
    double t = 0.0;
    double p = 0.5;
};

/// sqrt(n / (2 - tau)) * psi / sqrt(nu2), with the degenerate nu2 = 0 case
/// mapped to t = 0 (psi = 0), +inf (psi > 0), -inf (psi < 0).
TStat t_stat(double psi, double nu2, std::size_t n, double tau_realized);

struct TestResult {
    int d = 0;
    double psi = 0.0;
    double nu2 = 0.0;
    double t = 0.0;
    double z_crit = 0.0;
    double p_value = 0.5;
    bool reject = false;
};

struct PODResult {
    int d_hat = 0;
    std::vector<TestResult> trail;
    double tau_nominal = 0.0;
    double tau_realized = 0.0;
    std::size_t n = 0;
    double elapsed_ms = 0.0;
};

/// Per-fold state reused across the d loop: reducers, scores for all rows,
/// and the d_max predictor with its fold risks (fit once, reused everywhere).
struct EngineCache {
    std::vector<ReductionMap> reducers;
    std::vector<Matrix> scores;       // per fold: n x d_max
    std::vector<Predictor> dmax_pred;
    std::vector<FoldRisk> dmax_risk;
};

EngineCache prepare_cache(const Dataset& data, const PODConfig& config, const FoldPlan& plan);

/// Candidate-arm fold risks at dimension d; d = d_max reuses the cached
/// reference predictor so the shared-o terms cancel exactly.
std::vector<FoldRisk> crossfit_dimension(const Dataset& data, const PODConfig& config,
                                         const FoldPlan& plan, int d, const EngineCache& cache);

/// The sequential POD selector. per_step_all keeps testing beyond the first
/// acceptance so studies can report every per-step rejection.
PODResult select_order(const Dataset& data, const PODConfig& config,
                       TestMode mode = TestMode::sequential);

}  // namespace pod
