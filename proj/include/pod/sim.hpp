#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pod/dataset.hpp"
#include "pod/engine.hpp"

namespace pod {

enum class FactorRegime { weak, pervasive };

struct FactorTruth {
    Matrix factors;   // n x 5
    Matrix loadings;  // p x 5
};

/// Factor-regression data: Y = f1 + 2 f2 + f3 + 3 f4 + 2 f5 + eps with
/// eps ~ N(0, 0.1), X = B f + u. Weak regime: b_lj = sqrt(3 p^{-1/2}) for
/// l <= 5, otherwise +/- sqrt(3 / (p - j)) with the sign negative when l is a
/// multiple of j; idiosyncratic sd weak_vj (default 0.55). Pervasive regime:
/// b_lj ~ Unif(0, j), idiosyncratic sd 5.
std::pair<Dataset, FactorTruth> gen_factor(FactorRegime regime, std::size_t n, std::size_t p,
                                           std::uint64_t seed, double weak_vj = 0.55);

/// Single/multi-index models on X ~ N(0, I_10); ids 1-5 are continuous with
/// noise sigma * eps, ids 6-7 are categorical (see the model formulas in the
/// implementation). "logit" in model 6 is read as the logistic function.
Dataset gen_sdr_model(int id, std::size_t n, std::uint64_t seed, double sigma = 0.5);

/// Bernoulli response over X ~ N(0, Sigma), Sigma_ij = 0.5^|i-j|, p = 10:
/// P(Y=1 | X1 > 0) = 1 and P(Y=1 | X1 <= 0) = 0.6.
Dataset gen_bernoulli(std::size_t n, std::uint64_t seed);

struct Scenario {
    enum class Kind { factor, sdr_model, bernoulli } kind = Kind::sdr_model;
    FactorRegime regime = FactorRegime::pervasive;
    std::size_t n = 200;
    std::size_t p = 10;
    int model_id = 1;
    double sigma = 0.5;
    double weak_vj = 0.55;
    std::uint64_t seed = 0;

    Dataset generate(std::uint64_t rep_seed) const;
    /// Known target order under the given loss (Bernoulli: 0 under 0-1 loss,
    /// 1 under cross-entropy).
    int d_star(const Loss& loss) const;
    std::string name() const;
};

struct RejectionReport {
    std::vector<double> rate;  // per d = 0..d_max
    int reps = 0;
    double elapsed_ms = 0.0;
};

/// Per-step rejection rates: every replication runs the test at EVERY d
/// (the stopped path is not used here).
RejectionReport run_rejection_study(const Scenario& scenario, const PODConfig& config, int reps);

enum class OrderMethod { pod, ic, er };

struct OrderReport {
    struct Row {
        std::string method;
        std::size_t n = 0;
        double correct = 0.0, over = 0.0, under = 0.0;
    };
    std::vector<Row> rows;
    int reps = 0;
    double elapsed_ms = 0.0;
};

/// (P correct, P over, P under) against the scenario's known d_star, per
/// (n, method); POD uses the stopped sequential selector, IC/ER their k_hat.
OrderReport run_order_study(const Scenario& scenario, const PODConfig& config,
                            const std::vector<std::size_t>& n_grid,
                            const std::vector<OrderMethod>& methods, int reps);

std::string order_method_name(OrderMethod m);

/// CSV with one header row carrying every config field alongside the result
/// columns.
std::string rejection_report_csv(const Scenario& scenario, const PODConfig& config,
                                 const RejectionReport& report);
std::string order_report_csv(const Scenario& scenario, const PODConfig& config,
                             const OrderReport& report);

}  // namespace pod
