#pragma once

#include <vector>

#include "pod/dataset.hpp"

namespace pod {

enum class LossKind { squared, zero_one, cross_entropy };

struct Loss {
    LossKind kind = LossKind::squared;
    int n_classes = 0;          // M, for zero_one / cross_entropy
    double clip = 1e-12;        // probability floor keeping cross-entropy finite

    static Loss squared() { return {LossKind::squared, 0, 0.0}; }
    static Loss zero_one(int m) { return {LossKind::zero_one, m, 0.0}; }
    static Loss cross_entropy(int m, double clip = 1e-12) {
        return {LossKind::cross_entropy, m, clip};
    }
};

/// One prediction for one observation; the active variant must match the
/// Loss in force when evaluated.
struct Prediction {
    enum class Kind { continuous, hard_label, probabilities } kind = Kind::continuous;
    std::vector<double> values;  // length q (continuous) or M (probabilities)
    int label = 0;

    static Prediction make_continuous(std::vector<double> v) {
        return {Kind::continuous, std::move(v), 0};
    }
    static Prediction make_label(int l) { return {Kind::hard_label, {}, l}; }
    static Prediction make_probabilities(std::vector<double> p) {
        return {Kind::probabilities, std::move(p), 0};
    }
};

/// ||y - yhat||^2 for continuous responses.
double squared_loss(const std::vector<double>& y, const Prediction& yhat);
/// 1{y != yhat} for hard labels.
double zero_one_loss(int y, int n_classes, const Prediction& yhat);
/// -log max(yhat[y], clip); probabilities must be >= 0 and sum to 1 within 1e-8.
double cross_entropy_loss(int y, int n_classes, double clip, const Prediction& yhat);

/// Evaluate the loss for row `i` of `data`.
double loss_eval(const Loss& loss, const Dataset& data, std::size_t i, const Prediction& yhat);

struct RiskSummary {
    double mean = 0.0;
    std::vector<double> per_sample;
};

/// Mean loss over `rows` plus the per-sample loss vector.
RiskSummary mean_risk(const Loss& loss, const Dataset& data, const std::vector<int>& rows,
                      const std::vector<Prediction>& yhats);

}  // namespace pod
