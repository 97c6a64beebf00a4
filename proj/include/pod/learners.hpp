#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pod/dataset.hpp"
#include "pod/losses.hpp"
#include "pod/matrix.hpp"
#include "pod/rng.hpp"

namespace pod {

enum class LearnerKind { mean, ols, knn, tree, mlp };

struct LearnerSpec {
    LearnerKind kind = LearnerKind::mean;
    double ridge = 0.0;       // ols
    int k = 0;                // knn; 0 = ceil(n_train^0.4)
    int max_depth = 4;        // tree
    int min_leaf = 10;        // tree
    int hidden = 5;           // mlp
    int epochs = 500;         // mlp
    double learning_rate = 0.05;

    static LearnerSpec mean_learner() { return {}; }
    static LearnerSpec ols_learner(double ridge = 0.0);
    static LearnerSpec knn_learner(int k = 0);
    static LearnerSpec tree_learner(int max_depth = 4, int min_leaf = 10);
    static LearnerSpec mlp_learner(int hidden = 5, int epochs = 500, double lr = 0.05);

    /// Parse one item of the CLI list, e.g. "ols", "knn:5", "tree:4:10", "mlp:5".
    static LearnerSpec parse(const std::string& token);
    std::string name() const;
};

namespace tree_detail {
struct Node {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    std::vector<double> value;  // leaf mean (continuous)
    int label = 0;              // leaf majority (categorical)
    std::vector<double> probs;  // leaf class frequencies, Laplace-smoothed
};
}  // namespace tree_detail

/// A fitted rule. Predictions depend on exactly the first d score
/// coordinates; anything beyond is ignored.
class Predictor {
public:
    const LearnerSpec& spec() const { return spec_; }
    int d() const { return d_; }
    const Loss& loss() const { return loss_; }

    Prediction predict_row(const double* scores, std::size_t n_cols) const;
    std::vector<Prediction> predict(const Matrix& scores) const;
    std::vector<Prediction> predict_rows(const Matrix& scores, const std::vector<int>& rows) const;

private:
    friend Predictor fit_learner(const LearnerSpec&, const Matrix&, const Dataset&,
                                 const std::vector<int>&, int, const Loss&, std::uint64_t);

    Prediction predict_standardized(const double* z) const;

    LearnerSpec spec_;
    int d_ = 0;
    Loss loss_;
    int n_classes_ = 0;
    CenterScale score_cs_;  // fitted on the training scores (first d columns)

    // constant rule (d = 0 or kind = mean)
    bool constant_ = false;
    Prediction const_pred_;

    Matrix beta_;  // ols: (d+1) x q, row 0 = intercept

    Matrix knn_points_;  // standardized training scores, n_train x d
    Matrix knn_y_;       // n_train x q
    std::vector<int> knn_labels_;
    int knn_k_ = 0;

    std::vector<tree_detail::Node> tree_;

    Matrix mlp_w1_, mlp_w2_;  // hidden x d, out x hidden
    std::vector<double> mlp_b1_, mlp_b2_;
};

/// Fit `spec` on the first d columns of the training scores. Rows of `r`
/// are aligned with `rows`, which index into `data` for the responses.
/// d = 0 collapses every spec to the constant rule for the loss in force.
Predictor fit_learner(const LearnerSpec& spec, const Matrix& r, const Dataset& data,
                      const std::vector<int>& rows, int d, const Loss& loss, std::uint64_t seed);

struct SelectionResult {
    std::size_t winner = 0;       // index into candidates
    std::vector<double> cv_risk;  // per candidate; NaN where the fit failed
};

/// Pick the candidate with the smallest inner-CV mean risk (ties: earliest).
/// Candidates that fail to fit are skipped; all failing is an error.
SelectionResult select_learner(const std::vector<LearnerSpec>& candidates, const Matrix& r,
                               const Dataset& data, const std::vector<int>& rows, int d,
                               const Loss& loss, int inner_folds, const Rng& rng);

/// select_learner followed by a refit of the winner on all rows with a
/// fresh derived stream.
Predictor select_and_fit(const std::vector<LearnerSpec>& candidates, const Matrix& r,
                         const Dataset& data, const std::vector<int>& rows, int d,
                         const Loss& loss, int inner_folds, const Rng& rng);

}  // namespace pod
