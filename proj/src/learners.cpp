#include "pod/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pod/errors.hpp"
#include "pod/numerics.hpp"

namespace pod {

LearnerSpec LearnerSpec::ols_learner(double ridge) {
    LearnerSpec s;
    s.kind = LearnerKind::ols;
    s.ridge = ridge;
    return s;
}
LearnerSpec LearnerSpec::knn_learner(int k) {
    LearnerSpec s;
    s.kind = LearnerKind::knn;
    s.k = k;
    return s;
}
LearnerSpec LearnerSpec::tree_learner(int max_depth, int min_leaf) {
    LearnerSpec s;
    s.kind = LearnerKind::tree;
    s.max_depth = max_depth;
    s.min_leaf = min_leaf;
    return s;
}
LearnerSpec LearnerSpec::mlp_learner(int hidden, int epochs, double lr) {
    LearnerSpec s;
    s.kind = LearnerKind::mlp;
    s.hidden = hidden;
    s.epochs = epochs;
    s.learning_rate = lr;
    return s;
}

LearnerSpec LearnerSpec::parse(const std::string& token) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : token) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    const std::string& head = parts[0];
    auto num = [&](std::size_t i, double dflt) {
        return parts.size() > i && !parts[i].empty() ? std::stod(parts[i]) : dflt;
    };
    if (head == "mean") return mean_learner();
    if (head == "ols") return ols_learner(num(1, 0.0));
    if (head == "knn") return knn_learner(static_cast<int>(num(1, 0)));
    if (head == "tree")
        return tree_learner(static_cast<int>(num(1, 4)), static_cast<int>(num(2, 10)));
    if (head == "mlp")
        return mlp_learner(static_cast<int>(num(1, 5)), static_cast<int>(num(2, 500)),
                           num(3, 0.05));
    throw ConfigError("learner: unknown spec '" + token + "'");
}

std::string LearnerSpec::name() const {
    switch (kind) {
        case LearnerKind::mean: return "mean";
        case LearnerKind::ols: return ridge > 0 ? "ols:" + std::to_string(ridge) : "ols";
        case LearnerKind::knn: return k > 0 ? "knn:" + std::to_string(k) : "knn";
        case LearnerKind::tree:
            return "tree:" + std::to_string(max_depth) + ":" + std::to_string(min_leaf);
        case LearnerKind::mlp: return "mlp:" + std::to_string(hidden);
    }
    return "?";
}

namespace {

std::vector<double> mean_response(const Dataset& data, const std::vector<int>& rows) {
    std::vector<double> m(data.y_cont.cols(), 0.0);
    for (int r : rows)
        for (std::size_t j = 0; j < m.size(); ++j)
            m[j] += data.y_cont(static_cast<std::size_t>(r), j);
    for (auto& v : m) v /= static_cast<double>(rows.size());
    return m;
}

std::vector<int> class_counts(const Dataset& data, const std::vector<int>& rows) {
    std::vector<int> c(data.n_classes, 0);
    for (int r : rows) ++c[data.y_label[static_cast<std::size_t>(r)]];
    return c;
}

int majority_label(const std::vector<int>& counts) {
    int best = 0;
    for (std::size_t m = 1; m < counts.size(); ++m)
        if (counts[m] > counts[best]) best = static_cast<int>(m);
    return best;
}

std::vector<double> laplace_probs(const std::vector<int>& counts, std::size_t n) {
    std::vector<double> p(counts.size());
    const double denom = static_cast<double>(n) + static_cast<double>(counts.size());
    for (std::size_t m = 0; m < counts.size(); ++m) p[m] = (counts[m] + 1.0) / denom;
    return p;
}

Prediction constant_prediction(const Dataset& data, const std::vector<int>& rows,
                               const Loss& loss) {
    switch (loss.kind) {
        case LossKind::squared:
            return Prediction::make_continuous(mean_response(data, rows));
        case LossKind::zero_one:
            return Prediction::make_label(majority_label(class_counts(data, rows)));
        case LossKind::cross_entropy:
            return Prediction::make_probabilities(
                laplace_probs(class_counts(data, rows), rows.size()));
    }
    throw ConfigError("learner: unknown loss kind");
}

void check_loss_compat(const Dataset& data, const Loss& loss) {
    const bool needs_cont = loss.kind == LossKind::squared;
    if (needs_cont && data.kind != ResponseKind::continuous)
        throw ConfigError("learner: squared loss needs a continuous response");
    if (!needs_cont && data.kind != ResponseKind::categorical)
        throw ConfigError("learner: classification loss needs a categorical response");
}

// ---- tree fitting -------------------------------------------------------

struct TreeBuilder {
    const Matrix& z;  // standardized training scores, n x d
    const Dataset& data;
    const std::vector<int>& rows;  // dataset row per local index
    const Loss& loss;
    int max_depth;
    int min_leaf;
    std::vector<tree_detail::Node> nodes;

    bool continuous() const { return loss.kind == LossKind::squared; }

    int make_leaf(const std::vector<int>& idx) {
        tree_detail::Node node;
        std::vector<int> ds;
        ds.reserve(idx.size());
        for (int i : idx) ds.push_back(rows[static_cast<std::size_t>(i)]);
        if (continuous()) {
            node.value = mean_response(data, ds);
        } else {
            const std::vector<int> counts = class_counts(data, ds);
            node.label = majority_label(counts);
            node.probs = laplace_probs(counts, ds.size());
        }
        nodes.push_back(std::move(node));
        return static_cast<int>(nodes.size()) - 1;
    }

    // Cost of a split under the node criterion: summed SSE for regression,
    // count-weighted Gini impurity for classification.
    int build(std::vector<int> idx, int depth) {
        const std::size_t n = idx.size();
        bool pure = true;
        if (continuous()) {
            for (std::size_t i = 1; i < n && pure; ++i)
                for (std::size_t j = 0; j < data.y_cont.cols(); ++j)
                    if (data.y_cont(static_cast<std::size_t>(rows[idx[i]]), j) !=
                        data.y_cont(static_cast<std::size_t>(rows[idx[0]]), j)) {
                        pure = false;
                        break;
                    }
        } else {
            for (std::size_t i = 1; i < n && pure; ++i)
                if (data.y_label[static_cast<std::size_t>(rows[idx[i]])] !=
                    data.y_label[static_cast<std::size_t>(rows[idx[0]])])
                    pure = false;
        }
        if (depth >= max_depth || pure || n < 2 * static_cast<std::size_t>(min_leaf))
            return make_leaf(idx);

        const std::size_t d = z.cols();
        const std::size_t q = continuous() ? data.y_cont.cols() : 0;
        const int m_classes = continuous() ? 0 : data.n_classes;

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_cost = std::numeric_limits<double>::infinity();

        std::vector<int> order(idx);
        for (std::size_t j = 0; j < d; ++j) {
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                const double va = z(static_cast<std::size_t>(a), j);
                const double vb = z(static_cast<std::size_t>(b), j);
                return va < vb || (va == vb && a < b);
            });
            if (continuous()) {
                // prefix sums of y and ||y||^2
                std::vector<double> sum_l(q, 0.0), sum_all(q, 0.0);
                double sq_l = 0.0, sq_all = 0.0;
                for (int i : order) {
                    const std::size_t drow = static_cast<std::size_t>(rows[i]);
                    for (std::size_t c = 0; c < q; ++c) {
                        const double v = data.y_cont(drow, c);
                        sum_all[c] += v;
                        sq_all += v * v;
                    }
                }
                for (std::size_t t = 0; t + 1 < n; ++t) {
                    const std::size_t drow = static_cast<std::size_t>(rows[order[t]]);
                    for (std::size_t c = 0; c < q; ++c) {
                        const double v = data.y_cont(drow, c);
                        sum_l[c] += v;
                        sq_l += v * v;
                    }
                    const double zl = z(static_cast<std::size_t>(order[t]), j);
                    const double zr = z(static_cast<std::size_t>(order[t + 1]), j);
                    if (zl == zr) continue;
                    const std::size_t nl = t + 1, nr = n - nl;
                    if (nl < static_cast<std::size_t>(min_leaf) ||
                        nr < static_cast<std::size_t>(min_leaf))
                        continue;
                    double norm_l = 0.0, norm_r = 0.0;
                    for (std::size_t c = 0; c < q; ++c) {
                        norm_l += sum_l[c] * sum_l[c];
                        const double sr = sum_all[c] - sum_l[c];
                        norm_r += sr * sr;
                    }
                    const double cost = (sq_l - norm_l / static_cast<double>(nl)) +
                                        ((sq_all - sq_l) - norm_r / static_cast<double>(nr));
                    if (cost < best_cost) {
                        best_cost = cost;
                        best_feature = static_cast<int>(j);
                        best_threshold = 0.5 * (zl + zr);
                    }
                }
            } else {
                std::vector<int> cnt_l(m_classes, 0), cnt_all(m_classes, 0);
                for (int i : order) ++cnt_all[data.y_label[static_cast<std::size_t>(rows[i])]];
                for (std::size_t t = 0; t + 1 < n; ++t) {
                    ++cnt_l[data.y_label[static_cast<std::size_t>(rows[order[t]])]];
                    const double zl = z(static_cast<std::size_t>(order[t]), j);
                    const double zr = z(static_cast<std::size_t>(order[t + 1]), j);
                    if (zl == zr) continue;
                    const std::size_t nl = t + 1, nr = n - nl;
                    if (nl < static_cast<std::size_t>(min_leaf) ||
                        nr < static_cast<std::size_t>(min_leaf))
                        continue;
                    double gini_l = 0.0, gini_r = 0.0;
                    for (int m = 0; m < m_classes; ++m) {
                        const double pl = static_cast<double>(cnt_l[m]) / static_cast<double>(nl);
                        const double pr = static_cast<double>(cnt_all[m] - cnt_l[m]) /
                                          static_cast<double>(nr);
                        gini_l += pl * pl;
                        gini_r += pr * pr;
                    }
                    const double cost = static_cast<double>(nl) * (1.0 - gini_l) +
                                        static_cast<double>(nr) * (1.0 - gini_r);
                    if (cost < best_cost) {
                        best_cost = cost;
                        best_feature = static_cast<int>(j);
                        best_threshold = 0.5 * (zl + zr);
                    }
                }
            }
        }

        if (best_feature < 0) return make_leaf(idx);

        std::vector<int> left, right;
        for (int i : idx) {
            if (z(static_cast<std::size_t>(i), static_cast<std::size_t>(best_feature)) <=
                best_threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        tree_detail::Node node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        nodes.push_back(node);
        const int self = static_cast<int>(nodes.size()) - 1;
        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        nodes[static_cast<std::size_t>(self)].left = l;
        nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

// ---- mlp fitting --------------------------------------------------------

struct MlpState {
    Matrix w1, w2;
    std::vector<double> b1, b2;
};

MlpState fit_mlp(const Matrix& z, const Dataset& data, const std::vector<int>& rows,
                 const LearnerSpec& spec, const Loss& loss, std::uint64_t seed) {
    const std::size_t n = z.rows(), d = z.cols();
    const std::size_t h = static_cast<std::size_t>(spec.hidden);
    const bool classify = loss.kind != LossKind::squared;
    const std::size_t out = classify ? static_cast<std::size_t>(data.n_classes)
                                     : data.y_cont.cols();

    Rng rng(seed);
    Matrix w1(h, d), w2(out, h);
    std::vector<double> b1(h), b2(out);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < d; ++j) w1(i, j) = rng.next_uniform(-0.5, 0.5);
    for (double& v : b1) v = rng.next_uniform(-0.5, 0.5);
    for (std::size_t i = 0; i < out; ++i)
        for (std::size_t j = 0; j < h; ++j) w2(i, j) = rng.next_uniform(-0.5, 0.5);
    for (double& v : b2) v = rng.next_uniform(-0.5, 0.5);

    Matrix act(n, h), logits(n, out);
    Matrix gw1(h, d), gw2(out, h);
    std::vector<double> gb1(h), gb2(out), grad_out(out), grad_hidden(h);

    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t u = 0; u < h; ++u) {
                double s = b1[u];
                for (std::size_t j = 0; j < d; ++j) s += w1(u, j) * z(i, j);
                act(i, u) = std::tanh(s);
            }
            for (std::size_t o = 0; o < out; ++o) {
                double s = b2[o];
                for (std::size_t u = 0; u < h; ++u) s += w2(o, u) * act(i, u);
                logits(i, o) = s;
            }
        }
        std::fill(gb1.begin(), gb1.end(), 0.0);
        std::fill(gb2.begin(), gb2.end(), 0.0);
        gw1 = Matrix(h, d);
        gw2 = Matrix(out, h);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t drow = static_cast<std::size_t>(rows[i]);
            if (classify) {
                double mx = logits(i, 0);
                for (std::size_t o = 1; o < out; ++o) mx = std::max(mx, logits(i, o));
                double denom = 0.0;
                for (std::size_t o = 0; o < out; ++o) denom += std::exp(logits(i, o) - mx);
                for (std::size_t o = 0; o < out; ++o) {
                    const double p = std::exp(logits(i, o) - mx) / denom;
                    grad_out[o] = (p - (static_cast<int>(o) == data.y_label[drow] ? 1.0 : 0.0)) *
                                  inv_n;
                }
            } else {
                for (std::size_t o = 0; o < out; ++o)
                    grad_out[o] = 2.0 * (logits(i, o) - data.y_cont(drow, o)) * inv_n;
            }
            for (std::size_t u = 0; u < h; ++u) {
                double s = 0.0;
                for (std::size_t o = 0; o < out; ++o) s += w2(o, u) * grad_out[o];
                grad_hidden[u] = s * (1.0 - act(i, u) * act(i, u));
            }
            for (std::size_t o = 0; o < out; ++o) {
                gb2[o] += grad_out[o];
                for (std::size_t u = 0; u < h; ++u) gw2(o, u) += grad_out[o] * act(i, u);
            }
            for (std::size_t u = 0; u < h; ++u) {
                gb1[u] += grad_hidden[u];
                for (std::size_t j = 0; j < d; ++j) gw1(u, j) += grad_hidden[u] * z(i, j);
            }
        }
        const double lr = spec.learning_rate;
        for (std::size_t u = 0; u < h; ++u) {
            b1[u] -= lr * gb1[u];
            for (std::size_t j = 0; j < d; ++j) w1(u, j) -= lr * gw1(u, j);
        }
        for (std::size_t o = 0; o < out; ++o) {
            b2[o] -= lr * gb2[o];
            for (std::size_t u = 0; u < h; ++u) w2(o, u) -= lr * gw2(o, u);
        }
    }

    return MlpState{std::move(w1), std::move(w2), std::move(b1), std::move(b2)};
}

}  // namespace

Predictor fit_learner(const LearnerSpec& spec, const Matrix& r, const Dataset& data,
                      const std::vector<int>& rows, int d, const Loss& loss,
                      std::uint64_t seed) {
    if (rows.empty()) throw ConfigError("learner: empty training set");
    if (rows.size() != r.rows()) throw ConfigError("learner: score rows must match rows");
    if (d < 0 || static_cast<std::size_t>(d) > r.cols())
        throw ConfigError("learner: d out of range for the provided scores");
    check_loss_compat(data, loss);

    Predictor pred;
    pred.spec_ = spec;
    pred.d_ = d;
    pred.loss_ = loss;
    pred.n_classes_ = data.n_classes;

    if (d == 0 || spec.kind == LearnerKind::mean) {
        pred.constant_ = true;
        pred.const_pred_ = constant_prediction(data, rows, loss);
        return pred;
    }

    // per-column standardization of the consumed scores; degenerate columns
    // keep scale 1
    Matrix rd(rows.size(), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < d; ++j) rd(i, static_cast<std::size_t>(j)) = r(i, static_cast<std::size_t>(j));
    if (rows.size() < 2) {
        CenterScale cs;
        cs.mean.assign(static_cast<std::size_t>(d), 0.0);
        cs.scale.assign(static_cast<std::size_t>(d), 1.0);
        cs.degenerate.assign(static_cast<std::size_t>(d), 1);
        pred.score_cs_ = cs;
    } else {
        auto [z, cs] = standardize(rd);
        rd = std::move(z);
        pred.score_cs_ = std::move(cs);
    }

    switch (spec.kind) {
        case LearnerKind::mean:
            break;  // handled above
        case LearnerKind::ols: {
            if (loss.kind != LossKind::squared)
                throw ConfigError("learner: ols supports squared loss only");
            Matrix design(rows.size(), static_cast<std::size_t>(d) + 1);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                design(i, 0) = 1.0;
                for (int j = 0; j < d; ++j)
                    design(i, static_cast<std::size_t>(j) + 1) = rd(i, static_cast<std::size_t>(j));
            }
            Matrix y(rows.size(), data.y_cont.cols());
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < y.cols(); ++j)
                    y(i, j) = data.y_cont(static_cast<std::size_t>(rows[i]), j);
            try {
                pred.beta_ = ols_solve(design, y, spec.ridge);
            } catch (const NumericError&) {
                if (spec.ridge > 0.0) throw;
                pred.beta_ = ols_solve(design, y, 1e-8);
            }
            break;
        }
        case LearnerKind::knn: {
            const int k_eff =
                spec.k > 0 ? spec.k
                           : static_cast<int>(std::ceil(
                                 std::pow(static_cast<double>(rows.size()), 0.4)));
            if (k_eff > static_cast<int>(rows.size()))
                throw ConfigError("learner: knn k=" + std::to_string(k_eff) +
                                  " exceeds training rows (" + std::to_string(rows.size()) + ")");
            pred.knn_k_ = k_eff;
            pred.knn_points_ = rd;
            if (loss.kind == LossKind::squared) {
                Matrix y(rows.size(), data.y_cont.cols());
                for (std::size_t i = 0; i < rows.size(); ++i)
                    for (std::size_t j = 0; j < y.cols(); ++j)
                        y(i, j) = data.y_cont(static_cast<std::size_t>(rows[i]), j);
                pred.knn_y_ = std::move(y);
            } else {
                pred.knn_labels_.reserve(rows.size());
                for (int rr : rows)
                    pred.knn_labels_.push_back(data.y_label[static_cast<std::size_t>(rr)]);
            }
            break;
        }
        case LearnerKind::tree: {
            TreeBuilder builder{rd, data, rows, loss, spec.max_depth, spec.min_leaf, {}};
            std::vector<int> idx(rows.size());
            std::iota(idx.begin(), idx.end(), 0);
            builder.build(std::move(idx), 0);
            pred.tree_ = std::move(builder.nodes);
            break;
        }
        case LearnerKind::mlp: {
            MlpState state = fit_mlp(rd, data, rows, spec, loss, seed);
            pred.mlp_w1_ = std::move(state.w1);
            pred.mlp_w2_ = std::move(state.w2);
            pred.mlp_b1_ = std::move(state.b1);
            pred.mlp_b2_ = std::move(state.b2);
            break;
        }
    }
    return pred;
}

Prediction Predictor::predict_standardized(const double* z) const {
    const std::size_t d = static_cast<std::size_t>(d_);
    switch (spec_.kind) {
        case LearnerKind::mean:
            return const_pred_;
        case LearnerKind::ols: {
            std::vector<double> out(beta_.cols(), 0.0);
            for (std::size_t c = 0; c < beta_.cols(); ++c) {
                double s = beta_(0, c);
                for (std::size_t j = 0; j < d; ++j) s += beta_(j + 1, c) * z[j];
                out[c] = s;
            }
            return Prediction::make_continuous(std::move(out));
        }
        case LearnerKind::knn: {
            const std::size_t n = knn_points_.rows();
            std::vector<std::pair<double, std::size_t>> dist(n);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                const double* pt = knn_points_.row(i);
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = z[j] - pt[j];
                    s += diff * diff;
                }
                dist[i] = {s, i};
            }
            const std::size_t k = static_cast<std::size_t>(knn_k_);
            std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
            if (loss_.kind == LossKind::squared) {
                std::vector<double> out(knn_y_.cols(), 0.0);
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t c = 0; c < knn_y_.cols(); ++c)
                        out[c] += knn_y_(dist[i].second, c);
                for (auto& v : out) v /= static_cast<double>(k);
                return Prediction::make_continuous(std::move(out));
            }
            std::vector<int> counts(n_classes_, 0);
            for (std::size_t i = 0; i < k; ++i) ++counts[knn_labels_[dist[i].second]];
            if (loss_.kind == LossKind::zero_one)
                return Prediction::make_label(majority_label(counts));
            return Prediction::make_probabilities(laplace_probs(counts, k));
        }
        case LearnerKind::tree: {
            int node = 0;
            while (tree_[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree_[static_cast<std::size_t>(node)];
                node = z[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                               : nd.right;
            }
            const auto& leaf = tree_[static_cast<std::size_t>(node)];
            if (loss_.kind == LossKind::squared)
                return Prediction::make_continuous(leaf.value);
            if (loss_.kind == LossKind::zero_one) return Prediction::make_label(leaf.label);
            return Prediction::make_probabilities(leaf.probs);
        }
        case LearnerKind::mlp: {
            const std::size_t h = mlp_w1_.rows(), out = mlp_w2_.rows();
            std::vector<double> act(h), o(out);
            for (std::size_t u = 0; u < h; ++u) {
                double s = mlp_b1_[u];
                for (std::size_t j = 0; j < d; ++j) s += mlp_w1_(u, j) * z[j];
                act[u] = std::tanh(s);
            }
            for (std::size_t c = 0; c < out; ++c) {
                double s = mlp_b2_[c];
                for (std::size_t u = 0; u < h; ++u) s += mlp_w2_(c, u) * act[u];
                o[c] = s;
            }
            if (loss_.kind == LossKind::squared)
                return Prediction::make_continuous(std::move(o));
            double mx = o[0];
            for (double v : o) mx = std::max(mx, v);
            double denom = 0.0;
            for (double v : o) denom += std::exp(v - mx);
            if (loss_.kind == LossKind::zero_one) {
                int arg = 0;
                for (std::size_t c = 1; c < out; ++c)
                    if (o[c] > o[arg]) arg = static_cast<int>(c);
                return Prediction::make_label(arg);
            }
            std::vector<double> probs(out);
            for (std::size_t c = 0; c < out; ++c) probs[c] = std::exp(o[c] - mx) / denom;
            return Prediction::make_probabilities(std::move(probs));
        }
    }
    throw ConfigError("learner: unknown kind");
}

Prediction Predictor::predict_row(const double* scores, std::size_t n_cols) const {
    if (n_cols < static_cast<std::size_t>(d_))
        throw ConfigError("predict: scores have fewer columns than the predictor consumes");
    if (constant_) return const_pred_;
    std::vector<double> z(static_cast<std::size_t>(d_));
    for (int j = 0; j < d_; ++j)
        z[static_cast<std::size_t>(j)] =
            (scores[j] - score_cs_.mean[static_cast<std::size_t>(j)]) /
            score_cs_.scale[static_cast<std::size_t>(j)];
    return predict_standardized(z.data());
}

std::vector<Prediction> Predictor::predict(const Matrix& scores) const {
    std::vector<Prediction> out;
    out.reserve(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i)
        out.push_back(predict_row(scores.row(i), scores.cols()));
    return out;
}

std::vector<Prediction> Predictor::predict_rows(const Matrix& scores,
                                                const std::vector<int>& rows) const {
    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (int r : rows)
        out.push_back(predict_row(scores.row(static_cast<std::size_t>(r)), scores.cols()));
    return out;
}

SelectionResult select_learner(const std::vector<LearnerSpec>& candidates, const Matrix& r,
                               const Dataset& data, const std::vector<int>& rows, int d,
                               const Loss& loss, int inner_folds, const Rng& rng) {
    if (candidates.empty()) throw ConfigError("select_learner: no candidates");
    SelectionResult res;
    res.cv_risk.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
    if (candidates.size() == 1) {
        res.winner = 0;
        return res;
    }
    if (inner_folds < 2) throw ConfigError("select_learner: inner_folds must be >= 2");
    if (rows.size() < 2 * static_cast<std::size_t>(inner_folds))
        throw ConfigError("select_learner: too few rows for inner cross-validation");

    // one shared inner split for all candidates
    std::vector<std::size_t> perm(rows.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng split_rng = rng.child(stream::kInnerCv);
    split_rng.shuffle(perm);
    std::vector<std::vector<std::size_t>> fold_of(static_cast<std::size_t>(inner_folds));
    const std::size_t base = rows.size() / static_cast<std::size_t>(inner_folds);
    const std::size_t extra = rows.size() % static_cast<std::size_t>(inner_folds);
    std::size_t pos = 0;
    for (int f = 0; f < inner_folds; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i)
            fold_of[static_cast<std::size_t>(f)].push_back(perm[pos++]);
    }

    bool any_ok = false;
    std::string last_error;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        try {
            double total = 0.0;
            for (int f = 0; f < inner_folds; ++f) {
                std::vector<int> train_rows, test_rows;
                std::vector<std::size_t> train_local;
                for (int g = 0; g < inner_folds; ++g)
                    for (std::size_t li : fold_of[static_cast<std::size_t>(g)]) {
                        if (g == f)
                            test_rows.push_back(rows[li]);
                        else {
                            train_rows.push_back(rows[li]);
                            train_local.push_back(li);
                        }
                    }
                Matrix r_train(train_local.size(), r.cols());
                for (std::size_t i = 0; i < train_local.size(); ++i)
                    for (std::size_t j = 0; j < r.cols(); ++j)
                        r_train(i, j) = r(train_local[i], j);
                const std::uint64_t seed =
                    rng.child(stream::kLearner, ci, static_cast<std::uint64_t>(f)).next_u64();
                const Predictor pred =
                    fit_learner(candidates[ci], r_train, data, train_rows, d, loss, seed);
                double risk = 0.0;
                for (std::size_t li : fold_of[static_cast<std::size_t>(f)]) {
                    const Prediction yhat = pred.predict_row(r.row(li), r.cols());
                    risk += loss_eval(loss, data,
                                      static_cast<std::size_t>(rows[li]), yhat);
                }
                total += risk / static_cast<double>(fold_of[static_cast<std::size_t>(f)].size());
            }
            res.cv_risk[ci] = total / static_cast<double>(inner_folds);
            any_ok = true;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    if (!any_ok)
        throw ConfigError("select_learner: all candidates failed (last: " + last_error + ")");

    std::size_t best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        if (std::isnan(res.cv_risk[ci])) continue;
        if (res.cv_risk[ci] < best_risk) {
            best_risk = res.cv_risk[ci];
            best = ci;
        }
    }
    res.winner = best;
    return res;
}

Predictor select_and_fit(const std::vector<LearnerSpec>& candidates, const Matrix& r,
                         const Dataset& data, const std::vector<int>& rows, int d,
                         const Loss& loss, int inner_folds, const Rng& rng) {
    std::size_t winner = 0;
    if (candidates.size() > 1 && d > 0)
        winner = select_learner(candidates, r, data, rows, d, loss, inner_folds, rng).winner;
    const std::uint64_t seed = rng.child(stream::kRefit, winner).next_u64();
    return fit_learner(candidates[winner], r, data, rows, d, loss, seed);
}

}  // namespace pod
