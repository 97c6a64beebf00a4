#include "pod/losses.hpp"

#include <cmath>
#include <string>

#include "pod/errors.hpp"

namespace pod {

double squared_loss(const std::vector<double>& y, const Prediction& yhat) {
    if (yhat.kind != Prediction::Kind::continuous)
        throw ConfigError("loss: squared loss needs a continuous prediction");
    if (yhat.values.size() != y.size())
        throw ConfigError("loss: prediction dimension " + std::to_string(yhat.values.size()) +
                          " does not match response dimension " + std::to_string(y.size()));
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double d = y[j] - yhat.values[j];
        s += d * d;
    }
    return s;
}

double zero_one_loss(int y, int n_classes, const Prediction& yhat) {
    if (yhat.kind != Prediction::Kind::hard_label)
        throw ConfigError("loss: 0-1 loss needs a hard-label prediction");
    if (yhat.label < 0 || yhat.label >= n_classes)
        throw ConfigError("loss: predicted label out of range");
    return y == yhat.label ? 0.0 : 1.0;
}

double cross_entropy_loss(int y, int n_classes, double clip, const Prediction& yhat) {
    if (yhat.kind != Prediction::Kind::probabilities)
        throw ConfigError("loss: cross-entropy needs a probability prediction");
    if (static_cast<int>(yhat.values.size()) != n_classes)
        throw ConfigError("loss: probability vector length does not match class count");
    double sum = 0.0;
    for (double v : yhat.values) {
        if (v < -1e-12) throw ConfigError("loss: negative probability in prediction");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-8)
        throw ConfigError("loss: probabilities sum to " + std::to_string(sum) + ", expected 1");
    return -std::log(std::max(yhat.values[static_cast<std::size_t>(y)], clip));
}

double loss_eval(const Loss& loss, const Dataset& data, std::size_t i, const Prediction& yhat) {
    switch (loss.kind) {
        case LossKind::squared: {
            if (data.kind != ResponseKind::continuous)
                throw ConfigError("loss: squared loss needs a continuous response");
            std::vector<double> y(data.y_cont.row(i), data.y_cont.row(i) + data.y_cont.cols());
            return squared_loss(y, yhat);
        }
        case LossKind::zero_one:
            if (data.kind != ResponseKind::categorical)
                throw ConfigError("loss: 0-1 loss needs a categorical response");
            return zero_one_loss(data.y_label[i], loss.n_classes, yhat);
        case LossKind::cross_entropy:
            if (data.kind != ResponseKind::categorical)
                throw ConfigError("loss: cross-entropy needs a categorical response");
            return cross_entropy_loss(data.y_label[i], loss.n_classes, loss.clip, yhat);
    }
    throw ConfigError("loss: unknown kind");
}

RiskSummary mean_risk(const Loss& loss, const Dataset& data, const std::vector<int>& rows,
                      const std::vector<Prediction>& yhats) {
    if (rows.empty()) throw ConfigError("mean_risk: empty sample");
    if (rows.size() != yhats.size()) throw ConfigError("mean_risk: length mismatch");
    RiskSummary out;
    out.per_sample.reserve(rows.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double l = loss_eval(loss, data, static_cast<std::size_t>(rows[i]), yhats[i]);
        out.per_sample.push_back(l);
        sum += l;
    }
    out.mean = sum / static_cast<double>(rows.size());
    return out;
}

}  // namespace pod
