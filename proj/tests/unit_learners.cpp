#include <cmath>
#include <limits>

#include "doctest.h"
#include "pod/errors.hpp"
#include "pod/learners.hpp"
#include "pod/rng.hpp"

using namespace pod;

namespace {

std::vector<int> all_rows(std::size_t n) {
    std::vector<int> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<int>(i);
    return r;
}

double training_risk(const Predictor& pred, const Matrix& r, const Dataset& data,
                     const std::vector<int>& rows, const Loss& loss) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Prediction yhat = pred.predict_row(r.row(i), r.cols());
        s += loss_eval(loss, data, static_cast<std::size_t>(rows[i]), yhat);
    }
    return s / static_cast<double>(rows.size());
}

}  // namespace

TEST_CASE("d = 0 collapses to the constant rule") {
    Matrix x(3, 2);
    Matrix r(3, 2);
    Matrix y = Matrix::from_rows({{1.0}, {2.0}, {3.0}});
    const Dataset cont = Dataset::continuous(x, y);
    const Predictor mean_pred = fit_learner(LearnerSpec::ols_learner(), r, cont, all_rows(3), 0,
                                            Loss::squared(), 1);
    const Prediction p = mean_pred.predict_row(r.row(0), 2);
    CHECK(p.values[0] == doctest::Approx(2.0));

    const Dataset cat = Dataset::categorical(x, {0, 0, 1}, 2);
    const Predictor maj = fit_learner(LearnerSpec::knn_learner(1), r, cat, all_rows(3), 0,
                                      Loss::zero_one(2), 1);
    CHECK(maj.predict_row(r.row(1), 2).label == 0);

    const Predictor freq = fit_learner(LearnerSpec::tree_learner(), r, cat, all_rows(3), 0,
                                       Loss::cross_entropy(2), 1);
    const Prediction probs = freq.predict_row(r.row(2), 2);
    CHECK(probs.values[0] == doctest::Approx(3.0 / 5.0));  // (2+1)/(3+2)
    CHECK(probs.values[1] == doctest::Approx(2.0 / 5.0));
}

TEST_CASE("ols learner reproduces an exact line") {
    Rng rng(1);
    const std::size_t n = 30;
    Matrix r(n, 3);
    Matrix y(n, 1);
    Matrix x(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) r(i, j) = rng.next_normal();
        y(i, 0) = 2.0 * r(i, 0) + 1.0;
    }
    const Dataset data = Dataset::continuous(x, y);
    const Predictor pred =
        fit_learner(LearnerSpec::ols_learner(), r, data, all_rows(n), 1, Loss::squared(), 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Prediction yh = pred.predict_row(r.row(i), 3);
        CHECK(std::fabs(yh.values[0] - y(i, 0)) <= 1e-8);
    }
}

TEST_CASE("knn with k = 1 memorizes training points") {
    Rng rng(2);
    const std::size_t n = 20;
    Matrix r(n, 2);
    Matrix y(n, 1);
    Matrix x(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        r(i, 0) = rng.next_normal();
        r(i, 1) = rng.next_normal();
        y(i, 0) = rng.next_normal();
    }
    const Dataset data = Dataset::continuous(x, y);
    const Predictor pred =
        fit_learner(LearnerSpec::knn_learner(1), r, data, all_rows(n), 2, Loss::squared(), 1);
    CHECK(training_risk(pred, r, data, all_rows(n), Loss::squared()) == doctest::Approx(0.0));
}

TEST_CASE("knn rejects k beyond the training size") {
    Matrix r(3, 1);
    Matrix x(3, 1);
    const Dataset d = Dataset::categorical(x, {0, 1, 0}, 2);
    CHECK_THROWS_AS(
        fit_learner(LearnerSpec::knn_learner(5), r, d, all_rows(3), 1, Loss::zero_one(2), 1),
        ConfigError);
}

TEST_CASE("depth-1 tree separates 1-d classes and matches a brute-force stump") {
    // perfectly separated classes
    Matrix r = Matrix::from_rows({{-2.0}, {-1.5}, {-1.0}, {1.0}, {1.5}, {2.0}});
    Matrix x(6, 1);
    const Dataset cat = Dataset::categorical(x, {0, 0, 0, 1, 1, 1}, 2);
    const Predictor stump = fit_learner(LearnerSpec::tree_learner(1, 1), r, cat, all_rows(6), 1,
                                        Loss::zero_one(2), 1);
    CHECK(training_risk(stump, r, cat, all_rows(6), Loss::zero_one(2)) == doctest::Approx(0.0));

    // regression stump equals the exhaustively scanned best split
    Rng rng(3);
    const std::size_t n = 40;
    Matrix rr(n, 1);
    Matrix y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        rr(i, 0) = rng.next_normal();
        y(i, 0) = rng.next_normal() + (rr(i, 0) > 0.3 ? 2.0 : 0.0);
    }
    const Dataset cont_real = Dataset::continuous(Matrix(n, 1), y);
    const Predictor tree = fit_learner(LearnerSpec::tree_learner(1, 1), rr, cont_real,
                                       all_rows(n), 1, Loss::squared(), 1);
    const double tree_sse = training_risk(tree, rr, cont_real, all_rows(n), Loss::squared()) *
                            static_cast<double>(n);

    // oracle: scan every midpoint split
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
        const double thr = rr(a, 0);
        double sl = 0.0, sr = 0.0;
        std::size_t nl = 0, nr = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (rr(i, 0) <= thr) {
                sl += y(i, 0);
                ++nl;
            } else {
                sr += y(i, 0);
                ++nr;
            }
        if (nl == 0 || nr == 0) continue;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = rr(i, 0) <= thr ? sl / nl : sr / nr;
            sse += (y(i, 0) - mu) * (y(i, 0) - mu);
        }
        best = std::min(best, sse);
    }
    CHECK(tree_sse == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("predictions depend on exactly the first d coordinates") {
    Rng rng(4);
    const std::size_t n = 50;
    Matrix r(n, 4);
    Matrix y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 4; ++j) r(i, j) = rng.next_normal();
        y(i, 0) = r(i, 0) + rng.next_normal();
    }
    const Dataset data = Dataset::continuous(Matrix(n, 1), y);
    for (const LearnerSpec& spec :
         {LearnerSpec::ols_learner(), LearnerSpec::knn_learner(3),
          LearnerSpec::tree_learner(3, 2), LearnerSpec::mlp_learner(3, 50, 0.05)}) {
        const Predictor pred = fit_learner(spec, r, data, all_rows(n), 2, Loss::squared(), 7);
        double probe[4] = {0.4, -0.2, 9.9, -7.7};
        const Prediction a = pred.predict_row(probe, 4);
        probe[2] = -123.0;
        probe[3] = 55.5;
        const Prediction b = pred.predict_row(probe, 4);
        CHECK(a.values[0] == b.values[0]);
    }
}

TEST_CASE("ols training risk is monotone in d (nested classes)") {
    Rng rng(5);
    const std::size_t n = 60;
    Matrix r(n, 5);
    Matrix y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 5; ++j) r(i, j) = rng.next_normal();
        y(i, 0) = r(i, 0) - 0.5 * r(i, 2) + 0.3 * rng.next_normal();
    }
    const Dataset data = Dataset::continuous(Matrix(n, 1), y);
    double prev = std::numeric_limits<double>::infinity();
    for (int d = 0; d <= 5; ++d) {
        const Predictor pred =
            fit_learner(LearnerSpec::ols_learner(), r, data, all_rows(n), d, Loss::squared(), 1);
        const double risk = training_risk(pred, r, data, all_rows(n), Loss::squared());
        CHECK(risk <= prev + 1e-8);
        prev = risk;
    }
}

TEST_CASE("mlp is deterministic given the seed and probabilities sum to 1") {
    Rng rng(6);
    const std::size_t n = 40;
    Matrix r(n, 2);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        r(i, 0) = rng.next_normal();
        r(i, 1) = rng.next_normal();
        labels[i] = r(i, 0) > 0 ? 1 : 0;
    }
    const Dataset data = Dataset::categorical(Matrix(n, 1), labels, 2);
    const LearnerSpec spec = LearnerSpec::mlp_learner(4, 100, 0.05);
    const Predictor a =
        fit_learner(spec, r, data, all_rows(n), 2, Loss::cross_entropy(2), 99);
    const Predictor b =
        fit_learner(spec, r, data, all_rows(n), 2, Loss::cross_entropy(2), 99);
    for (std::size_t i = 0; i < n; ++i) {
        const Prediction pa = a.predict_row(r.row(i), 2);
        const Prediction pb = b.predict_row(r.row(i), 2);
        CHECK(pa.values == pb.values);
        double sum = 0.0;
        for (double v : pa.values) sum += v;
        CHECK(std::fabs(sum - 1.0) <= 1e-8);
    }
}

TEST_CASE("single candidate is returned unchanged") {
    Matrix r(10, 1);
    Matrix y(10, 1);
    const Dataset data = Dataset::continuous(Matrix(10, 1), y);
    const SelectionResult res = select_learner({LearnerSpec::ols_learner()}, r, data,
                                               all_rows(10), 1, Loss::squared(), 2, Rng(1));
    CHECK(res.winner == 0);
}

TEST_CASE("selection favors ols on a linear target") {
    int ols_wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t n = 500;
        Matrix r(n, 1);
        Matrix y(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            r(i, 0) = rng.next_normal();
            y(i, 0) = 1.5 * r(i, 0) + 0.5 * rng.next_normal();
        }
        const Dataset data = Dataset::continuous(Matrix(n, 1), y);
        const SelectionResult res =
            select_learner({LearnerSpec::ols_learner(), LearnerSpec::knn_learner(5)}, r, data,
                           all_rows(n), 1, Loss::squared(), 2, Rng(seed));
        if (res.winner == 0) ++ols_wins;
    }
    CHECK(ols_wins >= 90);
}

TEST_CASE("selection favors a flexible learner on a quadratic target") {
    int flex_wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed + 1000);
        const std::size_t n = 500;
        Matrix r(n, 1);
        Matrix y(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            r(i, 0) = rng.next_normal();
            y(i, 0) = r(i, 0) * r(i, 0) + 0.3 * rng.next_normal();
        }
        const Dataset data = Dataset::continuous(Matrix(n, 1), y);
        const SelectionResult res = select_learner(
            {LearnerSpec::ols_learner(), LearnerSpec::knn_learner(0),
             LearnerSpec::tree_learner(4, 10)},
            r, data, all_rows(n), 1, Loss::squared(), 2, Rng(seed));
        if (res.winner != 0) ++flex_wins;
    }
    CHECK(flex_wins >= 90);
}

TEST_CASE("selection skips incompatible candidates and errors when all fail") {
    Matrix r(20, 1);
    Rng rng(8);
    std::vector<int> labels(20);
    for (std::size_t i = 0; i < 20; ++i) {
        r(i, 0) = rng.next_normal();
        labels[i] = r(i, 0) > 0 ? 1 : 0;
    }
    const Dataset cat = Dataset::categorical(Matrix(20, 1), labels, 2);
    // ols cannot fit a categorical loss; knn can
    const SelectionResult res =
        select_learner({LearnerSpec::ols_learner(), LearnerSpec::knn_learner(3)}, r, cat,
                       all_rows(20), 1, Loss::zero_one(2), 2, Rng(2));
    CHECK(res.winner == 1);
    CHECK_THROWS_AS(select_learner({LearnerSpec::ols_learner(), LearnerSpec::ols_learner()}, r,
                                   cat, all_rows(20), 1, Loss::zero_one(2), 2, Rng(2)),
                    ConfigError);
}

TEST_CASE("learner spec parsing") {
    CHECK(LearnerSpec::parse("ols").kind == LearnerKind::ols);
    CHECK(LearnerSpec::parse("knn:5").k == 5);
    const LearnerSpec t = LearnerSpec::parse("tree:3:7");
    CHECK(t.max_depth == 3);
    CHECK(t.min_leaf == 7);
    CHECK(LearnerSpec::parse("mlp:9").hidden == 9);
    CHECK_THROWS_AS(LearnerSpec::parse("svm"), ConfigError);
}
