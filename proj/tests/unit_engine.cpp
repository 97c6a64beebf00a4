#include <cmath>

#include "doctest.h"
#include "pod/engine.hpp"
#include "pod/errors.hpp"
#include "pod/rng.hpp"

using namespace pod;

namespace {

// the 12-point fixture with the fixed 2-fold plan used by the hand oracle
Dataset fixture_dataset() {
    Matrix x = Matrix::from_rows({{0.5}, {1.0}, {-0.2}, {0.3}, {1.4}, {-1.1},
                                  {0.8}, {-0.6}, {0.1}, {1.2}, {-0.3}, {0.7}});
    Matrix y = Matrix::from_rows({{1.2}, {2.1}, {-0.3}, {0.6}, {2.9}, {-2.0},
                                  {1.5}, {-1.4}, {0.2}, {2.6}, {-0.8}, {1.3}});
    return Dataset::continuous(std::move(x), std::move(y));
}

FoldPlan fixture_plan() {
    FoldPlan plan;
    plan.n = 12;
    plan.tau_nominal = 0.0;
    plan.tau_realized = 0.0;
    plan.a = {{0, 1, 2}, {6, 7, 8}};
    plan.b = {{3, 4, 5}, {9, 10, 11}};
    plan.o = {{}, {}};
    plan.folds = {{0, 1, 2, 3, 4, 5}, {6, 7, 8, 9, 10, 11}};
    plan.fold_tau = {0.0, 0.0};
    return plan;
}

PODConfig fixture_config() {
    PODConfig c;
    c.k_folds = 2;
    c.d_max = 1;
    c.tau = 0.0;
    c.alpha = 0.05;
    c.loss = Loss::squared();
    c.reducer.kind = ReducerKind::pca;
    c.learners = {LearnerSpec::ols_learner()};
    c.seed = 1;
    return c;
}

}  // namespace

TEST_CASE("gaussian cdf and quantile") {
    CHECK(gaussian_cdf(0.0) == doctest::Approx(0.5));
    CHECK(gaussian_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-5));
    CHECK(gaussian_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-5));
    for (double p = 0.001; p < 0.9995; p += 0.0173)
        CHECK(std::fabs(gaussian_cdf(gaussian_quantile(p)) - p) <= 1e-9);
    CHECK_THROWS_AS(gaussian_quantile(0.0), ConfigError);
    CHECK_THROWS_AS(gaussian_quantile(1.5), ConfigError);
}

TEST_CASE("fold plan: exact overlap solution at n=120, K=5, tau=0.8") {
    const FoldPlan plan = make_fold_plan(120, 5, 0.8, 3);
    for (int k = 0; k < 5; ++k) {
        CHECK(plan.folds[k].size() == 24);
        CHECK(plan.a[k].size() == 4);
        CHECK(plan.b[k].size() == 4);
        CHECK(plan.o[k].size() == 16);
        CHECK(plan.fold_tau[k] == doctest::Approx(0.8));
    }
    CHECK(plan.tau_realized == doctest::Approx(0.8));
}

TEST_CASE("fold plan: rounding at n=100, K=5, tau=0.8") {
    const FoldPlan plan = make_fold_plan(100, 5, 0.8, 3);
    for (int k = 0; k < 5; ++k) {
        CHECK(plan.folds[k].size() == 20);
        CHECK(plan.a[k].size() == 3);
        CHECK(plan.o[k].size() == 14);
        CHECK(plan.fold_tau[k] == doctest::Approx(14.0 / 17.0));
    }
}

TEST_CASE("fold plan: tau = 0 gives a pure split") {
    const FoldPlan plan = make_fold_plan(40, 4, 0.0, 9);
    for (int k = 0; k < 4; ++k) {
        CHECK(plan.o[k].empty());
        CHECK(plan.a[k].size() == 5);
        CHECK(plan.b[k].size() == 5);
    }
    CHECK(plan.tau_realized == 0.0);
}

TEST_CASE("fold plan partitions [n] with balanced disjoint folds") {
    const FoldPlan plan = make_fold_plan(47, 4, 0.6, 5);
    std::vector<int> seen(47, 0);
    std::size_t lo = 1000, hi = 0;
    for (int k = 0; k < 4; ++k) {
        lo = std::min(lo, plan.folds[k].size());
        hi = std::max(hi, plan.folds[k].size());
        for (int r : plan.folds[k]) ++seen[static_cast<std::size_t>(r)];
        CHECK(plan.a[k].size() == plan.b[k].size());
        CHECK(plan.a[k].size() + plan.b[k].size() + plan.o[k].size() == plan.folds[k].size());
    }
    CHECK(hi - lo <= 1);
    for (int c : seen) CHECK(c == 1);
    CHECK_THROWS_AS(make_fold_plan(10, 5, 0.8, 1), DataError);
}

TEST_CASE("psi_hat is the mean of fold contrasts") {
    FoldRisk z;
    CHECK(psi_hat({z, z}, {z, z}) == doctest::Approx(0.0));
    FoldRisk a1, a2, b1, b2;
    a1.weighted = 0.5;
    b1.weighted = 0.3;
    a2.weighted = 1.0;
    b2.weighted = 0.6;
    CHECK(psi_hat({a1, a2}, {b1, b2}) == doctest::Approx(0.3));
}

TEST_CASE("variance_hat direct formula and zero-variance case") {
    FoldRisk s1, s2;
    s1.sigma2 = 1.0;
    s2.sigma2 = 1.0;
    CHECK(variance_hat({s1, s2}, {s1, s2}, 0.5) == doctest::Approx(1.0));
    FoldRisk z;
    CHECK(variance_hat({z}, {z}, 0.3) == doctest::Approx(0.0));
}

TEST_CASE("variance_hat matches a brute-force recomputation from raw losses") {
    Rng rng(44);
    const FoldPlan plan = make_fold_plan(60, 3, 0.5, 17);
    std::vector<FoldRisk> arm_d, arm_ref;
    double brute = 0.0;
    for (int k = 0; k < 3; ++k) {
        const std::size_t m = plan.folds[k].size();
        std::vector<double> ld(m), lref(m);
        for (std::size_t i = 0; i < m; ++i) {
            ld[i] = rng.next_double() * 3.0;
            lref[i] = rng.next_double() * 2.0;
        }
        arm_d.push_back(fold_risk_from_losses(ld, plan, k, Arm::candidate));
        arm_ref.push_back(fold_risk_from_losses(lref, plan, k, Arm::reference));
        for (const auto& lv : {ld, lref}) {
            double mean = 0.0;
            for (double v : lv) mean += v;
            mean /= static_cast<double>(m);
            double var = 0.0;
            for (double v : lv) var += (v - mean) * (v - mean);
            brute += var / static_cast<double>(m);
        }
    }
    brute *= (1.0 - plan.tau_realized) / 3.0;
    CHECK(std::fabs(variance_hat(arm_d, arm_ref, plan.tau_realized) - brute) <= 1e-12);
}

TEST_CASE("t_stat hand values and homogeneity") {
    CHECK(t_stat(0.0, 1.0, 50, 0.5).t == doctest::Approx(0.0));
    CHECK(t_stat(0.0, 1.0, 50, 0.5).p == doctest::Approx(0.5));
    const TStat ts = t_stat(0.1, 0.25, 108, 0.8);
    CHECK(ts.t == doctest::Approx(1.8973665961010278).epsilon(1e-12));
    CHECK(ts.p == doctest::Approx(0.028889785561798619).epsilon(1e-9));
    // scaling losses by c scales psi by c and sqrt(nu2) by c
    const TStat scaled = t_stat(0.1 * 7.0, 0.25 * 49.0, 108, 0.8);
    CHECK(scaled.t == doctest::Approx(ts.t).epsilon(1e-12));
    // degenerate variance
    CHECK(t_stat(0.0, 0.0, 10, 0.0).t == 0.0);
    CHECK(t_stat(1.0, 0.0, 10, 0.0).p == 0.0);
    CHECK(t_stat(-1.0, 0.0, 10, 0.0).p == 1.0);
    CHECK(std::isinf(t_stat(1.0, 0.0, 10, 0.0).t));
}

TEST_CASE("shared-o cancellation: same losses in both arms") {
    Rng rng(45);
    for (int trial = 0; trial < 100; ++trial) {
        const FoldPlan plan = make_fold_plan(30 + rng.next_below(40), 2, 0.7,
                                             1000 + static_cast<std::uint64_t>(trial));
        for (int k = 0; k < 2; ++k) {
            const std::size_t m = plan.folds[k].size();
            std::vector<double> losses(m);
            for (auto& v : losses) v = rng.next_double() * 5.0;
            const FoldRisk cand = fold_risk_from_losses(losses, plan, k, Arm::candidate);
            const FoldRisk ref = fold_risk_from_losses(losses, plan, k, Arm::reference);
            const double s = static_cast<double>(plan.a[k].size());
            double mean_a = 0.0, mean_b = 0.0;
            for (std::size_t i = 0; i < s; ++i) {
                mean_a += losses[i];
                mean_b += losses[static_cast<std::size_t>(s) + i];
            }
            mean_a /= s;
            mean_b /= s;
            const double expected = (1.0 - plan.fold_tau[k]) * (mean_a - mean_b);
            CHECK(std::fabs((cand.weighted - ref.weighted) - expected) <= 1e-12);
        }
    }
}

TEST_CASE("within-part permutation leaves fold risks unchanged") {
    Rng rng(46);
    const FoldPlan plan = make_fold_plan(24, 2, 0.5, 7);
    const std::size_t m = plan.folds[0].size();
    std::vector<double> losses(m);
    for (auto& v : losses) v = rng.next_double();
    const FoldRisk base = fold_risk_from_losses(losses, plan, 0, Arm::candidate);
    // swap two entries inside the o block
    const std::size_t s = plan.a[0].size();
    std::vector<double> permuted = losses;
    std::swap(permuted[2 * s], permuted[m - 1]);
    const FoldRisk perm = fold_risk_from_losses(permuted, plan, 0, Arm::candidate);
    CHECK(perm.risk_o == doctest::Approx(base.risk_o).epsilon(1e-15));
    CHECK(perm.risk_arm == base.risk_arm);
    CHECK(perm.weighted == doctest::Approx(base.weighted).epsilon(1e-15));
    CHECK(perm.sigma2 == doctest::Approx(base.sigma2).epsilon(1e-15));
}

TEST_CASE("hand-oracle cross-fit fixture reproduces frozen values") {
    const Dataset data = fixture_dataset();
    const FoldPlan plan = fixture_plan();
    const PODConfig config = fixture_config();
    const EngineCache cache = prepare_cache(data, config, plan);

    // reference arm: ols on the single pca coordinate, evaluated on b
    CHECK(cache.dmax_risk[0].weighted == doctest::Approx(0.084334260232357697).epsilon(1e-10));
    CHECK(cache.dmax_risk[1].weighted == doctest::Approx(0.055620329970338812).epsilon(1e-10));
    CHECK(cache.dmax_risk[0].sigma2 == doctest::Approx(0.0075400001049410609).epsilon(1e-10));
    CHECK(cache.dmax_risk[1].sigma2 == doctest::Approx(0.0018636271110618477).epsilon(1e-10));

    // candidate arm at d = 0: fold-mean predictor, evaluated on a
    const std::vector<FoldRisk> arm0 = crossfit_dimension(data, config, plan, 0, cache);
    CHECK(arm0[0].weighted == doctest::Approx(1.1677777777777776).epsilon(1e-10));
    CHECK(arm0[1].weighted == doctest::Approx(1.8291666666666666).epsilon(1e-10));
    CHECK(arm0[0].sigma2 == doctest::Approx(6.5103731481481484).epsilon(1e-10));
    CHECK(arm0[1].sigma2 == doctest::Approx(2.8112888888888889).epsilon(1e-10));

    const double psi = psi_hat(arm0, cache.dmax_risk);
    const double nu2 = variance_hat(arm0, cache.dmax_risk, plan.tau_realized);
    const TStat ts = t_stat(psi, nu2, plan.n, plan.tau_realized);
    CHECK(psi == doctest::Approx(1.4284949271208738).epsilon(1e-10));
    CHECK(nu2 == doctest::Approx(4.6655328321265204).epsilon(1e-10));
    CHECK(ts.t == doctest::Approx(1.6199578050868237).epsilon(1e-10));
    CHECK(ts.p == doctest::Approx(0.052620670599162069).epsilon(1e-10));
}

TEST_CASE("select_order: deterministic trail with valid structure") {
    Rng rng(50);
    const std::size_t n = 120;
    Matrix x(n, 4);
    Matrix y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.next_normal();
        y(i, 0) = 2.0 * x(i, 0) + 0.5 * rng.next_normal();
    }
    const Dataset data = Dataset::continuous(x, y);
    PODConfig c;
    c.k_folds = 3;
    c.d_max = 3;
    c.tau = 0.5;
    c.alpha = 0.05;
    c.reducer.kind = ReducerKind::identity;
    c.learners = {LearnerSpec::ols_learner()};
    c.seed = 11;

    const PODResult a = select_order(data, c);
    const PODResult b = select_order(data, c);
    REQUIRE(a.trail.size() == b.trail.size());
    for (std::size_t i = 0; i < a.trail.size(); ++i) {
        CHECK(a.trail[i].psi == b.trail[i].psi);
        CHECK(a.trail[i].t == b.trail[i].t);
        CHECK(a.trail[i].reject == b.trail[i].reject);
        CHECK(a.trail[i].p_value == doctest::Approx(1.0 - gaussian_cdf(a.trail[i].t)));
        CHECK(a.trail[i].reject == (a.trail[i].t >= a.trail[i].z_crit));
    }
    CHECK(a.d_hat == b.d_hat);
    CHECK(a.d_hat >= 0);
    CHECK(a.d_hat <= c.d_max);
    // sequential structure: all rejects then one acceptance
    if (a.d_hat < c.d_max) {
        for (std::size_t i = 0; i + 1 < a.trail.size(); ++i) CHECK(a.trail[i].reject);
        CHECK_FALSE(a.trail.back().reject);
    }
}

TEST_CASE("oracle-representation null calibration (small run)") {
    int rejections = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(7000 + static_cast<std::uint64_t>(rep));
        const std::size_t n = 400;
        Matrix x(n, 2);
        Matrix y(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            x(i, 0) = rng.next_normal();
            x(i, 1) = rng.next_normal();
            y(i, 0) = 2.0 * x(i, 0) + rng.next_normal();
        }
        const Dataset data = Dataset::continuous(x, y);
        PODConfig c;
        c.k_folds = 5;
        c.d_max = 2;
        c.tau = 0.5;
        c.alpha = 0.05;
        c.reducer.kind = ReducerKind::identity;
        c.learners = {LearnerSpec::ols_learner()};
        c.seed = 9000 + static_cast<std::uint64_t>(rep);
        const PODResult res = select_order(data, c, TestMode::per_step_all);
        if (res.trail[1].reject) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.10);
}

TEST_CASE("pure-noise response selects d = 0 nearly always") {
    int zero = 0;
    const int reps = 60;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(3000 + static_cast<std::uint64_t>(rep));
        const std::size_t n = 200;
        Matrix x(n, 5);
        Matrix y(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 5; ++j) x(i, j) = rng.next_normal();
            y(i, 0) = rng.next_normal();
        }
        const Dataset data = Dataset::continuous(x, y);
        PODConfig c;
        c.k_folds = 5;
        c.d_max = 4;
        c.tau = 0.8;
        c.alpha = 0.05;
        c.reducer.kind = ReducerKind::identity;
        c.learners = {LearnerSpec::ols_learner()};
        c.seed = 100 + static_cast<std::uint64_t>(rep);
        if (select_order(data, c).d_hat == 0) ++zero;
    }
    CHECK(zero >= static_cast<int>(0.9 * reps));
}
