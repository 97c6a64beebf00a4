#include <cmath>

#include "doctest.h"
#include "pod/baselines.hpp"
#include "pod/dataset.hpp"
#include "pod/errors.hpp"
#include "pod/numerics.hpp"
#include "pod/rng.hpp"

using namespace pod;

namespace {

Matrix random_low_rank(std::size_t n, std::size_t p, std::size_t rank, double noise,
                       std::uint64_t seed) {
    Rng rng(seed);
    Matrix f(n, rank), l(rank, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < rank; ++j) f(i, j) = rng.next_normal();
    for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < p; ++j) l(i, j) = rng.next_normal();
    Matrix x = kernels::matmul(f, l);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) x(i, j) += noise * rng.next_normal();
    return x;
}

}  // namespace

TEST_CASE("ic_p1 recovers constructed low ranks") {
    for (std::size_t r : {1u, 2u, 3u}) {
        const Matrix x = random_low_rank(200, 20, r, 1e-6, 100 + r);
        CHECK(ic_p1(x, 8).k_hat == static_cast<int>(r));
    }
}

TEST_CASE("ic_p1 tail sum equals the truncated-svd residual") {
    Rng rng(7);
    const std::size_t n = 60, p = 12;
    Matrix x(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) x(i, j) = rng.next_normal();
    // center, as ic_p1 does internally
    Matrix c(n, p);
    const auto mu = column_means(x);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) c(i, j) = x(i, j) - mu[j];

    const IcResult res = ic_p1(x, 8);
    const Spectrum spec = sym_eigen(kernels::gram(c, 1.0));
    for (int k = 1; k <= 8; ++k) {
        // projection residual ||C - C V_k V_k^T||_F^2 / (n p)
        Matrix vk(p, static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < p; ++i)
            for (int j = 0; j < k; ++j) vk(i, static_cast<std::size_t>(j)) = spec.vectors(i, j);
        const Matrix proj = kernels::matmul(kernels::matmul(c, vk), transpose(vk));
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                const double d = c(i, j) - proj(i, j);
                resid += d * d;
            }
        resid /= static_cast<double>(n * p);
        double tail = 0.0;
        for (std::size_t i = static_cast<std::size_t>(k); i < p; ++i)
            tail += res.eigenvalues[i];
        CHECK(std::fabs(tail - resid) <= 1e-10);
    }
}

TEST_CASE("ic_p1 V(k) decreases while eigenvalues are positive") {
    const Matrix x = random_low_rank(80, 10, 4, 0.5, 11);
    const IcResult res = ic_p1(x, 6);
    double prev = 1e300;
    for (std::size_t k = 1; k <= 6; ++k) {
        double tail = 0.0;
        for (std::size_t i = k; i < res.eigenvalues.size(); ++i) tail += res.eigenvalues[i];
        CHECK(tail < prev);
        prev = tail;
    }
}

TEST_CASE("eigenvalue ratio: spectrum-level and constructed cases") {
    CHECK(er_from_eigs({100.0, 50.0, 1.0, 0.9, 0.8}, 4).k_hat == 2);
    CHECK(er_from_eigs({3.0, 3.0, 3.0, 3.0}, 3).k_hat == 1);  // flat: tie to smallest
    const Matrix x = random_low_rank(300, 12, 1, 0.05, 13);
    CHECK(eigenvalue_ratio(x, 6).k_hat == 1);
    CHECK_THROWS_AS(er_from_eigs({1.0, 0.0, 0.0}, 2), NumericError);
}

TEST_CASE("kapetanios statistic from a spectrum") {
    // lambda_{d+1} - lambda_{dmax+1} with 1-based eigenvalue indexing
    CHECK(kapetanios_stat_from_eigs({5.0, 4.0, 3.0, 2.0, 1.0}, 1, 3) == doctest::Approx(2.0));
    CHECK(kapetanios_stat_from_eigs({5.0, 4.0, 3.0, 2.0, 1.0}, 0, 4) == doctest::Approx(4.0));
    CHECK_THROWS_AS(kapetanios_stat_from_eigs({5.0, 4.0}, 1, 3), ConfigError);
}

TEST_CASE("kapetanios statistic is deterministic and row-doubling keeps d ordering") {
    const Matrix x = random_low_rank(100, 8, 2, 0.3, 17);
    CHECK(kapetanios_stat(x, 0, 4) == kapetanios_stat(x, 0, 4));
    Matrix xx(200, 8);
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            xx(i, j) = x(i, j);
            xx(i + 100, j) = x(i, j);
        }
    for (int d = 0; d + 1 < 4; ++d)
        CHECK((kapetanios_stat(x, d, 4) > kapetanios_stat(x, d + 1, 4)) ==
              (kapetanios_stat(xx, d, 4) > kapetanios_stat(xx, d + 1, 4)));
}

TEST_CASE("kapetanios test runs and is deterministic given the seed") {
    const Matrix x = random_low_rank(120, 6, 2, 0.2, 19);
    const KapetaniosResult a = kapetanios_test(x, 4, 0.05, 50, 84, 5);
    const KapetaniosResult b = kapetanios_test(x, 4, 0.05, 50, 84, 5);
    CHECK(a.stat == b.stat);
    CHECK(a.crit == b.crit);
    REQUIRE(a.reject.size() == 4);
    // strong rank-2 signal: the d = 0 and d = 1 statistics dominate their
    // subsample quantiles driven by the same signal only through sampling
    // noise, so no assertion on power here; mechanics only.
    CHECK(a.stat[0] > a.stat[1]);
}

TEST_CASE("onatski spectrum doubles when the imaginary part duplicates the real") {
    Rng rng(23);
    const std::size_t m = 10, p = 4;
    Matrix r(m, p);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) r(i, j) = rng.next_normal();
    Matrix x(2 * m, p);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            x(i, j) = r(i, j);
            x(i + m, j) = r(i, j);
        }
    const std::vector<double> eigs = onatski_spectrum(x);
    const Spectrum gram = sym_eigen(kernels::matmul(transpose(r), r));
    for (std::size_t i = 0; i < p; ++i)
        CHECK(eigs[i] ==
              doctest::Approx(2.0 * gram.values[i] / static_cast<double>(m)).epsilon(1e-9));
}

TEST_CASE("onatski statistic hand case and bounds checks") {
    CHECK(onatski_stat_from_eigs({19.0, 10.0, 9.0, 8.0, 7.0}, 0, 2) == doctest::Approx(9.0));
    CHECK(onatski_stat_from_eigs({19.0, 10.0, 9.0, 8.0, 7.0}, 1, 2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(onatski_stat_from_eigs({3.0, 2.0, 1.0}, 0, 2), ConfigError);
    Matrix tiny(3, 2);
    CHECK_THROWS_AS(onatski_spectrum(tiny), DataError);
}

TEST_CASE("onatski statistic spikes at the true rank on factor data") {
    const Matrix x = random_low_rank(200, 10, 2, 0.1, 29);
    // at d = 2 the max ratio is over noise gaps only; at d = 1 it includes
    // the signal-to-noise gap and dominates
    CHECK(onatski_stat(x, 1, 4) > onatski_stat(x, 2, 4));
}
