#include "pod/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "pod/dataset.hpp"
#include "pod/errors.hpp"
#include "pod/numerics.hpp"
#include "pod/rng.hpp"

namespace pod {

namespace {

Matrix center_rows(const Matrix& x) {
    Matrix c(x.rows(), x.cols());
    const std::vector<double> mu = column_means(x);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) c(i, j) = x(i, j) - mu[j];
    return c;
}

// Descending eigenvalues of scale * C^T C for centered C, computed from the
// smaller Gram side and padded with zeros to length p.
std::vector<double> scaled_gram_spectrum(const Matrix& c, double scale) {
    const std::size_t n = c.rows(), p = c.cols();
    Spectrum spec;
    if (p <= n) {
        spec = sym_eigen(kernels::gram(c, scale));
    } else {
        Matrix g = kernels::matmul(c, transpose(c));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) g(i, j) *= scale;
        spec = sym_eigen(g);
    }
    std::vector<double> eigs(p, 0.0);
    const std::size_t keep = std::min(p, spec.values.size());
    for (std::size_t i = 0; i < keep; ++i) eigs[i] = spec.values[i];
    return eigs;
}

std::vector<double> covariance_spectrum(const Matrix& x) {
    const Matrix c = center_rows(x);
    return scaled_gram_spectrum(c, 1.0 / static_cast<double>(x.rows()));
}

}  // namespace

IcResult ic_p1_from_eigs(const std::vector<double>& eigs, std::size_t n, std::size_t p,
                         int k_max) {
    if (k_max < 1 || static_cast<std::size_t>(k_max) >= std::min(n, p))
        throw ConfigError("ic_p1: k_max must lie in [1, min(n, p))");
    if (eigs.size() < p) throw ConfigError("ic_p1: spectrum shorter than p");
    IcResult out;
    out.eigenvalues = eigs;
    const double np = static_cast<double>(n) * static_cast<double>(p);
    const double ratio = (static_cast<double>(n) + static_cast<double>(p)) / np;
    const double penalty_unit = -ratio * std::log(ratio);

    std::vector<double> tail(p + 1, 0.0);
    for (std::size_t i = p; i-- > 0;) tail[i] = tail[i + 1] + eigs[i];

    double best = 0.0;
    int best_k = 0;
    for (int k = 1; k <= k_max; ++k) {
        const double v = tail[static_cast<std::size_t>(k)];
        if (v <= 0.0)
            throw NumericError("ic_p1: V(k) is not positive at k = " + std::to_string(k));
        const double ic = std::log(v) + static_cast<double>(k) * penalty_unit;
        out.ic.push_back(ic);
        if (best_k == 0 || ic < best) {
            best = ic;
            best_k = k;
        }
    }
    out.k_hat = best_k;
    return out;
}

IcResult ic_p1(const Matrix& x, int k_max) {
    const std::size_t n = x.rows(), p = x.cols();
    if (n < 2) throw DataError("ic_p1: need at least 2 rows");
    const Matrix c = center_rows(x);
    const std::vector<double> eigs =
        scaled_gram_spectrum(c, 1.0 / (static_cast<double>(n) * static_cast<double>(p)));
    return ic_p1_from_eigs(eigs, n, p, k_max);
}

ErResult er_from_eigs(const std::vector<double>& eigs, int k_max) {
    if (k_max < 1 || static_cast<std::size_t>(k_max) + 1 > eigs.size())
        throw ConfigError("eigenvalue_ratio: k_max + 1 exceeds spectrum length");
    ErResult out;
    out.eigenvalues = eigs;
    double best = -1.0;
    int best_k = 0;
    for (int k = 1; k <= k_max; ++k) {
        const double denom = eigs[static_cast<std::size_t>(k)];
        if (denom <= 0.0)
            throw NumericError("eigenvalue_ratio: zero eigenvalue at position " +
                               std::to_string(k + 1));
        const double r = eigs[static_cast<std::size_t>(k - 1)] / denom;
        out.ratios.push_back(r);
        if (r > best) {
            best = r;
            best_k = k;
        }
    }
    out.k_hat = best_k;
    return out;
}

ErResult eigenvalue_ratio(const Matrix& x, int k_max) {
    if (static_cast<std::size_t>(k_max) + 1 > std::min(x.rows(), x.cols()))
        throw ConfigError("eigenvalue_ratio: k_max + 1 must not exceed min(n, p)");
    return er_from_eigs(covariance_spectrum(x), k_max);
}

double kapetanios_stat_from_eigs(const std::vector<double>& eigs, int d, int d_max) {
    if (d < 0 || d >= d_max) throw ConfigError("kapetanios: need 0 <= d < d_max");
    if (static_cast<std::size_t>(d_max) + 1 > eigs.size())
        throw ConfigError("kapetanios: spectrum shorter than d_max + 1");
    return eigs[static_cast<std::size_t>(d)] - eigs[static_cast<std::size_t>(d_max)];
}

double kapetanios_stat(const Matrix& x, int d, int d_max) {
    if (static_cast<std::size_t>(d_max) + 1 > x.cols())
        throw ConfigError("kapetanios: d_max + 1 exceeds p");
    return kapetanios_stat_from_eigs(covariance_spectrum(x), d, d_max);
}

KapetaniosResult kapetanios_test(const Matrix& x, int d_max, double alpha, int n_subsamples,
                                 std::size_t subsample_size, std::uint64_t seed) {
    const std::size_t n = x.rows(), p = x.cols();
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("kapetanios: alpha must lie in (0, 1)");
    if (n_subsamples < 1) throw ConfigError("kapetanios: need at least 1 subsample");
    if (subsample_size < 2 || subsample_size > n)
        throw ConfigError("kapetanios: subsample size must lie in [2, n]");
    if (static_cast<std::size_t>(d_max) + 1 > p)
        throw ConfigError("kapetanios: d_max + 1 exceeds p");
    if (subsample_size < p)
        std::cerr << "kapetanios: subsample size " << subsample_size << " below p = " << p
                  << "; subsample spectra are rank-deficient (zero-padded)\n";

    KapetaniosResult out;
    out.eigenvalues = covariance_spectrum(x);
    for (int d = 0; d < d_max; ++d)
        out.stat.push_back(kapetanios_stat_from_eigs(out.eigenvalues, d, d_max));

    Matrix sub_stats(static_cast<std::size_t>(n_subsamples), static_cast<std::size_t>(d_max));
    const Rng master(seed);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_subsamples));
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < n_subsamples; ++b) {
        try {
            Rng rng = master.child(stream::kSubsample, static_cast<std::uint64_t>(b));
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            Matrix sub(subsample_size, p);
            for (std::size_t i = 0; i < subsample_size; ++i)
                for (std::size_t j = 0; j < p; ++j)
                    sub(i, j) = x(static_cast<std::size_t>(perm[i]), j);
            const std::vector<double> eigs = covariance_spectrum(sub);
            for (int d = 0; d < d_max; ++d)
                sub_stats(static_cast<std::size_t>(b), static_cast<std::size_t>(d)) =
                    kapetanios_stat_from_eigs(eigs, d, d_max);
        } catch (...) {
            errors[static_cast<std::size_t>(b)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    const std::size_t q_idx = static_cast<std::size_t>(std::min<double>(
        static_cast<double>(n_subsamples) - 1,
        std::ceil((1.0 - alpha) * static_cast<double>(n_subsamples)) - 1));
    for (int d = 0; d < d_max; ++d) {
        std::vector<double> col(static_cast<std::size_t>(n_subsamples));
        for (int b = 0; b < n_subsamples; ++b)
            col[static_cast<std::size_t>(b)] =
                sub_stats(static_cast<std::size_t>(b), static_cast<std::size_t>(d));
        std::sort(col.begin(), col.end());
        out.crit.push_back(col[q_idx]);
        out.reject.push_back(out.stat[static_cast<std::size_t>(d)] >
                             out.crit[static_cast<std::size_t>(d)]);
    }
    return out;
}

std::vector<double> onatski_spectrum(const Matrix& x) {
    const std::size_t n = x.rows(), p = x.cols();
    if (n < 4) throw DataError("onatski: need at least 4 rows");
    const std::size_t m = n / 2;  // unpaired last row of odd n is dropped

    // Hermitian Gram of the complex rows A + iB, embedded as the real
    // symmetric [[Re, -Im], [Im, Re]]; its spectrum doubles every eigenvalue.
    Matrix re(m, m), im(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double rr = 0.0, ii = 0.0;
            for (std::size_t c = 0; c < p; ++c) {
                const double ai = x(i, c), bi = x(i + m, c);
                const double aj = x(j, c), bj = x(j + m, c);
                rr += ai * aj + bi * bj;
                ii += ai * bj - bi * aj;
            }
            re(i, j) = rr / static_cast<double>(m);
            im(i, j) = ii / static_cast<double>(m);
        }
    Matrix embed(2 * m, 2 * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            embed(i, j) = re(i, j);
            embed(i + m, j + m) = re(i, j);
            embed(i, j + m) = -im(i, j);
            embed(i + m, j) = im(i, j);
        }
    const Spectrum spec = sym_eigen(embed);

    std::vector<double> eigs(p, 0.0);
    for (std::size_t i = 0; i < std::min(m, p); ++i) eigs[i] = spec.values[2 * i];
    return eigs;
}

double onatski_stat_from_eigs(const std::vector<double>& eigs, int d, int d_max) {
    if (d < 0 || d >= d_max) throw ConfigError("onatski: need 0 <= d < d_max");
    if (static_cast<std::size_t>(d_max) + 2 > eigs.size())
        throw ConfigError("onatski: spectrum shorter than d_max + 2");
    double best = -std::numeric_limits<double>::infinity();
    for (int i = d + 1; i <= d_max; ++i) {
        const double num = eigs[static_cast<std::size_t>(i - 1)] - eigs[static_cast<std::size_t>(i)];
        const double den = eigs[static_cast<std::size_t>(i)] - eigs[static_cast<std::size_t>(i + 1)];
        best = std::max(best, num / den);
    }
    return best;
}

double onatski_stat(const Matrix& x, int d, int d_max) {
    return onatski_stat_from_eigs(onatski_spectrum(x), d, d_max);
}

}  // namespace pod
