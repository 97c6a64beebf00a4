#pragma once

#include <cstdint>
#include <vector>

#include "pod/matrix.hpp"

namespace pod {

// Every statistic has a spectrum-level entry point taking a raw descending
// eigenvalue vector, so the formulas stay unit-testable without linear
// algebra in the way.

struct IcResult {
    int k_hat = 0;
    std::vector<double> ic;           // index 0 <=> k = 1
    std::vector<double> eigenvalues;  // descending, scaled by 1/(n p)
};

/// Information criterion over k in [1, k_max]: ln V(k) minus the (n+p)/(np)
/// penalty, where V(k) is the eigenvalue tail sum of the scaled Gram matrix
/// of centered x (equivalently the rank-k reconstruction error / (n p)).
IcResult ic_p1(const Matrix& x, int k_max);
IcResult ic_p1_from_eigs(const std::vector<double>& eigs, std::size_t n, std::size_t p,
                         int k_max);

struct ErResult {
    int k_hat = 0;
    std::vector<double> ratios;       // index 0 <=> k = 1
    std::vector<double> eigenvalues;  // covariance spectrum, descending
};

/// argmax_{1<=k<=k_max} lambda_k / lambda_{k+1}; ties go to the smallest k.
ErResult eigenvalue_ratio(const Matrix& x, int k_max);
ErResult er_from_eigs(const std::vector<double>& eigs, int k_max);

/// lambda_{d+1} - lambda_{dmax+1} on the sample covariance spectrum.
double kapetanios_stat(const Matrix& x, int d, int d_max);
double kapetanios_stat_from_eigs(const std::vector<double>& eigs, int d, int d_max);

struct KapetaniosResult {
    std::vector<double> stat;       // per d = 0..d_max-1
    std::vector<double> crit;       // subsample quantile per d
    std::vector<bool> reject;
    std::vector<double> eigenvalues;
};

/// Sequential decisions with per-d critical values taken as the (1 - alpha)
/// quantile of the statistic over B row-subsamples drawn without replacement.
KapetaniosResult kapetanios_test(const Matrix& x, int d_max, double alpha, int n_subsamples,
                                 std::size_t subsample_size, std::uint64_t seed);

/// max_{d < i <= d_max} (l_i - l_{i+1}) / (l_{i+1} - l_{i+2}) on the spectrum
/// of the paired complex second-moment matrix (rows i and i + floor(n/2)
/// combine into one complex observation; an unpaired last row is dropped).
/// Only the statistic is exposed; no decision rule.
double onatski_stat(const Matrix& x, int d, int d_max);
double onatski_stat_from_eigs(const std::vector<double>& eigs, int d, int d_max);

/// Descending eigenvalues of the Onatski complex Gram, padded with zeros to
/// length p when rank-deficient.
std::vector<double> onatski_spectrum(const Matrix& x);

}  // namespace pod
