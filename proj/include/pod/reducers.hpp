#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pod/dataset.hpp"
#include "pod/matrix.hpp"

namespace pod {

enum class ReducerKind { pca, sir, dr, rrr, identity };

std::string reducer_kind_name(ReducerKind k);

struct ReducerSpec {
    ReducerKind kind = ReducerKind::pca;
    int n_slices = 0;             // 0 = auto: 10 for continuous y, M for categorical
    double ridge = 0.0;           // rrr only
    bool pca_standardize = false; // standardize predictors before PCA
};

/// Fitted surrogate map x -> R^{d_max} with importance-ordered coordinates.
/// scores = ((x - mean) / scale) * w * score_scale, where the centering block
/// is optional (PCA on raw predictors projects x directly).
struct ReductionMap {
    ReducerKind kind = ReducerKind::pca;
    Matrix w;                        // p x d_max, orthonormal columns
    std::vector<double> importance;  // length d_max, non-increasing
    std::optional<CenterScale> center_scale;
    double score_scale = 1.0;
    bool padded = false;  // rrr: columns beyond min(p, q) filled from the covariance

    std::size_t p() const { return w.rows(); }
    std::size_t d_max() const { return w.cols(); }
};

ReductionMap fit_pca(const Matrix& x, std::size_t d_max, bool standardize_first = false);
ReductionMap fit_sir(const Dataset& data, const std::vector<int>& rows, std::size_t d_max,
                     int n_slices);
ReductionMap fit_dr(const Dataset& data, const std::vector<int>& rows, std::size_t d_max,
                    int n_slices);
ReductionMap fit_rrr(const Matrix& x, const Matrix& y, std::size_t d_max, double ridge);
ReductionMap fit_identity(std::size_t p, std::size_t d_max);

/// Dispatch on spec.kind, training on the given rows of `data`.
ReductionMap fit_reducer(const Dataset& data, const std::vector<int>& rows,
                         const ReducerSpec& spec, std::size_t d_max);

/// Project rows of x through the fitted map; returns n x d_max scores.
Matrix apply(const ReductionMap& map, const Matrix& x);

/// Quantile slice assignment for a scalar response: stable sort on
/// (value, index), contiguous groups with sizes differing by at most one.
std::vector<int> quantile_slices(const std::vector<double>& y, int n_slices);

}  // namespace pod
