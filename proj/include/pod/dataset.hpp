#pragma once

#include <string>
#include <vector>

#include "pod/matrix.hpp"

namespace pod {

enum class ResponseKind { continuous, categorical };

/// A supervised sample: predictors x (n x p) and either a continuous response
/// block (n x q) or dense 0-based integer labels with class count M.
/// All entries are finite; constructors reject NaN and infinities.
struct Dataset {
    Matrix x;
    ResponseKind kind = ResponseKind::continuous;
    Matrix y_cont;                         // n x q when continuous
    std::vector<int> y_label;              // size n when categorical
    int n_classes = 0;                     // M when categorical
    std::vector<std::string> label_names;  // original labels, index = dense id

    std::size_t n() const { return x.rows(); }
    std::size_t p() const { return x.cols(); }
    std::size_t q() const { return kind == ResponseKind::continuous ? y_cont.cols() : 1; }

    static Dataset continuous(Matrix x, Matrix y);
    static Dataset categorical(Matrix x, std::vector<int> labels, int n_classes);
};

/// Column-wise affine transform fitted by standardize(). Applying then
/// inverting recovers the input; degenerate (constant) columns keep scale 1
/// and are flagged.
struct CenterScale {
    std::vector<double> mean;
    std::vector<double> scale;
    std::vector<std::uint8_t> degenerate;

    Matrix apply(const Matrix& x) const;
    Matrix invert(const Matrix& z) const;
};

/// Center and scale each column to mean 0, sample sd 1 (n-1 denominator).
std::pair<Matrix, CenterScale> standardize(const Matrix& x);

/// Column means of x.
std::vector<double> column_means(const Matrix& x);

struct ResponseSpec {
    std::vector<std::string> columns;  // header names
    ResponseKind kind = ResponseKind::continuous;
};

/// Load a comma-delimited file with a header row. Response columns are pulled
/// out by name; the rest become x in file order. Categorical labels are
/// re-indexed to 0..M-1 (sorted numerically when every label parses as a
/// number, lexicographically otherwise) and the dictionary is kept.
Dataset load_csv(const std::string& path, const ResponseSpec& spec);

}  // namespace pod
