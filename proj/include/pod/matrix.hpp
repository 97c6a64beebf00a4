#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace pod {

/// Dense row-major matrix of doubles. Small by design: the library only
/// needs covariance-scale problems (p up to ~1500).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t m) {
        Matrix out(m, m);
        for (std::size_t i = 0; i < m; ++i) out(i, i) = 1.0;
        return out;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix out(rows.size(), rows.size() ? rows.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto& r : rows) {
            std::size_t j = 0;
            for (double v : r) out(i, j++) = v;
            ++i;
        }
        return out;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Data-parallel kernels. Each *_serial twin is the reference implementation;
// the plain version distributes independent output elements across OpenMP
// threads and is bit-identical to the serial one for any thread count.
namespace kernels {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_serial(const Matrix& a, const Matrix& b);

// a^T * a scaled by `scale` (symmetric output, upper triangle mirrored).
Matrix gram(const Matrix& a, double scale);
Matrix gram_serial(const Matrix& a, double scale);

// Squared Euclidean distances between rows of `queries` and rows of `points`,
// restricted to the first `dims` columns. Output is queries.rows x points.rows.
Matrix pairwise_sq_dist(const Matrix& queries, const Matrix& points, std::size_t dims);
Matrix pairwise_sq_dist_serial(const Matrix& queries, const Matrix& points, std::size_t dims);

}  // namespace kernels

Matrix transpose(const Matrix& a);

}  // namespace pod
