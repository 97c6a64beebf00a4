#include "pod/matrix.hpp"

#include <cstdint>

#include "pod/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pod {

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

namespace kernels {

namespace {

inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
    const std::size_t k_n = a.cols(), m = b.cols();
    double* dst = out.row(i);
    const double* ai = a.row(i);
    for (std::size_t k = 0; k < k_n; ++k) {
        const double aik = ai[k];
        const double* bk = b.row(k);
        for (std::size_t j = 0; j < m; ++j) dst[j] += aik * bk[j];
    }
}

inline double gram_entry(const Matrix& a, double scale, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
    return s * scale;
}

inline double sq_dist_row(const double* q, const double* p, std::size_t dims) {
    double s = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
        const double diff = q[k] - p[k];
        s += diff * diff;
    }
    return s;
}

}  // namespace

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw NumericError("matmul: inner dimensions disagree");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw NumericError("matmul: inner dimensions disagree");
    Matrix out(a.rows(), b.cols());
    const std::int64_t n = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) matmul_row(a, b, out, static_cast<std::size_t>(i));
    return out;
}

Matrix gram_serial(const Matrix& a, double scale) {
    const std::size_t p = a.cols();
    Matrix out(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            const double v = gram_entry(a, scale, i, j);
            out(i, j) = v;
            out(j, i) = v;
        }
    return out;
}

Matrix gram(const Matrix& a, double scale) {
    const std::size_t p = a.cols();
    Matrix out(p, p);
    const std::int64_t pn = static_cast<std::int64_t>(p);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < pn; ++i)
        for (std::size_t j = static_cast<std::size_t>(i); j < p; ++j) {
            const double v = gram_entry(a, scale, static_cast<std::size_t>(i), j);
            out(static_cast<std::size_t>(i), j) = v;
            out(j, static_cast<std::size_t>(i)) = v;
        }
    return out;
}

Matrix pairwise_sq_dist_serial(const Matrix& queries, const Matrix& points, std::size_t dims) {
    Matrix out(queries.rows(), points.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i)
        for (std::size_t j = 0; j < points.rows(); ++j)
            out(i, j) = sq_dist_row(queries.row(i), points.row(j), dims);
    return out;
}

Matrix pairwise_sq_dist(const Matrix& queries, const Matrix& points, std::size_t dims) {
    Matrix out(queries.rows(), points.rows());
    const std::int64_t n = static_cast<std::int64_t>(queries.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < points.rows(); ++j)
            out(static_cast<std::size_t>(i), j) =
                sq_dist_row(queries.row(static_cast<std::size_t>(i)), points.row(j), dims);
    return out;
}

}  // namespace kernels
}  // namespace pod
