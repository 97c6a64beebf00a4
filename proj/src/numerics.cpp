#include "pod/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pod/dataset.hpp"
#include "pod/errors.hpp"

namespace pod {

Matrix sample_covariance_serial(const Matrix& x) {
    if (x.rows() < 2) throw DataError("sample_covariance: need at least 2 rows");
    Matrix c(x.rows(), x.cols());
    const std::vector<double> mu = column_means(x);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) c(i, j) = x(i, j) - mu[j];
    return kernels::gram_serial(c, 1.0 / static_cast<double>(x.rows()));
}

Matrix sample_covariance(const Matrix& x) {
    if (x.rows() < 2) throw DataError("sample_covariance: need at least 2 rows");
    Matrix c(x.rows(), x.cols());
    const std::vector<double> mu = column_means(x);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) c(i, j) = x(i, j) - mu[j];
    return kernels::gram(c, 1.0 / static_cast<double>(x.rows()));
}

namespace {

double frobenius(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

double off_diag_frobenius(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

void apply_sign_convention(Matrix& vectors) {
    for (std::size_t j = 0; j < vectors.cols(); ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < vectors.rows(); ++i) {
            const double a = std::fabs(vectors(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (vectors(arg, j) < 0.0)
            for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, j) = -vectors(i, j);
    }
}

}  // namespace

Spectrum sym_eigen(const Matrix& s) {
    const std::size_t m = s.rows();
    if (m == 0 || s.cols() != m) throw NumericError("sym_eigen: matrix must be square, m >= 1");
    double max_abs = 0.0, max_asym = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            max_abs = std::max(max_abs, std::fabs(s(i, j)));
            max_asym = std::max(max_asym, std::fabs(s(i, j) - s(j, i)));
        }
    if (max_asym > 1e-8 * (1.0 + max_abs))
        throw NumericError("sym_eigen: input asymmetric beyond tolerance");

    Matrix a(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));
    Matrix v = Matrix::identity(m);

    const double norm = frobenius(a);
    const double tol = 1e-12 * norm;
    constexpr int kMaxSweeps = 100;
    if (m > 1) {
        int sweep = 0;
        while (off_diag_frobenius(a) > tol && norm > 0.0) {
            if (++sweep > kMaxSweeps)
                throw NumericError("sym_eigen: no convergence within 100 sweeps");
            for (std::size_t p = 0; p + 1 < m; ++p)
                for (std::size_t q = p + 1; q < m; ++q) {
                    const double apq = a(p, q);
                    if (apq == 0.0) continue;
                    const double app = a(p, p), aqq = a(q, q);
                    const double theta = (aqq - app) / (2.0 * apq);
                    const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                     (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0);
                    const double sn = t * c;
                    for (std::size_t k = 0; k < m; ++k) {
                        const double akp = a(k, p), akq = a(k, q);
                        a(k, p) = c * akp - sn * akq;
                        a(k, q) = sn * akp + c * akq;
                    }
                    for (std::size_t k = 0; k < m; ++k) {
                        const double apk = a(p, k), aqk = a(q, k);
                        a(p, k) = c * apk - sn * aqk;
                        a(q, k) = sn * apk + c * aqk;
                    }
                    for (std::size_t k = 0; k < m; ++k) {
                        const double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - sn * vkq;
                        v(k, q) = sn * vkp + c * vkq;
                    }
                }
        }
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    Spectrum out;
    out.values.resize(m);
    out.vectors = Matrix(m, m);
    for (std::size_t j = 0; j < m; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < m; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    apply_sign_convention(out.vectors);
    return out;
}

Matrix cholesky(const Matrix& s) {
    const std::size_t m = s.rows();
    if (s.cols() != m) throw NumericError("cholesky: matrix must be square");
    Matrix l(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = s(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                if (sum <= 0.0) throw NumericError("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return l;
}

Matrix ols_solve(const Matrix& a, const Matrix& b, double ridge) {
    if (a.rows() != b.rows()) throw NumericError("ols_solve: row counts disagree");
    if (a.rows() < 1 || a.cols() < 1) throw NumericError("ols_solve: empty system");
    if (ridge < 0.0) throw ConfigError("ols_solve: ridge must be >= 0");
    const std::size_t m = a.cols(), q = b.cols();
    Matrix ata = kernels::gram(a, 1.0);
    for (std::size_t j = 0; j < m; ++j) ata(j, j) += ridge;
    Matrix atb = kernels::matmul(transpose(a), b);

    Matrix l;
    try {
        l = cholesky(ata);
    } catch (const NumericError&) {
        throw NumericError("ols_solve: singular normal equations (retry with ridge > 0)");
    }
    // forward/back substitution per right-hand side
    Matrix beta(m, q);
    std::vector<double> z(m);
    for (std::size_t col = 0; col < q; ++col) {
        for (std::size_t i = 0; i < m; ++i) {
            double sum = atb(i, col);
            for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * z[k];
            z[i] = sum / l(i, i);
        }
        for (std::size_t ii = m; ii-- > 0;) {
            double sum = z[ii];
            for (std::size_t k = ii + 1; k < m; ++k) sum -= l(k, ii) * beta(k, col);
            beta(ii, col) = sum / l(ii, ii);
        }
    }
    return beta;
}

}  // namespace pod
