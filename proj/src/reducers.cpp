#include "pod/reducers.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "pod/errors.hpp"
#include "pod/numerics.hpp"

namespace pod {

std::string reducer_kind_name(ReducerKind k) {
    switch (k) {
        case ReducerKind::pca: return "pca";
        case ReducerKind::sir: return "sir";
        case ReducerKind::dr: return "dr";
        case ReducerKind::rrr: return "rrr";
        case ReducerKind::identity: return "identity";
    }
    return "?";
}

namespace {

Matrix gather_rows(const Matrix& x, const std::vector<int>& rows) {
    Matrix out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j)
            out(i, j) = x(static_cast<std::size_t>(rows[i]), j);
    return out;
}

void sign_convention(Matrix& w) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < w.rows(); ++i)
            if (std::fabs(w(i, j)) > best) {
                best = std::fabs(w(i, j));
                arg = i;
            }
        if (w(arg, j) < 0.0)
            for (std::size_t i = 0; i < w.rows(); ++i) w(i, j) = -w(i, j);
    }
}

// Gram-Schmidt in column (importance) order; columns must stay independent.
void orthonormalize_in_order(Matrix& w) {
    const std::size_t p = w.rows(), d = w.cols();
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < p; ++i) dot += w(i, j) * w(i, k);
            for (std::size_t i = 0; i < p; ++i) w(i, j) -= dot * w(i, k);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < p; ++i) nrm += w(i, j) * w(i, j);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12)
            throw NumericError("reducer: direction " + std::to_string(j) +
                               " collapsed during re-orthonormalization");
        for (std::size_t i = 0; i < p; ++i) w(i, j) /= nrm;
    }
    sign_convention(w);
}

// Whitening transform z = (x - mean) Sigma^{-1/2}, with a pseudo-inverse
// square root so exactly degenerate directions drop out.
struct Whitened {
    Matrix z;
    std::vector<double> mean;
    Matrix w_half;  // p x p, symmetric
};

Whitened whiten_rows(const Matrix& x) {
    const std::size_t n = x.rows(), p = x.cols();
    const Spectrum spec = sym_eigen(sample_covariance(x));
    const double floor = 1e-12 * std::max(spec.values[0], 1e-300);
    Matrix w_half(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k)
                if (spec.values[k] > floor)
                    s += spec.vectors(i, k) * spec.vectors(j, k) / std::sqrt(spec.values[k]);
            w_half(i, j) = s;
            w_half(j, i) = s;
        }
    Whitened out;
    out.mean = column_means(x);
    Matrix c(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) c(i, j) = x(i, j) - out.mean[j];
    out.z = kernels::matmul(c, w_half);
    out.w_half = std::move(w_half);
    return out;
}

// Eigenvectors of a kernel built in whitened space, mapped back to the
// predictor scale and re-orthonormalized in importance order.
ReductionMap from_whitened_kernel(ReducerKind kind, const Matrix& kernel, const Whitened& wh,
                                  std::size_t d_max) {
    const Spectrum spec = sym_eigen(kernel);
    const std::size_t p = kernel.rows();
    Matrix w(p, d_max);
    for (std::size_t j = 0; j < d_max; ++j)
        for (std::size_t i = 0; i < p; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) s += wh.w_half(i, k) * spec.vectors(k, j);
            w(i, j) = s;
        }
    orthonormalize_in_order(w);
    ReductionMap map;
    map.kind = kind;
    map.w = std::move(w);
    map.importance.assign(spec.values.begin(), spec.values.begin() + static_cast<long>(d_max));
    CenterScale center_only;
    center_only.mean = wh.mean;
    center_only.scale.assign(p, 1.0);
    center_only.degenerate.assign(p, 0);
    map.center_scale = std::move(center_only);
    return map;
}

struct SliceMoments {
    std::vector<double> proportion;
    std::vector<std::vector<double>> mean;  // per slice, length p
    std::vector<Matrix> second_moment;      // per slice, p x p (only when requested)
};

SliceMoments slice_moments(const Matrix& z, const std::vector<int>& slice_of_row, int n_slices,
                           bool with_second_moment) {
    const std::size_t n = z.rows(), p = z.cols();
    SliceMoments m;
    m.proportion.assign(n_slices, 0.0);
    m.mean.assign(n_slices, std::vector<double>(p, 0.0));
    if (with_second_moment) m.second_moment.assign(n_slices, Matrix(p, p));
    std::vector<std::size_t> count(n_slices, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int h = slice_of_row[i];
        ++count[h];
        for (std::size_t j = 0; j < p; ++j) m.mean[h][j] += z(i, j);
        if (with_second_moment) {
            Matrix& v = m.second_moment[h];
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a; b < p; ++b) v(a, b) += z(i, a) * z(i, b);
        }
    }
    for (int h = 0; h < n_slices; ++h) {
        if (count[h] < 1)
            throw DataError("reducer: slice " + std::to_string(h) + " has no observations");
        m.proportion[h] = static_cast<double>(count[h]) / static_cast<double>(n);
        for (std::size_t j = 0; j < p; ++j) m.mean[h][j] /= static_cast<double>(count[h]);
        if (with_second_moment) {
            Matrix& v = m.second_moment[h];
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a; b < p; ++b) {
                    v(a, b) /= static_cast<double>(count[h]);
                    v(b, a) = v(a, b);
                }
        }
    }
    return m;
}

std::vector<int> slice_assignment(const Dataset& data, const std::vector<int>& rows,
                                  int n_slices) {
    if (data.kind == ResponseKind::categorical) {
        if (n_slices != data.n_classes)
            throw ConfigError("reducer: categorical response requires one slice per class (" +
                              std::to_string(data.n_classes) + ")");
        std::vector<int> out(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            out[i] = data.y_label[static_cast<std::size_t>(rows[i])];
        return out;
    }
    if (data.y_cont.cols() != 1)
        throw ConfigError("reducer: slicing needs a scalar continuous response");
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        y[i] = data.y_cont(static_cast<std::size_t>(rows[i]), 0);
    return quantile_slices(y, n_slices);
}

}  // namespace

std::vector<int> quantile_slices(const std::vector<double>& y, int n_slices) {
    const std::size_t n = y.size();
    if (n_slices < 2) throw ConfigError("reducer: need at least 2 slices");
    if (n < static_cast<std::size_t>(n_slices))
        throw DataError("reducer: fewer observations than slices");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    const std::size_t base = n / static_cast<std::size_t>(n_slices);
    const std::size_t extra = n % static_cast<std::size_t>(n_slices);
    std::vector<int> out(n);
    std::size_t pos = 0;
    for (int h = 0; h < n_slices; ++h) {
        const std::size_t size = base + (static_cast<std::size_t>(h) < extra ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k) out[order[pos++]] = h;
    }
    return out;
}

ReductionMap fit_pca(const Matrix& x, std::size_t d_max, bool standardize_first) {
    const std::size_t n = x.rows(), p = x.cols();
    if (d_max < 1 || d_max > std::min(p, n - 1))
        throw ConfigError("pca: d_max must lie in [1, min(p, n-1)]");

    Matrix input = x;
    std::optional<CenterScale> cs;
    if (standardize_first) {
        auto [z, fitted] = standardize(x);
        input = std::move(z);
        cs = std::move(fitted);
    }

    ReductionMap map;
    map.kind = ReducerKind::pca;
    map.center_scale = cs;
    map.score_scale = 1.0 / std::sqrt(static_cast<double>(p));
    map.importance.resize(d_max);
    map.w = Matrix(p, d_max);

    if (p <= n) {
        const Spectrum spec = sym_eigen(sample_covariance(input));
        for (std::size_t j = 0; j < d_max; ++j) {
            map.importance[j] = spec.values[j];
            for (std::size_t i = 0; i < p; ++i) map.w(i, j) = spec.vectors(i, j);
        }
        return map;
    }

    // p > n: same spectrum from the n x n Gram of centered rows, with
    // v_j = C^T u_j / sqrt(n * lambda_j).
    Matrix c(n, p);
    const std::vector<double> mu = column_means(input);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) c(i, j) = input(i, j) - mu[j];
    Matrix g = kernels::matmul(c, transpose(c));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) /= static_cast<double>(n);
    const Spectrum spec = sym_eigen(g);
    for (std::size_t j = 0; j < d_max; ++j) {
        const double lambda = spec.values[j];
        if (lambda <= 1e-14)
            throw NumericError("pca: rank deficiency below requested d_max");
        map.importance[j] = lambda;
        const double inv = 1.0 / std::sqrt(static_cast<double>(n) * lambda);
        for (std::size_t i = 0; i < p; ++i) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += c(r, i) * spec.vectors(r, j);
            map.w(i, j) = s * inv;
        }
    }
    sign_convention(map.w);
    return map;
}

ReductionMap fit_sir(const Dataset& data, const std::vector<int>& rows, std::size_t d_max,
                     int n_slices) {
    const std::size_t p = data.p();
    if (d_max < 1 || d_max > p) throw ConfigError("sir: d_max must lie in [1, p]");
    const Matrix xr = gather_rows(data.x, rows);
    const Whitened wh = whiten_rows(xr);
    const std::vector<int> slice = slice_assignment(data, rows, n_slices);
    const SliceMoments m = slice_moments(wh.z, slice, n_slices, false);

    Matrix kernel(p, p);
    for (int h = 0; h < n_slices; ++h)
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b)
                kernel(a, b) += m.proportion[h] * m.mean[h][a] * m.mean[h][b];

    return from_whitened_kernel(ReducerKind::sir, kernel, wh, d_max);
}

ReductionMap fit_dr(const Dataset& data, const std::vector<int>& rows, std::size_t d_max,
                    int n_slices) {
    const std::size_t p = data.p();
    if (d_max < 1 || d_max > p) throw ConfigError("dr: d_max must lie in [1, p]");
    const Matrix xr = gather_rows(data.x, rows);
    const Whitened wh = whiten_rows(xr);
    const std::vector<int> slice = slice_assignment(data, rows, n_slices);
    const SliceMoments m = slice_moments(wh.z, slice, n_slices, true);

    // 2 sum_h p_h (V_h - I)^2  +  2 (sum_h p_h U_h U_h^T)^2
    //   + 2 (sum_h p_h U_h^T U_h)(sum_h p_h U_h U_h^T)
    Matrix term1(p, p);
    Matrix mean_outer(p, p);
    double mean_sq = 0.0;
    for (int h = 0; h < n_slices; ++h) {
        Matrix vmi = m.second_moment[h];
        for (std::size_t i = 0; i < p; ++i) vmi(i, i) -= 1.0;
        const Matrix sq = kernels::matmul(vmi, vmi);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) term1(i, j) += m.proportion[h] * sq(i, j);
        double u2 = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            u2 += m.mean[h][i] * m.mean[h][i];
            for (std::size_t j = 0; j < p; ++j)
                mean_outer(i, j) += m.proportion[h] * m.mean[h][i] * m.mean[h][j];
        }
        mean_sq += m.proportion[h] * u2;
    }
    const Matrix outer_sq = kernels::matmul(mean_outer, mean_outer);
    Matrix kernel(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            kernel(i, j) =
                2.0 * term1(i, j) + 2.0 * outer_sq(i, j) + 2.0 * mean_sq * mean_outer(i, j);

    return from_whitened_kernel(ReducerKind::dr, kernel, wh, d_max);
}

ReductionMap fit_rrr(const Matrix& x, const Matrix& y, std::size_t d_max, double ridge) {
    const std::size_t n = x.rows(), p = x.cols(), q = y.cols();
    if (y.rows() != n) throw ConfigError("rrr: x and y row counts disagree");
    if (d_max < 1 || d_max > p) throw ConfigError("rrr: d_max must lie in [1, p]");

    Matrix xc(n, p), yc(n, q);
    const std::vector<double> mx = column_means(x);
    const std::vector<double> my = column_means(y);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) xc(i, j) = x(i, j) - mx[j];
        for (std::size_t j = 0; j < q; ++j) yc(i, j) = y(i, j) - my[j];
    }
    const Matrix a = ols_solve(xc, yc, ridge);  // p x q
    const Spectrum spec = sym_eigen(kernels::matmul(a, transpose(a)));

    ReductionMap map;
    map.kind = ReducerKind::rrr;
    const std::size_t rank_cap = std::min(p, q);
    const std::size_t from_svd = std::min(d_max, rank_cap);
    map.w = Matrix(p, d_max);
    map.importance.assign(d_max, 0.0);
    for (std::size_t j = 0; j < from_svd; ++j) {
        map.importance[j] = std::sqrt(std::max(spec.values[j], 0.0));
        for (std::size_t i = 0; i < p; ++i) map.w(i, j) = spec.vectors(i, j);
    }
    if (from_svd < d_max) {
        // pad from the covariance's top eigenvectors, orthogonalized against
        // the singular directions already chosen
        map.padded = true;
        std::cerr << "rrr: d_max exceeds min(p, q); padding " << (d_max - from_svd)
                  << " columns from the covariance spectrum\n";
        const Spectrum cov = sym_eigen(sample_covariance(xc));
        std::size_t next = from_svd;
        for (std::size_t cand = 0; cand < p && next < d_max; ++cand) {
            std::vector<double> v(p);
            for (std::size_t i = 0; i < p; ++i) v[i] = cov.vectors(i, cand);
            for (std::size_t k = 0; k < next; ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < p; ++i) dot += v[i] * map.w(i, k);
                for (std::size_t i = 0; i < p; ++i) v[i] -= dot * map.w(i, k);
            }
            double nrm = 0.0;
            for (double e : v) nrm += e * e;
            nrm = std::sqrt(nrm);
            if (nrm < 1e-8) continue;
            for (std::size_t i = 0; i < p; ++i) map.w(i, next) = v[i] / nrm;
            ++next;
        }
        if (next < d_max) throw NumericError("rrr: could not pad to d_max orthonormal columns");
        sign_convention(map.w);
    }
    CenterScale cs;
    cs.mean = mx;
    cs.scale.assign(p, 1.0);
    cs.degenerate.assign(p, 0);
    map.center_scale = std::move(cs);
    return map;
}

ReductionMap fit_identity(std::size_t p, std::size_t d_max) {
    if (d_max < 1 || d_max > p) throw ConfigError("identity reducer: d_max must lie in [1, p]");
    ReductionMap map;
    map.kind = ReducerKind::identity;
    map.w = Matrix(p, d_max);
    for (std::size_t j = 0; j < d_max; ++j) map.w(j, j) = 1.0;
    map.importance.assign(d_max, 1.0);
    return map;
}

ReductionMap fit_reducer(const Dataset& data, const std::vector<int>& rows,
                         const ReducerSpec& spec, std::size_t d_max) {
    const int slices = spec.n_slices > 0 ? spec.n_slices
                       : data.kind == ResponseKind::categorical ? data.n_classes
                                                                : 10;
    switch (spec.kind) {
        case ReducerKind::pca:
            return fit_pca(gather_rows(data.x, rows), d_max, spec.pca_standardize);
        case ReducerKind::sir:
            return fit_sir(data, rows, d_max, slices);
        case ReducerKind::dr:
            return fit_dr(data, rows, d_max, slices);
        case ReducerKind::rrr: {
            if (data.kind != ResponseKind::continuous)
                throw ConfigError("rrr: needs a continuous response");
            Matrix xr = gather_rows(data.x, rows);
            Matrix yr = gather_rows(data.y_cont, rows);
            return fit_rrr(xr, yr, d_max, spec.ridge);
        }
        case ReducerKind::identity:
            return fit_identity(data.p(), d_max);
    }
    throw ConfigError("reducer: unknown kind");
}

Matrix apply(const ReductionMap& map, const Matrix& x) {
    if (x.cols() != map.p())
        throw ConfigError("reducer apply: input has " + std::to_string(x.cols()) +
                          " columns, map expects " + std::to_string(map.p()));
    Matrix input = map.center_scale ? map.center_scale->apply(x) : x;
    Matrix scores = kernels::matmul(input, map.w);
    if (map.score_scale != 1.0)
        for (std::size_t i = 0; i < scores.rows(); ++i)
            for (std::size_t j = 0; j < scores.cols(); ++j) scores(i, j) *= map.score_scale;
    return scores;
}

}  // namespace pod
