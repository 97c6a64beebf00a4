#include "pod/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "pod/errors.hpp"

namespace pod {

namespace {

void check_finite(const Matrix& m, const char* what) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j)))
                throw DataError(std::string(what) + ": non-finite entry at row " +
                                std::to_string(i) + ", column " + std::to_string(j));
}

}  // namespace

Dataset Dataset::continuous(Matrix x, Matrix y) {
    if (x.rows() == 0 || x.cols() == 0) throw DataError("dataset: x must be non-empty");
    if (y.rows() != x.rows()) throw DataError("dataset: x and y row counts disagree");
    if (y.cols() == 0) throw DataError("dataset: continuous y must have at least one column");
    check_finite(x, "dataset x");
    check_finite(y, "dataset y");
    Dataset d;
    d.x = std::move(x);
    d.kind = ResponseKind::continuous;
    d.y_cont = std::move(y);
    return d;
}

Dataset Dataset::categorical(Matrix x, std::vector<int> labels, int n_classes) {
    if (x.rows() == 0 || x.cols() == 0) throw DataError("dataset: x must be non-empty");
    if (labels.size() != x.rows()) throw DataError("dataset: x and label counts disagree");
    if (n_classes < 1) throw DataError("dataset: class count must be >= 1");
    check_finite(x, "dataset x");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw DataError("dataset: label out of range at row " + std::to_string(i));
    Dataset d;
    d.x = std::move(x);
    d.kind = ResponseKind::categorical;
    d.y_label = std::move(labels);
    d.n_classes = n_classes;
    return d;
}

Matrix CenterScale::apply(const Matrix& x) const {
    Matrix z(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) z(i, j) = (x(i, j) - mean[j]) / scale[j];
    return z;
}

Matrix CenterScale::invert(const Matrix& z) const {
    Matrix x(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j) x(i, j) = z(i, j) * scale[j] + mean[j];
    return x;
}

std::vector<double> column_means(const Matrix& x) {
    std::vector<double> m(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) m[j] += x(i, j);
    for (auto& v : m) v /= static_cast<double>(x.rows());
    return m;
}

std::pair<Matrix, CenterScale> standardize(const Matrix& x) {
    const std::size_t n = x.rows(), p = x.cols();
    if (n < 2) throw DataError("standardize: need at least 2 rows");
    CenterScale cs;
    cs.mean = column_means(x);
    cs.scale.assign(p, 1.0);
    cs.degenerate.assign(p, 0);
    for (std::size_t j = 0; j < p; ++j) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x(i, j) - cs.mean[j];
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (sd > 0.0) {
            cs.scale[j] = sd;
        } else {
            cs.degenerate[j] = 1;
        }
    }
    return {cs.apply(x), cs};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& col) {
    const std::string t = trim(cell);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw DataError("csv: unparseable cell at line " + std::to_string(line_no) +
                        ", column '" + col + "': '" + t + "'");
    if (!std::isfinite(v))
        throw DataError("csv: non-finite cell at line " + std::to_string(line_no) +
                        ", column '" + col + "': '" + t + "'");
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const ResponseSpec& spec) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open file '" + path + "'");
    if (spec.columns.empty()) throw ConfigError("csv: no response column given");

    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: empty file '" + path + "'");
    const std::vector<std::string> header = split_line(line);

    std::vector<std::size_t> resp_idx;
    for (const auto& name : spec.columns) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw DataError("csv: response column '" + name + "' not found in header");
        resp_idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    if (spec.kind == ResponseKind::categorical && resp_idx.size() != 1)
        throw ConfigError("csv: categorical response takes exactly one column");

    std::vector<std::size_t> x_idx;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (std::find(resp_idx.begin(), resp_idx.end(), j) == resp_idx.end()) x_idx.push_back(j);
    if (x_idx.empty()) throw DataError("csv: no predictor columns remain");

    std::vector<std::vector<double>> x_rows;
    std::vector<std::vector<double>> y_rows;
    std::vector<std::string> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError("csv: line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        std::vector<double> xr;
        xr.reserve(x_idx.size());
        for (std::size_t j : x_idx) xr.push_back(parse_cell(cells[j], line_no, header[j]));
        x_rows.push_back(std::move(xr));
        if (spec.kind == ResponseKind::continuous) {
            std::vector<double> yr;
            for (std::size_t j : resp_idx) yr.push_back(parse_cell(cells[j], line_no, header[j]));
            y_rows.push_back(std::move(yr));
        } else {
            raw_labels.push_back(trim(cells[resp_idx[0]]));
        }
    }
    if (x_rows.empty()) throw DataError("csv: no data rows in '" + path + "'");

    Matrix x(x_rows.size(), x_idx.size());
    for (std::size_t i = 0; i < x_rows.size(); ++i)
        for (std::size_t j = 0; j < x_idx.size(); ++j) x(i, j) = x_rows[i][j];

    if (spec.kind == ResponseKind::continuous) {
        Matrix y(y_rows.size(), resp_idx.size());
        for (std::size_t i = 0; i < y_rows.size(); ++i)
            for (std::size_t j = 0; j < resp_idx.size(); ++j) y(i, j) = y_rows[i][j];
        return Dataset::continuous(std::move(x), std::move(y));
    }

    // Dense re-indexing: numeric sort when all labels are numbers, else
    // lexicographic, so the dictionary does not depend on row order.
    std::vector<std::string> uniq = raw_labels;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    bool all_numeric = true;
    std::vector<double> as_num(uniq.size());
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        const char* b = uniq[i].data();
        const char* e = b + uniq[i].size();
        auto [ptr, ec] = std::from_chars(b, e, as_num[i]);
        if (ec != std::errc{} || ptr != e) {
            all_numeric = false;
            break;
        }
    }
    if (all_numeric) {
        std::vector<std::size_t> order(uniq.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return as_num[a] < as_num[b]; });
        std::vector<std::string> sorted;
        for (std::size_t i : order) sorted.push_back(uniq[i]);
        uniq = std::move(sorted);
    }
    std::map<std::string, int> dict;
    for (std::size_t i = 0; i < uniq.size(); ++i) dict[uniq[i]] = static_cast<int>(i);
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (const auto& s : raw_labels) labels.push_back(dict[s]);

    std::cerr << "label dictionary (" << uniq.size() << " classes):";
    for (std::size_t i = 0; i < uniq.size(); ++i) std::cerr << " " << i << "='" << uniq[i] << "'";
    std::cerr << "\n";

    Dataset d = Dataset::categorical(std::move(x), std::move(labels), static_cast<int>(uniq.size()));
    d.label_names = std::move(uniq);
    return d;
}

}  // namespace pod
