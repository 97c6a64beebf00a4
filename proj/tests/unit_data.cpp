#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "pod/dataset.hpp"
#include "pod/errors.hpp"
#include "pod/rng.hpp"

using namespace pod;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = "./" + name;
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("load_csv basic categorical file") {
    const std::string path = write_temp(
        "t_basic.csv", "f1,f2,label\n1.0,2.0,b\n3.5,-1.0,a\n0.25,4.0,b\n");
    ResponseSpec spec;
    spec.columns = {"label"};
    spec.kind = ResponseKind::categorical;
    const Dataset d = load_csv(path, spec);
    CHECK(d.n() == 3);
    CHECK(d.p() == 2);
    CHECK(d.n_classes == 2);
    // lexicographic dictionary: a -> 0, b -> 1
    CHECK(d.y_label[0] == 1);
    CHECK(d.y_label[1] == 0);
    CHECK(d.x(1, 0) == doctest::Approx(3.5));
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects non-finite cells naming the location") {
    const std::string path =
        write_temp("t_inf.csv", "f1,f2,y\n1.0,2.0,0.5\n1.0,inf,0.25\n");
    ResponseSpec spec;
    spec.columns = {"y"};
    spec.kind = ResponseKind::continuous;
    CHECK_THROWS_WITH_AS(load_csv(path, spec),
                         doctest::Contains("line 3"), DataError);
    std::remove(path.c_str());
}

TEST_CASE("load_csv errors: missing file, missing column, empty data") {
    ResponseSpec spec;
    spec.columns = {"y"};
    CHECK_THROWS_AS(load_csv("./does_not_exist.csv", spec), DataError);
    const std::string p1 = write_temp("t_nocol.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(p1, spec), DataError);
    const std::string p2 = write_temp("t_empty.csv", "a,y\n");
    CHECK_THROWS_AS(load_csv(p2, spec), DataError);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("load_csv is deterministic on identical bytes") {
    const std::string body = "f1,f2,y\n0.1,0.2,1\n0.3,0.4,2\n0.5,0.6,1\n";
    const std::string p1 = write_temp("t_det1.csv", body);
    const std::string p2 = write_temp("t_det2.csv", body);
    ResponseSpec spec;
    spec.columns = {"y"};
    spec.kind = ResponseKind::categorical;
    const Dataset a = load_csv(p1, spec);
    const Dataset b = load_csv(p2, spec);
    CHECK(a.x == b.x);
    CHECK(a.y_label == b.y_label);
    CHECK(a.label_names == b.label_names);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("numeric labels are dictionary-sorted numerically") {
    const std::string path = write_temp(
        "t_numlab.csv", "f1,y\n1,9\n2,0\n3,6\n4,9\n");
    ResponseSpec spec;
    spec.columns = {"y"};
    spec.kind = ResponseKind::categorical;
    const Dataset d = load_csv(path, spec);
    CHECK(d.label_names == std::vector<std::string>{"0", "6", "9"});
    CHECK(d.y_label == std::vector<int>{2, 0, 1, 2});
    std::remove(path.c_str());
}

TEST_CASE("standardize: constant column is flagged with scale 1") {
    Matrix x = Matrix::from_rows({{1.0, 0.0}, {1.0, 2.0}, {1.0, 4.0}});
    auto [z, cs] = standardize(x);
    CHECK(cs.degenerate[0] == 1);
    CHECK(cs.scale[0] == 1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(z(i, 0) == 0.0);
}

TEST_CASE("standardize (0,2) with the n-1 convention") {
    Matrix x = Matrix::from_rows({{0.0}, {2.0}});
    auto [z, cs] = standardize(x);
    CHECK(z(0, 0) == doctest::Approx(-0.70710678118654746).epsilon(1e-12));
    CHECK(z(1, 0) == doctest::Approx(0.70710678118654746).epsilon(1e-12));
    CHECK(cs.mean[0] == doctest::Approx(1.0));
}

TEST_CASE("standardize then invert is the identity (property over seeds)") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + rng.next_below(20);
        const std::size_t p = 1 + rng.next_below(6);
        Matrix x(n, p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j)
                x(i, j) = 10.0 * rng.next_normal() + 3.0;
        auto [z, cs] = standardize(x);
        const Matrix back = cs.invert(z);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j)
                CHECK(std::fabs(back(i, j) - x(i, j)) <=
                      1e-10 * (1.0 + std::fabs(x(i, j))));
        // post: column means ~0, sd ~1 unless degenerate
        for (std::size_t j = 0; j < p; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += z(i, j);
            mean /= static_cast<double>(n);
            CHECK(std::fabs(mean) <= 1e-10);
        }
    }
}

TEST_CASE("standardize requires two rows") {
    Matrix x(1, 2);
    CHECK_THROWS_AS(standardize(x), DataError);
}

TEST_CASE("dataset constructors reject NaN and range errors") {
    Matrix x = Matrix::from_rows({{1.0}, {2.0}});
    Matrix bad = Matrix::from_rows({{1.0}, {std::nan("")}});
    Matrix y = Matrix::from_rows({{0.0}, {1.0}});
    CHECK_THROWS_AS(Dataset::continuous(bad, y), DataError);
    CHECK_THROWS_AS(Dataset::continuous(x, bad), DataError);
    CHECK_THROWS_AS(Dataset::categorical(x, {0, 2}, 2), DataError);
    CHECK_THROWS_AS(Dataset::categorical(x, {0, -1}, 2), DataError);
    CHECK_NOTHROW(Dataset::categorical(x, {0, 1}, 3));  // class 2 unobserved is fine
}
