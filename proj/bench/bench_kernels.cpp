// Timings of the OpenMP kernels against their serial reference, plus one
// end-to-end study at 1 thread vs the OpenMP default.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "pod/matrix.hpp"
#include "pod/numerics.hpp"
#include "pod/rng.hpp"
#include "pod/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace pod;

namespace {

double time_ms(const std::function<void()>& fn, int iters) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() /
           static_cast<double>(iters);
}

Matrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) m(i, j) = rng.next_normal();
    return m;
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp max threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp; parallel kernels run serially\n");
#endif
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    const Matrix a = random_matrix(600, 300, 1);
    const Matrix b = random_matrix(300, 400, 2);
    row("matmul 600x300x400", time_ms([&] { kernels::matmul_serial(a, b); }, 3),
        time_ms([&] { kernels::matmul(a, b); }, 3));

    const Matrix x = random_matrix(2000, 250, 3);
    row("covariance 2000x250", time_ms([&] { sample_covariance_serial(x); }, 3),
        time_ms([&] { sample_covariance(x); }, 3));

    const Matrix q = random_matrix(500, 60, 4);
    const Matrix pts = random_matrix(4000, 60, 5);
    row("pairwise dist 500x4000x60",
        time_ms([&] { kernels::pairwise_sq_dist_serial(q, pts, 60); }, 3),
        time_ms([&] { kernels::pairwise_sq_dist(q, pts, 60); }, 3));

    // replication-level parallelism on a small rejection study
    Scenario sc;
    sc.kind = Scenario::Kind::sdr_model;
    sc.model_id = 1;
    sc.n = 150;
    sc.seed = 9;
    PODConfig c;
    c.k_folds = 4;
    c.d_max = 4;
    c.tau = 0.5;
    c.alpha = 0.05;
    c.reducer.kind = ReducerKind::sir;
    c.reducer.n_slices = 8;
    c.learners = {LearnerSpec::ols_learner(), LearnerSpec::knn_learner(0)};
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const double t1 = time_ms([&] { run_rejection_study(sc, c, 24); }, 1);
    omp_set_num_threads(max_threads);
    const double tn = time_ms([&] { run_rejection_study(sc, c, 24); }, 1);
    row("rejection study (24 reps)", t1, tn);
#else
    row("rejection study (24 reps)", time_ms([&] { run_rejection_study(sc, c, 24); }, 1),
        time_ms([&] { run_rejection_study(sc, c, 24); }, 1));
#endif
    return 0;
}
