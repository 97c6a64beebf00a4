#include "pod/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "pod/baselines.hpp"
#include "pod/errors.hpp"
#include "pod/numerics.hpp"

namespace pod {

std::pair<Dataset, FactorTruth> gen_factor(FactorRegime regime, std::size_t n, std::size_t p,
                                           std::uint64_t seed, double weak_vj) {
    constexpr std::size_t d_star = 5;
    if (p < d_star) throw ConfigError("gen_factor: p must be >= 5");
    if (n < 1) throw ConfigError("gen_factor: n must be >= 1");
    const Rng master(seed);

    Matrix loadings(p, d_star);
    if (regime == FactorRegime::weak) {
        const double head = std::sqrt(3.0 / std::sqrt(static_cast<double>(p)));
        for (std::size_t l = 0; l < p; ++l)
            for (std::size_t j = 0; j < d_star; ++j) {
                if (l < d_star) {
                    loadings(l, j) = head;
                } else {
                    const std::size_t l1 = l + 1, j1 = j + 1;
                    const double sign = (l1 % j1 == 0) ? -1.0 : 1.0;
                    loadings(l, j) =
                        sign * std::sqrt(3.0 / static_cast<double>(p - j1));
                }
            }
    } else {
        Rng rng = master.child(1);
        for (std::size_t l = 0; l < p; ++l)
            for (std::size_t j = 0; j < d_star; ++j)
                loadings(l, j) = rng.next_uniform(0.0, static_cast<double>(j + 1));
    }
    const double idio_sd = regime == FactorRegime::weak ? weak_vj : 5.0;

    Rng f_rng = master.child(2);
    Matrix f(n, d_star);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d_star; ++j) f(i, j) = f_rng.next_normal();

    static const double coef[d_star] = {1.0, 2.0, 1.0, 3.0, 2.0};
    const double eps_sd = std::sqrt(0.1);
    Rng eps_rng = master.child(3);
    Matrix y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < d_star; ++j) m += coef[j] * f(i, j);
        y(i, 0) = m + eps_sd * eps_rng.next_normal();
    }

    Rng u_rng = master.child(4);
    Matrix x(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < p; ++l) {
            double s = 0.0;
            for (std::size_t j = 0; j < d_star; ++j) s += loadings(l, j) * f(i, j);
            x(i, l) = s + idio_sd * u_rng.next_normal();
        }

    FactorTruth truth{std::move(f), std::move(loadings)};
    return {Dataset::continuous(std::move(x), std::move(y)), std::move(truth)};
}

Dataset gen_sdr_model(int id, std::size_t n, std::uint64_t seed, double sigma) {
    if (n < 1) throw ConfigError("gen_sdr_model: n must be >= 1");
    constexpr std::size_t p = 10;
    const Rng master(seed);
    Rng x_rng = master.child(1);
    Matrix x(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) x(i, j) = x_rng.next_normal();
    Rng noise_rng = master.child(2);

    if (id >= 1 && id <= 5) {
        Matrix y(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = x.row(i);
            double m = 0.0;
            switch (id) {
                case 1: m = r[0] + r[1] + r[2] + r[3]; break;
                case 2:
                    m = 0.4 * std::pow(r[0] + r[1] + r[2], 2) +
                        3.0 * std::sin((r[0] + r[8] + 3.0 * r[9]) / 4.0);
                    break;
                case 3: m = std::sin(r[0]); break;
                case 4: m = r[0] * r[0] + 0.5 * std::sin(r[1]); break;
                case 5: m = std::fabs(r[0]) + r[1] * (r[1] + r[2] + 1.0); break;
            }
            y(i, 0) = m + sigma * noise_rng.next_normal();
        }
        return Dataset::continuous(std::move(x), std::move(y));
    }
    if (id == 6) {
        // Y ~ Binomial(2, logistic(X1))
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double prob = 1.0 / (1.0 + std::exp(-x(i, 0)));
            int y = 0;
            if (noise_rng.next_double() < prob) ++y;
            if (noise_rng.next_double() < prob) ++y;
            labels[i] = y;
        }
        return Dataset::categorical(std::move(x), std::move(labels), 3);
    }
    if (id == 7) {
        // Y = 1{X1+..+X5 + sigma*eps > 1} + 2 * 1{X6+..+X10 + sigma*eps > 0},
        // with the same eps draw in both indicators, as printed
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = x.row(i);
            const double eps = sigma * noise_rng.next_normal();
            const double s1 = r[0] + r[1] + r[2] + r[3] + r[4] + eps;
            const double s2 = r[5] + r[6] + r[7] + r[8] + r[9] + eps;
            labels[i] = (s1 > 1.0 ? 1 : 0) + (s2 > 0.0 ? 2 : 0);
        }
        return Dataset::categorical(std::move(x), std::move(labels), 4);
    }
    throw ConfigError("gen_sdr_model: unknown model id " + std::to_string(id));
}

Dataset gen_bernoulli(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("gen_bernoulli: n must be >= 1");
    constexpr std::size_t p = 10;
    Matrix sigma(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            sigma(i, j) = std::pow(0.5, std::fabs(static_cast<double>(i) -
                                                  static_cast<double>(j)));
    const Matrix l = cholesky(sigma);

    const Rng master(seed);
    Rng x_rng = master.child(1);
    Rng y_rng = master.child(2);
    Matrix x(n, p);
    std::vector<int> labels(n);
    std::vector<double> g(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) g[j] = x_rng.next_normal();
        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += l(j, k) * g[k];
            x(i, j) = s;
        }
        labels[i] = x(i, 0) > 0.0 ? 1 : (y_rng.next_double() < 0.6 ? 1 : 0);
    }
    return Dataset::categorical(std::move(x), std::move(labels), 2);
}

Dataset Scenario::generate(std::uint64_t rep_seed) const {
    switch (kind) {
        case Kind::factor: return gen_factor(regime, n, p, rep_seed, weak_vj).first;
        case Kind::sdr_model: return gen_sdr_model(model_id, n, rep_seed, sigma);
        case Kind::bernoulli: return gen_bernoulli(n, rep_seed);
    }
    throw ConfigError("scenario: unknown kind");
}

int Scenario::d_star(const Loss& loss) const {
    switch (kind) {
        case Kind::factor: return 5;
        case Kind::sdr_model:
            switch (model_id) {
                case 1: return 1;
                case 2: return 2;
                case 3: return 1;
                case 4: return 2;
                case 5: return 3;
                case 6: return 1;
                case 7: return 2;
            }
            throw ConfigError("scenario: unknown model id");
        case Kind::bernoulli:
            return loss.kind == LossKind::zero_one ? 0 : 1;
    }
    throw ConfigError("scenario: unknown kind");
}

std::string Scenario::name() const {
    switch (kind) {
        case Kind::factor:
            return regime == FactorRegime::weak ? "factor-weak" : "factor-pervasive";
        case Kind::sdr_model: return "model" + std::to_string(model_id);
        case Kind::bernoulli: return "bernoulli";
    }
    return "?";
}

namespace {

template <typename F>
void parallel_reps(int reps, F&& fn) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic)
    for (int rep = 0; rep < reps; ++rep) {
        try {
            fn(rep);
        } catch (...) {
            errors[static_cast<std::size_t>(rep)] = std::current_exception();
        }
    }
    for (int rep = 0; rep < reps; ++rep) {
        if (!errors[static_cast<std::size_t>(rep)]) continue;
        try {
            std::rethrow_exception(errors[static_cast<std::size_t>(rep)]);
        } catch (const std::exception& e) {
            throw NumericError("replication " + std::to_string(rep) + ": " + e.what());
        }
    }
}

struct RepSeeds {
    std::uint64_t dataset;
    std::uint64_t engine;
};

RepSeeds rep_seeds(std::uint64_t base, int rep) {
    const Rng master(base);
    RepSeeds s;
    s.dataset = master.child(stream::kDataset, static_cast<std::uint64_t>(rep)).next_u64();
    s.engine = master.child(stream::kEngine, static_cast<std::uint64_t>(rep)).next_u64();
    return s;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string config_echo_header() {
    return "scenario,n,p,model,sigma,weak_vj,scenario_seed,reps,alpha,loss,reducer,slices,"
           "dmax,folds,tau,reducer_fit,inner_folds,learners";
}

std::string loss_name(const Loss& l) {
    switch (l.kind) {
        case LossKind::squared: return "squared";
        case LossKind::zero_one: return "zero-one";
        case LossKind::cross_entropy: return "cross-entropy";
    }
    return "?";
}

std::string config_echo_row(const Scenario& s, const PODConfig& c, int reps) {
    std::ostringstream os;
    std::string learners;
    for (const auto& l : c.learners) {
        if (!learners.empty()) learners += "|";
        learners += l.name();
    }
    os << s.name() << "," << s.n << "," << (s.kind == Scenario::Kind::factor ? s.p : 10) << ","
       << (s.kind == Scenario::Kind::sdr_model ? s.model_id : 0) << "," << fmt(s.sigma) << ","
       << fmt(s.weak_vj) << "," << s.seed << "," << reps << "," << fmt(c.alpha) << ","
       << loss_name(c.loss) << "," << reducer_kind_name(c.reducer.kind) << ","
       << c.reducer.n_slices << "," << c.d_max << "," << c.k_folds << "," << fmt(c.tau) << ","
       << (c.reducer_fit == ReducerFit::once ? "once" : "per-fold") << "," << c.inner_folds
       << "," << learners;
    return os.str();
}

}  // namespace

RejectionReport run_rejection_study(const Scenario& scenario, const PODConfig& config,
                                    int reps) {
    if (reps < 1) throw ConfigError("rejection study: reps must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n_tests = static_cast<std::size_t>(config.d_max) + 1;
    std::vector<std::vector<std::uint8_t>> rejects(
        static_cast<std::size_t>(reps), std::vector<std::uint8_t>(n_tests, 0));

    parallel_reps(reps, [&](int rep) {
        const RepSeeds seeds = rep_seeds(scenario.seed, rep);
        const Dataset data = scenario.generate(seeds.dataset);
        PODConfig c = config;
        c.seed = seeds.engine;
        const PODResult res = select_order(data, c, TestMode::per_step_all);
        for (const TestResult& t : res.trail)
            rejects[static_cast<std::size_t>(rep)][static_cast<std::size_t>(t.d)] =
                t.reject ? 1 : 0;
    });

    RejectionReport report;
    report.reps = reps;
    report.rate.assign(n_tests, 0.0);
    for (int rep = 0; rep < reps; ++rep)
        for (std::size_t d = 0; d < n_tests; ++d)
            report.rate[d] += rejects[static_cast<std::size_t>(rep)][d];
    for (auto& r : report.rate) r /= static_cast<double>(reps);
    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    return report;
}

std::string order_method_name(OrderMethod m) {
    switch (m) {
        case OrderMethod::pod: return "pod";
        case OrderMethod::ic: return "ic";
        case OrderMethod::er: return "er";
    }
    return "?";
}

OrderReport run_order_study(const Scenario& scenario, const PODConfig& config,
                            const std::vector<std::size_t>& n_grid,
                            const std::vector<OrderMethod>& methods, int reps) {
    if (reps < 1) throw ConfigError("order study: reps must be >= 1");
    if (n_grid.empty()) throw ConfigError("order study: empty n grid");
    if (methods.empty()) throw ConfigError("order study: no methods");
    const auto start = std::chrono::steady_clock::now();
    const int d_star = scenario.d_star(config.loss);

    OrderReport report;
    report.reps = reps;
    for (std::size_t n_val : n_grid) {
        Scenario sc = scenario;
        sc.n = n_val;
        // one shared set of replicated datasets per n, reused by every method
        std::vector<Matrix> d_hat(methods.size(),
                                  Matrix(static_cast<std::size_t>(reps), 1));
        parallel_reps(reps, [&](int rep) {
            const RepSeeds seeds = rep_seeds(sc.seed, rep);
            const Dataset data = sc.generate(seeds.dataset);
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                int est = 0;
                switch (methods[mi]) {
                    case OrderMethod::pod: {
                        PODConfig c = config;
                        c.seed = seeds.engine;
                        est = select_order(data, c, TestMode::sequential).d_hat;
                        break;
                    }
                    case OrderMethod::ic:
                        est = ic_p1(data.x, config.d_max).k_hat;
                        break;
                    case OrderMethod::er:
                        est = eigenvalue_ratio(data.x, config.d_max).k_hat;
                        break;
                }
                d_hat[mi](static_cast<std::size_t>(rep), 0) = est;
            }
        });
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            OrderReport::Row row;
            row.method = order_method_name(methods[mi]);
            row.n = n_val;
            for (int rep = 0; rep < reps; ++rep) {
                const int est = static_cast<int>(d_hat[mi](static_cast<std::size_t>(rep), 0));
                if (est == d_star)
                    row.correct += 1.0;
                else if (est > d_star)
                    row.over += 1.0;
                else
                    row.under += 1.0;
            }
            row.correct /= reps;
            row.over /= reps;
            row.under /= reps;
            report.rows.push_back(row);
        }
    }
    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    return report;
}

std::string rejection_report_csv(const Scenario& scenario, const PODConfig& config,
                                 const RejectionReport& report) {
    std::ostringstream os;
    os << config_echo_header() << ",d,reject_rate\n";
    const std::string echo = config_echo_row(scenario, config, report.reps);
    for (std::size_t d = 0; d < report.rate.size(); ++d)
        os << echo << "," << d << "," << fmt(report.rate[d]) << "\n";
    return os.str();
}

std::string order_report_csv(const Scenario& scenario, const PODConfig& config,
                             const OrderReport& report) {
    std::ostringstream os;
    os << config_echo_header() << ",method,study_n,p_correct,p_over,p_under\n";
    const std::string echo = config_echo_row(scenario, config, report.reps);
    for (const auto& row : report.rows)
        os << echo << "," << row.method << "," << row.n << "," << fmt(row.correct) << ","
           << fmt(row.over) << "," << fmt(row.under) << "\n";
    return os.str();
}

}  // namespace pod
