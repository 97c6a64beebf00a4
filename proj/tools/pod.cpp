#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pod/baselines.hpp"
#include "pod/dataset.hpp"
#include "pod/engine.hpp"
#include "pod/errors.hpp"
#include "pod/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240801;

// exit codes: 2 config, 3 data, 4 numerical
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string fnv64_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pod::DataError("cannot open '" + path + "' for digest");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

json number_or_tag(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? json("inf") : json("-inf");
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pod::DataError("cannot write '" + path.string() + "'");
    out << body;
}

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads <= 0) {
        if (const char* env = std::getenv("POD_THREADS")) threads = std::atoi(env);
    }
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

pod::Loss parse_loss(const std::string& name, int n_classes) {
    if (name == "squared") return pod::Loss::squared();
    if (name == "zero-one") return pod::Loss::zero_one(n_classes);
    if (name == "cross-entropy") return pod::Loss::cross_entropy(n_classes);
    throw pod::ConfigError("unknown loss '" + name + "'");
}

pod::ReducerKind parse_reducer(const std::string& name) {
    if (name == "pca") return pod::ReducerKind::pca;
    if (name == "sir") return pod::ReducerKind::sir;
    if (name == "dr") return pod::ReducerKind::dr;
    if (name == "rrr") return pod::ReducerKind::rrr;
    throw pod::ConfigError("unknown reducer '" + name + "' (expected pca|sir|dr|rrr)");
}

std::vector<pod::LearnerSpec> parse_learners(const std::string& list) {
    std::vector<pod::LearnerSpec> out;
    std::string cur;
    for (char c : list + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(pod::LearnerSpec::parse(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (out.empty()) throw pod::ConfigError("--learners: empty list");
    return out;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

// ---- determine ----------------------------------------------------------

struct DetermineArgs {
    std::string data_path;
    std::string response;
    std::string response_kind = "continuous";
    std::string loss;  // default: squared for continuous, cross-entropy otherwise
    std::string reducer = "pca";
    int slices = 0;
    int d_max = 8;
    int folds = 5;
    double tau = 0.8;
    double alpha = 0.05;
    std::string learners;  // default per response kind
    std::string reducer_fit = "per-fold";
    double ridge = 0.0;
    bool pca_standardize = false;
    int inner_folds = 2;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
    std::string out_dir = ".";
};

json determine_config_json(const DetermineArgs& a) {
    return json{{"data", a.data_path},
                {"response", a.response},
                {"response_kind", a.response_kind},
                {"loss", a.loss},
                {"reducer", a.reducer},
                {"slices", a.slices},
                {"dmax", a.d_max},
                {"folds", a.folds},
                {"tau", a.tau},
                {"alpha", a.alpha},
                {"learners", a.learners},
                {"reducer_fit", a.reducer_fit},
                {"ridge", a.ridge},
                {"pca_standardize", a.pca_standardize},
                {"inner_folds", a.inner_folds},
                {"seed", a.seed}};
}

DetermineArgs determine_args_from_json(const json& j) {
    DetermineArgs a;
    a.data_path = j.at("data").get<std::string>();
    a.response = j.at("response").get<std::string>();
    a.response_kind = j.at("response_kind").get<std::string>();
    a.loss = j.at("loss").get<std::string>();
    a.reducer = j.at("reducer").get<std::string>();
    a.slices = j.at("slices").get<int>();
    a.d_max = j.at("dmax").get<int>();
    a.folds = j.at("folds").get<int>();
    a.tau = j.at("tau").get<double>();
    a.alpha = j.at("alpha").get<double>();
    a.learners = j.at("learners").get<std::string>();
    a.reducer_fit = j.at("reducer_fit").get<std::string>();
    a.ridge = j.at("ridge").get<double>();
    a.pca_standardize = j.at("pca_standardize").get<bool>();
    a.inner_folds = j.at("inner_folds").get<int>();
    a.seed = j.at("seed").get<std::uint64_t>();
    return a;
}

int run_determine(const DetermineArgs& args_in) {
    DetermineArgs args = args_in;
    apply_threads(args.threads);
    const auto started = std::chrono::steady_clock::now();

    pod::ResponseSpec rspec;
    rspec.columns = split_commas(args.response);
    if (args.response_kind == "continuous")
        rspec.kind = pod::ResponseKind::continuous;
    else if (args.response_kind == "categorical")
        rspec.kind = pod::ResponseKind::categorical;
    else
        throw pod::ConfigError("--response-kind must be continuous or categorical");

    const pod::Dataset data = pod::load_csv(args.data_path, rspec);

    if (args.loss.empty())
        args.loss = data.kind == pod::ResponseKind::continuous ? "squared" : "cross-entropy";
    if (args.learners.empty())
        args.learners = data.kind == pod::ResponseKind::continuous ? "ols,tree:4:10,knn"
                                                                   : "knn,tree:4:10";

    pod::PODConfig config;
    config.k_folds = args.folds;
    config.d_max = args.d_max;
    config.tau = args.tau;
    config.alpha = args.alpha;
    config.loss = parse_loss(args.loss, data.n_classes);
    config.reducer.kind = parse_reducer(args.reducer);
    config.reducer.n_slices = args.slices;
    config.reducer.ridge = args.ridge;
    config.reducer.pca_standardize = args.pca_standardize;
    config.learners = parse_learners(args.learners);
    config.reducer_fit =
        args.reducer_fit == "once" ? pod::ReducerFit::once : pod::ReducerFit::per_fold;
    config.inner_folds = args.inner_folds;
    config.seed = args.seed;

    std::cout << "seed: " << args.seed << "\n";
    const pod::PODResult result = pod::select_order(data, config);

    std::cout << "  d        psi            nu2              T      p-value  reject\n";
    for (const auto& t : result.trail)
        std::printf("%3d   %12.6g   %12.6g   %10.4f   %8.4f   %s\n", t.d, t.psi, t.nu2, t.t,
                    t.p_value, t.reject ? "yes" : "no");
    std::cout << "selected d_hat = " << result.d_hat << "  (n=" << result.n
              << ", tau=" << result.tau_nominal << " realized " << result.tau_realized << ")\n";

    json trail = json::array();
    for (const auto& t : result.trail)
        trail.push_back(json{{"d", t.d},
                             {"psi", t.psi},
                             {"nu2", t.nu2},
                             {"t", number_or_tag(t.t)},
                             {"z_crit", t.z_crit},
                             {"p_value", t.p_value},
                             {"reject", t.reject}});
    const json out = {{"d_hat", result.d_hat},
                      {"n", result.n},
                      {"tau_nominal", result.tau_nominal},
                      {"tau_realized", result.tau_realized},
                      {"alpha", config.alpha},
                      {"loss", args.loss},
                      {"trail", trail}};

    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "result.json", out.dump(2) + "\n");

    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
    const json manifest = {{"command", "determine"},
                           {"config", determine_config_json(args)},
                           {"inputs",
                            {{"data",
                              {{"path", args.data_path}, {"fnv64", fnv64_hex(args.data_path)}}}}},
                           {"outputs", {"result.json"}},
                           {"timing_ms", ms}};
    write_file(fs::path(args.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    return 0;
}

// ---- simulate -----------------------------------------------------------

struct SimulateArgs {
    std::string config_path;
    int reps_override = 0;
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
    int threads = 0;
    std::string out_dir = ".";
};

int run_simulate(const SimulateArgs& args) {
    apply_threads(args.threads);
    const auto started = std::chrono::steady_clock::now();

    std::ifstream in(args.config_path);
    if (!in) throw pod::DataError("cannot open config '" + args.config_path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw pod::ConfigError(std::string("config JSON: ") + e.what());
    }

    pod::Scenario sc;
    const json& jsc = doc.at("scenario");
    const std::string kind = jsc.at("kind").get<std::string>();
    if (kind == "factor") {
        sc.kind = pod::Scenario::Kind::factor;
        const std::string regime = jsc.at("regime").get<std::string>();
        if (regime == "weak")
            sc.regime = pod::FactorRegime::weak;
        else if (regime == "pervasive")
            sc.regime = pod::FactorRegime::pervasive;
        else
            throw pod::ConfigError("scenario.regime must be weak or pervasive");
        sc.p = jsc.at("p").get<std::size_t>();
        if (jsc.contains("weak_vj")) sc.weak_vj = jsc.at("weak_vj").get<double>();
    } else if (kind == "sdr") {
        sc.kind = pod::Scenario::Kind::sdr_model;
        sc.model_id = jsc.at("model").get<int>();
        if (jsc.contains("sigma")) sc.sigma = jsc.at("sigma").get<double>();
    } else if (kind == "bernoulli") {
        sc.kind = pod::Scenario::Kind::bernoulli;
    } else {
        throw pod::ConfigError("scenario.kind must be factor, sdr, or bernoulli");
    }
    sc.n = jsc.at("n").get<std::size_t>();
    sc.seed = doc.value("seed", kDefaultSeed);
    if (args.has_seed_override) sc.seed = args.seed_override;

    int reps = doc.value("reps", 200);
    if (args.reps_override > 0) reps = args.reps_override;

    const json& jp = doc.at("pod");
    pod::PODConfig config;
    config.k_folds = jp.value("folds", 5);
    config.d_max = jp.value("dmax", 8);
    config.tau = jp.value("tau", 0.8);
    config.alpha = doc.value("alpha", 0.05);
    const int n_classes = sc.kind == pod::Scenario::Kind::bernoulli ? 2
                          : sc.kind == pod::Scenario::Kind::sdr_model && sc.model_id == 6 ? 3
                          : sc.kind == pod::Scenario::Kind::sdr_model && sc.model_id == 7 ? 4
                                                                                          : 0;
    config.loss = parse_loss(jp.value("loss", std::string("squared")), n_classes);
    config.reducer.kind = parse_reducer(jp.value("reducer", std::string("pca")));
    config.reducer.n_slices = jp.value("slices", 0);
    config.reducer.pca_standardize = jp.value("pca_standardize", false);
    config.reducer_fit = jp.value("reducer_fit", std::string("per-fold")) == "once"
                             ? pod::ReducerFit::once
                             : pod::ReducerFit::per_fold;
    config.inner_folds = jp.value("inner_folds", 2);
    std::string learner_list;
    for (const auto& l : jp.at("learners")) {
        if (!learner_list.empty()) learner_list += ",";
        learner_list += l.get<std::string>();
    }
    config.learners = parse_learners(learner_list);

    const std::string study = doc.value("study", std::string("rejection"));
    std::cout << "seed: " << sc.seed << "\n";

    std::string csv;
    if (study == "rejection") {
        const pod::RejectionReport report = pod::run_rejection_study(sc, config, reps);
        csv = pod::rejection_report_csv(sc, config, report);
        std::cout << "rejection rates (d = 0.." << config.d_max << "):";
        for (double r : report.rate) std::printf(" %.3f", r);
        std::cout << "\n";
    } else if (study == "order") {
        std::vector<std::size_t> n_grid;
        for (const auto& v : doc.at("n_grid")) n_grid.push_back(v.get<std::size_t>());
        std::vector<pod::OrderMethod> methods;
        for (const auto& v : doc.at("methods")) {
            const std::string m = v.get<std::string>();
            if (m == "pod")
                methods.push_back(pod::OrderMethod::pod);
            else if (m == "ic")
                methods.push_back(pod::OrderMethod::ic);
            else if (m == "er")
                methods.push_back(pod::OrderMethod::er);
            else
                throw pod::ConfigError("methods entries must be pod, ic, or er");
        }
        // an optional loss list runs the study once per loss, one column block
        // each (each loss is scored against its own target order)
        std::vector<std::string> losses;
        if (doc.contains("losses"))
            for (const auto& v : doc.at("losses")) losses.push_back(v.get<std::string>());
        else
            losses.push_back(jp.value("loss", std::string("squared")));
        pod::OrderReport combined;
        combined.reps = reps;
        for (const std::string& lname : losses) {
            pod::PODConfig cl = config;
            cl.loss = parse_loss(lname, n_classes);
            pod::OrderReport report = pod::run_order_study(sc, cl, n_grid, methods, reps);
            for (auto& row : report.rows) {
                if (losses.size() > 1 && row.method == "pod") row.method += ":" + lname;
                combined.rows.push_back(row);
            }
        }
        csv = pod::order_report_csv(sc, config, combined);
        for (const auto& row : combined.rows)
            std::printf("n=%zu %-20s correct=%.3f over=%.3f under=%.3f\n", row.n,
                        row.method.c_str(), row.correct, row.over, row.under);
    } else {
        throw pod::ConfigError("study must be rejection or order");
    }

    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "study.csv", csv);

    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
    json resolved = doc;
    resolved["seed"] = sc.seed;
    resolved["reps"] = reps;
    const json manifest = {{"command", "simulate"},
                           {"config", resolved},
                           {"inputs",
                            {{"config",
                              {{"path", args.config_path},
                               {"fnv64", fnv64_hex(args.config_path)}}}}},
                           {"outputs", {"study.csv"}},
                           {"timing_ms", ms}};
    write_file(fs::path(args.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    return 0;
}

// ---- baseline -----------------------------------------------------------

struct BaselineArgs {
    std::string data_path;
    std::string response;  // optional columns to drop
    std::string method = "ic";
    int k_max = 8;
    int d_max = 8;
    double alpha = 0.05;
    int subsamples = 200;
    double subsample_frac = 0.7;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
    std::string out_dir = ".";
};

json baseline_config_json(const BaselineArgs& a) {
    return json{{"data", a.data_path},
                {"response", a.response},
                {"method", a.method},
                {"kmax", a.k_max},
                {"dmax", a.d_max},
                {"alpha", a.alpha},
                {"subsamples", a.subsamples},
                {"subsample_frac", a.subsample_frac},
                {"seed", a.seed}};
}

BaselineArgs baseline_args_from_json(const json& j) {
    BaselineArgs a;
    a.data_path = j.at("data").get<std::string>();
    a.response = j.at("response").get<std::string>();
    a.method = j.at("method").get<std::string>();
    a.k_max = j.at("kmax").get<int>();
    a.d_max = j.at("dmax").get<int>();
    a.alpha = j.at("alpha").get<double>();
    a.subsamples = j.at("subsamples").get<int>();
    a.subsample_frac = j.at("subsample_frac").get<double>();
    a.seed = j.at("seed").get<std::uint64_t>();
    return a;
}

// load the predictor block, dropping any declared response columns
pod::Matrix load_predictors(const std::string& path, const std::string& response) {
    if (!response.empty()) {
        pod::ResponseSpec spec;
        spec.columns = split_commas(response);
        spec.kind = pod::ResponseKind::continuous;
        return pod::load_csv(path, spec).x;
    }
    // whole file is the predictor block: reattach the column load_csv pulls out
    std::ifstream probe(path);
    if (!probe) throw pod::DataError("cannot open '" + path + "'");
    std::string header;
    std::getline(probe, header);
    std::string last;
    for (char c : header) {
        if (c == ',')
            last.clear();
        else if (c != '\r')
            last += c;
    }
    pod::ResponseSpec spec;
    spec.columns = {last};
    spec.kind = pod::ResponseKind::continuous;
    const pod::Dataset d = pod::load_csv(path, spec);
    pod::Matrix x(d.n(), d.p() + 1);
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t j = 0; j < d.p(); ++j) x(i, j) = d.x(i, j);
        x(i, d.p()) = d.y_cont(i, 0);
    }
    return x;
}

int run_baseline(const BaselineArgs& args) {
    apply_threads(args.threads);
    const auto started = std::chrono::steady_clock::now();
    const pod::Matrix x = load_predictors(args.data_path, args.response);

    std::cout << "seed: " << args.seed << "\n";
    json out;
    if (args.method == "ic") {
        const pod::IcResult res = pod::ic_p1(x, args.k_max);
        out = {{"method", "ic"},
               {"k_hat", res.k_hat},
               {"ic", res.ic},
               {"eigenvalues", res.eigenvalues}};
        std::cout << "ic_p1 k_hat = " << res.k_hat << "\n";
    } else if (args.method == "er") {
        const pod::ErResult res = pod::eigenvalue_ratio(x, args.k_max);
        out = {{"method", "er"},
               {"k_hat", res.k_hat},
               {"ratios", res.ratios},
               {"eigenvalues", res.eigenvalues}};
        std::cout << "eigenvalue-ratio k_hat = " << res.k_hat << "\n";
    } else if (args.method == "kapetanios") {
        const std::size_t sub =
            static_cast<std::size_t>(args.subsample_frac * static_cast<double>(x.rows()));
        const pod::KapetaniosResult res =
            pod::kapetanios_test(x, args.d_max, args.alpha, args.subsamples, sub, args.seed);
        json rejects = json::array();
        for (bool b : res.reject) rejects.push_back(b);
        out = {{"method", "kapetanios"},
               {"stat", res.stat},
               {"crit", res.crit},
               {"reject", rejects},
               {"alpha", args.alpha},
               {"subsamples", args.subsamples},
               {"subsample_size", sub},
               {"eigenvalues", res.eigenvalues}};
        std::cout << "kapetanios per-d decisions:";
        for (std::size_t d = 0; d < res.reject.size(); ++d)
            std::cout << " d" << d << (res.reject[d] ? ":reject" : ":accept");
        std::cout << "\n";
    } else if (args.method == "onatski-stat") {
        const std::vector<double> eigs = pod::onatski_spectrum(x);
        std::vector<double> stats;
        for (int d = 0; d < args.d_max; ++d)
            stats.push_back(pod::onatski_stat_from_eigs(eigs, d, args.d_max));
        out = {{"method", "onatski-stat"}, {"stat", stats}, {"eigenvalues", eigs}};
        std::cout << "onatski statistics per d:";
        for (double s : stats) std::printf(" %.4g", s);
        std::cout << "\n";
    } else {
        throw pod::ConfigError("unknown method '" + args.method +
                               "' (expected ic|er|kapetanios|onatski-stat)");
    }

    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "baseline.json", out.dump(2) + "\n");

    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
    const json manifest = {{"command", "baseline"},
                           {"config", baseline_config_json(args)},
                           {"inputs",
                            {{"data",
                              {{"path", args.data_path}, {"fnv64", fnv64_hex(args.data_path)}}}}},
                           {"outputs", {"baseline.json"}},
                           {"timing_ms", ms}};
    write_file(fs::path(args.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    return 0;
}

// ---- rerun --------------------------------------------------------------

int run_rerun(const std::string& manifest_path, const std::string& out_dir, int threads) {
    std::ifstream in(manifest_path);
    if (!in) throw pod::DataError("cannot open manifest '" + manifest_path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw pod::ConfigError(std::string("manifest JSON: ") + e.what());
    }
    const std::string command = doc.at("command").get<std::string>();
    if (command == "determine") {
        DetermineArgs a = determine_args_from_json(doc.at("config"));
        a.out_dir = out_dir;
        a.threads = threads;
        return run_determine(a);
    }
    if (command == "baseline") {
        BaselineArgs a = baseline_args_from_json(doc.at("config"));
        a.out_dir = out_dir;
        a.threads = threads;
        return run_baseline(a);
    }
    if (command == "simulate") {
        // the manifest carries the resolved scenario document; materialize it
        const fs::path tmp = fs::path(out_dir) / "rerun_config.json";
        fs::create_directories(out_dir);
        write_file(tmp, doc.at("config").dump(2) + "\n");
        SimulateArgs a;
        a.config_path = tmp.string();
        a.out_dir = out_dir;
        a.threads = threads;
        return run_simulate(a);
    }
    throw pod::ConfigError("manifest command '" + command + "' not recognized");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"predictive order determination"};
    app.require_subcommand(1);

    DetermineArgs det;
    CLI::App* cmd_det = app.add_subcommand("determine", "select the predictive order d_hat");
    cmd_det->add_option("--data", det.data_path, "CSV file with a header row")->required();
    cmd_det->add_option("--response", det.response, "response column name(s), comma separated")
        ->required();
    cmd_det->add_option("--response-kind", det.response_kind, "continuous|categorical");
    cmd_det->add_option("--loss", det.loss, "squared|zero-one|cross-entropy");
    cmd_det->add_option("--reducer", det.reducer, "pca|sir|dr|rrr");
    cmd_det->add_option("--slices", det.slices, "slice count for sir/dr (0 = auto)");
    cmd_det->add_option("--dmax", det.d_max, "search limit")->check(CLI::PositiveNumber);
    cmd_det->add_option("--folds", det.folds, "cross-fitting folds K")->check(CLI::Range(2, 1000));
    cmd_det->add_option("--tau", det.tau, "overlap proportion")
        ->check(CLI::Range(0.0, 0.999999));
    cmd_det->add_option("--alpha", det.alpha, "test level")->check(CLI::Range(1e-12, 0.999999));
    cmd_det->add_option("--learners", det.learners, "e.g. ols,knn:5,tree:4:10,mlp:5");
    cmd_det->add_option("--reducer-fit", det.reducer_fit, "per-fold|once");
    cmd_det->add_option("--ridge", det.ridge, "ridge for the rrr reducer");
    cmd_det->add_flag("--pca-standardize", det.pca_standardize,
                      "standardize predictors before pca");
    cmd_det->add_option("--inner-folds", det.inner_folds, "inner CV folds for selection");
    cmd_det->add_option("--seed", det.seed, "master seed");
    cmd_det->add_option("--threads", det.threads, "worker threads (0 = default)");
    cmd_det->add_option("--out", det.out_dir, "output directory");

    SimulateArgs sim;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "run a Monte Carlo study");
    cmd_sim->add_option("--config", sim.config_path, "scenario JSON document")->required();
    cmd_sim->add_option("--reps", sim.reps_override, "override replication count");
    CLI::Option* seed_opt = cmd_sim->add_option("--seed", sim.seed_override, "override seed");
    cmd_sim->add_option("--threads", sim.threads, "worker threads (0 = default)");
    cmd_sim->add_option("--out", sim.out_dir, "output directory");

    BaselineArgs base;
    CLI::App* cmd_base = app.add_subcommand("baseline", "eigenvalue-based order estimators");
    cmd_base->add_option("--data", base.data_path, "CSV file with a header row")->required();
    cmd_base->add_option("--response", base.response, "response column(s) to drop");
    cmd_base->add_option("--method", base.method, "ic|er|kapetanios|onatski-stat");
    cmd_base->add_option("--kmax", base.k_max, "search limit for ic/er");
    cmd_base->add_option("--dmax", base.d_max, "search limit for kapetanios/onatski");
    cmd_base->add_option("--alpha", base.alpha, "level for kapetanios")
        ->check(CLI::Range(1e-12, 0.999999));
    cmd_base->add_option("--subsamples", base.subsamples, "kapetanios subsample count");
    cmd_base->add_option("--subsample-frac", base.subsample_frac,
                         "kapetanios subsample fraction")
        ->check(CLI::Range(0.01, 1.0));
    cmd_base->add_option("--seed", base.seed, "master seed");
    cmd_base->add_option("--threads", base.threads, "worker threads (0 = default)");
    cmd_base->add_option("--out", base.out_dir, "output directory");

    std::string rerun_manifest, rerun_out = ".";
    int rerun_threads = 0;
    CLI::App* cmd_rerun = app.add_subcommand("rerun", "re-execute a recorded manifest");
    cmd_rerun->add_option("--manifest", rerun_manifest, "manifest.json from a previous run")
        ->required();
    cmd_rerun->add_option("--out", rerun_out, "output directory");
    cmd_rerun->add_option("--threads", rerun_threads, "worker threads (0 = default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*cmd_det) return run_determine(det);
        if (*cmd_sim) {
            sim.has_seed_override = seed_opt->count() > 0;
            return run_simulate(sim);
        }
        if (*cmd_base) return run_baseline(base);
        if (*cmd_rerun) return run_rerun(rerun_manifest, rerun_out, rerun_threads);
    } catch (const pod::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const pod::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const pod::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
