#include "probagg/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "probagg/baselines.hpp"
#include "probagg/metrics.hpp"
#include "probagg/pac.hpp"

namespace probagg::harness {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string> kKnownMetrics = {"acc", "nmi", "ari"};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// NaN is written as null so the output stays valid JSON.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return kNaN;
    return j.at(key).get<double>();
}

double mean_confidence(const PartitionMatrix& p) {
    if (p.n() == 0) return kNaN;
    double total = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
        auto r = p.row(i);
        total += *std::max_element(r.begin(), r.end());
    }
    return total / static_cast<double>(p.n());
}

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        sum += v;
        ++s.count;
    }
    if (s.count == 0) {
        s.mean = kNaN;
        s.std = kNaN;
        return s;
    }
    s.mean = sum / static_cast<double>(s.count);
    double sq = 0.0;
    for (double v : values) {
        if (std::isfinite(v)) sq += (v - s.mean) * (v - s.mean);
    }
    s.std = std::sqrt(sq / static_cast<double>(s.count));
    return s;
}

bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same_summary(const MetricSummary& a, const MetricSummary& b) {
    return same_number(a.mean, b.mean) && same_number(a.std, b.std) && a.count == b.count;
}

std::string error_text(const char* kind, const std::exception& e) { return std::string(kind) + ": " + e.what(); }

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

DataMatrix training_space(const DataMatrix& x, const OnlineTrainConfig& cfg) {
    return cfg.standardize ? Standardizer::fit(x).apply(x) : x;
}

// Everything the offline-code trainer produces, with or without ground truth.
struct OfflineRun {
    OnlineTrainResult trained;
    TrainingTrace trace;
};

OfflineRun train_offline(const DataMatrix& x, std::size_t k, const OfflineRefreshSpec& refresh,
                         const OnlineTrainConfig& trainer, const Labels* truth) {
    refresh.validate();
    trainer.validate(x.n());
    const DataMatrix u = training_space(x, trainer);
    std::optional<DistanceMatrix> d_full;
    if (refresh.offline == Algorithm::Pac) d_full = pairwise_distances(u, trainer.distance);

    OfflineRun run;
    PartitionMatrix codes;
    Labels code_labels;
    std::size_t refreshes = 0;

    auto recompute = [&](std::size_t epoch, const LinearClassifier& clf) {
        const PartitionMatrix probs = clf.predict_proba(x);
        const std::uint64_t seed = trainer.seed + refreshes;
        switch (refresh.offline) {
        case Algorithm::Pac: {
            SolverConfig cfg;
            cfg.k = k;
            cfg.m = trainer.m;
            cfg.seed = seed;
            cfg.score_floor = trainer.score_floor;
            PacOptions options;
            options.initial = probs;
            codes = pac_fit(*d_full, cfg, options).partition;
            break;
        }
        case Algorithm::Fcm: {
            FcmConfig cfg;
            cfg.k = k;
            cfg.m = trainer.m;
            cfg.seed = seed;
            cfg.score_floor = trainer.score_floor;
            if (refreshes > 0) cfg.initial_centers = weighted_centers(u, probs, trainer.m);
            codes = fcm_fit(u, cfg).partition;
            break;
        }
        case Algorithm::KMeans: {
            KMeansConfig cfg;
            cfg.k = k;
            cfg.seed = seed;
            if (refreshes > 0) cfg.initial_centers = weighted_centers(u, probs);
            codes = PartitionMatrix::one_hot(kmeans_fit(u, cfg).labels.ids, k);
            break;
        }
        default:
            throw ConfigError("offline refresh supports pac, fcm and kmeans");
        }
        code_labels = hard_labels(codes);
        run.trace.refresh_epochs.push_back(epoch);
        ++refreshes;
    };

    TrainHooks hooks;
    hooks.before_epoch = [&](std::size_t epoch, const LinearClassifier& clf) {
        if ((epoch - 1) % refresh.period == 0) recompute(epoch, clf);
    };
    hooks.after_epoch = [&](std::size_t, const LinearClassifier& clf) {
        if (!truth) return;
        const Labels pred = hard_labels(clf.predict_proba(x));
        run.trace.acc.push_back(accuracy(*truth, pred));
        run.trace.code_acc.push_back(accuracy(*truth, code_labels));
        const std::size_t errors = count_accumulated_errors(*truth, pred, code_labels);
        run.trace.errors.push_back(errors);
        run.trace.accumulated.push_back(run.trace.accumulated.empty() ? errors
                                                                      : run.trace.accumulated.back() + errors);
    };

    TargetProvider targets = [&](const DataMatrix&, std::span<const std::size_t> idx, const PartitionMatrix&) {
        PartitionMatrix q(idx.size(), k);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            auto src = codes.row(idx[r]);
            std::copy(src.begin(), src.end(), q.row(r).begin());
        }
        return BatchCodes(std::move(q));
    };

    const auto start = Clock::now();
    run.trained = train_self_labeling(x, LinearClassifier::random(k, x.d(), trainer.seed), trainer, targets, hooks);
    run.trace.wall_ms = elapsed_ms(start);
    return run;
}

struct Fit {
    PartitionMatrix partition;
    Labels labels;
    std::vector<double> trace;
    std::size_t iterations = 0;
    bool converged = false;
};

Fit fit_once(const ExperimentSpec& spec, const DataMatrix& x, const DistanceMatrix* d, std::uint64_t seed) {
    SolverConfig solver = spec.solver;
    solver.seed = seed;
    Fit fit;
    switch (spec.algorithm) {
    case Algorithm::Pac:
    case Algorithm::PacJacobi: {
        PacResult r = spec.algorithm == Algorithm::Pac ? pac_fit(*d, solver) : pac_fit_jacobi(*d, solver);
        fit.partition = std::move(r.partition);
        fit.labels = std::move(r.labels);
        fit.trace = std::move(r.objective_trace);
        fit.iterations = r.sweeps_run;
        fit.converged = r.converged;
        break;
    }
    case Algorithm::Fcm: {
        FcmConfig cfg;
        cfg.k = solver.k;
        cfg.m = solver.m;
        cfg.seed = seed;
        cfg.tol = solver.tol;
        cfg.max_iters = spec.baseline_max_iters;
        cfg.score_floor = solver.score_floor;
        FcmResult r = fcm_fit(x, cfg);
        fit.partition = std::move(r.partition);
        fit.labels = std::move(r.labels);
        fit.trace = std::move(r.objective_trace);
        fit.iterations = r.iterations;
        fit.converged = r.converged;
        break;
    }
    case Algorithm::KMeans: {
        KMeansConfig cfg;
        cfg.k = solver.k;
        cfg.seed = seed;
        cfg.tol = solver.tol;
        cfg.max_iters = spec.baseline_max_iters;
        KMeansResult r = kmeans_fit(x, cfg);
        fit.partition = PartitionMatrix::one_hot(r.labels.ids, solver.k);
        fit.labels = std::move(r.labels);
        fit.trace = std::move(r.inertia_trace);
        fit.iterations = r.iterations;
        fit.converged = r.converged;
        break;
    }
    case Algorithm::OpaOnline: {
        OnlineTrainConfig cfg = spec.trainer;
        cfg.m = solver.m;
        cfg.seed = seed;
        OnlineTrainResult r = online_train(x, solver.k, cfg);
        fit.labels = hard_labels(r.partition);
        fit.partition = std::move(r.partition);
        fit.trace = std::move(r.loss_trace);
        fit.iterations = cfg.epochs;
        fit.converged = true;
        break;
    }
    case Algorithm::OfflineRefresh: {
        OnlineTrainConfig cfg = spec.trainer;
        cfg.m = solver.m;
        cfg.seed = seed;
        OfflineRun r = train_offline(x, solver.k, spec.refresh, cfg, nullptr);
        fit.labels = hard_labels(r.trained.partition);
        fit.partition = std::move(r.trained.partition);
        fit.trace = std::move(r.trained.loss_trace);
        fit.iterations = cfg.epochs;
        fit.converged = true;
        break;
    }
    }
    return fit;
}

bool wants(const ExperimentSpec& spec, const char* metric) {
    return std::find(spec.metrics.begin(), spec.metrics.end(), metric) != spec.metrics.end();
}

json csv_to_json(const CsvOptions& csv) {
    json j;
    j["header"] = csv.header ? json(*csv.header) : json(nullptr);
    j["label_col"] = csv.label_column ? json(*csv.label_column) : json(nullptr);
    if (csv.delimiter != 0) j["delimiter"] = std::string(1, csv.delimiter);
    return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(std::string("unknown key '") + item.key() + "' in " + where);
        }
    }
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
    if (name == "pac") return Algorithm::Pac;
    if (name == "pac-jacobi") return Algorithm::PacJacobi;
    if (name == "fcm") return Algorithm::Fcm;
    if (name == "kmeans" || name == "km") return Algorithm::KMeans;
    if (name == "opa" || name == "opa-online") return Algorithm::OpaOnline;
    if (name == "offline-refresh") return Algorithm::OfflineRefresh;
    throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algo) noexcept {
    switch (algo) {
    case Algorithm::Pac: return "pac";
    case Algorithm::PacJacobi: return "pac-jacobi";
    case Algorithm::Fcm: return "fcm";
    case Algorithm::KMeans: return "kmeans";
    case Algorithm::OpaOnline: return "opa-online";
    case Algorithm::OfflineRefresh: return "offline-refresh";
    }
    return "unknown";
}

void OfflineRefreshSpec::validate() const {
    if (period < 1) throw ConfigError("refresh period must be at least 1");
    if (offline != Algorithm::Pac && offline != Algorithm::Fcm && offline != Algorithm::KMeans) {
        throw ConfigError("offline refresh supports pac, fcm and kmeans");
    }
}

void ExperimentSpec::validate() const {
    if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
    for (const auto& m : metrics) {
        if (!kKnownMetrics.count(m)) throw ConfigError("unknown metric '" + m + "'");
    }
    if (baseline_max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (algorithm == Algorithm::OfflineRefresh) refresh.validate();
}

bool Aggregate::operator==(const Aggregate& o) const {
    return experiment_id == o.experiment_id && runs == o.runs && failures == o.failures && same_summary(acc, o.acc) &&
           same_summary(nmi, o.nmi) && same_summary(ari, o.ari) && same_summary(wall_ms, o.wall_ms) &&
           same_summary(iterations, o.iterations) && same_number(setup_ms, o.setup_ms);
}

void to_json(json& j, const RunRecord& r) {
    j = json{{"experiment_id", r.experiment_id},
             {"algorithm", r.algorithm},
             {"seed", r.seed},
             {"acc", number_or_null(r.acc)},
             {"nmi", number_or_null(r.nmi)},
             {"ari", number_or_null(r.ari)},
             {"balance_entropy", number_or_null(r.balance_entropy)},
             {"mean_confidence", number_or_null(r.mean_confidence)},
             {"iterations", r.iterations},
             {"converged", r.converged},
             {"objective_trace", r.objective_trace},
             {"wall_ms", r.wall_ms},
             {"config", r.config},
             {"error", r.error ? json(*r.error) : json(nullptr)}};
}

void from_json(const json& j, RunRecord& r) {
    j.at("experiment_id").get_to(r.experiment_id);
    j.at("algorithm").get_to(r.algorithm);
    j.at("seed").get_to(r.seed);
    r.acc = number_from(j, "acc");
    r.nmi = number_from(j, "nmi");
    r.ari = number_from(j, "ari");
    r.balance_entropy = number_from(j, "balance_entropy");
    r.mean_confidence = number_from(j, "mean_confidence");
    j.at("iterations").get_to(r.iterations);
    j.at("converged").get_to(r.converged);
    j.at("objective_trace").get_to(r.objective_trace);
    j.at("wall_ms").get_to(r.wall_ms);
    r.config = j.value("config", json::object());
    if (j.contains("error") && !j.at("error").is_null()) {
        r.error = j.at("error").get<std::string>();
    } else {
        r.error.reset();
    }
}

void to_json(json& j, const MetricSummary& s) {
    j = json{{"mean", number_or_null(s.mean)}, {"std", number_or_null(s.std)}, {"count", s.count}};
}

void from_json(const json& j, MetricSummary& s) {
    s.mean = number_from(j, "mean");
    s.std = number_from(j, "std");
    j.at("count").get_to(s.count);
}

void to_json(json& j, const Aggregate& a) {
    j = json{{"experiment_id", a.experiment_id},
             {"runs", a.runs},
             {"failures", a.failures},
             {"acc", a.acc},
             {"nmi", a.nmi},
             {"ari", a.ari},
             {"wall_ms", a.wall_ms},
             {"iterations", a.iterations},
             {"setup_ms", a.setup_ms}};
}

void from_json(const json& j, Aggregate& a) {
    j.at("experiment_id").get_to(a.experiment_id);
    j.at("runs").get_to(a.runs);
    j.at("failures").get_to(a.failures);
    j.at("acc").get_to(a.acc);
    j.at("nmi").get_to(a.nmi);
    j.at("ari").get_to(a.ari);
    j.at("wall_ms").get_to(a.wall_ms);
    j.at("iterations").get_to(a.iterations);
    a.setup_ms = number_from(j, "setup_ms");
}

ExperimentSpec spec_from_json(const json& j) {
    check_keys(j,
               {"id", "data", "synthetic", "algo", "k", "m", "tol", "max_sweeps", "score_floor", "init_jitter",
                "order", "distance", "max_iters", "trainer", "refresh", "seeds", "metrics"},
               "experiment spec");
    ExperimentSpec spec;
    try {
        spec.id = j.value("id", spec.id);
        if (j.contains("data")) {
            const json& d = j.at("data");
            check_keys(d, {"path", "header", "label_col", "delimiter"}, "data");
            spec.source.path = d.at("path").get<std::string>();
            if (d.contains("header") && !d.at("header").is_null()) spec.source.csv.header = d.at("header").get<bool>();
            if (d.contains("label_col")) {
                if (d.at("label_col").is_null()) {
                    spec.source.csv.label_column.reset();
                } else {
                    spec.source.csv.label_column = d.at("label_col").get<int>();
                }
            }
            if (d.contains("delimiter")) {
                auto text = d.at("delimiter").get<std::string>();
                if (text.size() != 1) throw ConfigError("delimiter must be a single character");
                spec.source.csv.delimiter = text[0];
            }
        }
        if (j.contains("synthetic")) {
            const json& s = j.at("synthetic");
            check_keys(s, {"n_per_cluster", "k", "d", "spread", "sigma", "seed"}, "synthetic");
            BlobSpec b;
            b.n_per_cluster = s.value("n_per_cluster", b.n_per_cluster);
            b.k = s.value("k", b.k);
            b.d = s.value("d", b.d);
            b.spread = s.value("spread", b.spread);
            b.sigma = s.value("sigma", b.sigma);
            b.seed = s.value("seed", b.seed);
            spec.source.synthetic = b;
        }
        spec.algorithm = parse_algorithm(j.value("algo", std::string("pac")));
        spec.solver.k = j.value("k", spec.solver.k);
        spec.solver.m = j.value("m", spec.solver.m);
        spec.solver.tol = j.value("tol", spec.solver.tol);
        spec.solver.max_sweeps = j.value("max_sweeps", spec.solver.max_sweeps);
        spec.solver.score_floor = j.value("score_floor", spec.solver.score_floor);
        spec.solver.init_jitter = j.value("init_jitter", spec.solver.init_jitter);
        const auto order = j.value("order", std::string("ascending"));
        if (order == "ascending") {
            spec.solver.order = SweepOrder::Ascending;
        } else if (order == "shuffled") {
            spec.solver.order = SweepOrder::Shuffled;
        } else {
            throw ConfigError("order must be 'ascending' or 'shuffled'");
        }
        spec.distance = parse_distance_kind(j.value("distance", std::string("sqeuclidean")));
        spec.trainer.distance = spec.distance;
        spec.trainer.score_floor = spec.solver.score_floor;
        spec.baseline_max_iters = j.value("max_iters", spec.baseline_max_iters);
        if (j.contains("trainer")) {
            const json& t = j.at("trainer");
            check_keys(t, {"epochs", "batch_size", "learning_rate", "shuffle", "standardize"}, "trainer");
            spec.trainer.epochs = t.value("epochs", spec.trainer.epochs);
            spec.trainer.batch_size = t.value("batch_size", spec.trainer.batch_size);
            spec.trainer.learning_rate = t.value("learning_rate", spec.trainer.learning_rate);
            spec.trainer.shuffle = t.value("shuffle", spec.trainer.shuffle);
            spec.trainer.standardize = t.value("standardize", spec.trainer.standardize);
        }
        if (j.contains("refresh")) {
            const json& r = j.at("refresh");
            check_keys(r, {"offline", "period"}, "refresh");
            spec.refresh.offline = parse_algorithm(r.value("offline", std::string("pac")));
            spec.refresh.period = r.value("period", spec.refresh.period);
        }
        if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("metrics")) spec.metrics = j.at("metrics").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment spec: ") + e.what());
    }
    if (spec.source.path.has_value() == spec.source.synthetic.has_value()) {
        throw ConfigError("experiment spec needs exactly one of 'data' and 'synthetic'");
    }
    spec.validate();
    return spec;
}

json spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["id"] = spec.id;
    if (spec.source.path) {
        json d = csv_to_json(spec.source.csv);
        d["path"] = spec.source.path->string();
        j["data"] = d;
    }
    if (spec.source.synthetic) {
        const BlobSpec& b = *spec.source.synthetic;
        j["synthetic"] = json{{"n_per_cluster", b.n_per_cluster}, {"k", b.k},         {"d", b.d},
                              {"spread", b.spread},               {"sigma", b.sigma}, {"seed", b.seed}};
    }
    j["algo"] = std::string(to_string(spec.algorithm));
    j["k"] = spec.solver.k;
    j["m"] = spec.solver.m;
    j["tol"] = spec.solver.tol;
    j["max_sweeps"] = spec.solver.max_sweeps;
    j["score_floor"] = spec.solver.score_floor;
    j["init_jitter"] = spec.solver.init_jitter;
    j["order"] = spec.solver.order == SweepOrder::Shuffled ? "shuffled" : "ascending";
    j["distance"] = std::string(to_string(spec.distance));
    j["max_iters"] = spec.baseline_max_iters;
    j["trainer"] = json{{"epochs", spec.trainer.epochs},
                        {"batch_size", spec.trainer.batch_size},
                        {"learning_rate", spec.trainer.learning_rate},
                        {"shuffle", spec.trainer.shuffle},
                        {"standardize", spec.trainer.standardize}};
    j["refresh"] = json{{"offline", std::string(to_string(spec.refresh.offline))}, {"period", spec.refresh.period}};
    j["seeds"] = spec.seeds;
    j["metrics"] = spec.metrics;
    return j;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return spec_from_json(j);
}

Dataset load_source(const DataSource& source) {
    if (source.synthetic) {
        auto [x, labels] = make_blobs(*source.synthetic);
        return Dataset{std::move(x), std::move(labels), {}};
    }
    if (!source.path) throw ConfigError("no data source given");
    return load_csv(*source.path, source.csv);
}

Aggregate aggregate_records(const std::string& experiment_id, const std::vector<RunRecord>& records) {
    Aggregate a;
    a.experiment_id = experiment_id;
    a.runs = records.size();
    std::vector<double> acc, nmi_v, ari_v, wall, iters;
    for (const auto& r : records) {
        if (!r.ok()) {
            ++a.failures;
            continue;
        }
        acc.push_back(r.acc);
        nmi_v.push_back(r.nmi);
        ari_v.push_back(r.ari);
        wall.push_back(r.wall_ms);
        iters.push_back(static_cast<double>(r.iterations));
    }
    a.acc = summarize(acc);
    a.nmi = summarize(nmi_v);
    a.ari = summarize(ari_v);
    a.wall_ms = summarize(wall);
    a.iterations = summarize(iters);
    return a;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& data) {
    spec.validate();
    const DataMatrix& x = data.x;
    spec.solver.validate(x.n());
    if (spec.algorithm == Algorithm::OpaOnline || spec.algorithm == Algorithm::OfflineRefresh) {
        spec.trainer.validate(x.n());
    }

    ExperimentResult result;
    std::optional<DistanceMatrix> d;
    if (spec.algorithm == Algorithm::Pac || spec.algorithm == Algorithm::PacJacobi) {
        const auto start = Clock::now();
        d = pairwise_distances(x, spec.distance);
        result.aggregate.setup_ms = elapsed_ms(start);
    }

    json config = spec_to_json(spec);
    config.erase("seeds");

    std::vector<std::uint64_t> seeds = spec.seeds;
    std::sort(seeds.begin(), seeds.end());
    for (std::uint64_t seed : seeds) {
        RunRecord rec;
        rec.experiment_id = spec.id;
        rec.algorithm = std::string(to_string(spec.algorithm));
        rec.seed = seed;
        rec.config = config;
        rec.acc = rec.nmi = rec.ari = kNaN;
        try {
            const auto start = Clock::now();
            Fit fit = fit_once(spec, x, d ? &*d : nullptr, seed);
            rec.wall_ms = elapsed_ms(start);
            rec.iterations = fit.iterations;
            rec.converged = fit.converged;
            rec.objective_trace = std::move(fit.trace);
            rec.balance_entropy = balance_entropy(fit.partition);
            rec.mean_confidence = mean_confidence(fit.partition);
            if (data.labels) {
                if (wants(spec, "acc")) rec.acc = accuracy(*data.labels, fit.labels);
                if (wants(spec, "nmi")) rec.nmi = nmi(*data.labels, fit.labels);
                if (wants(spec, "ari")) rec.ari = ari(*data.labels, fit.labels);
            }
        } catch (const SolverError& e) {
            rec.error = error_text("solver", e);
        } catch (const DataError& e) {
            rec.error = error_text("data", e);
        } catch (const ConfigError& e) {
            rec.error = error_text("config", e);
        }
        result.records.push_back(std::move(rec));
    }
    const double setup = result.aggregate.setup_ms;
    result.aggregate = aggregate_records(spec.id, result.records);
    result.aggregate.setup_ms = setup;
    return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) { return run_experiment(spec, load_source(spec.source)); }

void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
    auto out = open_output(path);
    for (const auto& r : records) out << json(r).dump() << '\n';
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<RunRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(json::parse(line).get<RunRecord>());
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void write_aggregate(const std::filesystem::path& path, const Aggregate& aggregate) {
    auto out = open_output(path);
    out << json(aggregate).dump(2) << '\n';
}

void save_experiment(const std::filesystem::path& dir, const ExperimentResult& result) {
    const std::string& id = result.aggregate.experiment_id;
    write_records(dir / (id + ".records.jsonl"), result.records);
    write_aggregate(dir / (id + ".aggregate.json"), result.aggregate);
}

std::vector<SweepRow> sweep_m(const ExperimentSpec& base, const std::vector<double>& ms, const Dataset& data) {
    if (ms.empty()) throw ConfigError("sweep needs at least one m");
    for (double m : ms) {
        if (!(m > 1.0) || !std::isfinite(m)) throw ConfigError("every swept m must be a finite value > 1");
    }
    std::vector<SweepRow> rows;
    for (double m : ms) {
        ExperimentSpec spec = base;
        spec.solver.m = m;
        std::ostringstream id;
        id << base.id << "-m" << m;
        spec.id = id.str();
        ExperimentResult r = run_experiment(spec, data);
        SweepRow row;
        row.m = m;
        row.mean_acc = r.aggregate.acc.mean;
        row.std_acc = r.aggregate.acc.std;
        row.mean_nmi = r.aggregate.nmi.mean;
        row.failures = r.aggregate.failures;
        std::vector<double> conf;
        for (const auto& rec : r.records) {
            if (rec.ok()) conf.push_back(rec.mean_confidence);
        }
        row.mean_confidence = summarize(conf).mean;
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    auto out = open_output(path);
    out << "m,mean_acc,std_acc,mean_nmi,mean_confidence,failures\n";
    out << std::setprecision(10);
    for (const auto& r : rows) {
        out << r.m << ',' << r.mean_acc << ',' << r.std_acc << ',' << r.mean_nmi << ',' << r.mean_confidence << ','
            << r.failures << '\n';
    }
}

void write_sweep_json(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    json j = json::array();
    for (const auto& r : rows) {
        j.push_back(json{{"m", r.m},
                         {"mean_acc", number_or_null(r.mean_acc)},
                         {"std_acc", number_or_null(r.std_acc)},
                         {"mean_nmi", number_or_null(r.mean_nmi)},
                         {"mean_confidence", number_or_null(r.mean_confidence)},
                         {"failures", r.failures}});
    }
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

std::size_t count_accumulated_errors(const Labels& truth, const Labels& classifier, const Labels& codes) {
    if (truth.size() != classifier.size() || truth.size() != codes.size()) {
        throw DataError("label vectors differ in length");
    }
    const std::vector<int> clf_map = best_label_map(truth, classifier);
    const std::vector<int> code_map = best_label_map(truth, codes);
    std::size_t count = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool clf_right = clf_map[static_cast<std::size_t>(classifier.ids[i])] == truth.ids[i];
        const bool code_right = code_map[static_cast<std::size_t>(codes.ids[i])] == truth.ids[i];
        if (clf_right && !code_right) ++count;
    }
    return count;
}

OnlineOfflineResult online_vs_offline(const DataMatrix& x, const Labels& truth, std::size_t k,
                                      const OfflineRefreshSpec& refresh, const OnlineTrainConfig& trainer) {
    if (truth.size() != x.n()) throw DataError("label count does not match the sample count");
    OnlineOfflineResult out;

    TrainHooks hooks;
    hooks.after_epoch = [&](std::size_t, const LinearClassifier& clf) {
        out.online.acc.push_back(accuracy(truth, hard_labels(clf.predict_proba(x))));
    };
    const DistanceKind kind = trainer.distance;
    const double floor = trainer.score_floor;
    const double m = trainer.m;
    TargetProvider opa = [&](const DataMatrix& batch, std::span<const std::size_t>, const PartitionMatrix& probs) {
        return opa_targets(batch_distances(batch, kind), probs, m, floor);
    };
    trainer.validate(x.n());
    const auto start = Clock::now();
    train_self_labeling(x, LinearClassifier::random(k, x.d(), trainer.seed), trainer, opa, hooks);
    out.online.wall_ms = elapsed_ms(start);

    out.offline = train_offline(x, k, refresh, trainer, &truth).trace;
    return out;
}

}  // namespace probagg::harness
