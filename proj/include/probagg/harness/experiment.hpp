#ifndef PROBAGG_HARNESS_EXPERIMENT_HPP
#define PROBAGG_HARNESS_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "probagg/core.hpp"
#include "probagg/geometry.hpp"
#include "probagg/harness/dataset.hpp"
#include "probagg/opa.hpp"

namespace probagg::harness {

enum class Algorithm { Pac, PacJacobi, Fcm, KMeans, OpaOnline, OfflineRefresh };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algo) noexcept;

struct DataSource {
    std::optional<std::filesystem::path> path;
    CsvOptions csv;
    std::optional<BlobSpec> synthetic;
};

/// Offline targets for self-labeling, recomputed on the full data every `period` epochs.
struct OfflineRefreshSpec {
    Algorithm offline = Algorithm::Pac;  // Pac, Fcm or KMeans
    std::size_t period = 10;

    void validate() const;
};

struct ExperimentSpec {
    std::string id = "experiment";
    DataSource source;
    Algorithm algorithm = Algorithm::Pac;
    SolverConfig solver;                  // k, m, tol, sweeps; m doubles as the FCM exponent
    std::size_t baseline_max_iters = 300;  // Lloyd / FCM iteration cap
    DistanceKind distance = DistanceKind::SquaredEuclidean;
    OnlineTrainConfig trainer;             // m is taken from solver.m
    OfflineRefreshSpec refresh;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> metrics = {"acc", "nmi", "ari"};

    /// Throws ConfigError for an empty seed list or unknown metric names.
    void validate() const;
};

struct RunRecord {
    std::string experiment_id;
    std::string algorithm;
    std::uint64_t seed = 0;
    // NaN when the dataset has no labels, the metric was not requested, or the run failed.
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    double balance_entropy = 0.0;
    double mean_confidence = 0.0;  // mean row maximum of the final partition
    std::size_t iterations = 0;    // sweeps, Lloyd/FCM iterations, or epochs
    bool converged = false;
    std::vector<double> objective_trace;
    double wall_ms = 0.0;
    nlohmann::json config;
    std::optional<std::string> error;

    bool ok() const noexcept { return !error.has_value(); }
};

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    std::size_t count = 0;
};

struct Aggregate {
    std::string experiment_id;
    std::size_t runs = 0;
    std::size_t failures = 0;
    MetricSummary acc, nmi, ari, wall_ms, iterations;
    double setup_ms = 0.0;  // shared preprocessing, e.g. the distance matrix

    bool operator==(const Aggregate&) const;
};

struct ExperimentResult {
    std::vector<RunRecord> records;  // sorted by seed
    Aggregate aggregate;
};

void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);
void to_json(nlohmann::json& j, const MetricSummary& s);
void from_json(const nlohmann::json& j, MetricSummary& s);
void to_json(nlohmann::json& j, const Aggregate& a);
void from_json(const nlohmann::json& j, Aggregate& a);

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::filesystem::path& path);

Dataset load_source(const DataSource& source);

/// Summary statistics over successful records; recomputable from the records alone.
Aggregate aggregate_records(const std::string& experiment_id, const std::vector<RunRecord>& records);

/// Runs every seed on a preloaded dataset. A failing seed is recorded and the rest continue.
ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& data);
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// One JSON object per line.
void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records(const std::filesystem::path& path);
void write_aggregate(const std::filesystem::path& path, const Aggregate& aggregate);

/// Writes <dir>/<id>.records.jsonl and <dir>/<id>.aggregate.json.
void save_experiment(const std::filesystem::path& dir, const ExperimentResult& result);

struct SweepRow {
    double m = 0.0;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    double mean_nmi = 0.0;
    double mean_confidence = 0.0;
    std::size_t failures = 0;
};

/// run_experiment once per exponent (all m > 1, else ConfigError).
std::vector<SweepRow> sweep_m(const ExperimentSpec& base, const std::vector<double>& ms, const Dataset& data);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_sweep_json(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

struct TrainingTrace {
    std::vector<double> acc;               // classifier ACC after each epoch
    std::vector<double> code_acc;          // ACC of the targets in force during each epoch
    std::vector<std::size_t> errors;       // classifier right, offline codes wrong (per epoch)
    std::vector<std::size_t> accumulated;  // running sum of `errors`
    std::vector<std::size_t> refresh_epochs;
    double wall_ms = 0.0;

    double final_acc() const { return acc.empty() ? 0.0 : acc.back(); }
};

struct OnlineOfflineResult {
    TrainingTrace online;
    TrainingTrace offline;
};

/// Trains the toy classifier twice from the same initialization: once on online OPA targets,
/// once on offline codes over the whole dataset refreshed every `refresh.period` epochs. Offline
/// PAC warm-starts from the classifier's current probabilities; K-means and FCM seed randomly
/// on the first refresh and start from classifier-weighted centers afterwards, which keeps
/// code ids aligned with the classifier's outputs.
OnlineOfflineResult online_vs_offline(const DataMatrix& x, const Labels& truth, std::size_t k,
                                      const OfflineRefreshSpec& refresh, const OnlineTrainConfig& trainer);

/// Samples the classifier labels correctly while the codes label them incorrectly, each
/// judged under its own best cluster-to-class map.
std::size_t count_accumulated_errors(const Labels& truth, const Labels& classifier, const Labels& codes);

}  // namespace probagg::harness

#endif  // PROBAGG_HARNESS_EXPERIMENT_HPP
