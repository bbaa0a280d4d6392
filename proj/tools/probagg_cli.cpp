// probagg: command-line front end for the clustering experiments.
//
//   probagg cluster --data data/pendigits.csv --k 10 --seeds 0-9 --out results/
//   probagg bench experiments/pendigits.json --out results/
//   probagg sweep-m --data blobs.csv --k 3 --algo opa-online --ms 1.01,1.04,1.07,2 --out sweep
//   probagg online-vs-offline --k 3 --period 10 --out ovo.json
//   probagg synth --k 3 --n-per-cluster 100 --out blobs.csv
//
// Exit codes: 0 success, 1 usage, 2 data, 3 solver.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "probagg/harness/dataset.hpp"
#include "probagg/harness/experiment.hpp"

namespace ph = probagg::harness;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kSolver = 3 };

std::uint64_t parse_u64(const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw probagg::ConfigError("bad seed '" + text + "'");
    }
    return v;
}

// "0-9" or "1,4,7" or a mix such as "0-2,10".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        auto dash = item.find('-');
        if (dash == std::string::npos) {
            seeds.push_back(parse_u64(item));
        } else {
            std::uint64_t lo = parse_u64(item.substr(0, dash));
            std::uint64_t hi = parse_u64(item.substr(dash + 1));
            if (hi < lo) throw probagg::ConfigError("bad seed range '" + item + "'");
            for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return seeds;
}

struct Common {
    std::string algo = "pac";
    std::string data;
    std::size_t k = 0;
    double m = 1.03;
    double tol = 1e-4;
    std::size_t max_sweeps = 100;
    std::size_t max_iters = 300;
    std::string seeds = "0";
    std::string metric_kind = "sqeuclidean";
    std::string out;
    int label_col = -1;
    bool no_labels = false;
    bool no_header = false;
    bool header = false;
    std::string id;
    std::size_t epochs = 200;
    std::size_t batch_size = 60;
    double learning_rate = 0.5;
};

void add_data_flags(CLI::App* app, Common& c) {
    app->add_option("--data", c.data, "Delimited text file, one sample per row")->required();
    app->add_option("--label-col", c.label_col, "Label column, negative counts from the end")->capture_default_str();
    app->add_flag("--no-labels", c.no_labels, "File has no label column");
    app->add_flag("--no-header", c.no_header, "First line is data");
    app->add_flag("--header", c.header, "First line is a header");
}

void add_solver_flags(CLI::App* app, Common& c) {
    app->add_option("--algo", c.algo, "pac, pac-jacobi, fcm, kmeans, opa-online, offline-refresh")
        ->capture_default_str();
    app->add_option("--k", c.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
    app->add_option("--m", c.m, "Weighting exponent")->capture_default_str();
    app->add_option("--tol", c.tol, "Convergence tolerance on max |dP|")->capture_default_str();
    app->add_option("--max-sweeps", c.max_sweeps, "PAC sweep cap")->capture_default_str();
    app->add_option("--max-iters", c.max_iters, "K-means / FCM iteration cap")->capture_default_str();
    app->add_option("--seeds", c.seeds, "Seed list, e.g. 0-9 or 1,5,7")->capture_default_str();
    app->add_option("--metric-kind", c.metric_kind, "Distance: sqeuclidean, euclidean, cosine")
        ->capture_default_str();
    app->add_option("--epochs", c.epochs, "Trainer epochs")->capture_default_str();
    app->add_option("--batch-size", c.batch_size, "Trainer batch size")->capture_default_str();
    app->add_option("--lr", c.learning_rate, "Trainer learning rate")->capture_default_str();
    app->add_option("--id", c.id, "Experiment id used in records and file names");
}

ph::ExperimentSpec spec_from(const Common& c) {
    ph::ExperimentSpec spec;
    spec.id = c.id.empty() ? c.algo : c.id;
    spec.algorithm = ph::parse_algorithm(c.algo);
    spec.source.path = c.data;
    if (c.no_labels) spec.source.csv.label_column.reset();
    else spec.source.csv.label_column = c.label_col;
    if (c.no_header) spec.source.csv.header = false;
    if (c.header) spec.source.csv.header = true;
    spec.solver.k = c.k;
    spec.solver.m = c.m;
    spec.solver.tol = c.tol;
    spec.solver.max_sweeps = c.max_sweeps;
    spec.baseline_max_iters = c.max_iters;
    spec.distance = probagg::parse_distance_kind(c.metric_kind);
    spec.trainer.distance = spec.distance;
    spec.trainer.epochs = c.epochs;
    spec.trainer.batch_size = c.batch_size;
    spec.trainer.learning_rate = c.learning_rate;
    spec.seeds = parse_seeds(c.seeds);
    spec.validate();
    return spec;
}

// Nonzero when any seed failed; the first failure decides the category.
int failure_code(const ph::ExperimentResult& r) {
    for (const auto& rec : r.records) {
        if (rec.ok()) continue;
        std::cerr << "seed " << rec.seed << " failed: " << *rec.error << '\n';
        if (rec.error->rfind("data", 0) == 0) return kData;
        if (rec.error->rfind("config", 0) == 0) return kUsage;
        return kSolver;
    }
    return kOk;
}

int report(const ph::ExperimentResult& r, const std::string& out) {
    if (out.empty()) {
        for (const auto& rec : r.records) std::cout << json(rec).dump() << '\n';
    } else {
        ph::save_experiment(out, r);
        std::cout << json(r.aggregate).dump(2) << '\n';
    }
    const auto& a = r.aggregate;
    std::fprintf(stderr, "%s: ACC %.4f +- %.4f  NMI %.4f  ARI %.4f  (%zu runs, %zu failed, %.1f ms/run)\n",
                 a.experiment_id.c_str(), a.acc.mean, a.acc.std, a.nmi.mean, a.ari.mean, a.runs, a.failures,
                 a.wall_ms.mean);
    return failure_code(r);
}

std::vector<double> parse_ms(const std::string& text) {
    std::vector<double> ms;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            ms.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw probagg::ConfigError("bad m value '" + item + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return ms;
}

json trace_json(const ph::TrainingTrace& t) {
    return json{{"acc", t.acc},          {"code_acc", t.code_acc},
                {"errors", t.errors},    {"accumulated", t.accumulated},
                {"refresh_epochs", t.refresh_epochs}, {"final_acc", t.final_acc()},
                {"wall_ms", t.wall_ms}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probability aggregation clustering experiments"};
    app.require_subcommand(1);

    Common cluster_opts;
    auto* cluster = app.add_subcommand("cluster", "Run one algorithm on one dataset over a seed list");
    add_data_flags(cluster, cluster_opts);
    add_solver_flags(cluster, cluster_opts);
    cluster->add_option("--out", cluster_opts.out, "Output directory for records and aggregate");

    std::string bench_spec, bench_out;
    auto* bench = app.add_subcommand("bench", "Run an experiment described by a JSON spec file");
    bench->add_option("spec", bench_spec, "Experiment spec (JSON)")->required();
    bench->add_option("--out", bench_out, "Output directory for records and aggregate");

    Common sweep_opts;
    std::string sweep_ms = "1.01,1.04,1.07,1.1,1.2,1.5,2,3,5";
    auto* sweep = app.add_subcommand("sweep-m", "Run one experiment per weighting exponent");
    add_data_flags(sweep, sweep_opts);
    add_solver_flags(sweep, sweep_opts);
    sweep->add_option("--ms", sweep_ms, "Comma-separated m values")->capture_default_str();
    sweep->add_option("--out", sweep_opts.out, "Output prefix; writes <out>.csv and <out>.json");

    Common ovo_opts;
    ovo_opts.k = 3;
    ovo_opts.label_col = -1;
    std::string ovo_offline = "pac";
    std::size_t ovo_period = 10;
    ph::BlobSpec ovo_blobs;
    ovo_blobs.sigma = 1.0;
    auto* ovo = app.add_subcommand("online-vs-offline", "Compare online OPA targets with periodically refreshed offline codes");
    ovo->add_option("--data", ovo_opts.data, "Labeled data file; blobs are generated when omitted");
    ovo->add_option("--label-col", ovo_opts.label_col, "Label column")->capture_default_str();
    ovo->add_flag("--no-header", ovo_opts.no_header, "First line is data");
    ovo->add_option("--k", ovo_opts.k, "Number of clusters")->capture_default_str();
    ovo->add_option("--m", ovo_opts.m, "Weighting exponent")->capture_default_str();
    ovo->add_option("--seeds", ovo_opts.seeds, "Seed list")->capture_default_str();
    ovo->add_option("--metric-kind", ovo_opts.metric_kind, "Distance kind")->capture_default_str();
    ovo->add_option("--epochs", ovo_opts.epochs, "Trainer epochs")->capture_default_str();
    ovo->add_option("--batch-size", ovo_opts.batch_size, "Trainer batch size")->capture_default_str();
    ovo->add_option("--lr", ovo_opts.learning_rate, "Trainer learning rate")->capture_default_str();
    ovo->add_option("--offline", ovo_offline, "Offline solver: pac, fcm, kmeans")->capture_default_str();
    ovo->add_option("--period", ovo_period, "Refresh period in epochs")->capture_default_str();
    ovo->add_option("--n-per-cluster", ovo_blobs.n_per_cluster, "Blob size")->capture_default_str();
    ovo->add_option("--sigma", ovo_blobs.sigma, "Blob standard deviation")->capture_default_str();
    ovo->add_option("--spread", ovo_blobs.spread, "Minimum center distance")->capture_default_str();
    ovo->add_option("--data-seed", ovo_blobs.seed, "Blob generator seed")->capture_default_str();
    ovo->add_option("--out", ovo_opts.out, "Output JSON file");

    ph::BlobSpec synth_spec;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Write Gaussian blobs as CSV (features, then label)");
    synth->add_option("--k", synth_spec.k, "Number of blobs")->capture_default_str();
    synth->add_option("--d", synth_spec.d, "Dimension")->capture_default_str();
    synth->add_option("--n-per-cluster", synth_spec.n_per_cluster, "Samples per blob")->capture_default_str();
    synth->add_option("--spread", synth_spec.spread, "Minimum center distance")->capture_default_str();
    synth->add_option("--sigma", synth_spec.sigma, "Standard deviation")->capture_default_str();
    synth->add_option("--seed", synth_spec.seed, "Generator seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (cluster->parsed()) {
            auto spec = spec_from(cluster_opts);
            return report(ph::run_experiment(spec), cluster_opts.out);
        }
        if (bench->parsed()) {
            auto spec = ph::load_spec(bench_spec);
            return report(ph::run_experiment(spec), bench_out);
        }
        if (sweep->parsed()) {
            auto spec = spec_from(sweep_opts);
            auto data = ph::load_source(spec.source);
            auto rows = ph::sweep_m(spec, parse_ms(sweep_ms), data);
            if (sweep_opts.out.empty()) {
                std::printf("m,mean_acc,std_acc,mean_nmi,mean_confidence,failures\n");
                for (const auto& r : rows) {
                    std::printf("%.10g,%.10g,%.10g,%.10g,%.10g,%zu\n", r.m, r.mean_acc, r.std_acc, r.mean_nmi,
                                r.mean_confidence, r.failures);
                }
            } else {
                ph::write_sweep_csv(sweep_opts.out + ".csv", rows);
                ph::write_sweep_json(sweep_opts.out + ".json", rows);
            }
            for (const auto& r : rows) {
                if (r.failures > 0) return kSolver;
            }
            return kOk;
        }
        if (ovo->parsed()) {
            ph::Dataset data = [&] {
                if (!ovo_opts.data.empty()) {
                    ph::CsvOptions csv;
                    csv.label_column = ovo_opts.label_col;
                    if (ovo_opts.no_header) csv.header = false;
                    return ph::load_csv(ovo_opts.data, csv);
                }
                ovo_blobs.k = ovo_opts.k;
                auto [x, y] = ph::make_blobs(ovo_blobs);
                return ph::Dataset{std::move(x), std::move(y), {}};
            }();
            if (!data.labels) throw probagg::DataError("online-vs-offline needs labeled data");
            ph::OfflineRefreshSpec refresh;
            refresh.offline = ph::parse_algorithm(ovo_offline);
            refresh.period = ovo_period;
            json runs = json::array();
            for (std::uint64_t seed : parse_seeds(ovo_opts.seeds)) {
                probagg::OnlineTrainConfig trainer;
                trainer.m = ovo_opts.m;
                trainer.seed = seed;
                trainer.epochs = ovo_opts.epochs;
                trainer.batch_size = ovo_opts.batch_size;
                trainer.learning_rate = ovo_opts.learning_rate;
                trainer.distance = probagg::parse_distance_kind(ovo_opts.metric_kind);
                auto r = ph::online_vs_offline(data.x, *data.labels, ovo_opts.k, refresh, trainer);
                std::fprintf(stderr, "seed %llu: online %.4f  offline(%s, every %zu) %.4f  accumulated errors %zu\n",
                             static_cast<unsigned long long>(seed), r.online.final_acc(), ovo_offline.c_str(),
                             ovo_period, r.offline.final_acc(),
                             r.offline.accumulated.empty() ? std::size_t{0} : r.offline.accumulated.back());
                runs.push_back(json{{"seed", seed}, {"online", trace_json(r.online)}, {"offline", trace_json(r.offline)}});
            }
            json doc{{"offline", ovo_offline}, {"period", ovo_period}, {"k", ovo_opts.k}, {"m", ovo_opts.m}, {"runs", runs}};
            if (ovo_opts.out.empty()) {
                std::cout << doc.dump() << '\n';
            } else {
                std::ofstream f(ovo_opts.out);
                if (!f) throw probagg::DataError("cannot write " + ovo_opts.out);
                f << doc.dump(2) << '\n';
            }
            return kOk;
        }
        if (synth->parsed()) {
            auto [x, y] = ph::make_blobs(synth_spec);
            if (synth_out.empty()) {
                std::cout.precision(17);
                for (std::size_t i = 0; i < x.n(); ++i) {
                    for (double v : x.row(i)) std::cout << v << ',';
                    std::cout << y.ids[i] << '\n';
                }
            } else {
                ph::write_csv(synth_out, x, &y);
            }
            return kOk;
        }
    } catch (const probagg::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const probagg::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const probagg::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolver;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
