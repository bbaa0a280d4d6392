#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "probagg/baselines.hpp"
#include "probagg/core.hpp"
#include "probagg/geometry.hpp"
#include "probagg/harness/dataset.hpp"
#include "probagg/metrics.hpp"
#include "probagg/opa.hpp"
#include "probagg/pac.hpp"

namespace py = pybind11;
using namespace probagg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a, const char* what) {
    if (a.ndim() != 2) throw ConfigError(std::string(what) + " must be a 2-D array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

py::array_t<int> to_array(const Labels& l) {
    py::array_t<int> out(static_cast<py::ssize_t>(l.size()));
    std::copy(l.ids.begin(), l.ids.end(), out.mutable_data());
    return out;
}

Labels to_labels(const IntArray& a) {
    if (a.ndim() != 1) throw ConfigError("labels must be a 1-D array");
    return make_labels(std::vector<int>(a.data(), a.data() + a.size()));
}

DataMatrix to_data(const Array& a) { return DataMatrix(to_matrix(a, "x")); }

DistanceMatrix to_distances(const Array& a) { return DistanceMatrix::from_values(to_matrix(a, "d")); }

SolverConfig solver_config(std::size_t k, double m, double tol, std::size_t max_sweeps, std::uint64_t seed) {
    SolverConfig cfg;
    cfg.k = k;
    cfg.m = m;
    cfg.tol = tol;
    cfg.max_sweeps = max_sweeps;
    cfg.seed = seed;
    return cfg;
}

py::dict pac_result(const PacResult& r) {
    py::dict out;
    out["partition"] = to_array(r.partition.matrix());
    out["labels"] = to_array(r.labels);
    out["objective_trace"] = r.objective_trace;
    out["sweeps"] = r.sweeps_run;
    out["converged"] = r.converged;
    return out;
}

py::dict run_pac(bool jacobi, const Array& x, std::size_t k, double m, double tol, std::size_t max_sweeps,
                 std::uint64_t seed, const std::string& metric) {
    auto d = pairwise_distances(to_data(x), parse_distance_kind(metric));
    auto cfg = solver_config(k, m, tol, max_sweeps, seed);
    return pac_result(jacobi ? pac_fit_jacobi(d, cfg) : pac_fit(d, cfg));
}

}  // namespace

PYBIND11_MODULE(_probagg, mod) {
    mod.doc() = "Probability aggregation clustering";

    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(mod, "DataError", PyExc_ValueError);
    py::register_exception<SolverError>(mod, "SolverError", PyExc_RuntimeError);

    mod.def(
        "pairwise_distances",
        [](const Array& x, const std::string& metric) {
            return to_array(pairwise_distances(to_data(x), parse_distance_kind(metric)).matrix());
        },
        py::arg("x"), py::arg("metric") = "sqeuclidean");

    mod.def(
        "update_row",
        [](const std::vector<double>& scores, double m, double score_floor) {
            return update_row(scores, m, score_floor);
        },
        py::arg("scores"), py::arg("m") = 1.03, py::arg("score_floor") = 1e-12);

    mod.def(
        "pac_fit",
        [](const Array& x, std::size_t k, double m, double tol, std::size_t max_sweeps, std::uint64_t seed,
           const std::string& metric) {
            return run_pac(false, x, k, m, tol, max_sweeps, seed, metric);
        },
        py::arg("x"), py::arg("k"), py::arg("m") = 1.03, py::arg("tol") = 1e-4, py::arg("max_sweeps") = 100,
        py::arg("seed") = 0, py::arg("metric") = "sqeuclidean");

    mod.def(
        "pac_fit_jacobi",
        [](const Array& x, std::size_t k, double m, double tol, std::size_t max_sweeps, std::uint64_t seed,
           const std::string& metric) {
            return run_pac(true, x, k, m, tol, max_sweeps, seed, metric);
        },
        py::arg("x"), py::arg("k"), py::arg("m") = 1.03, py::arg("tol") = 1e-4, py::arg("max_sweeps") = 100,
        py::arg("seed") = 0, py::arg("metric") = "sqeuclidean");

    mod.def(
        "objective_jpac",
        [](const Array& p, const Array& d) {
            return objective_jpac(PartitionMatrix(to_matrix(p, "p")), to_distances(d));
        },
        py::arg("p"), py::arg("d"));

    mod.def(
        "opa_targets",
        [](const Array& d, const Array& p_hat, double m) {
            return to_array(opa_targets(to_distances(d), PartitionMatrix(to_matrix(p_hat, "p_hat")), m).matrix().matrix());
        },
        py::arg("d"), py::arg("p_hat"), py::arg("m") = 1.03);

    mod.def(
        "kl_loss",
        [](const Array& q, const Array& p_hat) {
            return kl_loss(BatchCodes(PartitionMatrix(to_matrix(q, "q"))), PartitionMatrix(to_matrix(p_hat, "p_hat")));
        },
        py::arg("q"), py::arg("p_hat"));

    mod.def(
        "online_train",
        [](const Array& x, std::size_t k, double m, std::size_t epochs, std::size_t batch_size, double lr,
           std::uint64_t seed) {
            OnlineTrainConfig cfg;
            cfg.m = m;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.learning_rate = lr;
            cfg.seed = seed;
            auto r = online_train(to_data(x), k, cfg);
            py::dict out;
            out["partition"] = to_array(r.partition.matrix());
            out["labels"] = to_array(hard_labels(r.partition));
            out["loss_trace"] = r.loss_trace;
            return out;
        },
        py::arg("x"), py::arg("k"), py::arg("m") = 1.03, py::arg("epochs") = 200, py::arg("batch_size") = 60,
        py::arg("lr") = 0.5, py::arg("seed") = 0);

    mod.def(
        "kmeans",
        [](const Array& x, std::size_t k, std::uint64_t seed, std::size_t max_iters) {
            KMeansConfig cfg;
            cfg.k = k;
            cfg.seed = seed;
            cfg.max_iters = max_iters;
            auto r = kmeans_fit(to_data(x), cfg);
            py::dict out;
            out["centroids"] = to_array(r.centroids.matrix());
            out["labels"] = to_array(r.labels);
            out["iterations"] = r.iterations;
            out["converged"] = r.converged;
            return out;
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iters") = 300);

    mod.def(
        "fcm",
        [](const Array& x, std::size_t k, double m, std::uint64_t seed, std::size_t max_iters) {
            FcmConfig cfg;
            cfg.k = k;
            cfg.m = m;
            cfg.seed = seed;
            cfg.max_iters = max_iters;
            auto r = fcm_fit(to_data(x), cfg);
            py::dict out;
            out["centroids"] = to_array(r.centroids.matrix());
            out["partition"] = to_array(r.partition.matrix());
            out["labels"] = to_array(r.labels);
            out["iterations"] = r.iterations;
            out["converged"] = r.converged;
            return out;
        },
        py::arg("x"), py::arg("k"), py::arg("m") = 1.1, py::arg("seed") = 0, py::arg("max_iters") = 300);

    mod.def(
        "accuracy", [](const IntArray& t, const IntArray& p) { return accuracy(to_labels(t), to_labels(p)); },
        py::arg("truth"), py::arg("pred"));
    mod.def(
        "nmi", [](const IntArray& t, const IntArray& p) { return nmi(to_labels(t), to_labels(p)); },
        py::arg("truth"), py::arg("pred"));
    mod.def(
        "ari", [](const IntArray& t, const IntArray& p) { return ari(to_labels(t), to_labels(p)); },
        py::arg("truth"), py::arg("pred"));

    mod.def(
        "make_blobs",
        [](std::size_t n_per_cluster, std::size_t k, std::size_t d, double spread, double sigma, std::uint64_t seed) {
            harness::BlobSpec spec{n_per_cluster, k, d, spread, sigma, seed};
            auto [x, y] = harness::make_blobs(spec);
            return py::make_tuple(to_array(x.matrix()), to_array(y));
        },
        py::arg("n_per_cluster") = 100, py::arg("k") = 3, py::arg("d") = 2, py::arg("spread") = 10.0,
        py::arg("sigma") = 0.1, py::arg("seed") = 0);
}
