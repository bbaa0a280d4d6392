#include "probagg/pac.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace probagg {

namespace {

void check_dims(const PartitionMatrix& p, const DistanceMatrix& d, const char* what) {
    if (p.n() != d.n()) {
        throw ConfigError(std::string(what) + ": partition has " + std::to_string(p.n()) +
                          " rows but distance matrix is " + std::to_string(d.n()) + " square");
    }
}

void scores_into(const PartitionMatrix& p, const DistanceMatrix& d, Matrix& s) {
    const std::size_t n = p.n();
    const std::size_t k = p.k();
    s = Matrix(n, k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto di = d.row(i);
        double* si = s.row(i).data();
        for (std::size_t j = 0; j < n; ++j) {
            const double w = di[j];
            const double* pj = p.row(j).data();
            for (std::size_t c = 0; c < k; ++c) si[c] += w * pj[c];
        }
    }
}

double fuzzy_objective_from_scores(const PartitionMatrix& p, const Matrix& s, double m) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
        for (std::size_t c = 0; c < p.k(); ++c) {
            double v = p(i, c);
            if (v > 0.0) total += std::pow(v, m) * s(i, c);
        }
    }
    return total;
}

PartitionMatrix starting_partition(const DistanceMatrix& d, const SolverConfig& cfg, const PacOptions& options) {
    if (!options.initial) return init_partition(d.n(), cfg.k, cfg.seed, cfg.init_jitter);
    const PartitionMatrix& p = *options.initial;
    if (p.n() != d.n() || p.k() != cfg.k) throw ConfigError("initial partition has the wrong shape");
    if (!validate_partition(p).on_simplex()) throw ConfigError("initial partition rows are not on the simplex");
    return p;
}

class ObjectiveTracker {
public:
    explicit ObjectiveTracker(PacResult& result) : result_(result) {}

    void record(double value) {
        if (!std::isfinite(value)) {
            throw SolverError("non-finite objective at sweep " + std::to_string(result_.objective_trace.size() + 1));
        }
        auto& trace = result_.objective_trace;
        if (!trace.empty()) {
            double prev = trace.back();
            if (value > prev + 1e-6 * std::abs(prev)) ++result_.objective_increases;
        }
        trace.push_back(value);
    }

private:
    PacResult& result_;
};

void finish(PacResult& result, PartitionMatrix p) {
    result.labels = hard_labels(p);
    result.partition = std::move(p);
    result.sweeps_run = result.objective_trace.size();
}

}  // namespace

double objective_jpac(const PartitionMatrix& p, const DistanceMatrix& d) {
    check_dims(p, d, "objective_jpac");
    Matrix s;
    scores_into(p, d, s);
    double total = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
        for (std::size_t c = 0; c < p.k(); ++c) total += p(i, c) * s(i, c);
    }
    return total;
}

double objective_jpac_fuzzy(const PartitionMatrix& p, const DistanceMatrix& d, double m) {
    if (!(m > 1.0)) throw ConfigError("objective_jpac_fuzzy: m must be > 1");
    check_dims(p, d, "objective_jpac_fuzzy");
    Matrix s;
    scores_into(p, d, s);
    return fuzzy_objective_from_scores(p, s, m);
}

ScoreMatrix compute_scores(const PartitionMatrix& p, const DistanceMatrix& d) {
    check_dims(p, d, "compute_scores");
    Matrix s;
    scores_into(p, d, s);
    return ScoreMatrix(std::move(s));
}

void update_row(std::span<const double> scores, double m, double score_floor, std::span<double> out) {
    const std::size_t k = scores.size();
    if (out.size() != k) throw ConfigError("update_row: output width mismatch");
    if (k == 0) return;
    double smin = scores[0];
    for (double s : scores) {
        if (std::isnan(s)) throw SolverError("update_row: NaN score");
        smin = std::min(smin, s);
    }

    if (smin <= score_floor) {
        std::size_t floored = 0;
        for (double s : scores) floored += (s <= score_floor) ? 1 : 0;
        const double share = 1.0 / static_cast<double>(floored);
        for (std::size_t c = 0; c < k; ++c) out[c] = scores[c] <= score_floor ? share : 0.0;
        return;
    }

    const double alpha = 1.0 / (m - 1.0);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        // Largest term is exp(0) = 1 at the minimum score, so nothing overflows.
        double e = std::exp(-alpha * std::log(scores[c] / smin));
        out[c] = e;
        sum += e;
    }
    for (double& v : out) v /= sum;
}

std::vector<double> update_row(std::span<const double> scores, double m, double score_floor) {
    std::vector<double> out(scores.size());
    update_row(scores, m, score_floor, out);
    return out;
}

PacResult pac_fit(const DistanceMatrix& d, const SolverConfig& cfg, const PacOptions& options) {
    cfg.validate(d.n());
    const std::size_t n = d.n();
    const std::size_t k = cfg.k;

    PartitionMatrix p = starting_partition(d, cfg, options);
    Matrix s;
    scores_into(p, d, s);

    PacResult result;
    ObjectiveTracker tracker(result);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<double> fresh(k);
    std::vector<double> delta(k);

    for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        if (cfg.order == SweepOrder::Shuffled) order_rng.shuffle(order);
        double max_delta = 0.0;
        for (std::size_t i : order) {
            update_row(s.row(i), cfg.m, cfg.score_floor, fresh);
            auto pi = p.row(i);
            bool changed = false;
            for (std::size_t c = 0; c < k; ++c) {
                delta[c] = fresh[c] - pi[c];
                max_delta = std::max(max_delta, std::abs(delta[c]));
                changed = changed || delta[c] != 0.0;
                pi[c] = fresh[c];
            }
            if (!changed) continue;
            // Column i of D equals row i by symmetry; d(i, i) = 0 leaves s(i, .) untouched.
            auto di = d.row(i);
            double* sv = s.values().data();
            const double* dv = delta.data();
            for (std::size_t r = 0; r < n; ++r) {
                const double w = di[r];
                double* sr = sv + r * k;
                for (std::size_t c = 0; c < k; ++c) sr[c] += w * dv[c];
            }
        }
        double objective = fuzzy_objective_from_scores(p, s, cfg.m);
        tracker.record(objective);
        result.max_delta_final = max_delta;
        if (options.on_sweep) options.on_sweep(SweepState{sweep, p, s, max_delta, objective});
        if (max_delta < cfg.tol) {
            result.converged = true;
            break;
        }
    }
    finish(result, std::move(p));
    return result;
}

PacResult pac_fit(const DataMatrix& x, const SolverConfig& cfg, DistanceKind kind) {
    cfg.validate(x.n());
    return pac_fit(pairwise_distances(x, kind), cfg);
}

PacResult pac_fit_jacobi(const DistanceMatrix& d, const SolverConfig& cfg, const PacOptions& options) {
    cfg.validate(d.n());
    const std::size_t n = d.n();

    PartitionMatrix p = starting_partition(d, cfg, options);
    Matrix s;
    scores_into(p, d, s);

    PacResult result;
    ObjectiveTracker tracker(result);
    PartitionMatrix next(n, cfg.k);
    const double relaxed = (cfg.m - 1.0) / cfg.m;

    for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) update_row(s.row(i), cfg.m, cfg.score_floor, next.row(i));
        const double step = hard_labels(next) == hard_labels(p) ? 1.0 : relaxed;
        double max_delta = 0.0;
        auto nv = next.matrix().values();
        auto pv = p.matrix().values();
        for (std::size_t t = 0; t < nv.size(); ++t) {
            if (step != 1.0) nv[t] = pv[t] + step * (nv[t] - pv[t]);
            max_delta = std::max(max_delta, std::abs(nv[t] - pv[t]));
        }
        std::swap(p, next);
        scores_into(p, d, s);
        double objective = fuzzy_objective_from_scores(p, s, cfg.m);
        tracker.record(objective);
        result.max_delta_final = max_delta;
        if (options.on_sweep) options.on_sweep(SweepState{sweep, p, s, max_delta, objective});
        if (max_delta < cfg.tol) {
            result.converged = true;
            break;
        }
    }
    finish(result, std::move(p));
    return result;
}

PacResult pac_fit_jacobi(const DataMatrix& x, const SolverConfig& cfg, DistanceKind kind) {
    cfg.validate(x.n());
    return pac_fit_jacobi(pairwise_distances(x, kind), cfg);
}

}  // namespace probagg
