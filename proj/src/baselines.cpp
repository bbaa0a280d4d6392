#include "probagg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "probagg/geometry.hpp"
#include "probagg/pac.hpp"

namespace probagg {

namespace {

void check_k(const DataMatrix& x, std::size_t k) {
    if (k < 2 || k >= x.n()) throw ConfigError("need 2 <= k < n");
}

std::size_t count_distinct(const DataMatrix& x, std::size_t cap) {
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < x.n() && seen.size() < cap; ++i) {
        auto r = x.row(i);
        seen.emplace(r.begin(), r.end());
    }
    return seen.size();
}

bool same_point(std::span<const double> a, std::span<const double> b) {
    return std::equal(a.begin(), a.end(), b.begin());
}

Centroids random_point_centers(const DataMatrix& x, std::size_t k, Rng& rng) {
    Matrix c(k, x.d());
    std::vector<std::size_t> chosen;
    while (chosen.size() < k) {
        std::size_t i = rng.below(x.n());
        bool dup = std::any_of(chosen.begin(), chosen.end(),
                               [&](std::size_t j) { return same_point(x.row(i), x.row(j)); });
        if (dup) continue;
        auto src = x.row(i);
        std::copy(src.begin(), src.end(), c.row(chosen.size()).begin());
        chosen.push_back(i);
    }
    return Centroids(std::move(c));
}

Centroids plus_plus_centers(const DataMatrix& x, std::size_t k, Rng& rng) {
    Matrix c(k, x.d());
    std::vector<double> best(x.n(), std::numeric_limits<double>::infinity());
    std::size_t first = rng.below(x.n());
    auto src = x.row(first);
    std::copy(src.begin(), src.end(), c.row(0).begin());
    for (std::size_t chosen = 1; chosen < k; ++chosen) {
        double total = 0.0;
        for (std::size_t i = 0; i < x.n(); ++i) {
            best[i] = std::min(best[i], squared_euclidean(x.row(i), c.row(chosen - 1)));
            total += best[i];
        }
        double target = rng.uniform() * total;
        std::size_t pick = x.n() - 1;
        for (std::size_t i = 0; i < x.n(); ++i) {
            target -= best[i];
            if (target < 0.0 && best[i] > 0.0) {
                pick = i;
                break;
            }
        }
        auto row = x.row(pick);
        std::copy(row.begin(), row.end(), c.row(chosen).begin());
    }
    return Centroids(std::move(c));
}

Centroids seed_centers(const DataMatrix& x, std::size_t k, CenterInit init, std::uint64_t seed) {
    if (count_distinct(x, k) < k) throw DataError("fewer than k distinct points");
    Rng rng(seed);
    return init == CenterInit::KMeansPlusPlus ? plus_plus_centers(x, k, rng) : random_point_centers(x, k, rng);
}

}  // namespace

KMeansResult kmeans_fit(const DataMatrix& x, const KMeansConfig& cfg) {
    check_k(x, cfg.k);
    if (!(cfg.tol >= 0.0) || cfg.max_iters < 1) throw ConfigError("kmeans: invalid tol or max_iters");
    const std::size_t n = x.n(), d = x.d(), k = cfg.k;

    KMeansResult result;
    Centroids centers;
    if (cfg.initial_centers) {
        if (cfg.initial_centers->k() != k || cfg.initial_centers->d() != d) {
            throw ConfigError("kmeans: initial centers have the wrong shape");
        }
        centers = *cfg.initial_centers;
    } else {
        centers = seed_centers(x, k, cfg.init, cfg.seed);
    }
    std::vector<int> assign(n, -1);
    std::vector<double> dist(n, 0.0);
    bool settled = false;

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double dd = squared_euclidean(x.row(i), centers.row(c));
                if (dd < best_d) {
                    best_d = dd;
                    best = static_cast<int>(c);
                }
            }
            changed = changed || assign[i] != best;
            assign[i] = best;
            dist[i] = best_d;
            inertia += best_d;
        }
        result.inertia_trace.push_back(inertia);
        result.iterations = iter;
        if (!changed || settled) {
            result.converged = true;
            break;
        }

        Matrix sums(k, d, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto c = static_cast<std::size_t>(assign[i]);
            ++counts[c];
            auto xi = x.row(i);
            auto sc = sums.row(c);
            for (std::size_t f = 0; f < d; ++f) sc[f] += xi[f];
        }
        double max_shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> next(d);
            if (counts[c] == 0) {
                // Reseed at the sample farthest from its current center; it leaves its old cluster.
                auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
                auto xf = x.row(far);
                std::copy(xf.begin(), xf.end(), next.begin());
                dist[far] = 0.0;
            } else {
                auto sc = sums.row(c);
                for (std::size_t f = 0; f < d; ++f) next[f] = sc[f] / static_cast<double>(counts[c]);
            }
            max_shift = std::max(max_shift, std::sqrt(squared_euclidean(next, centers.row(c))));
            std::copy(next.begin(), next.end(), centers.row(c).begin());
        }
        // One more assignment pass against the settled centers, then stop.
        settled = max_shift < cfg.tol;
    }
    result.centroids = std::move(centers);
    result.labels = Labels{std::move(assign), k};
    return result;
}

Centroids weighted_centers(const DataMatrix& x, const PartitionMatrix& p, double power) {
    if (p.n() != x.n()) throw ConfigError("weighted_centers: shape mismatch");
    Matrix c(p.k(), x.d(), 0.0);
    std::vector<double> mass(p.k(), 0.0);
    for (std::size_t i = 0; i < x.n(); ++i) {
        auto xi = x.row(i);
        for (std::size_t k = 0; k < p.k(); ++k) {
            double w = power == 1.0 ? p(i, k) : std::pow(p(i, k), power);
            if (w == 0.0) continue;
            mass[k] += w;
            auto ck = c.row(k);
            for (std::size_t f = 0; f < x.d(); ++f) ck[f] += w * xi[f];
        }
    }
    for (std::size_t k = 0; k < p.k(); ++k) {
        if (mass[k] > 0.0) {
            for (double& v : c.row(k)) v /= mass[k];
        }
    }
    return Centroids(std::move(c));
}

FcmResult fcm_fit(const DataMatrix& x, const FcmConfig& cfg) {
    check_k(x, cfg.k);
    if (!(cfg.m > 1.0)) throw ConfigError("fcm: m must be > 1");
    if (!(cfg.tol > 0.0) || cfg.max_iters < 1) throw ConfigError("fcm: invalid tol or max_iters");
    const std::size_t n = x.n(), k = cfg.k;

    Centroids centers;
    if (cfg.initial_centers) {
        if (cfg.initial_centers->k() != k || cfg.initial_centers->d() != x.d()) {
            throw ConfigError("fcm: initial centers have the wrong shape");
        }
        centers = *cfg.initial_centers;
    } else {
        centers = seed_centers(x, k, cfg.init, cfg.seed);
    }

    FcmResult result;
    PartitionMatrix u(n, k, 0.0);
    std::vector<double> dist(k);
    std::vector<double> row(k);
    bool first = true;

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        double max_delta = 0.0;
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) dist[c] = squared_euclidean(x.row(i), centers.row(c));
            // u ~ (|x - c|^2)^(-1/(m-1)), the PAC row update applied to squared center distances.
            update_row(dist, cfg.m, cfg.score_floor, row);
            auto ui = u.row(i);
            for (std::size_t c = 0; c < k; ++c) {
                if (!first) max_delta = std::max(max_delta, std::abs(row[c] - ui[c]));
                ui[c] = row[c];
                if (row[c] > 0.0) objective += std::pow(row[c], cfg.m) * dist[c];
            }
        }
        if (!std::isfinite(objective)) throw SolverError("fcm: non-finite objective");
        result.objective_trace.push_back(objective);
        result.iterations = iter;
        if (!first && max_delta < cfg.tol) {
            result.converged = true;
            break;
        }
        first = false;
        Centroids next = weighted_centers(x, u, cfg.m);
        // A center that lost all weight stays where it was.
        for (std::size_t c = 0; c < k; ++c) {
            double mass = 0.0;
            for (std::size_t i = 0; i < n; ++i) mass += u(i, c);
            if (mass > 0.0) {
                auto src = next.row(c);
                std::copy(src.begin(), src.end(), centers.row(c).begin());
            }
        }
    }
    result.labels = hard_labels(u);
    result.partition = std::move(u);
    result.centroids = std::move(centers);
    return result;
}

}  // namespace probagg
