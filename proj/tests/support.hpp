#ifndef PROBAGG_TESTS_SUPPORT_HPP
#define PROBAGG_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "probagg/core.hpp"

namespace probagg::testing {

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    }
    return worst;
}

inline PartitionMatrix random_partition(std::size_t n, std::size_t k, Rng& rng) {
    PartitionMatrix p(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            p(i, c) = rng.uniform(0.05, 1.0);
            sum += p(i, c);
        }
        for (std::size_t c = 0; c < k; ++c) p(i, c) /= sum;
    }
    return p;
}

inline DataMatrix random_points(std::size_t n, std::size_t d, Rng& rng, double scale = 1.0) {
    std::vector<double> v(n * d);
    for (double& x : v) x = scale * rng.normal();
    return DataMatrix(n, d, std::move(v));
}

/// Symmetric, zero-diagonal, entries uniform in (0.1, 2).
inline DistanceMatrix random_distances(std::size_t n, Rng& rng) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(0.1, 2.0);
    }
    return DistanceMatrix::from_values(std::move(m));
}

inline Labels random_labels(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<int> ids(n);
    for (int& id : ids) id = static_cast<int>(rng.below(k));
    return Labels{std::move(ids), k};
}

/// Best accuracy by trying every injective map from predicted ids to class ids.
inline double brute_force_accuracy(const Labels& truth, const Labels& pred) {
    const std::size_t slots = std::max(truth.k, pred.k);
    std::vector<int> perm(slots);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (perm[static_cast<std::size_t>(pred.ids[i])] == truth.ids[i]) ++hits;
        }
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

// Plug-in NMI with arithmetic normalization, straight from the counts.
inline double nmi_oracle(const Labels& a, const Labels& b) {
    const double n = static_cast<double>(a.size());
    std::map<int, double> ca, cb;
    std::map<std::pair<int, int>, double> cab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a.ids[i]] += 1.0;
        cb[b.ids[i]] += 1.0;
        cab[{a.ids[i], b.ids[i]}] += 1.0;
    }
    double mi = 0.0, ha = 0.0, hb = 0.0;
    for (auto& [key, c] : cab) mi += c / n * std::log(c * n / (ca[key.first] * cb[key.second]));
    for (auto& [key, c] : ca) ha -= c / n * std::log(c / n);
    for (auto& [key, c] : cb) hb -= c / n * std::log(c / n);
    if (ha + hb == 0.0) return 1.0;
    return mi / (0.5 * (ha + hb));
}

// Rand-index style pair counting over every unordered pair.
inline double ari_oracle(const Labels& a, const Labels& b) {
    double same_both = 0.0, same_a = 0.0, same_b = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            bool sa = a.ids[i] == a.ids[j];
            bool sb = b.ids[i] == b.ids[j];
            same_both += (sa && sb) ? 1.0 : 0.0;
            same_a += sa ? 1.0 : 0.0;
            same_b += sb ? 1.0 : 0.0;
            pairs += 1.0;
        }
    }
    double expected = same_a * same_b / pairs;
    double maximum = 0.5 * (same_a + same_b);
    if (maximum == expected) return 1.0;
    return (same_both - expected) / (maximum - expected);
}

}  // namespace probagg::testing

#endif  // PROBAGG_TESTS_SUPPORT_HPP
