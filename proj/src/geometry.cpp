#include "probagg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace probagg {

namespace {

constexpr std::size_t kTile = 64;

double entry(DistanceKind kind, std::span<const double> a, std::span<const double> b, double norm_a,
             double norm_b) noexcept {
    switch (kind) {
        case DistanceKind::SquaredEuclidean:
            return squared_euclidean(a, b);
        case DistanceKind::Euclidean:
            return std::sqrt(squared_euclidean(a, b));
        case DistanceKind::Cosine: {
            if (norm_a == 0.0 || norm_b == 0.0) return 1.0;
            double dot = 0.0;
            for (std::size_t f = 0; f < a.size(); ++f) dot += a[f] * b[f];
            return std::max(0.0, 1.0 - dot / (norm_a * norm_b));
        }
    }
    return 0.0;
}

}  // namespace

DistanceKind parse_distance_kind(std::string_view name) {
    if (name == "sqeuclidean" || name == "squared-euclidean") return DistanceKind::SquaredEuclidean;
    if (name == "euclidean") return DistanceKind::Euclidean;
    if (name == "cosine" || name == "cosine-distance") return DistanceKind::Cosine;
    throw ConfigError("unknown distance kind: " + std::string(name));
}

std::string_view to_string(DistanceKind kind) noexcept {
    switch (kind) {
        case DistanceKind::SquaredEuclidean: return "squared-euclidean";
        case DistanceKind::Euclidean: return "euclidean";
        case DistanceKind::Cosine: return "cosine-distance";
    }
    return "unknown";
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        double diff = a[f] - b[f];
        acc += diff * diff;
    }
    return acc;
}

DistanceMatrix pairwise_distances(const DataMatrix& x, DistanceKind kind) {
    const std::size_t n = x.n();
    std::vector<double> norms(n, 0.0);
    if (kind == DistanceKind::Cosine) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (double v : x.row(i)) s += v * v;
            norms[i] = std::sqrt(s);
        }
    }

    Matrix out(n, n, 0.0);
    for (std::size_t bi = 0; bi < n; bi += kTile) {
        const std::size_t ei = std::min(n, bi + kTile);
        for (std::size_t bj = bi; bj < n; bj += kTile) {
            const std::size_t ej = std::min(n, bj + kTile);
            for (std::size_t i = bi; i < ei; ++i) {
                auto xi = x.row(i);
                for (std::size_t j = std::max(bj, i + 1); j < ej; ++j) {
                    double v = entry(kind, xi, x.row(j), norms[i], norms[j]);
                    out(i, j) = v;
                    out(j, i) = v;
                }
            }
        }
    }
    return DistanceMatrix::trusted(std::move(out));
}

DistanceMatrix batch_distances(const DataMatrix& x_batch, DistanceKind kind) {
    return pairwise_distances(x_batch, kind);
}

}  // namespace probagg
