#ifndef PROBAGG_GEOMETRY_HPP
#define PROBAGG_GEOMETRY_HPP

#include <string_view>

#include "probagg/core.hpp"

namespace probagg {

enum class DistanceKind { SquaredEuclidean, Euclidean, Cosine };

DistanceKind parse_distance_kind(std::string_view name);
std::string_view to_string(DistanceKind kind) noexcept;

// Full N x N distance matrix, computed over row tiles and mirrored so the result is exactly
// symmetric. Squared euclidean uses explicit differences, so no cancellation occurs; cosine is
// 1 - <x_i, x_j> / (|x_i| |x_j|) clamped at 0, with zero-norm rows at distance 1 from everything.
DistanceMatrix pairwise_distances(const DataMatrix& x, DistanceKind kind = DistanceKind::SquaredEuclidean);

// Same contract as pairwise_distances, applied to a mini-batch (B >= 2).
DistanceMatrix batch_distances(const DataMatrix& x_batch, DistanceKind kind = DistanceKind::SquaredEuclidean);

double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace probagg

#endif  // PROBAGG_GEOMETRY_HPP
