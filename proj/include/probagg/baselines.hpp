#ifndef PROBAGG_BASELINES_HPP
#define PROBAGG_BASELINES_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "probagg/core.hpp"

namespace probagg {

/// K x D cluster centers (baselines only).
class Centroids {
public:
    Centroids() = default;
    explicit Centroids(Matrix values) : m_(std::move(values)) {}

    std::size_t k() const noexcept { return m_.rows(); }
    std::size_t d() const noexcept { return m_.cols(); }
    std::span<const double> row(std::size_t c) const noexcept { return m_.row(c); }
    std::span<double> row(std::size_t c) noexcept { return m_.row(c); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

enum class CenterInit { RandomPoints, KMeansPlusPlus };

struct KMeansConfig {
    std::size_t k = 2;
    std::uint64_t seed = 0;
    double tol = 1e-4;
    std::size_t max_iters = 300;
    CenterInit init = CenterInit::RandomPoints;
    std::optional<Centroids> initial_centers;  // overrides seeding when set
};

struct KMeansResult {
    Centroids centroids;
    Labels labels;
    std::vector<double> inertia_trace;  // after each assignment step
    std::size_t iterations = 0;
    bool converged = false;
};

/// Lloyd iterations from k distinct data points. Stops when assignments stop changing or the
/// largest center shift drops below tol. An emptied cluster is reseeded at the sample farthest
/// from its own center. Throws DataError when fewer than k distinct points exist.
KMeansResult kmeans_fit(const DataMatrix& x, const KMeansConfig& cfg);

struct FcmConfig {
    std::size_t k = 2;
    double m = 1.1;
    std::uint64_t seed = 0;
    double tol = 1e-4;
    std::size_t max_iters = 300;
    double score_floor = 1e-12;
    CenterInit init = CenterInit::RandomPoints;
    std::optional<Centroids> initial_centers;  // overrides seeding when set
};

struct FcmResult {
    Centroids centroids;
    PartitionMatrix partition;
    Labels labels;
    std::vector<double> objective_trace;  // sum u^m |x - c|^2 after each membership update
    std::size_t iterations = 0;
    bool converged = false;
};

/// Fuzzy c-means. Memberships are proportional to |x - c|^(-2/(m-1)) and are computed with the
/// same log-domain row normalization as PAC; zero-distance centers split the mass evenly.
FcmResult fcm_fit(const DataMatrix& x, const FcmConfig& cfg);

/// Membership-weighted centers sum_i w(i,k) x_i / sum_i w(i,k) with w = p^power.
Centroids weighted_centers(const DataMatrix& x, const PartitionMatrix& p, double power = 1.0);

}  // namespace probagg

#endif  // PROBAGG_BASELINES_HPP
