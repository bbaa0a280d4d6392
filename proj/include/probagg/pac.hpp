#ifndef PROBAGG_PAC_HPP
#define PROBAGG_PAC_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "probagg/core.hpp"
#include "probagg/geometry.hpp"

namespace probagg {

/// s(i, k) = sum over j != i of p(j, k) * d(i, j). Equal to the product D * P because diag(D) = 0.
class ScoreMatrix {
public:
    ScoreMatrix() = default;
    explicit ScoreMatrix(Matrix scores) : m_(std::move(scores)) {}

    std::size_t n() const noexcept { return m_.rows(); }
    std::size_t k() const noexcept { return m_.cols(); }
    double operator()(std::size_t i, std::size_t c) const noexcept { return m_(i, c); }
    std::span<const double> row(std::size_t i) const noexcept { return m_.row(i); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

struct PacResult {
    PartitionMatrix partition;
    Labels labels;
    std::vector<double> objective_trace;  // fuzzy objective after each sweep
    std::size_t sweeps_run = 0;
    bool converged = false;
    double max_delta_final = 0.0;
    // Sweeps (after the first) whose objective rose by more than 1e-6 relative. Logged, not fatal.
    std::size_t objective_increases = 0;
};

/// Snapshot handed to PacOptions::on_sweep after each completed sweep.
struct SweepState {
    std::size_t sweep;  // 1-based
    const PartitionMatrix& partition;
    const Matrix& scores;  // scores the solver carries into the next sweep
    double max_delta;
    double objective;
};

struct PacOptions {
    std::optional<PartitionMatrix> initial;  // overrides init_partition when set
    std::function<void(const SweepState&)> on_sweep;
};

/// sum_i sum_j <p_i, p_j> d(i, j), i.e. Tr(P^T D P).
double objective_jpac(const PartitionMatrix& p, const DistanceMatrix& d);

/// sum_i sum_j sum_k p(i,k)^m p(j,k) d(i,j).
double objective_jpac_fuzzy(const PartitionMatrix& p, const DistanceMatrix& d, double m);

ScoreMatrix compute_scores(const PartitionMatrix& p, const DistanceMatrix& d);

/// Closed-form row update p_k = s_k^-a / sum_r s_r^-a with a = 1 / (m - 1).
///
/// Evaluated in the log domain on ratios s_k / min_r s_r, so the result does not depend on the
/// overall scale of the scores (bit-exactly so for power-of-two scale factors). If any score is
/// at or below `score_floor`, all mass goes uniformly to those floored entries. Throws
/// SolverError on a NaN score.
void update_row(std::span<const double> scores, double m, double score_floor, std::span<double> out);
std::vector<double> update_row(std::span<const double> scores, double m, double score_floor);

/// Gauss-Seidel sweeps in sample order: each row is recomputed from the current scores, written
/// atomically, and its change is pushed into every other row's scores (a rank-one update).
PacResult pac_fit(const DistanceMatrix& d, const SolverConfig& cfg, const PacOptions& options = {});
PacResult pac_fit(const DataMatrix& x, const SolverConfig& cfg,
                  DistanceKind kind = DistanceKind::SquaredEuclidean);

/// Jacobi schedule: scores are recomputed as D * P once per sweep, then all rows update together.
/// While the hard labels of the proposed rows differ from the current ones, the step is relaxed to
/// P + ((m - 1) / m) (U - P); once they agree the full update is taken.
PacResult pac_fit_jacobi(const DistanceMatrix& d, const SolverConfig& cfg, const PacOptions& options = {});
PacResult pac_fit_jacobi(const DataMatrix& x, const SolverConfig& cfg,
                         DistanceKind kind = DistanceKind::SquaredEuclidean);

}  // namespace probagg

#endif  // PROBAGG_PAC_HPP
