#ifndef PROBAGG_METRICS_HPP
#define PROBAGG_METRICS_HPP

#include <cstdint>
#include <vector>

#include "probagg/core.hpp"

namespace probagg {

/// Counts of (true label, predicted label) co-occurrences plus marginals.
class ContingencyTable {
public:
    ContingencyTable(const Labels& truth, const Labels& pred);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::int64_t operator()(std::size_t r, std::size_t c) const noexcept { return cells_[r * cols_ + c]; }
    const std::vector<std::int64_t>& row_sums() const noexcept { return row_sums_; }
    const std::vector<std::int64_t>& col_sums() const noexcept { return col_sums_; }
    std::int64_t total() const noexcept { return total_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::int64_t> cells_;
    std::vector<std::int64_t> row_sums_;
    std::vector<std::int64_t> col_sums_;
    std::int64_t total_;
};

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method, O(n^3)).
/// Returns, for each row, the column assigned to it.
std::vector<std::size_t> solve_assignment(const Matrix& cost);

/// Best matched fraction over one-to-one cluster-to-class maps; unequal label counts are
/// handled by zero-padding the table to a square.
double accuracy(const Labels& truth, const Labels& pred);

/// Predicted-cluster -> class map that achieves `accuracy`; clusters left unmatched map to -1.
std::vector<int> best_label_map(const Labels& truth, const Labels& pred);

enum class NmiNorm { Arithmetic, Geometric, Min, Max };

/// Mutual information normalized by a mean of the two label entropies (arithmetic by default).
/// Two single-cluster labelings score 1.
double nmi(const Labels& truth, const Labels& pred, NmiNorm norm = NmiNorm::Arithmetic);

/// Pair-counting adjusted Rand index. Returns 1 when the expected and maximum indices coincide.
double ari(const Labels& truth, const Labels& pred);

/// sum_k (c_k / N) ln(c_k / N) over column masses c_k; equals -ln K for balanced columns and 0
/// when a single column holds all mass.
double balance_entropy(const PartitionMatrix& p);

}  // namespace probagg

#endif  // PROBAGG_METRICS_HPP
