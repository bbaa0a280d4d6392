#ifndef PROBAGG_CORE_HPP
#define PROBAGG_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace probagg {

// Error categories. The CLI maps these onto exit codes (config -> 1, data -> 2, solver -> 3).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * cols_, cols_};
    }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// N x D sample matrix; n >= 2, d >= 1, all entries finite.
class DataMatrix {
public:
    explicit DataMatrix(Matrix values);
    DataMatrix(std::size_t n, std::size_t d, std::vector<double> values)
        : DataMatrix(Matrix(n, d, std::move(values))) {}

    std::size_t n() const noexcept { return m_.rows(); }
    std::size_t d() const noexcept { return m_.cols(); }
    std::span<const double> row(std::size_t i) const noexcept { return m_.row(i); }
    double operator()(std::size_t i, std::size_t f) const noexcept { return m_(i, f); }
    const Matrix& matrix() const noexcept { return m_; }

    /// Rows selected by `indices`, in that order.
    DataMatrix select_rows(std::span<const std::size_t> indices) const;

private:
    Matrix m_;
};

/// N x K soft assignment. Holds arbitrary values; `validate_partition` checks the simplex constraints.
class PartitionMatrix {
public:
    PartitionMatrix() = default;
    PartitionMatrix(std::size_t n, std::size_t k, double fill = 0.0) : m_(n, k, fill) {}
    explicit PartitionMatrix(Matrix values) : m_(std::move(values)) {}

    std::size_t n() const noexcept { return m_.rows(); }
    std::size_t k() const noexcept { return m_.cols(); }
    double& operator()(std::size_t i, std::size_t c) noexcept { return m_(i, c); }
    double operator()(std::size_t i, std::size_t c) const noexcept { return m_(i, c); }
    std::span<double> row(std::size_t i) noexcept { return m_.row(i); }
    std::span<const double> row(std::size_t i) const noexcept { return m_.row(i); }
    const Matrix& matrix() const noexcept { return m_; }
    Matrix& matrix() noexcept { return m_; }

    /// One-hot rows from integer labels.
    static PartitionMatrix one_hot(std::span<const int> ids, std::size_t k);

    bool operator==(const PartitionMatrix&) const = default;

private:
    Matrix m_;
};

/// N x N symmetric, zero-diagonal, nonnegative finite distances.
class DistanceMatrix {
public:
    DistanceMatrix() = default;

    /// Validates symmetry (1e-9), zero diagonal, nonnegativity and finiteness; throws DataError.
    static DistanceMatrix from_values(Matrix values);
    /// Skips validation; callers guarantee the invariants.
    static DistanceMatrix trusted(Matrix values);

    std::size_t n() const noexcept { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
    std::span<const double> row(std::size_t i) const noexcept { return m_.row(i); }
    const Matrix& matrix() const noexcept { return m_; }

    DistanceMatrix scaled(double c) const;

private:
    explicit DistanceMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

/// Hard cluster ids, each in [0, k).
struct Labels {
    std::vector<int> ids;
    std::size_t k = 0;

    std::size_t size() const noexcept { return ids.size(); }
    bool operator==(const Labels&) const = default;
};

/// Builds Labels and checks every id lies in [0, k).
Labels make_labels(std::vector<int> ids, std::size_t k);
/// Builds Labels with k = max id + 1.
Labels make_labels(std::vector<int> ids);

enum class SweepOrder { Ascending, Shuffled };

struct SolverConfig {
    std::size_t k = 2;
    double m = 1.03;
    double tol = 1e-4;
    std::size_t max_sweeps = 100;
    std::uint64_t seed = 0;
    double score_floor = 1e-12;
    double init_jitter = 0.01;
    SweepOrder order = SweepOrder::Ascending;

    /// Throws ConfigError on any violated invariant; n is the sample count it will run on.
    void validate(std::size_t n) const;
    double alpha() const noexcept { return 1.0 / (m - 1.0); }
};

struct PartitionIssue {
    enum class Kind { EntryOutOfRange, RowSum, ColumnDegenerate };
    Kind kind;
    std::size_t index;  // row for EntryOutOfRange/RowSum, column for ColumnDegenerate
    double value;       // offending entry, row-sum error, or column sum
};

struct PartitionReport {
    double max_row_sum_error = 0.0;
    std::size_t entry_violations = 0;
    std::vector<double> column_sums;
    std::vector<PartitionIssue> issues;

    bool valid() const noexcept { return issues.empty(); }
    /// True when only column-degeneracy warnings are present.
    bool on_simplex() const noexcept;
};

inline constexpr double kRowSumTolerance = 1e-9;

PartitionReport validate_partition(const PartitionMatrix& p);

/// Entries within this distance of the row maximum count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Row-wise argmax, ties (within kTieTolerance) to the lowest index.
Labels hard_labels(const PartitionMatrix& p);

/// Approximately uniform rows: (1/k)(1 + u), u ~ U[-jitter, jitter], then row-normalized.
PartitionMatrix init_partition(std::size_t n, std::size_t k, std::uint64_t seed, double jitter);

/// Seeded generator. The engine is std::mt19937_64, whose output sequence is fixed by the standard;
/// the conversions below are done by hand because std distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() noexcept { return engine_(); }
    /// Uniform in [0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound).
    std::size_t below(std::size_t bound) noexcept;
    double normal() noexcept;

    template <typename T>
    void shuffle(std::vector<T>& v) noexcept {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace probagg

#endif  // PROBAGG_CORE_HPP
