#include "probagg/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace probagg {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw DataError("matrix: expected " + std::to_string(rows * cols) + " values, got " +
                        std::to_string(values_.size()));
    }
}

DataMatrix::DataMatrix(Matrix values) : m_(std::move(values)) {
    if (m_.rows() < 2) throw DataError("data matrix needs at least 2 samples");
    if (m_.cols() < 1) throw DataError("data matrix needs at least 1 feature");
    for (double v : m_.values()) {
        if (!std::isfinite(v)) throw DataError("data matrix contains a non-finite entry");
    }
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), d());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        auto src = row(indices[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return DataMatrix(std::move(out));
}

PartitionMatrix PartitionMatrix::one_hot(std::span<const int> ids, std::size_t k) {
    PartitionMatrix p(ids.size(), k, 0.0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= k) {
            throw DataError("one_hot: label out of range");
        }
        p(i, static_cast<std::size_t>(ids[i])) = 1.0;
    }
    return p;
}

DistanceMatrix DistanceMatrix::from_values(Matrix values) {
    const std::size_t n = values.rows();
    if (values.cols() != n) throw DataError("distance matrix must be square");
    for (std::size_t i = 0; i < n; ++i) {
        if (values(i, i) != 0.0) throw DataError("distance matrix diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
            double v = values(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw DataError("distance matrix entries must be finite and nonnegative");
            }
            if (j > i && std::abs(v - values(j, i)) > 1e-9) {
                throw DataError("distance matrix must be symmetric");
            }
        }
    }
    return DistanceMatrix(std::move(values));
}

DistanceMatrix DistanceMatrix::trusted(Matrix values) { return DistanceMatrix(std::move(values)); }

DistanceMatrix DistanceMatrix::scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("distance scale must be positive");
    Matrix out = m_;
    for (double& v : out.values()) v *= c;
    return DistanceMatrix(std::move(out));
}

Labels make_labels(std::vector<int> ids, std::size_t k) {
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= k) {
            throw DataError("label id " + std::to_string(id) + " outside [0, " + std::to_string(k) + ")");
        }
    }
    return Labels{std::move(ids), k};
}

Labels make_labels(std::vector<int> ids) {
    int top = -1;
    for (int id : ids) {
        if (id < 0) throw DataError("label ids must be nonnegative");
        top = std::max(top, id);
    }
    return Labels{std::move(ids), static_cast<std::size_t>(top + 1)};
}

void SolverConfig::validate(std::size_t n) const {
    if (k < 2) throw ConfigError("k must be at least 2");
    if (k >= n) throw ConfigError("k must be smaller than the sample count");
    if (!(m > 1.0) || !std::isfinite(m)) throw ConfigError("m must be a finite value > 1");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (max_sweeps < 1) throw ConfigError("max_sweeps must be at least 1");
    if (!(score_floor > 0.0)) throw ConfigError("score_floor must be positive");
    if (!(init_jitter >= 0.0 && init_jitter < 1.0)) throw ConfigError("init_jitter must lie in [0, 1)");
}

bool PartitionReport::on_simplex() const noexcept {
    return std::all_of(issues.begin(), issues.end(), [](const PartitionIssue& e) {
        return e.kind == PartitionIssue::Kind::ColumnDegenerate;
    });
}

PartitionReport validate_partition(const PartitionMatrix& p) {
    PartitionReport report;
    report.column_sums.assign(p.k(), 0.0);
    for (std::size_t i = 0; i < p.n(); ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < p.k(); ++c) {
            double v = p(i, c);
            if (!(v >= 0.0 && v <= 1.0)) {
                ++report.entry_violations;
                report.issues.push_back({PartitionIssue::Kind::EntryOutOfRange, i, v});
            }
            sum += v;
            report.column_sums[c] += v;
        }
        double err = std::abs(sum - 1.0);
        if (std::isnan(sum)) err = std::numeric_limits<double>::infinity();
        report.max_row_sum_error = std::max(report.max_row_sum_error, err);
        if (err > kRowSumTolerance) report.issues.push_back({PartitionIssue::Kind::RowSum, i, err});
    }
    const double n = static_cast<double>(p.n());
    for (std::size_t c = 0; c < p.k(); ++c) {
        double s = report.column_sums[c];
        if (!(s > 0.0 && s < n)) report.issues.push_back({PartitionIssue::Kind::ColumnDegenerate, c, s});
    }
    return report;
}

Labels hard_labels(const PartitionMatrix& p) {
    std::vector<int> ids(p.n(), 0);
    for (std::size_t i = 0; i < p.n(); ++i) {
        auto r = p.row(i);
        const double top = *std::max_element(r.begin(), r.end());
        auto first = std::find_if(r.begin(), r.end(), [top](double v) { return v >= top - kTieTolerance; });
        ids[i] = static_cast<int>(first - r.begin());
    }
    return Labels{std::move(ids), p.k()};
}

PartitionMatrix init_partition(std::size_t n, std::size_t k, std::uint64_t seed, double jitter) {
    if (k < 2 || k >= n) throw ConfigError("init_partition: need 2 <= k < n");
    if (!(jitter >= 0.0 && jitter < 1.0)) throw ConfigError("init_partition: jitter must lie in [0, 1)");
    Rng rng(seed);
    PartitionMatrix p(n, k);
    const double base = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = p.row(i);
        double sum = 0.0;
        for (double& v : r) {
            v = base * (1.0 + rng.uniform(-jitter, jitter));
            sum += v;
        }
        for (double& v : r) v /= sum;
    }
    return p;
}

double Rng::uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t bound) noexcept {
    // Reject the tail so the modulo is unbiased.
    const std::uint64_t b = bound;
    const std::uint64_t limit = (~std::uint64_t{0} / b) * b;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % b);
}

double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace probagg
