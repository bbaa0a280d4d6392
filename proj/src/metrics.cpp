#include "probagg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace probagg {

namespace {

void check_lengths(const Labels& a, const Labels& b) {
    if (a.size() != b.size()) {
        throw DataError("label length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
}

std::size_t label_extent(const Labels& l) {
    std::size_t k = l.k;
    for (int id : l.ids) {
        if (id < 0) throw DataError("negative label id");
        k = std::max(k, static_cast<std::size_t>(id) + 1);
    }
    return k;
}

double comb2(std::int64_t x) { return x < 2 ? 0.0 : 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

double entropy(const std::vector<std::int64_t>& counts, double n) {
    double h = 0.0;
    for (auto c : counts) {
        if (c > 0) {
            double p = static_cast<double>(c) / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

}  // namespace

ContingencyTable::ContingencyTable(const Labels& truth, const Labels& pred)
    : rows_(label_extent(truth)), cols_(label_extent(pred)), total_(0) {
    check_lengths(truth, pred);
    cells_.assign(rows_ * cols_, 0);
    row_sums_.assign(rows_, 0);
    col_sums_.assign(cols_, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto r = static_cast<std::size_t>(truth.ids[i]);
        auto c = static_cast<std::size_t>(pred.ids[i]);
        ++cells_[r * cols_ + c];
        ++row_sums_[r];
        ++col_sums_[c];
        ++total_;
    }
}

std::vector<std::size_t> solve_assignment(const Matrix& cost) {
    const std::size_t n = cost.rows();
    if (cost.cols() != n) throw ConfigError("solve_assignment: cost matrix must be square");
    if (n == 0) return {};
    // Shortest augmenting path with row/column potentials; index 0 is a sentinel column.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t row = 1; row <= n; ++row) {
        match[0] = row;
        std::size_t col0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[col0] = 1;
            std::size_t r0 = match[col0], col1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(r0 - 1, j - 1) - u[r0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do {
            std::size_t col1 = way[col0];
            match[col0] = match[col1];
            col0 = col1;
        } while (col0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    return assignment;
}

std::vector<int> best_label_map(const Labels& truth, const Labels& pred) {
    ContingencyTable table(truth, pred);
    const std::size_t size = std::max(table.rows(), table.cols());
    // Rows are predicted clusters, columns are classes; padding cells cost 0.
    Matrix cost(size, size, 0.0);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) cost(c, r) = -static_cast<double>(table(r, c));
    }
    auto assignment = solve_assignment(cost);
    std::vector<int> map(table.cols(), -1);
    for (std::size_t c = 0; c < table.cols(); ++c) {
        if (assignment[c] < table.rows()) map[c] = static_cast<int>(assignment[c]);
    }
    return map;
}

double accuracy(const Labels& truth, const Labels& pred) {
    check_lengths(truth, pred);
    if (truth.size() == 0) throw DataError("accuracy: empty labelings");
    ContingencyTable table(truth, pred);
    auto map = best_label_map(truth, pred);
    std::int64_t matched = 0;
    for (std::size_t c = 0; c < map.size(); ++c) {
        if (map[c] >= 0) matched += table(static_cast<std::size_t>(map[c]), c);
    }
    return static_cast<double>(matched) / static_cast<double>(table.total());
}

double nmi(const Labels& truth, const Labels& pred, NmiNorm norm) {
    check_lengths(truth, pred);
    if (truth.size() == 0) throw DataError("nmi: empty labelings");
    ContingencyTable table(truth, pred);
    const double n = static_cast<double>(table.total());
    const double ht = entropy(table.row_sums(), n);
    const double hp = entropy(table.col_sums(), n);
    double mi = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            auto nrc = table(r, c);
            if (nrc == 0) continue;
            double joint = static_cast<double>(nrc) / n;
            double outer = static_cast<double>(table.row_sums()[r]) * static_cast<double>(table.col_sums()[c]) / (n * n);
            mi += joint * std::log(joint / outer);
        }
    }
    double denom = 0.0;
    switch (norm) {
        case NmiNorm::Arithmetic: denom = 0.5 * (ht + hp); break;
        case NmiNorm::Geometric: denom = std::sqrt(ht * hp); break;
        case NmiNorm::Min: denom = std::min(ht, hp); break;
        case NmiNorm::Max: denom = std::max(ht, hp); break;
    }
    if (ht == 0.0 && hp == 0.0) return 1.0;
    if (denom <= 0.0) return 0.0;
    return std::clamp(std::max(mi, 0.0) / denom, 0.0, 1.0);
}

double ari(const Labels& truth, const Labels& pred) {
    check_lengths(truth, pred);
    ContingencyTable table(truth, pred);
    double index = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) index += comb2(table(r, c));
    }
    double sum_rows = 0.0, sum_cols = 0.0;
    for (auto a : table.row_sums()) sum_rows += comb2(a);
    for (auto b : table.col_sums()) sum_cols += comb2(b);
    const double pairs = comb2(table.total());
    if (pairs == 0.0) return 1.0;
    const double expected = sum_rows * sum_cols / pairs;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

double balance_entropy(const PartitionMatrix& p) {
    const double n = static_cast<double>(p.n());
    double h = 0.0;
    for (std::size_t c = 0; c < p.k(); ++c) {
        double mass = 0.0;
        for (std::size_t i = 0; i < p.n(); ++i) mass += p(i, c);
        double share = mass / n;
        if (share > 0.0) h += share * std::log(share);
    }
    return h;
}

}  // namespace probagg
