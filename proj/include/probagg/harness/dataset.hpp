#ifndef PROBAGG_HARNESS_DATASET_HPP
#define PROBAGG_HARNESS_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "probagg/core.hpp"

namespace probagg::harness {

struct CsvOptions {
    // 0 means auto-detect: comma if the first data line has one, otherwise whitespace.
    char delimiter = 0;
    // Unset means auto-detect: the first line is a header when any feature cell is non-numeric.
    std::optional<bool> header;
    // Column holding the class label. Negative values count from the end (-1 = last column).
    std::optional<int> label_column = -1;
};

struct Dataset {
    DataMatrix x;
    std::optional<Labels> labels;
    std::vector<std::string> label_names;  // label_names[id] is the original cell text
};

/// Parses delimited numeric text. Labels are mapped to contiguous ids in ascending order of their
/// original values (numerically when every label parses as a number). Throws DataError for empty
/// input, ragged rows, or non-numeric feature cells.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {});

/// Writes features then the label (if any) as comma-separated rows, no header.
void write_csv(const std::filesystem::path& path, const DataMatrix& x, const Labels* labels = nullptr);

struct BlobSpec {
    std::size_t n_per_cluster = 100;
    std::size_t k = 3;
    std::size_t d = 2;
    double spread = 10.0;  // minimum pairwise center distance
    double sigma = 0.1;
    std::uint64_t seed = 0;
};

/// Isotropic Gaussian clusters around seeded random centers that are pairwise at least
/// `spread` apart. Samples are grouped by cluster. Throws ConfigError if no such centers are
/// found within a bounded number of retries, or when k < 2.
std::pair<DataMatrix, Labels> make_blobs(const BlobSpec& spec);

}  // namespace probagg::harness

#endif  // PROBAGG_HARNESS_DATASET_HPP
