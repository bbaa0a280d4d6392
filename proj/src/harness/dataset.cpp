#include "probagg/harness/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "probagg/geometry.hpp"

namespace probagg::harness {

namespace {

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> cells;
    if (delimiter == ' ') {
        std::size_t pos = 0;
        while (pos < line.size()) {
            auto b = line.find_first_not_of(" \t", pos);
            if (b == std::string_view::npos) break;
            auto e = line.find_first_of(" \t", b);
            if (e == std::string_view::npos) e = line.size();
            cells.push_back(line.substr(b, e - b));
            pos = e;
        }
        return cells;
    }
    std::size_t pos = 0;
    while (true) {
        auto e = line.find(delimiter, pos);
        cells.push_back(trim(line.substr(pos, e == std::string_view::npos ? std::string_view::npos : e - pos)));
        if (e == std::string_view::npos) break;
        pos = e + 1;
    }
    return cells;
}

std::optional<double> parse_number(std::string_view cell) {
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
    return v;
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
    std::vector<std::string_view> lines;
    {
        std::string_view all(text);
        std::size_t pos = 0;
        while (pos <= all.size()) {
            auto e = all.find('\n', pos);
            auto line = all.substr(pos, e == std::string_view::npos ? std::string_view::npos : e - pos);
            if (!trim(line).empty()) lines.push_back(line);
            if (e == std::string_view::npos) break;
            pos = e + 1;
        }
    }
    if (lines.empty()) throw DataError("csv: no data rows");

    char delimiter = options.delimiter;
    if (delimiter == 0) delimiter = lines.front().find(',') != std::string_view::npos ? ',' : ' ';
    if (delimiter == '\t') delimiter = ' ';

    const std::size_t width = split(lines.front(), delimiter).size();
    std::optional<std::size_t> label_col;
    if (options.label_column) {
        int c = *options.label_column;
        int resolved = c < 0 ? static_cast<int>(width) + c : c;
        if (resolved < 0 || static_cast<std::size_t>(resolved) >= width) {
            throw DataError("csv: label column " + std::to_string(c) + " outside a " + std::to_string(width) +
                            "-column table");
        }
        label_col = static_cast<std::size_t>(resolved);
    }
    const std::size_t d = width - (label_col ? 1 : 0);
    if (d == 0) throw DataError("csv: no feature columns");

    bool header = options.header.value_or(false);
    if (!options.header) {
        auto cells = split(lines.front(), delimiter);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (label_col && c == *label_col) continue;
            if (!parse_number(cells[c])) header = true;
        }
    }
    if (header) lines.erase(lines.begin());
    if (lines.empty()) throw DataError("csv: no data rows");

    std::vector<double> values;
    values.reserve(lines.size() * d);
    std::vector<std::string> raw_labels;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        auto cells = split(lines[r], delimiter);
        if (cells.size() != width) {
            throw DataError("csv: row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            if (label_col && c == *label_col) {
                raw_labels.emplace_back(cells[c]);
                continue;
            }
            auto v = parse_number(cells[c]);
            if (!v || !std::isfinite(*v)) {
                throw DataError("csv: non-numeric feature '" + std::string(cells[c]) + "' at row " +
                                std::to_string(r + 1));
            }
            values.push_back(*v);
        }
    }

    Dataset out{DataMatrix(lines.size(), d, std::move(values)), std::nullopt, {}};
    if (label_col) {
        std::vector<std::string> names = raw_labels;
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        bool numeric = std::all_of(names.begin(), names.end(), [](const std::string& s) { return parse_number(s).has_value(); });
        if (numeric) {
            std::stable_sort(names.begin(), names.end(),
                             [](const std::string& a, const std::string& b) { return *parse_number(a) < *parse_number(b); });
        }
        std::map<std::string, int> index;
        for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
        std::vector<int> ids;
        ids.reserve(raw_labels.size());
        for (const auto& s : raw_labels) ids.push_back(index.at(s));
        out.labels = Labels{std::move(ids), names.size()};
        out.label_names = std::move(names);
    }
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), options);
}

void write_csv(const std::filesystem::path& path, const DataMatrix& x, const Labels* labels) {
    if (labels && labels->size() != x.n()) throw DataError("write_csv: label count mismatch");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out.precision(17);
    for (std::size_t i = 0; i < x.n(); ++i) {
        for (std::size_t f = 0; f < x.d(); ++f) {
            if (f) out << ',';
            out << x(i, f);
        }
        if (labels) out << ',' << labels->ids[i];
        out << '\n';
    }
}

std::pair<DataMatrix, Labels> make_blobs(const BlobSpec& spec) {
    if (spec.n_per_cluster < 1 || spec.d < 1) throw ConfigError("make_blobs: counts must be positive");
    if (spec.k < 2) throw ConfigError("make_blobs: need at least 2 clusters");
    if (!(spec.spread >= 0.0) || !(spec.sigma >= 0.0)) throw ConfigError("make_blobs: spread and sigma must be >= 0");
    Rng rng(spec.seed);

    // Box side grows with k so the rejection sampler has room.
    const double side = spec.spread * std::max(2.0, 2.0 * std::pow(static_cast<double>(spec.k), 1.0 / static_cast<double>(spec.d)));
    Matrix centers(spec.k, spec.d);
    constexpr int kMaxRetries = 1000;
    int attempts = 0;
    for (std::size_t c = 0; c < spec.k;) {
        for (double& v : centers.row(c)) v = rng.uniform(0.0, side);
        bool ok = true;
        for (std::size_t o = 0; o < c && ok; ++o) {
            ok = squared_euclidean(centers.row(c), centers.row(o)) >= spec.spread * spec.spread;
        }
        if (ok) {
            ++c;
            attempts = 0;
        } else if (++attempts > kMaxRetries) {
            throw ConfigError("make_blobs: could not place centers with the requested spread");
        }
    }

    const std::size_t n = spec.n_per_cluster * spec.k;
    std::vector<double> values;
    values.reserve(n * spec.d);
    std::vector<int> ids;
    ids.reserve(n);
    for (std::size_t c = 0; c < spec.k; ++c) {
        for (std::size_t s = 0; s < spec.n_per_cluster; ++s) {
            for (std::size_t f = 0; f < spec.d; ++f) values.push_back(centers(c, f) + spec.sigma * rng.normal());
            ids.push_back(static_cast<int>(c));
        }
    }
    return {DataMatrix(n, spec.d, std::move(values)), Labels{std::move(ids), spec.k}};
}

}  // namespace probagg::harness
