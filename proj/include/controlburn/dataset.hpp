#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "controlburn/error.hpp"
#include "controlburn/random.hpp"

namespace controlburn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::ptrdiff_t;

enum class Task { classification, regression };

inline std::string to_string(Task task) {
    return task == Task::classification ? "classification" : "regression";
}

inline Task parse_task(std::string_view s) {
    if (s == "classification" || s == "binary") return Task::classification;
    if (s == "regression") return Task::regression;
    throw UsageError("unknown task '" + std::string(s) + "' (expected classification|regression)");
}

/// Feature matrix (rows = observations), response and column names.
struct Dataset {
    Matrix features;
    Vector labels;
    std::vector<std::string> names;
    Task task = Task::classification;

    Index rows() const { return features.rows(); }
    Index cols() const { return features.cols(); }

    /// Throws DataError when the dataset breaks its invariants.
    void validate() const {
        if (features.rows() < 1 || features.cols() < 1)
            throw DataError("dataset must have at least one row and one feature column");
        if (labels.size() != features.rows())
            throw DataError("label count does not match row count");
        if (static_cast<Index>(names.size()) != features.cols())
            throw DataError("feature name count does not match column count");
        if (!features.allFinite() || !labels.allFinite())
            throw DataError("dataset contains non-finite values");
        std::unordered_set<std::string> seen;
        for (const auto& n : names)
            if (!seen.insert(n).second) throw DataError("duplicate feature name '" + n + "'");
        if (task == Task::classification)
            for (Index i = 0; i < labels.size(); ++i)
                if (labels[i] != 0.0 && labels[i] != 1.0)
                    throw DataError("classification label at row " + std::to_string(i + 1) +
                                    " is not 0 or 1");
    }

    Index find_column(std::string_view name) const {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return static_cast<Index>(j);
        return -1;
    }
};

/// Rows `rows` of `data` (duplicates allowed), all columns.
inline Dataset subset_rows(const Dataset& data, std::span<const Index> rows) {
    Dataset out;
    out.task = data.task;
    out.names = data.names;
    out.features.resize(static_cast<Index>(rows.size()), data.cols());
    out.labels.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Index>(i)) = data.features.row(rows[i]);
        out.labels[static_cast<Index>(i)] = data.labels[rows[i]];
    }
    return out;
}

/// Keeps only `columns` (in the given order).
inline Dataset select_columns(const Dataset& data, std::span<const Index> columns) {
    Dataset out;
    out.task = data.task;
    out.labels = data.labels;
    out.features.resize(data.rows(), static_cast<Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] < 0 || columns[j] >= data.cols())
            throw UsageError("column index " + std::to_string(columns[j]) + " out of range");
        out.features.col(static_cast<Index>(j)) = data.features.col(columns[j]);
        out.names.push_back(data.names[static_cast<std::size_t>(columns[j])]);
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

inline std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return cells;
}

inline std::optional<double> parse_number(std::string_view cell) {
    cell = trim(cell);
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

} // namespace detail

/// Parses CSV text with a header row. The label column is removed from the features.
inline Dataset parse_csv(std::istream& in, std::string_view label_column, Task task) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV is empty (header row required)");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3); // BOM
    std::vector<std::string> header;
    for (auto cell : detail::split_line(line)) header.push_back(detail::unquote(cell));

    std::ptrdiff_t label_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == label_column) label_idx = static_cast<std::ptrdiff_t>(j);
    if (label_idx < 0) throw DataError("label column '" + std::string(label_column) + "' not found in header");
    if (header.size() < 2) throw DataError("CSV needs at least one feature column besides the label");

    std::vector<double> values;
    std::vector<double> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        ++row;
        auto cells = detail::split_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            auto v = detail::parse_number(cells[j]);
            if (!v) {
                const bool missing = detail::trim(cells[j]).empty();
                throw DataError(std::string(missing ? "missing" : "non-numeric") + " value '" +
                                std::string(detail::trim(cells[j])) + "' at row " + std::to_string(row) +
                                ", column '" + header[j] + "'");
            }
            if (static_cast<std::ptrdiff_t>(j) == label_idx)
                labels.push_back(*v);
            else
                values.push_back(*v);
        }
    }
    if (row == 0) throw DataError("CSV has no data rows");

    Dataset data;
    data.task = task;
    const auto m = static_cast<Index>(row);
    const auto p = static_cast<Index>(header.size() - 1);
    data.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), m, p);
    data.labels = Eigen::Map<const Vector>(labels.data(), m);
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<std::ptrdiff_t>(j) != label_idx) data.names.push_back(header[j]);
    data.validate();
    return data;
}

inline Dataset load_csv(const std::string& path, std::string_view label_column, Task task) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return parse_csv(in, label_column, task);
}

/// Writes features then the label column; doubles use shortest round-trip formatting.
inline void write_csv(std::ostream& out, const Dataset& data, std::string_view label_column = "y") {
    for (const auto& n : data.names) out << n << ',';
    out << label_column << '\n';
    char buf[32];
    auto put = [&](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, ptr - buf);
    };
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index j = 0; j < data.cols(); ++j) {
            put(data.features(i, j));
            out << ',';
        }
        put(data.labels[i]);
        out << '\n';
    }
}

/// Bootstrap resample: `in_bag` has m draws with replacement, `oob` the rows never drawn (sorted).
struct Bag {
    std::vector<Index> in_bag;
    std::vector<Index> oob;

    /// Membership mask of length m.
    std::vector<bool> oob_mask(Index m) const {
        std::vector<bool> mask(static_cast<std::size_t>(m), false);
        for (auto i : oob) mask[static_cast<std::size_t>(i)] = true;
        return mask;
    }
};

inline Bag sample_bag(Index m, Rng& rng) {
    if (m < 1) throw UsageError("cannot sample a bag from zero rows");
    Bag bag;
    bag.in_bag.resize(static_cast<std::size_t>(m));
    std::vector<bool> drawn(static_cast<std::size_t>(m), false);
    std::uniform_int_distribution<Index> pick(0, m - 1);
    for (auto& r : bag.in_bag) {
        r = pick(rng);
        drawn[static_cast<std::size_t>(r)] = true;
    }
    for (Index i = 0; i < m; ++i)
        if (!drawn[static_cast<std::size_t>(i)]) bag.oob.push_back(i);
    return bag;
}

/// Appends `copies` noisy replicas of each target column. Replica i of column "x" is named "x_dup<i>".
inline Dataset duplicate_features(const Dataset& data, std::span<const Index> targets, int copies, double sigma,
                                  Rng& rng) {
    if (copies < 1) throw UsageError("copies must be >= 1");
    if (!(sigma >= 0.0)) throw UsageError("sigma must be >= 0");
    for (auto t : targets)
        if (t < 0 || t >= data.cols())
            throw UsageError("duplicate target index " + std::to_string(t) + " out of range");

    Dataset out = data;
    const Index added = static_cast<Index>(targets.size()) * copies;
    out.features.conservativeResize(Eigen::NoChange, data.cols() + added);
    std::unordered_set<std::string> names(data.names.begin(), data.names.end());
    std::normal_distribution<double> noise(0.0, 1.0);
    Index col = data.cols();
    for (auto t : targets) {
        for (int c = 1; c <= copies; ++c, ++col) {
            std::string name = data.names[static_cast<std::size_t>(t)] + "_dup" + std::to_string(c);
            if (!names.insert(name).second) throw DataError("duplicate feature name collision: '" + name + "'");
            out.names.push_back(std::move(name));
            for (Index i = 0; i < data.rows(); ++i)
                out.features(i, col) = data.features(i, t) + (sigma > 0.0 ? sigma * noise(rng) : 0.0);
        }
    }
    return out;
}

struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;

    std::vector<Index> test_rows(int fold) const {
        std::vector<Index> rows;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] == fold) rows.push_back(static_cast<Index>(i));
        return rows;
    }
    std::vector<Index> train_rows(int fold) const {
        std::vector<Index> rows;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] != fold) rows.push_back(static_cast<Index>(i));
        return rows;
    }
};

/// k-fold assignment. Classification folds are stratified: rows are shuffled within each class,
/// the classes are laid end to end and dealt round-robin, so both per-class and total fold sizes
/// differ by at most one.
inline FoldPlan make_folds(const Dataset& data, int k, Rng& rng) {
    if (k < 2) throw UsageError("fold count must be >= 2");
    const Index m = data.rows();
    if (m < k) throw DataError("fewer rows than folds");

    std::vector<Index> order;
    if (data.task == Task::classification) {
        std::vector<Index> cls[2];
        for (Index i = 0; i < m; ++i) cls[data.labels[i] == 1.0 ? 1 : 0].push_back(i);
        for (auto& c : cls) {
            if (!c.empty() && static_cast<Index>(c.size()) < k)
                throw DataError("class too small to stratify into " + std::to_string(k) + " folds");
            std::shuffle(c.begin(), c.end(), rng);
            order.insert(order.end(), c.begin(), c.end());
        }
    } else {
        order.resize(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
    }
    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(static_cast<std::size_t>(m), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        plan.assignments[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return plan;
}

} // namespace controlburn
