#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "controlburn/dataset.hpp"

namespace controlburn {

enum class Criterion { gini, squared_error };

inline constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

struct TreeOptions {
    int max_depth = 1;
    Criterion criterion = Criterion::gini;
    /// Extra impurity charged when a split uses a feature this tree has not split on yet.
    double sparse_cost = 0.0;
    /// Features examined per node; 0 examines all of them.
    Index max_features = 0;
    Index min_samples_leaf = 1;
};

struct TreeNode {
    int feature = -1; ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; ///< leaf prediction; node mean for internal nodes
    Index samples = 0;
    double impurity = 0.0;

    bool is_leaf() const { return feature < 0; }
};

/// Depth-limited CART tree. Rows go left iff x[feature] <= threshold.
class TreeModel {
public:
    std::vector<TreeNode> nodes;
    int depth = 0;
    Index n_features = 0;
    /// Per feature: sum over splits of (node samples / fit samples) * impurity decrease.
    std::vector<double> impurity_decreases;
    std::vector<std::uint8_t> used;

    template <class Row>
    double predict_row(const Row& x) const {
        int at = 0;
        while (!nodes[static_cast<std::size_t>(at)].is_leaf()) {
            const auto& nd = nodes[static_cast<std::size_t>(at)];
            at = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(at)].value;
    }

    Vector predict(const Matrix& features) const {
        if (features.cols() != n_features)
            throw DataError("tree expects " + std::to_string(n_features) + " columns, got " +
                            std::to_string(features.cols()));
        Vector out(features.rows());
        for (Index i = 0; i < features.rows(); ++i) out[i] = predict_row(features.row(i));
        return out;
    }

    std::vector<Index> used_features() const {
        std::vector<Index> out;
        for (std::size_t j = 0; j < used.size(); ++j)
            if (used[j]) out.push_back(static_cast<Index>(j));
        return out;
    }

    Index used_count() const { return std::count(used.begin(), used.end(), std::uint8_t{1}); }
    int split_count() const {
        return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
    }
};

namespace detail {

/// Greedy CART builder over presorted per-feature index arrays. Every node owns the same
/// [begin, end) slice of each feature's order array; splitting stably partitions all of them.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const Vector& targets, std::span<const Index> rows, const TreeOptions& opt, Rng& rng)
        : x_(x), opt_(opt), rng_(rng), rows_(rows.begin(), rows.end()) {
        const auto n = rows_.size();
        y_.resize(n);
        for (std::size_t s = 0; s < n; ++s) y_[s] = targets[rows_[s]];
        p_ = x.cols();
        order_.assign(static_cast<std::size_t>(p_), std::vector<std::int32_t>(n));
        for (Index f = 0; f < p_; ++f) {
            auto& ord = order_[static_cast<std::size_t>(f)];
            std::iota(ord.begin(), ord.end(), 0);
            std::stable_sort(ord.begin(), ord.end(), [&](std::int32_t a, std::int32_t b) {
                return value(a, f) < value(b, f);
            });
        }
        goes_left_.assign(n, 0);
        buffer_.resize(n);
        features_.resize(static_cast<std::size_t>(p_));
        std::iota(features_.begin(), features_.end(), Index{0});
    }

    TreeModel build() {
        model_.n_features = p_;
        model_.impurity_decreases.assign(static_cast<std::size_t>(p_), 0.0);
        model_.used.assign(static_cast<std::size_t>(p_), 0);
        grow(0, static_cast<Index>(rows_.size()), 0);
        return std::move(model_);
    }

private:
    double value(std::int32_t sample, Index f) const { return x_(rows_[static_cast<std::size_t>(sample)], f); }

    struct Best {
        Index feature = -1;
        Index left_count = 0;
        double threshold = 0.0;
        double penalized = std::numeric_limits<double>::infinity();
        double child = 0.0;
    };

    int grow(Index begin, Index end, int depth) {
        const Index n = end - begin;
        const auto& ord0 = order_[0];
        double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (Index i = begin; i < end; ++i) {
            const double v = y_[static_cast<std::size_t>(ord0[static_cast<std::size_t>(i)])];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double mean = sum / static_cast<double>(n);
        double impurity = 0.0;
        if (opt_.criterion == Criterion::gini) {
            impurity = 2.0 * mean * (1.0 - mean);
        } else {
            for (Index i = begin; i < end; ++i) {
                const double d = y_[static_cast<std::size_t>(ord0[static_cast<std::size_t>(i)])] - mean;
                impurity += d * d;
            }
            impurity /= static_cast<double>(n);
        }

        const int id = static_cast<int>(model_.nodes.size());
        model_.nodes.push_back(TreeNode{-1, 0.0, -1, -1, mean, n, impurity});
        model_.depth = std::max(model_.depth, depth);

        const bool pure = lo == hi;
        if (pure || depth >= opt_.max_depth || n < 2 * opt_.min_samples_leaf) return id;

        const Best best = find_split(begin, end, mean);
        if (best.feature < 0) return id;
        const double gain = impurity - best.penalized;
        if (!(gain > 1e-10 * impurity)) return id;

        const auto f = static_cast<std::size_t>(best.feature);
        model_.impurity_decreases[f] +=
            static_cast<double>(n) / static_cast<double>(rows_.size()) * (impurity - best.child);
        model_.used[f] = 1;
        partition(begin, end, best.feature, best.left_count);

        const Index mid = begin + best.left_count;
        const int left = grow(begin, mid, depth + 1);
        const int right = grow(mid, end, depth + 1);
        auto& node = model_.nodes[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(best.feature);
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    Best find_split(Index begin, Index end, double mean) {
        const Index n = end - begin;
        const double nd = static_cast<double>(n);
        std::span<const Index> candidates(features_);
        if (opt_.max_features > 0 && opt_.max_features < p_) {
            for (Index i = 0; i < opt_.max_features; ++i) {
                std::uniform_int_distribution<Index> pick(i, p_ - 1);
                std::swap(features_[static_cast<std::size_t>(i)], features_[static_cast<std::size_t>(pick(rng_))]);
            }
            sampled_.assign(features_.begin(), features_.begin() + opt_.max_features);
            std::sort(sampled_.begin(), sampled_.end());
            candidates = sampled_;
        }

        Best best;
        const Index min_leaf = opt_.min_samples_leaf;
        for (Index f : candidates) {
            const auto& ord = order_[static_cast<std::size_t>(f)];
            const double cost = model_.used[static_cast<std::size_t>(f)] ? 0.0 : opt_.sparse_cost;
            double sum_l = 0.0, sq_l = 0.0, sum_t = 0.0, sq_t = 0.0;
            if (opt_.criterion == Criterion::squared_error) {
                for (Index i = begin; i < end; ++i) {
                    const double d = y_[static_cast<std::size_t>(ord[static_cast<std::size_t>(i)])] - mean;
                    sum_t += d;
                    sq_t += d * d;
                }
            }
            const double pos_t = mean * nd;
            for (Index i = begin; i + 1 < end; ++i) {
                const auto s = ord[static_cast<std::size_t>(i)];
                const double yv = y_[static_cast<std::size_t>(s)];
                if (opt_.criterion == Criterion::gini) {
                    sum_l += yv;
                } else {
                    const double d = yv - mean;
                    sum_l += d;
                    sq_l += d * d;
                }
                const Index nl = i - begin + 1;
                const Index nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double xv = value(s, f);
                const double xn = value(ord[static_cast<std::size_t>(i + 1)], f);
                if (!(xv < xn)) continue;

                const double nld = static_cast<double>(nl), nrd = static_cast<double>(nr);
                double child;
                if (opt_.criterion == Criterion::gini) {
                    const double pl = sum_l / nld, pr = (pos_t - sum_l) / nrd;
                    child = (nld * 2.0 * pl * (1.0 - pl) + nrd * 2.0 * pr * (1.0 - pr)) / nd;
                } else {
                    const double sum_r = sum_t - sum_l, sq_r = sq_t - sq_l;
                    const double el = std::max(0.0, sq_l - sum_l * sum_l / nld);
                    const double er = std::max(0.0, sq_r - sum_r * sum_r / nrd);
                    child = (el + er) / nd;
                }
                const double penalized = child + cost;
                // Relative slack so that splits equal up to summation order count as ties.
                if (best.feature < 0 || penalized < best.penalized * (1.0 - 1e-12)) {
                    double thr = 0.5 * (xv + xn);
                    if (!(thr < xn)) thr = xv;
                    best = Best{f, nl, thr, penalized, child};
                }
            }
        }
        return best;
    }

    void partition(Index begin, Index end, Index split_feature, Index left_count) {
        const auto& split_ord = order_[static_cast<std::size_t>(split_feature)];
        for (Index i = begin; i < end; ++i)
            goes_left_[static_cast<std::size_t>(split_ord[static_cast<std::size_t>(i)])] = i < begin + left_count;
        for (Index f = 0; f < p_; ++f) {
            if (f == split_feature) continue;
            auto& ord = order_[static_cast<std::size_t>(f)];
            Index l = begin, r = 0;
            for (Index i = begin; i < end; ++i) {
                const auto s = ord[static_cast<std::size_t>(i)];
                if (goes_left_[static_cast<std::size_t>(s)])
                    ord[static_cast<std::size_t>(l++)] = s;
                else
                    buffer_[static_cast<std::size_t>(r++)] = s;
            }
            std::copy(buffer_.begin(), buffer_.begin() + r, ord.begin() + l);
        }
    }

    const Matrix& x_;
    const TreeOptions& opt_;
    Rng& rng_;
    std::vector<Index> rows_;
    std::vector<double> y_;
    Index p_ = 0;
    std::vector<std::vector<std::int32_t>> order_;
    std::vector<std::uint8_t> goes_left_;
    std::vector<std::int32_t> buffer_;
    std::vector<Index> features_;
    std::vector<Index> sampled_;
    TreeModel model_;
};

} // namespace detail

/// Fits a tree on the listed rows (repeats allowed, as in a bootstrap bag) of `features`.
inline TreeModel fit_tree(const Matrix& features, const Vector& targets, std::span<const Index> rows,
                          const TreeOptions& options, Rng& rng) {
    if (rows.empty() || features.cols() < 1) throw DataError("cannot fit a tree on empty data");
    if (options.max_depth < 1) throw UsageError("max_depth must be >= 1");
    if (options.sparse_cost < 0.0) throw UsageError("sparse_cost must be >= 0");
    if (options.min_samples_leaf < 1) throw UsageError("min_samples_leaf must be >= 1");
    if (targets.size() != features.rows()) throw DataError("target length does not match row count");
    for (auto r : rows) {
        if (r < 0 || r >= features.rows()) throw DataError("row index out of range");
        const double t = targets[r];
        if (!std::isfinite(t)) throw DataError("non-finite target");
        if (options.criterion == Criterion::gini && t != 0.0 && t != 1.0)
            throw DataError("gini criterion requires 0/1 targets");
    }
    return detail::TreeBuilder(features, targets, rows, options, rng).build();
}

inline TreeModel fit_tree(const Matrix& features, const Vector& targets, const TreeOptions& options, Rng& rng) {
    std::vector<Index> rows(static_cast<std::size_t>(features.rows()));
    std::iota(rows.begin(), rows.end(), Index{0});
    return fit_tree(features, targets, rows, options, rng);
}

inline TreeModel fit_tree(const Dataset& data, const TreeOptions& options, Rng& rng) {
    return fit_tree(data.features, data.labels, options, rng);
}

struct Importances {
    std::vector<double> values;
    bool any_split = false;
};

/// Mean decrease impurity: per-feature mean of accumulated decreases over trees, normalized to sum 1.
template <class Range, class Proj = std::identity>
Importances mdi_importances(const Range& trees, Proj proj = {}) {
    Importances out;
    std::size_t count = 0;
    for (const auto& item : trees) {
        const TreeModel& t = std::invoke(proj, item);
        if (out.values.empty()) out.values.assign(t.impurity_decreases.size(), 0.0);
        for (std::size_t j = 0; j < t.impurity_decreases.size(); ++j) out.values[j] += t.impurity_decreases[j];
        ++count;
    }
    if (count == 0) throw UsageError("importance requires at least one tree");
    const double total = std::accumulate(out.values.begin(), out.values.end(), 0.0);
    out.any_split = total > 0.0;
    if (out.any_split)
        for (auto& v : out.values) v /= total;
    return out;
}

inline Importances mdi_importances(const TreeModel& tree) {
    return mdi_importances(std::span<const TreeModel>(&tree, 1));
}

} // namespace controlburn
