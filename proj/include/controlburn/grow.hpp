#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "controlburn/dataset.hpp"
#include "controlburn/tree.hpp"

namespace controlburn {

// ---------------------------------------------------------------------------
// losses

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(-t)) without overflow.
inline double log1p_exp_neg(double t) { return t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline constexpr double kProbClip = 1e-6;

/// Mean logistic loss of margins `z` against 0/1 labels.
inline double logistic_loss(const Vector& y, const Vector& z) {
    double s = 0.0;
    for (Index i = 0; i < y.size(); ++i) s += log1p_exp_neg((2.0 * y[i] - 1.0) * z[i]);
    return s / static_cast<double>(y.size());
}

/// Mean log loss of probabilities clipped to [1e-6, 1 - 1e-6].
inline double log_loss(const Vector& y, const Vector& prob) {
    double s = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        const double p = std::clamp(prob[i], kProbClip, 1.0 - kProbClip);
        s -= y[i] == 1.0 ? std::log(p) : std::log(1.0 - p);
    }
    return s / static_cast<double>(y.size());
}

inline double mean_squared_error(const Vector& y, const Vector& pred) {
    return (y - pred).squaredNorm() / static_cast<double>(y.size());
}

// ---------------------------------------------------------------------------
// convergence monitor

/// Training-loss convergence test: the last `window` losses lie within a tube of width `epsilon`.
struct ConvergenceMonitor {
    int window = 5;
    double epsilon = 1e-3;
    std::vector<double> history;

    bool converged() const {
        if (static_cast<int>(history.size()) < window) return false;
        auto tail = std::span(history).last(static_cast<std::size_t>(window));
        auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
        return *hi - *lo <= epsilon;
    }

    bool update(double loss) {
        if (!std::isfinite(loss)) throw NumericalError("training loss is not finite");
        history.push_back(loss);
        return converged();
    }

    void reset() { history.clear(); }
};

// ---------------------------------------------------------------------------
// forest

enum class GrowMode { bagged, bag_boosted };

inline std::string to_string(GrowMode mode) { return mode == GrowMode::bagged ? "bagged" : "bag_boosted"; }

struct TreeMeta {
    int depth_stage = 1;
    int boost_stage = 0; ///< 1-based boosting stage; 0 for bagged forests
    Bag bag;
};

/// One audit record: a tree was added, or a boosting stage closed.
struct TraceEvent {
    enum class Kind { tree, stage } kind = Kind::tree;
    int tree_index = -1;
    int depth = 0;
    int stage = 0;
    double train_loss = 0.0;
    double delta = 0.0;
    Index usable_rows = 0;
    /// Rows out-of-bag for no tree of the stage; excluded from delta.
    Index skipped_rows = 0;
    bool accepted = true;
};

/// Counts model-training events so fit-count claims can be checked.
struct FitCounter {
    std::atomic<long> grow_phases{0};
    std::atomic<long> ensemble_fits{0};
    std::atomic<long> tree_fits{0};
};

struct Forest {
    std::vector<TreeModel> trees;
    std::vector<TreeMeta> meta;
    /// bagged: base rate / mean (reporting only). bag_boosted: initial margin or mean.
    double offset = 0.0;
    GrowMode mode = GrowMode::bagged;
    Task task = Task::classification;
    double learning_rate = 1.0;
    Index n_features = 0;
    std::vector<TraceEvent> trace;
    std::vector<std::string> warnings;

    std::size_t size() const { return trees.size(); }
    bool empty() const { return trees.empty(); }

    int stage_count() const {
        int s = 0;
        for (const auto& m : meta) s = std::max(s, m.boost_stage);
        return s;
    }

    /// Raw ensemble output: bagged = mean tree output; bag_boosted = offset + lr * sum of stage means.
    /// `max_stage` limits bag-boosted forests to their first stages (0 = all).
    Vector decision(const Matrix& x, int max_stage = 0) const {
        if (x.cols() != n_features)
            throw DataError("forest expects " + std::to_string(n_features) + " columns, got " +
                            std::to_string(x.cols()));
        if (mode == GrowMode::bagged) {
            if (trees.empty()) return Vector::Constant(x.rows(), offset);
            Vector sum = Vector::Zero(x.rows());
            for (const auto& t : trees) sum += t.predict(x);
            return sum / static_cast<double>(trees.size());
        }
        Vector z = Vector::Constant(x.rows(), offset);
        const int stages = stage_count();
        std::vector<Vector> stage_sum(static_cast<std::size_t>(stages) + 1, Vector::Zero(x.rows()));
        std::vector<int> stage_n(static_cast<std::size_t>(stages) + 1, 0);
        for (std::size_t i = 0; i < trees.size(); ++i) {
            const int s = meta[i].boost_stage;
            if (max_stage > 0 && s > max_stage) continue;
            stage_sum[static_cast<std::size_t>(s)] += trees[i].predict(x);
            ++stage_n[static_cast<std::size_t>(s)];
        }
        for (int s = 0; s <= stages; ++s)
            if (stage_n[static_cast<std::size_t>(s)] > 0)
                z += learning_rate * stage_sum[static_cast<std::size_t>(s)] / stage_n[static_cast<std::size_t>(s)];
        return z;
    }

    /// Class-1 probability for classification, predicted value for regression.
    Vector predict(const Matrix& x, int max_stage = 0) const {
        Vector z = decision(x, max_stage);
        if (task == Task::classification && mode == GrowMode::bag_boosted) z = z.unaryExpr(&sigmoid);
        return z;
    }
};

inline Importances mdi_importances(const Forest& forest) { return mdi_importances(forest.trees); }

/// Training loss used by the growers: log loss / logistic loss for classification, MSE for regression.
inline double forest_training_loss(Task task, GrowMode mode, const Vector& y, const Vector& output) {
    if (task == Task::regression) return mean_squared_error(y, output);
    return mode == GrowMode::bagged ? log_loss(y, output) : logistic_loss(y, output);
}

// ---------------------------------------------------------------------------
// growers

struct GrowOptions {
    /// Depth cap for incremental depth bagging.
    int max_depth = 5;
    int monitor_window = 5;
    double monitor_epsilon = 1e-3;
    int max_trees = 500;
    double learning_rate = 1.0;
    double sparse_cost = 0.0;
    Index max_features = 0;
    /// Bag-boosting: score δ with absolute error instead of the task loss.
    bool absolute_error_delta = false;
    /// Bag-boosting diagnostics: keep every stage regardless of δ (requires max_stages > 0).
    bool stop_on_negative_delta = true;
    int max_stages = 0;
    FitCounter* counter = nullptr;
};

/// Negative loss gradient at margins `z`: y - sigmoid(z) for logistic loss, y - z for squared error
/// (the squared-error gradient is taken on (y - z)^2 / 2).
inline Vector pseudo_residuals(Task task, const Vector& y, const Vector& z) {
    if (task == Task::classification) return y - z.unaryExpr(&sigmoid);
    return y - z;
}

struct OobImprovement {
    double delta = 0.0;
    Index usable_rows = 0;
    Index skipped_rows = 0;
};

enum class ErrorMetric { task_loss, absolute };

namespace detail {

inline double row_error(Task task, ErrorMetric metric, double y, double z) {
    if (metric == ErrorMetric::absolute)
        return std::abs(y - (task == Task::classification ? sigmoid(z) : z));
    if (task == Task::classification) return log1p_exp_neg((2.0 * y - 1.0) * z);
    return (y - z) * (y - z);
}

} // namespace detail

/// Mean OOB improvement from adding a stage: each row uses only the stage trees whose bag left it out.
/// `base` is the current ensemble output F(x) (margin for classification), `tree_predictions[t]` the
/// output of stage tree t on every row, and the stage enters as base + lr * mean(OOB tree outputs).
inline OobImprovement oob_improvement(const Vector& base, std::span<const Vector> tree_predictions,
                                      std::span<const Bag> bags, const Vector& y, Task task, double learning_rate,
                                      ErrorMetric metric = ErrorMetric::task_loss) {
    if (tree_predictions.size() != bags.size()) throw UsageError("one bag per stage tree is required");
    const Index m = y.size();
    Vector sum = Vector::Zero(m);
    std::vector<int> count(static_cast<std::size_t>(m), 0);
    for (std::size_t t = 0; t < bags.size(); ++t)
        for (auto i : bags[t].oob) {
            sum[i] += tree_predictions[t][i];
            ++count[static_cast<std::size_t>(i)];
        }
    OobImprovement out;
    double total = 0.0;
    for (Index i = 0; i < m; ++i) {
        const int c = count[static_cast<std::size_t>(i)];
        if (c == 0) {
            ++out.skipped_rows;
            continue;
        }
        const double before = detail::row_error(task, metric, y[i], base[i]);
        const double after = detail::row_error(task, metric, y[i], base[i] + learning_rate * sum[i] / c);
        total += before - after;
        ++out.usable_rows;
    }
    if (out.usable_rows == 0) throw NumericalError("no row is out-of-bag for any tree of the stage");
    out.delta = total / static_cast<double>(out.usable_rows);
    return out;
}

/// Forest/stage convenience overload: the stage is scored against `forest`'s current output on `data`.
inline OobImprovement oob_improvement(const Forest& forest, std::span<const TreeModel> stage,
                                      std::span<const Bag> bags, const Dataset& data,
                                      ErrorMetric metric = ErrorMetric::task_loss) {
    std::vector<Vector> preds;
    preds.reserve(stage.size());
    for (const auto& t : stage) preds.push_back(t.predict(data.features));
    return oob_improvement(forest.decision(data.features), preds, bags, data.labels, data.task, forest.learning_rate,
                           metric);
}

namespace detail {

inline void check_grow_options(const GrowOptions& opt) {
    if (opt.monitor_window < 1) throw UsageError("monitor window must be >= 1");
    if (!(opt.monitor_epsilon > 0.0)) throw UsageError("monitor epsilon must be > 0");
    if (opt.max_trees < 1) throw UsageError("max_trees must be >= 1");
    if (!(opt.learning_rate > 0.0)) throw UsageError("learning rate must be > 0");
}

inline double base_rate(const Vector& y) { return y.mean(); }

} // namespace detail

/// Incremental depth bagging: bag depth-d trees until the training loss of the whole forest
/// settles, then move on to depth d + 1, up to `max_depth`.
inline Forest incremental_depth_bagging(const Dataset& data, const GrowOptions& opt, Rng& rng) {
    if (opt.max_depth < 1) throw UsageError("max_depth must be >= 1");
    detail::check_grow_options(opt);
    data.validate();
    if (opt.counter) ++opt.counter->grow_phases;

    Forest forest;
    forest.mode = GrowMode::bagged;
    forest.task = data.task;
    forest.n_features = data.cols();
    forest.offset = detail::base_rate(data.labels);

    const Index m = data.rows();
    TreeOptions topt;
    topt.criterion = data.task == Task::classification ? Criterion::gini : Criterion::squared_error;
    topt.sparse_cost = opt.sparse_cost;
    topt.max_features = opt.max_features;

    ConvergenceMonitor monitor{opt.monitor_window, opt.monitor_epsilon, {}};
    Vector sum = Vector::Zero(m);
    int depth = 1;
    while (depth <= opt.max_depth) {
        if (static_cast<int>(forest.trees.size()) >= opt.max_trees) {
            forest.warnings.push_back("tree cap of " + std::to_string(opt.max_trees) + " reached at depth " +
                                      std::to_string(depth));
            break;
        }
        Bag bag = sample_bag(m, rng);
        topt.max_depth = depth;
        TreeModel tree = fit_tree(data.features, data.labels, bag.in_bag, topt, rng);
        if (opt.counter) ++opt.counter->tree_fits;
        sum += tree.predict(data.features);
        forest.trees.push_back(std::move(tree));
        forest.meta.push_back(TreeMeta{depth, 0, std::move(bag)});

        const Vector avg = sum / static_cast<double>(forest.trees.size());
        const double loss = forest_training_loss(data.task, GrowMode::bagged, data.labels, avg);
        forest.trace.push_back({TraceEvent::Kind::tree, static_cast<int>(forest.trees.size()) - 1, depth, 0, loss});
        if (monitor.update(loss)) {
            ++depth;
            monitor.reset();
        }
    }
    return forest;
}

/// Incremental depth bag-boosting. Each stage bags depth-d regression trees on the current
/// pseudo-residuals until the training loss of F + stage settles; the stage is scored by its
/// OOB improvement δ. The first stage is always kept; growth stops at the first later stage with
/// δ < 0 (that stage is discarded) or once δ is not positive.
inline Forest incremental_depth_bag_boosting(const Dataset& data, const GrowOptions& opt, Rng& rng) {
    detail::check_grow_options(opt);
    data.validate();
    if (!opt.stop_on_negative_delta && opt.max_stages < 1)
        throw UsageError("diagnostic growth without δ stopping needs max_stages");
    if (opt.counter) ++opt.counter->grow_phases;

    Forest forest;
    forest.mode = GrowMode::bag_boosted;
    forest.task = data.task;
    forest.n_features = data.cols();
    forest.learning_rate = opt.learning_rate;

    const Index m = data.rows();
    const Vector& y = data.labels;
    if (data.task == Task::classification) {
        const double rate = detail::base_rate(y);
        if (rate <= 0.0 || rate >= 1.0) {
            forest.offset = logit(std::clamp(rate, kProbClip, 1.0 - kProbClip));
            forest.warnings.push_back("all labels belong to one class; returning offset-only forest");
            return forest;
        }
        forest.offset = logit(rate);
    } else {
        forest.offset = y.mean();
    }

    const ErrorMetric metric = opt.absolute_error_delta ? ErrorMetric::absolute : ErrorMetric::task_loss;
    auto residuals = [&](const Vector& z) { return pseudo_residuals(data.task, y, z); };

    TreeOptions topt;
    topt.criterion = Criterion::squared_error;
    topt.sparse_cost = opt.sparse_cost;
    topt.max_features = opt.max_features;

    Vector z = Vector::Constant(m, forest.offset);
    Vector e = residuals(z);
    ConvergenceMonitor monitor{opt.monitor_window, opt.monitor_epsilon, {}};

    for (int stage = 1;; ++stage) {
        const int depth = stage;
        std::vector<TreeModel> stage_trees;
        std::vector<Bag> stage_bags;
        std::vector<Vector> stage_preds;
        Vector stage_sum = Vector::Zero(m);
        monitor.reset();
        bool capped = false;
        topt.max_depth = depth;
        while (true) {
            if (static_cast<int>(forest.trees.size() + stage_trees.size()) >= opt.max_trees) {
                capped = true;
                break;
            }
            Bag bag = sample_bag(m, rng);
            TreeModel tree = fit_tree(data.features, e, bag.in_bag, topt, rng);
            if (opt.counter) ++opt.counter->tree_fits;
            Vector pred = tree.predict(data.features);
            stage_sum += pred;
            stage_trees.push_back(std::move(tree));
            stage_bags.push_back(std::move(bag));
            stage_preds.push_back(std::move(pred));
            const Vector candidate = z + opt.learning_rate * stage_sum / static_cast<double>(stage_trees.size());
            const double loss = forest_training_loss(data.task, GrowMode::bag_boosted, y, candidate);
            forest.trace.push_back({TraceEvent::Kind::tree,
                                    static_cast<int>(forest.trees.size() + stage_trees.size()) - 1, depth, stage,
                                    loss});
            if (monitor.update(loss)) break;
        }
        if (capped)
            forest.warnings.push_back("tree cap of " + std::to_string(opt.max_trees) + " reached in stage " +
                                      std::to_string(stage));
        if (stage_trees.empty()) break;

        OobImprovement imp;
        bool scored = true;
        try {
            imp = oob_improvement(z, stage_preds, stage_bags, y, data.task, opt.learning_rate, metric);
        } catch (const NumericalError&) {
            scored = false;
        }
        if (!scored)
            forest.warnings.push_back("stage " + std::to_string(stage) + ": no row is out-of-bag for any stage tree");

        const bool negative = scored && imp.delta < 0.0;
        const bool accept = stage == 1 || !opt.stop_on_negative_delta || !negative;
        const double final_loss = forest.trace.back().train_loss;
        forest.trace.push_back({TraceEvent::Kind::stage, -1, depth, stage, final_loss, imp.delta, imp.usable_rows,
                                imp.skipped_rows, accept});
        if (!accept) break;

        z += opt.learning_rate * stage_sum / static_cast<double>(stage_trees.size());
        e = residuals(z);
        for (std::size_t t = 0; t < stage_trees.size(); ++t) {
            forest.trees.push_back(std::move(stage_trees[t]));
            forest.meta.push_back(TreeMeta{depth, stage, std::move(stage_bags[t])});
        }

        if (capped) break;
        if (opt.max_stages > 0 && stage >= opt.max_stages) break;
        if (opt.stop_on_negative_delta && !(scored && imp.delta > 0.0)) break;
    }
    return forest;
}

/// Plain random forest: bagged trees with per-node feature subsampling.
struct ForestOptions {
    int trees = 100;
    int max_depth = kUnlimitedDepth;
    /// 0 picks sqrt(p) for classification and p/3 for regression.
    Index max_features = 0;
    FitCounter* counter = nullptr;
};

inline Index default_max_features(Task task, Index p) {
    const double v = task == Task::classification ? std::sqrt(static_cast<double>(p)) : static_cast<double>(p) / 3.0;
    return std::clamp<Index>(static_cast<Index>(std::floor(v)), 1, p);
}

inline Forest fit_random_forest(const Dataset& data, const ForestOptions& opt, Rng& rng) {
    if (opt.trees < 1) throw UsageError("random forest needs at least one tree");
    data.validate();
    if (opt.counter) ++opt.counter->ensemble_fits;
    Forest forest;
    forest.mode = GrowMode::bagged;
    forest.task = data.task;
    forest.n_features = data.cols();
    forest.offset = data.labels.mean();
    TreeOptions topt;
    topt.max_depth = opt.max_depth;
    topt.criterion = data.task == Task::classification ? Criterion::gini : Criterion::squared_error;
    topt.max_features = opt.max_features > 0 ? std::min(opt.max_features, data.cols())
                                             : default_max_features(data.task, data.cols());
    for (int t = 0; t < opt.trees; ++t) {
        Bag bag = sample_bag(data.rows(), rng);
        forest.trees.push_back(fit_tree(data.features, data.labels, bag.in_bag, topt, rng));
        if (opt.counter) ++opt.counter->tree_fits;
        forest.meta.push_back(TreeMeta{forest.trees.back().depth, 0, std::move(bag)});
    }
    return forest;
}

} // namespace controlburn
