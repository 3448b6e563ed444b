#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "controlburn/select.hpp"
#include "controlburn/synthetic.hpp"

namespace controlburn {

/// Rank-based (Mann-Whitney) ROC AUC; tied scores share the average rank.
inline double roc_auc(const Vector& scores, const Vector& labels) {
    if (scores.size() != labels.size()) throw UsageError("scores and labels differ in length");
    const Index n = scores.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    Index n_pos = 0;
    for (Index i = 0; i < n;) {
        Index j = i;
        while (j < n && scores[order[static_cast<std::size_t>(j)]] == scores[order[static_cast<std::size_t>(i)]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // ranks i+1..j
        for (Index t = i; t < j; ++t)
            if (labels[order[static_cast<std::size_t>(t)]] == 1.0) {
                pos_rank_sum += avg_rank;
                ++n_pos;
            }
        i = j;
    }
    const Index n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("ROC AUC needs both classes present");
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
    int count = 0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
    MeanStd out;
    out.count = static_cast<int>(v.size());
    if (v.empty()) return out;
    out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// cross-validated comparison against the MDI baseline

struct FoldOutcome {
    int fold = 0;
    std::map<int, std::vector<Index>> controlburn_selected;
    std::map<int, std::vector<Index>> baseline_selected;
    std::map<int, double> controlburn_auc;
    std::map<int, double> baseline_auc;
};

struct ComparisonRow {
    int k = 0;
    MeanStd controlburn;
    MeanStd baseline;
    /// Mean over folds where both methods realized k of AUC(ControlBurn) - AUC(baseline).
    MeanStd difference;
};

struct ComparisonReport {
    int folds = 0;
    std::vector<std::string> names;
    std::vector<ComparisonRow> rows;
    std::vector<FoldOutcome> per_fold;
};

struct CompareOptions {
    int folds = 5;
    std::vector<int> ks;
    ControlBurnOptions controlburn;
    ForestOptions refit;
};

namespace detail {

inline double refit_auc(const Dataset& train, const Dataset& test, const std::vector<Index>& cols,
                        const ForestOptions& opt, std::uint64_t seed) {
    const Forest model = refit_on_columns(train, cols, opt, seed);
    return roc_auc(predict_on_columns(model, cols, test.features), test.labels);
}

} // namespace detail

/// Per fold: run ControlBurn and the MDI baseline on the training split, refit a random forest on
/// each selected set and score ROC AUC on the held-out split. Both methods share refit seeds, so an
/// identical feature set yields an identical score.
inline ComparisonReport compare_cv(const Dataset& data, const CompareOptions& opt, Rng& rng) {
    if (data.task != Task::classification) throw UsageError("comparison reports ROC AUC; classification only");
    if (opt.ks.empty()) throw UsageError("at least one k is required");
    const int k_cap = static_cast<int>(std::min<Index>(data.cols(), opt.controlburn.k_max));
    for (int k : opt.ks)
        if (k < 1 || k > k_cap) throw UsageError("k = " + std::to_string(k) + " outside [1, " + std::to_string(k_cap) + "]");

    const FoldPlan plan = make_folds(data, opt.folds, rng);
    ComparisonReport report;
    report.folds = opt.folds;
    report.names = data.names;

    for (int f = 0; f < opt.folds; ++f) {
        const std::uint64_t fold_seed = next_seed(rng);
        const auto train_rows = plan.train_rows(f);
        const auto test_rows = plan.test_rows(f);
        const Dataset train = subset_rows(data, train_rows);
        const Dataset test = subset_rows(data, test_rows);
        FoldOutcome out;
        out.fold = f;
        try {
            ControlBurnOptions cb = opt.controlburn;
            cb.k_targets = opt.ks;
            cb.refit = false;
            Rng cb_rng(derive_seed(fold_seed, 1));
            const SelectionResult sel = run_controlburn(train, cb, cb_rng);

            Rng base_rng(derive_seed(fold_seed, 2));
            const auto ranking = mdi_ranking(fit_random_forest(train, opt.refit, base_rng));

            for (int k : opt.ks) {
                const std::uint64_t refit_seed = derive_seed(fold_seed, 100 + static_cast<std::uint64_t>(k));
                std::vector<Index> base(ranking.begin(), ranking.begin() + k);
                std::sort(base.begin(), base.end());
                out.baseline_selected[k] = base;
                out.baseline_auc[k] = detail::refit_auc(train, test, base, opt.refit, refit_seed);
                auto rec = sel.records.find(k);
                if (rec == sel.records.end()) continue;
                const auto& cols = rec->second.features;
                out.controlburn_selected[k] = cols;
                out.controlburn_auc[k] =
                    cols == base ? out.baseline_auc[k] : detail::refit_auc(train, test, cols, opt.refit, refit_seed);
            }
        } catch (const Error& e) {
            throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what());
        }
        report.per_fold.push_back(std::move(out));
    }

    for (int k : opt.ks) {
        std::vector<double> cb, base, diff;
        for (const auto& fo : report.per_fold) {
            auto b = fo.baseline_auc.find(k);
            auto c = fo.controlburn_auc.find(k);
            if (b != fo.baseline_auc.end()) base.push_back(b->second);
            if (c != fo.controlburn_auc.end()) cb.push_back(c->second);
            if (b != fo.baseline_auc.end() && c != fo.controlburn_auc.end()) diff.push_back(c->second - b->second);
        }
        report.rows.push_back({k, mean_std(cb), mean_std(base), mean_std(diff)});
    }
    return report;
}

// ---------------------------------------------------------------------------
// uninformative continuous feature

struct RankPoint {
    int k = 0;
    double lambda = 0.0;
    bool selected = false;
    /// 1-based MDI rank of the injected column inside the refit model; empty when not selected.
    std::optional<int> rank;
};

struct RankTrace {
    std::string column;
    Index column_index = -1;
    /// Rank of the injected column in a random forest on all features.
    int full_rank = 0;
    Index total_features = 0;
    std::vector<RankPoint> points;
};

struct RankExperimentOptions {
    ControlBurnOptions controlburn;
    std::string column = "uninformative_uniform";
};

/// Appends a U(0,1) column and follows its MDI rank along the ControlBurn selection path.
inline RankTrace uninformative_rank_experiment(const Dataset& data, const RankExperimentOptions& opt, Rng& rng) {
    if (data.task != Task::classification) throw UsageError("the rank experiment expects classification data");
    const Dataset aug = synthetic::append_uniform_column(data, opt.column, rng);
    RankTrace trace;
    trace.column = opt.column;
    trace.column_index = aug.cols() - 1;
    trace.total_features = aug.cols();

    {
        Rng rf_rng(next_seed(rng));
        const auto rank = mdi_ranking(fit_random_forest(aug, opt.controlburn.refit_forest, rf_rng));
        trace.full_rank = static_cast<int>(std::find(rank.begin(), rank.end(), trace.column_index) - rank.begin()) + 1;
    }

    ControlBurnOptions cb = opt.controlburn;
    cb.refit = true;
    const SelectionResult sel = run_controlburn(aug, cb, rng);
    for (auto it = sel.records.rbegin(); it != sel.records.rend(); ++it) {
        const auto& rec = it->second;
        RankPoint pt;
        pt.k = rec.k;
        pt.lambda = rec.lambda;
        const auto pos = std::find(rec.features.begin(), rec.features.end(), trace.column_index);
        pt.selected = pos != rec.features.end();
        if (pt.selected && rec.refit) {
            const Index local = pos - rec.features.begin();
            const auto rank = mdi_ranking(*rec.refit);
            pt.rank = static_cast<int>(std::find(rank.begin(), rank.end(), local) - rank.begin()) + 1;
        }
        trace.points.push_back(pt);
    }
    return trace;
}

} // namespace controlburn
