#include <gtest/gtest.h>

#include <random>

#include "controlburn/eval.hpp"
#include "controlburn/synthetic.hpp"

using namespace controlburn;
using namespace controlburn::synthetic;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// Pairwise definition: P(score_pos > score_neg) + 0.5 P(tie).
double pairwise_auc(const Vector& s, const Vector& y) {
    double num = 0.0, den = 0.0;
    for (Index i = 0; i < s.size(); ++i)
        for (Index j = 0; j < s.size(); ++j)
            if (y[i] == 1.0 && y[j] == 0.0) {
                den += 1.0;
                num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return num / den;
}

CompareOptions small_compare(std::vector<int> ks) {
    CompareOptions opt;
    opt.folds = 3;
    opt.ks = std::move(ks);
    opt.refit.trees = 20;
    opt.controlburn.k_max = 4;
    return opt;
}

} // namespace

TEST(Auc, WorkedExamples) {
    EXPECT_EQ(roc_auc(vec({0.1, 0.9}), vec({0, 1})), 1.0);
    EXPECT_EQ(roc_auc(vec({0.9, 0.1}), vec({0, 1})), 0.0);
    EXPECT_EQ(roc_auc(vec({0.4, 0.4, 0.4}), vec({0, 1, 1})), 0.5);
}

TEST(Auc, MatchesPairwiseCountWithTies) {
    Rng rng(1);
    std::uniform_int_distribution<int> coarse(0, 5);
    for (int rep = 0; rep < 50; ++rep) {
        const Index n = 5 + rep;
        Vector s(n), y(n);
        for (Index i = 0; i < n; ++i) {
            s[i] = coarse(rng);
            y[i] = i % 3 == 0;
        }
        EXPECT_NEAR(roc_auc(s, y), pairwise_auc(s, y), 1e-12);
    }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
    Rng rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    Vector s(200), y(200);
    for (Index i = 0; i < 200; ++i) {
        y[i] = i % 2;
        s[i] = n(rng) + y[i];
    }
    const double base = roc_auc(s, y);
    EXPECT_DOUBLE_EQ(roc_auc(s.array().exp().matrix(), y), base);
    EXPECT_DOUBLE_EQ(roc_auc((3.0 * s.array() - 7.0).matrix(), y), base);
    EXPECT_DOUBLE_EQ(roc_auc(s.unaryExpr([](double v) { return std::atan(v); }), y), base);
}

TEST(Auc, RejectsSingleClassAndLengthMismatch) {
    EXPECT_THROW(roc_auc(vec({0.1, 0.2}), vec({1, 1})), DataError);
    EXPECT_THROW(roc_auc(vec({0.1}), vec({1, 0})), UsageError);
}

TEST(MeanStd, SampleStandardDeviation) {
    const MeanStd a = mean_std({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(a.mean, 2.5);
    EXPECT_NEAR(a.std, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_EQ(a.count, 4);
    const MeanStd one = mean_std({7.0});
    EXPECT_EQ(one.std, 0.0);
    EXPECT_EQ(mean_std({}).count, 0);
}

TEST(CompareCv, DeterministicAndWellFormed) {
    Rng data_rng(3);
    const Dataset d = logistic_signals(300, 3, 3, 2.0, data_rng);
    const CompareOptions opt = small_compare({1, 3});
    Rng a(11), b(11);
    const ComparisonReport ra = compare_cv(d, opt, a);
    const ComparisonReport rb = compare_cv(d, opt, b);
    ASSERT_EQ(ra.rows.size(), 2u);
    EXPECT_EQ(ra.folds, 3);
    EXPECT_EQ(ra.per_fold.size(), 3u);
    for (std::size_t r = 0; r < ra.rows.size(); ++r) {
        const auto& row = ra.rows[r];
        EXPECT_EQ(row.baseline.count, 3);
        EXPECT_GE(row.baseline.mean, 0.0);
        EXPECT_LE(row.baseline.mean, 1.0);
        EXPECT_GE(row.baseline.std, 0.0);
        EXPECT_EQ(row.controlburn.mean, rb.rows[r].controlburn.mean);
        EXPECT_EQ(row.baseline.mean, rb.rows[r].baseline.mean);
    }
    for (const auto& fo : ra.per_fold)
        for (const auto& [k, cols] : fo.baseline_selected) EXPECT_EQ(static_cast<int>(cols.size()), k);
}

TEST(CompareCv, IdenticalSelectionsScoreIdentically) {
    Rng data_rng(4);
    const Dataset d = logistic_signals(300, 2, 0, 3.0, data_rng);
    // With only two columns, k = 2 forces both methods onto the same set.
    CompareOptions opt = small_compare({2});
    Rng rng(5);
    const ComparisonReport rep = compare_cv(d, opt, rng);
    for (const auto& fo : rep.per_fold) {
        if (!fo.controlburn_auc.count(2)) continue;
        EXPECT_EQ(fo.controlburn_auc.at(2), fo.baseline_auc.at(2));
    }
    if (rep.rows[0].difference.count > 0) EXPECT_EQ(rep.rows[0].difference.mean, 0.0);
}

TEST(CompareCv, RejectsBadRequests) {
    Rng data_rng(6);
    Dataset d = logistic_signals(100, 2, 2, 2.0, data_rng);
    Rng rng(1);
    EXPECT_THROW(compare_cv(d, small_compare({}), rng), UsageError);
    EXPECT_THROW(compare_cv(d, small_compare({9}), rng), UsageError);
    d.task = Task::regression;
    EXPECT_THROW(compare_cv(d, small_compare({1}), rng), UsageError);
}

TEST(RankExperiment, TracksInjectedColumn) {
    Rng data_rng(7);
    const Dataset d = logistic_signals(400, 3, 2, 3.0, data_rng);
    RankExperimentOptions opt;
    opt.controlburn.k_max = 6;
    opt.controlburn.refit_forest.trees = 20;
    Rng rng(3);
    const RankTrace trace = uninformative_rank_experiment(d, opt, rng);
    EXPECT_EQ(trace.column_index, 5);
    EXPECT_EQ(trace.total_features, 6);
    EXPECT_GE(trace.full_rank, 1);
    EXPECT_LE(trace.full_rank, 6);
    ASSERT_FALSE(trace.points.empty());
    for (const auto& pt : trace.points) {
        EXPECT_EQ(pt.rank.has_value(), pt.selected);
        if (pt.rank) {
            EXPECT_GE(*pt.rank, 1);
            EXPECT_LE(*pt.rank, pt.k);
        }
    }
    // Points run from the densest selection to the sparsest.
    for (std::size_t i = 1; i < trace.points.size(); ++i) EXPECT_LT(trace.points[i].k, trace.points[i - 1].k);
}
