#include <gtest/gtest.h>

#include <random>

#include "controlburn/select.hpp"
#include "controlburn/synthetic.hpp"

using namespace controlburn;
using namespace controlburn::synthetic;

namespace {

// y depends on column 0 only; the remaining columns are noise.
Dataset single_driver(Index m, Index noise, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dataset d;
    d.features.resize(m, noise + 1);
    d.labels.resize(m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j <= noise; ++j) d.features(i, j) = u(rng);
        d.labels[i] = (d.features(i, 0) > 0.5) != (u(rng) < 0.05);
    }
    d.names.push_back("driver");
    for (Index j = 0; j < noise; ++j) d.names.push_back("noise" + std::to_string(j));
    return d;
}

ControlBurnOptions quick_options() {
    ControlBurnOptions opt;
    opt.refit_forest.trees = 20;
    return opt;
}

} // namespace

TEST(Bisection, FindsEveryCountOfAStaircase) {
    // k(lambda) = number of thresholds above lambda, so each k in 1..6 holds on an interval.
    const std::vector<double> thresholds{3.0, 1.0, 0.4, 0.1, 0.03, 0.002};
    auto count = [&](double lam) {
        return static_cast<int>(std::count_if(thresholds.begin(), thresholds.end(), [&](double t) { return t > lam; }));
    };
    const BisectionPath path = bisect_lambda(count, 6);
    EXPECT_TRUE(path.unreachable.empty());
    EXPECT_FALSE(path.budget_exhausted);
    ASSERT_EQ(path.lambda_for_k.size(), 6u);
    for (const auto& [k, lam] : path.lambda_for_k) EXPECT_EQ(count(lam), k);
    // Doubling from 1 passes 2 (k = 1) and 4 (k = 0).
    EXPECT_EQ(path.evaluations[0].lambda, 1.0);
    EXPECT_EQ(path.evaluations[2].lambda, 4.0);
    EXPECT_EQ(path.evaluations[2].k, 0);
}

TEST(Bisection, JumpMarksSkippedCountsUnreachable) {
    auto count = [](double lam) { return lam >= 0.5 ? 0 : 3; };
    const BisectionPath path = bisect_lambda(count, 4);
    EXPECT_EQ(path.unreachable, (std::vector<int>{1, 2, 4}));
    ASSERT_EQ(path.lambda_for_k.count(3), 1u);
    EXPECT_LT(path.lambda_for_k.at(3), 0.5);
    EXPECT_LE(path.evaluations.size(), 200u);
    // The bracket around the jump narrows to relative width 1e-12 before giving up on k = 1.
    double lo = 0.0, hi = 1.0;
    for (const auto& e : path.evaluations) {
        if (e.k == 0) hi = std::min(hi, e.lambda);
        if (e.k == 3) lo = std::max(lo, e.lambda);
    }
    EXPECT_LE(hi - lo, 1e-12 * hi);
}

TEST(Bisection, NothingSelectedAtAnyLambda) {
    const BisectionPath path = bisect_lambda([](double) { return 0; }, 3);
    EXPECT_EQ(path.unreachable, (std::vector<int>{1, 2, 3}));
    EXPECT_TRUE(path.lambda_for_k.empty());
}

TEST(Bisection, BudgetStopsEndlessDoubling) {
    BisectionOptions opt;
    opt.budget = 25;
    const BisectionPath path = bisect_lambda([](double) { return 2; }, 3, opt);
    EXPECT_TRUE(path.budget_exhausted);
    EXPECT_EQ(path.evaluations.size(), 25u);
}

TEST(Bisection, BudgetExhaustionMidSearchMarksRemainingTargets) {
    BisectionOptions opt;
    opt.budget = 6;
    auto count = [](double lam) { return lam >= 0.5 ? 0 : 3; };
    const BisectionPath path = bisect_lambda(count, 3, opt);
    EXPECT_TRUE(path.budget_exhausted);
    EXPECT_EQ(path.unreachable, (std::vector<int>{1, 2, 3}));
}

TEST(ControlBurn, SingleDriverIsTheOnlyFeatureAtKOne) {
    Rng data_rng(21);
    const Dataset d = single_driver(400, 5, data_rng);
    ControlBurnOptions opt = quick_options();
    opt.k_targets = {1};
    Rng rng(1);
    const SelectionResult res = run_controlburn(d, opt, rng);
    ASSERT_EQ(res.records.count(1), 1u);
    const auto& rec = res.records.at(1);
    EXPECT_EQ(rec.features, std::vector<Index>{0});
    EXPECT_TRUE(rec.solution.certified);
    ASSERT_TRUE(rec.refit.has_value());
    EXPECT_EQ(rec.refit->n_features, 1);
    EXPECT_EQ(rec.refit->size(), 20u);
}

TEST(ControlBurn, PathRecordsHitTheirSparsity) {
    Rng data_rng(22);
    const Dataset d = logistic_signals(400, 4, 4, 2.0, data_rng);
    ControlBurnOptions opt = quick_options();
    opt.k_max = 8;
    opt.refit = false;
    Rng rng(2);
    const SelectionResult res = run_controlburn(d, opt, rng);
    EXPECT_FALSE(res.records.empty());
    for (const auto& [k, rec] : res.records) {
        EXPECT_EQ(static_cast<int>(rec.features.size()), k);
        EXPECT_FALSE(rec.refit.has_value());
    }
    std::set<int> seen;
    for (const auto& [k, rec] : res.records) seen.insert(k);
    for (int k : res.unreachable) seen.insert(k);
    EXPECT_EQ(seen.size(), 8u);
    // Larger lambda never gives a larger record k.
    for (auto a = res.records.begin(); a != res.records.end(); ++a)
        for (auto b = std::next(a); b != res.records.end(); ++b) EXPECT_GE(a->second.lambda, b->second.lambda);
}

TEST(ControlBurn, SameSeedSameSelection) {
    Rng data_rng(23);
    const Dataset d = logistic_signals(300, 3, 3, 2.0, data_rng);
    ControlBurnOptions opt = quick_options();
    opt.k_max = 4;
    Rng a(5), b(5);
    const SelectionResult ra = run_controlburn(d, opt, a);
    const SelectionResult rb = run_controlburn(d, opt, b);
    ASSERT_EQ(ra.records.size(), rb.records.size());
    for (const auto& [k, rec] : ra.records) {
        EXPECT_EQ(rec.features, rb.records.at(k).features);
        EXPECT_EQ(rec.lambda, rb.records.at(k).lambda);
        EXPECT_TRUE(rec.refit->predict(select_columns(d, rec.features).features) ==
                    rb.records.at(k).refit->predict(select_columns(d, rec.features).features));
    }
}

TEST(ControlBurn, FixedLambdaSolvesOnce) {
    Rng data_rng(24);
    const Dataset d = friedman1(300, 8, 1.0, data_rng);
    ControlBurnOptions opt = quick_options();
    opt.lambda = 0.05;
    Rng rng(3);
    const SelectionResult res = run_controlburn(d, opt, rng);
    ASSERT_EQ(res.path.size(), 1u);
    ASSERT_EQ(res.records.size(), 1u);
    const auto& rec = res.records.begin()->second;
    EXPECT_EQ(rec.lambda, 0.05);
    EXPECT_EQ(static_cast<int>(rec.features.size()), rec.k);
}

TEST(ControlBurn, GroupedCostsChargeGroupOnce) {
    Rng data_rng(25);
    Dataset d = logistic_signals(300, 2, 2, 2.0, data_rng);
    ControlBurnOptions opt = quick_options();
    opt.costs = CostSpec::grouped({{0, 1}, {2}, {3}}, {1.0, 1.0, 1.0});
    opt.lambda = 0.0;
    opt.refit = false;
    Rng rng(4);
    const SelectionResult res = run_controlburn(d, opt, rng);
    const PruneProblem prob = build_problem(res.forest, d, opt.costs, LossKind::logistic);
    for (Index i = 0; i < prob.trees(); ++i) EXPECT_LE(prob.u[i], 3.0);
}

TEST(ControlBurn, RejectsOutOfRangeTargets) {
    Rng data_rng(26);
    const Dataset d = logistic_signals(100, 2, 1, 2.0, data_rng);
    ControlBurnOptions opt = quick_options();
    opt.k_targets = {4};
    Rng rng(1);
    EXPECT_THROW(run_controlburn(d, opt, rng), UsageError);
    opt.k_targets = {0};
    EXPECT_THROW(run_controlburn(d, opt, rng), UsageError);
}

TEST(FitCounts, OneGrowthVersusOneRefitPerDroppedFeature) {
    const FitCounts c = fit_count_comparison(100, 10);
    EXPECT_EQ(c.controlburn, 1);
    EXPECT_EQ(c.rfe, 90);
    EXPECT_THROW(fit_count_comparison(5, 6), UsageError);
}

TEST(FitCounts, CountersAgreeWithFormula) {
    Rng data_rng(27);
    const Dataset d = binary_signals(300, 2, 6, 3.0, data_rng);
    FitCounter rfe_counter;
    ForestOptions fo;
    fo.trees = 10;
    fo.counter = &rfe_counter;
    Rng rng(1);
    const auto kept = rfe_select(d, 3, fo, rng);
    EXPECT_EQ(kept.size(), 3u);
    EXPECT_EQ(rfe_counter.ensemble_fits.load(), fit_count_comparison(8, 3).rfe);

    FitCounter cb_counter;
    ControlBurnOptions opt = quick_options();
    opt.k_targets = {3};
    opt.refit = false;
    opt.counter = &cb_counter;
    run_controlburn(d, opt, rng);
    EXPECT_EQ(cb_counter.grow_phases.load(), fit_count_comparison(8, 3).controlburn);
    EXPECT_EQ(cb_counter.ensemble_fits.load(), 0);
}

TEST(Baseline, MdiPicksInformativeColumns) {
    Rng data_rng(28);
    const Dataset d = logistic_signals(500, 3, 7, 3.0, data_rng);
    ForestOptions fo;
    fo.trees = 50;
    Rng rng(2);
    auto top = baseline_mdi_select(d, 3, fo, rng);
    std::sort(top.begin(), top.end());
    EXPECT_EQ(top, (std::vector<Index>{0, 1, 2}));
    EXPECT_THROW(baseline_mdi_select(d, 0, fo, rng), UsageError);
}

TEST(Baseline, RankingBreaksTiesByIndex) {
    Forest f;
    TreeModel t;
    t.impurity_decreases = {0.1, 0.3, 0.1, 0.0};
    f.trees.push_back(t);
    EXPECT_EQ(mdi_ranking(f), (std::vector<Index>{1, 0, 2, 3}));
}

TEST(Grower, ParsesNames) {
    EXPECT_EQ(parse_grower("bag"), Grower::bagging);
    EXPECT_EQ(parse_grower("bagboost"), Grower::bag_boosting);
    EXPECT_THROW(parse_grower("boost"), UsageError);
}
