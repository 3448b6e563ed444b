#include <gtest/gtest.h>

#include <sstream>

#include "controlburn/serialize.hpp"
#include "controlburn/synthetic.hpp"

using namespace controlburn;
using namespace controlburn::synthetic;

namespace {

const std::vector<std::string> kNames{"a", "b", "c", "d"};

} // namespace

class ForestRoundTrip : public ::testing::TestWithParam<int> {};

TEST_P(ForestRoundTrip, ReloadedForestPredictsBitwiseIdentically) {
    const int seed = GetParam();
    Rng rng(static_cast<std::uint64_t>(seed));
    const bool boosted = seed % 2 == 0;
    const Dataset d = seed % 3 == 0 ? friedman1(150, 6, 1.0, rng) : logistic_signals(150, 2, 3, 2.0, rng);
    GrowOptions opt;
    opt.max_depth = 3;
    const Forest f = boosted ? incremental_depth_bag_boosting(d, opt, rng) : incremental_depth_bagging(d, opt, rng);
    const std::string text = to_json(f).dump();
    const Forest back = forest_from_json(json::parse(text));
    EXPECT_EQ(back.size(), f.size());
    EXPECT_EQ(back.mode, f.mode);
    EXPECT_EQ(back.task, f.task);
    EXPECT_EQ(back.stage_count(), f.stage_count());
    EXPECT_TRUE(back.predict(d.features) == f.predict(d.features));
    for (std::size_t t = 0; t < f.size(); ++t) {
        EXPECT_EQ(back.trees[t].used, f.trees[t].used);
        EXPECT_EQ(back.trees[t].impurity_decreases, f.trees[t].impurity_decreases);
    }
    // Serializing the reloaded forest reproduces the text apart from bag sizes and growth warnings.
    json again = to_json(back), first = json::parse(text);
    again.erase("warnings");
    first.erase("warnings");
    for (auto& t : again["trees"]) t.erase("oob_rows");
    for (auto& t : first["trees"]) t.erase("oob_rows");
    EXPECT_EQ(again.dump(), first.dump());
}

INSTANTIATE_TEST_SUITE_P(Seeds, ForestRoundTrip, ::testing::Range(1, 9));

TEST(TreeJson, RejectsMalformedTrees) {
    json leaf = {{"depth", 0},
                 {"n_features", 2},
                 {"nodes", json::array({{{"feature", -1}, {"threshold", 0.0}, {"left", -1}, {"right", -1},
                                          {"value", 0.5}, {"samples", 3}, {"impurity", 0.0}}})},
                 {"impurity_decreases", json::array({0.0, 0.0})},
                 {"used", json::array({0, 0})}};
    EXPECT_NO_THROW(tree_from_json(leaf));
    json bad = leaf;
    bad["nodes"][0]["feature"] = 0;
    bad["nodes"][0]["left"] = 7;
    bad["nodes"][0]["right"] = 8;
    EXPECT_THROW(tree_from_json(bad), DataError);
    bad = leaf;
    bad.erase("used");
    EXPECT_THROW(tree_from_json(bad), DataError);
    bad = leaf;
    bad["nodes"] = json::array();
    EXPECT_THROW(tree_from_json(bad), DataError);
    EXPECT_THROW(forest_from_json(json{{"mode", "weird"}}), DataError);
}

TEST(TraceJson, OneObjectPerLineWithStageFields) {
    std::vector<TraceEvent> trace;
    trace.push_back({TraceEvent::Kind::tree, 0, 1, 1, 0.5});
    trace.push_back({TraceEvent::Kind::stage, -1, 1, 1, 0.4, 0.01, 90, 10, true});
    std::ostringstream out;
    write_trace(out, trace);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    const json first = json::parse(line);
    EXPECT_EQ(first["event"], "tree");
    EXPECT_FALSE(first.contains("delta"));
    std::getline(in, line);
    const json second = json::parse(line);
    EXPECT_EQ(second["event"], "stage");
    EXPECT_EQ(second["delta"], 0.01);
    EXPECT_EQ(second["skipped_rows"], 10);
    EXPECT_EQ(second["accepted"], true);
    EXPECT_FALSE(std::getline(in, line));
}

TEST(CostJson, UnitIsDefault) {
    EXPECT_EQ(cost_spec_from_json(json::object(), kNames).mode, CostSpec::Mode::unit);
}

TEST(CostJson, PerFeatureByNameWithDefault) {
    const CostSpec c = cost_spec_from_json(json{{"mode", "per_feature"}, {"costs", {{"b", 4.0}}}, {"default", 2.0}},
                                           kNames);
    EXPECT_EQ(c.feature_costs, (std::vector<double>{2.0, 4.0, 2.0, 2.0}));
}

TEST(CostJson, PerFeatureArray) {
    const CostSpec c = cost_spec_from_json(json{{"mode", "per_feature"}, {"costs", json::array({1, 2, 3, 4})}}, kNames);
    EXPECT_EQ(c.feature_costs, (std::vector<double>{1, 2, 3, 4}));
    EXPECT_THROW(cost_spec_from_json(json{{"mode", "per_feature"}, {"costs", json::array({1, 2})}}, kNames), UsageError);
}

TEST(CostJson, GroupsFillUnlistedWithSingletons) {
    const json j = {{"mode", "grouped"}, {"groups", json::array({{{"features", json::array({"a", 2})}, {"cost", 5.0}}})}};
    const CostSpec c = cost_spec_from_json(j, kNames);
    ASSERT_EQ(c.groups.size(), 3u);
    EXPECT_EQ(c.groups[0], (std::vector<Index>{0, 2}));
    EXPECT_EQ(c.group_costs, (std::vector<double>{5.0, 1.0, 1.0}));
    std::vector<std::uint8_t> used{1, 0, 1, 1};
    EXPECT_EQ(c.tree_cost(used), 6.0);
}

TEST(CostJson, RejectsUnknownFeaturesModesAndOverlaps) {
    EXPECT_THROW(cost_spec_from_json(json{{"mode", "per_feature"}, {"costs", {{"zz", 1.0}}}}, kNames), UsageError);
    EXPECT_THROW(cost_spec_from_json(json{{"mode", "fancy"}}, kNames), UsageError);
    const json overlap = {{"mode", "grouped"},
                          {"groups", json::array({{{"features", json::array({"a"})}, {"cost", 1.0}}, {{"features", json::array({0})}, {"cost", 1.0}}})}};
    EXPECT_THROW(cost_spec_from_json(overlap, kNames), UsageError);
    EXPECT_THROW(cost_spec_from_json(json{{"mode", "grouped"}}, kNames), UsageError);
}

TEST(SolutionJson, CarriesWeightsCostsAndNames) {
    PruneProblem prob;
    prob.A = Matrix::Identity(2, 2);
    prob.G = UsageMatrix::Zero(4, 2);
    prob.G(3, 0) = 1;
    prob.u = Vector::Ones(2);
    prob.y = Vector::Ones(2);
    prob.lambda = 0.25;
    const Solution s = solve(prob);
    const json j = to_json(s, prob, kNames);
    EXPECT_EQ(j["lambda"], 0.25);
    EXPECT_EQ(j["selected"], json::array({"d"}));
    EXPECT_EQ(j["weights"].size(), 2u);
    EXPECT_EQ(j["costs"], json::array({1.0, 1.0}));
    EXPECT_EQ(j["certified"], true);
}

TEST(ComparisonCsv, HeaderAndTwoRowsPerK) {
    ComparisonReport rep;
    rep.folds = 2;
    rep.rows.push_back({3, {0.9, 0.01, 2}, {0.8, 0.02, 2}, {0.1, 0.0, 2}});
    std::ostringstream out;
    write_comparison_csv(out, rep);
    EXPECT_EQ(out.str(), "k,method,mean_auc,std_auc,folds\n3,controlburn,0.9,0.01,2\n3,baseline,0.8,0.02,2\n");
}
