#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"

namespace fs = std::filesystem;
using controlburn::json;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "controlburn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = controlburn::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("controlburn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string make_signals(const std::string& name = "data.csv") {
        const auto r = run({"synth", "--generate", "signals", "--rows", "300", "--informative", "3", "--noise", "3",
                            "--seed", "4", "-o", path(name)});
        EXPECT_EQ(r.code, 0) << r.err;
        return path(name);
    }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, SynthDuplicateAddsCopiesPerColumn) {
    const std::string base = make_signals();
    const auto r = run({"synth", "--input", base, "--duplicate", "0,1,2", "--copies", "5", "--sigma", "0.1", "-o",
                        path("dup.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path("dup.csv"));
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), 6 + 15); // p + 15 features, plus the label
    EXPECT_NE(header.find("sig0_dup5"), std::string::npos);
    EXPECT_TRUE(fs::exists(path("dup.manifest.json")));
}

TEST_F(Cli, SelectKReturnsThatManyNamedFeatures) {
    const std::string data = make_signals();
    const auto r = run({"select", "--input", data, "--k", "3", "--refit-trees", "10", "-o", path("sel.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("sel.json")));
    ASSERT_EQ(j["records"].size(), 1u);
    const auto& rec = j["records"][0];
    EXPECT_EQ(rec["k"], 3);
    EXPECT_EQ(rec["features"].size(), 3u);
    EXPECT_TRUE(rec["refit_train_auc"].is_number());
}

TEST_F(Cli, SameSeedGivesByteIdenticalOutputs) {
    const std::string data = make_signals();
    for (const char* name : {"a.json", "b.json"}) {
        const auto r = run({"select", "--input", data, "--path", "--kmax", "4", "--refit-trees", "10", "--seed", "9",
                            "-o", path(name)});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
    const json ma = json::parse(slurp(path("a.manifest.json")));
    EXPECT_EQ(ma["subcommand"], "select");
    EXPECT_EQ(ma["seed"], 9);
}

TEST_F(Cli, ReplayReproducesRecordedRun) {
    const std::string data = make_signals();
    auto r = run({"grow", "--input", data, "--grower", "bag", "--dmax", "2", "-o", path("forest.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string first = slurp(path("forest.json"));
    const std::string trace = slurp(path("forest.trace.jsonl"));
    fs::remove(path("forest.json"));
    r = run({"replay", path("forest.manifest.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("forest.json")), first);
    EXPECT_EQ(slurp(path("forest.trace.jsonl")), trace);
    EXPECT_NE(trace.find("\"event\":\"tree\""), std::string::npos);
}

TEST_F(Cli, GrowThenScoreForest) {
    const std::string data = make_signals();
    ASSERT_EQ(run({"grow", "--input", data, "-o", path("f.json")}).code, 0);
    const auto r = run({"eval", "--experiment", "auc", "--forest", path("f.json"), "--input", data, "-o",
                        path("auc.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const double auc = json::parse(slurp(path("auc.json")))["auc"].get<double>();
    EXPECT_GT(auc, 0.5);
    EXPECT_LE(auc, 1.0);
}

TEST_F(Cli, MissingLabelColumnIsDataError) {
    const std::string data = make_signals();
    const auto r = run({"grow", "--input", data, "--label", "target", "-o", path("f.json")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("target"), std::string::npos);
}

TEST_F(Cli, MissingFileIsDataError) {
    EXPECT_EQ(run({"grow", "--input", path("absent.csv"), "-o", path("f.json")}).code, 2);
}

TEST_F(Cli, UsageErrorsExitOne) {
    const std::string data = make_signals();
    EXPECT_EQ(run({"compare", "--input", data, "-o", path("c.json")}).code, 1);
    EXPECT_EQ(run({"select", "--input", data, "-o", path("s.json")}).code, 1);
    EXPECT_EQ(run({"select", "--input", data, "--k", "2", "--lambda", "0.1", "-o", path("s.json")}).code, 1);
    EXPECT_EQ(run({"select", "--input", data, "--k", "40", "-o", path("s.json")}).code, 1);
    EXPECT_EQ(run({"grow", "--input", data, "--threads", "0", "-o", path("g.json")}).code, 1);
    EXPECT_EQ(run({"grow", "--bogus"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"eval", "--experiment", "nope", "-o", path("e.json")}).code, 1);
}

TEST_F(Cli, HelpAndVersionExitZero) {
    EXPECT_EQ(run({"--help"}).code, 0);
    const auto v = run({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_FALSE(v.out.empty());
}

TEST_F(Cli, CompareWritesJsonAndCsv) {
    const std::string data = make_signals();
    const auto r = run({"compare", "--input", data, "--k-range", "1-2", "--folds", "2", "--refit-trees", "10",
                        "--kmax", "3", "-o", path("cmp.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("cmp.json")));
    EXPECT_EQ(j["rows"].size(), 2u);
    const std::string csv = slurp(path("cmp.csv"));
    EXPECT_EQ(csv.rfind("k,method,mean_auc,std_auc,folds\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(Cli, FitCountsExperimentReportsBothMethods) {
    const auto r = run({"eval", "--experiment", "fit-counts", "--p", "8", "--k", "3", "--rows", "200",
                        "--refit-trees", "5", "-o", path("fc.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("fc.json")));
    EXPECT_EQ(j["expected"]["controlburn"], 1);
    EXPECT_EQ(j["expected"]["rfe"], 5);
    EXPECT_EQ(j["counted"], j["expected"]);
}

TEST_F(Cli, CostFileSelectsByName) {
    const std::string data = make_signals();
    {
        std::ofstream costs(path("costs.json"));
        costs << R"({"mode": "per_feature", "costs": {"sig0": 50.0}, "default": 1.0})";
    }
    const auto r = run({"select", "--input", data, "--k", "2", "--costs", path("costs.json"), "--refit-trees", "5",
                        "-o", path("s.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("s.json")));
    for (const auto& f : j["records"][0]["features"]) EXPECT_NE(f, "sig0");
    std::ofstream(path("bad.json")) << R"({"mode": "per_feature", "costs": {"nope": 1}})";
    EXPECT_EQ(run({"select", "--input", data, "--k", "2", "--costs", path("bad.json"), "-o", path("s.json")}).code, 1);
}
