#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "controlburn.hpp"

namespace controlburn::cli {

#ifndef CONTROLBURN_VERSION
#define CONTROLBURN_VERSION "unknown"
#endif

inline constexpr const char* kVersion = CONTROLBURN_VERSION;

/// Everything a subcommand may read from the command line.
struct RunConfig {
    std::string subcommand;
    std::string input;
    std::string label = "y";
    std::string task = "auto";
    std::string grower = "bagboost";
    int dmax = 5;
    int monitor_n = 5;
    double monitor_eps = 1e-3;
    double sparse_cost = 0.0;
    std::string costs;
    std::optional<double> lambda;
    std::optional<int> k;
    bool path = false;
    int kmax = 10;
    Index sketch_rows = 0;
    int folds = 5;
    std::string k_range;
    std::string synth_duplicate;
    std::string duplicate;
    int copies = 5;
    double sigma = 0.1;
    std::string generate;
    Index rows = 2000;
    Index informative = 3;
    Index noise = 7;
    double coef = 3.0;
    std::string experiment = "rank";
    std::string forest;
    Index fit_p = 50;
    int refit_trees = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

inline int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + s + "' is not an integer");
    }
}

/// "3" | "1,2,5" | "1-10" | "1-4,8"
inline std::vector<int> parse_k_range(const std::string& s) {
    std::vector<int> ks;
    for (const auto& part : split(s, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            ks.push_back(parse_int(part, "--k-range"));
            continue;
        }
        const int lo = parse_int(part.substr(0, dash), "--k-range");
        const int hi = parse_int(part.substr(dash + 1), "--k-range");
        if (lo > hi) throw UsageError("--k-range: empty range '" + part + "'");
        for (int k = lo; k <= hi; ++k) ks.push_back(k);
    }
    if (ks.empty()) throw UsageError("--k-range is empty");
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

inline Task resolve_task(const std::string& task, const Vector& labels) {
    if (task != "auto") return parse_task(task);
    for (Index i = 0; i < labels.size(); ++i)
        if (labels[i] != 0.0 && labels[i] != 1.0) return Task::regression;
    return Task::classification;
}

inline Dataset load_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw UsageError("--input is required");
    std::ifstream in(cfg.input);
    if (!in) throw DataError("cannot open input file '" + cfg.input + "'");
    // Parse as regression first so that "auto" can inspect the labels.
    Dataset d = parse_csv(in, cfg.label, Task::regression);
    d.task = resolve_task(cfg.task, d.labels);
    d.validate();
    return d;
}

inline std::vector<Index> resolve_columns(const std::string& list, const Dataset& d) {
    std::vector<Index> out;
    for (const auto& item : split(list, ',')) {
        const bool numeric = !item.empty() && std::all_of(item.begin(), item.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        Index j = -1;
        if (numeric) {
            j = parse_int(item, "column index");
            if (j >= d.cols()) throw UsageError("column index " + item + " out of range (p = " + std::to_string(d.cols()) + ")");
        } else {
            j = d.find_column(item);
            if (j < 0) throw UsageError("unknown feature column '" + item + "'");
        }
        out.push_back(j);
    }
    if (out.empty()) throw UsageError("empty column list");
    return out;
}

inline GrowOptions grow_options(const RunConfig& cfg) {
    if (cfg.dmax < 1) throw UsageError("--dmax must be >= 1");
    if (cfg.monitor_n < 1) throw UsageError("--monitor-n must be >= 1");
    if (!(cfg.monitor_eps > 0.0)) throw UsageError("--monitor-eps must be > 0");
    if (!(cfg.sparse_cost >= 0.0)) throw UsageError("--sparse-cost must be >= 0");
    GrowOptions g;
    g.max_depth = cfg.dmax;
    g.monitor_window = cfg.monitor_n;
    g.monitor_epsilon = cfg.monitor_eps;
    g.sparse_cost = cfg.sparse_cost;
    return g;
}

inline ControlBurnOptions controlburn_options(const RunConfig& cfg, const Dataset& data) {
    ControlBurnOptions o;
    o.grower = parse_grower(cfg.grower);
    o.grow = grow_options(cfg);
    if (cfg.kmax < 1) throw UsageError("--kmax must be >= 1");
    o.k_max = cfg.kmax;
    o.sketch_rows = cfg.sketch_rows;
    o.refit_forest.trees = cfg.refit_trees;
    if (!cfg.costs.empty()) {
        std::ifstream in(cfg.costs);
        if (!in) throw UsageError("cannot open cost file '" + cfg.costs + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw UsageError("cost file '" + cfg.costs + "' is not valid JSON: " + e.what());
        }
        o.costs = cost_spec_from_json(j, data.names);
    }
    return o;
}

/// Duplicates the `top` features with the largest random-forest MDI, `copies` times each.
inline Dataset semi_synthetic(const Dataset& data, const std::string& spec, double sigma, Rng& rng) {
    const auto x = spec.find('x');
    if (x == std::string::npos) throw UsageError("--synth-duplicate expects <features>x<copies>, e.g. 3x5");
    const int top = parse_int(spec.substr(0, x), "--synth-duplicate");
    const int copies = parse_int(spec.substr(x + 1), "--synth-duplicate");
    if (top < 1 || top > data.cols()) throw UsageError("--synth-duplicate: feature count out of range");
    Rng rf_rng(next_seed(rng));
    auto rank = mdi_ranking(fit_random_forest(data, {}, rf_rng));
    rank.resize(static_cast<std::size_t>(top));
    std::sort(rank.begin(), rank.end());
    return duplicate_features(data, rank, copies, sigma, rng);
}

inline std::string sibling(const std::string& output, const std::string& suffix) {
    std::filesystem::path p(output);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
    if (!out) throw DataError("failed writing '" + path + "'");
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline void write_manifest(const RunConfig& cfg, const std::vector<std::string>& args,
                           const std::vector<std::string>& outputs, const std::vector<std::string>& warnings) {
    json config = {{"input", cfg.input},   {"label", cfg.label},       {"task", cfg.task},
                   {"grower", cfg.grower}, {"dmax", cfg.dmax},         {"monitor_n", cfg.monitor_n},
                   {"monitor_eps", cfg.monitor_eps}, {"sparse_cost", cfg.sparse_cost}, {"costs", cfg.costs},
                   {"kmax", cfg.kmax},     {"sketch_rows", cfg.sketch_rows}, {"folds", cfg.folds},
                   {"threads", cfg.threads}};
    config["lambda"] = cfg.lambda ? json(*cfg.lambda) : json(nullptr);
    config["k"] = cfg.k ? json(*cfg.k) : json(nullptr);
    config["path"] = cfg.path;
    config["k_range"] = cfg.k_range;
    json m = {{"tool", "controlburn"},
              {"version", kVersion},
              {"subcommand", cfg.subcommand},
              {"seed", cfg.seed},
              {"args", args},
              {"config", std::move(config)},
              {"outputs", outputs},
              {"warnings", warnings}};
    write_json(sibling(cfg.output, ".manifest.json"), m);
}

inline void warn_all(std::ostream& err, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

} // namespace detail

// ---------------------------------------------------------------------------
// subcommands

inline std::vector<std::string> cmd_grow(const RunConfig& cfg, std::vector<std::string>& warnings) {
    const Dataset data = detail::load_input(cfg);
    Rng rng(cfg.seed);
    const Forest forest = grow_forest(data, parse_grower(cfg.grower), detail::grow_options(cfg), rng);
    warnings = forest.warnings;
    json out = to_json(forest);
    out["feature_names"] = data.names;
    detail::write_json(cfg.output, out);
    const std::string trace_path = detail::sibling(cfg.output, ".trace.jsonl");
    std::ostringstream trace;
    write_trace(trace, forest.trace);
    detail::write_text(trace_path, trace.str());
    return {cfg.output, trace_path};
}

inline std::vector<std::string> cmd_select(const RunConfig& cfg, std::vector<std::string>& warnings) {
    const int modes = (cfg.lambda ? 1 : 0) + (cfg.k ? 1 : 0) + (cfg.path ? 1 : 0);
    if (modes != 1) throw UsageError("select needs exactly one of --lambda, --k, --path");
    const Dataset data = detail::load_input(cfg);
    ControlBurnOptions opt = detail::controlburn_options(cfg, data);
    if (cfg.lambda) {
        if (!(*cfg.lambda >= 0.0)) throw UsageError("--lambda must be >= 0");
        opt.lambda = *cfg.lambda;
    }
    if (cfg.k) {
        const int cap = static_cast<int>(std::min<Index>(data.cols(), cfg.kmax));
        if (*cfg.k < 1 || *cfg.k > cap)
            throw UsageError("--k must lie in [1, " + std::to_string(cap) + "]");
        opt.k_targets = {*cfg.k};
    }
    Rng rng(cfg.seed);
    const SelectionResult res = run_controlburn(data, opt, rng);
    warnings = res.warnings;

    json out = to_json(res);
    // Training-set fit of each refit model, for a quick sanity read.
    for (auto& rec : out["records"]) {
        const auto& r = res.records.at(rec["k"].get<int>());
        if (!r.refit) continue;
        const Vector pred = predict_on_columns(*r.refit, r.features, data.features);
        if (data.task == Task::classification) {
            try {
                rec["refit_train_auc"] = roc_auc(pred, data.labels);
            } catch (const DataError&) {
                rec["refit_train_auc"] = nullptr;
            }
        } else {
            rec["refit_train_mse"] = mean_squared_error(data.labels, pred);
        }
    }
    detail::write_json(cfg.output, out);
    return {cfg.output};
}

inline std::vector<std::string> cmd_compare(const RunConfig& cfg, std::vector<std::string>& warnings) {
    if (!cfg.k && cfg.k_range.empty()) throw UsageError("compare needs --k or --k-range");
    if (cfg.folds < 2) throw UsageError("--folds must be >= 2");
    Dataset data = detail::load_input(cfg);
    Rng rng(cfg.seed);
    if (!cfg.synth_duplicate.empty()) data = detail::semi_synthetic(data, cfg.synth_duplicate, cfg.sigma, rng);
    CompareOptions opt;
    opt.folds = cfg.folds;
    opt.ks = cfg.k_range.empty() ? std::vector<int>{*cfg.k} : detail::parse_k_range(cfg.k_range);
    if (cfg.k && !cfg.k_range.empty()) opt.ks.push_back(*cfg.k);
    std::sort(opt.ks.begin(), opt.ks.end());
    opt.ks.erase(std::unique(opt.ks.begin(), opt.ks.end()), opt.ks.end());
    opt.controlburn = detail::controlburn_options(cfg, data);
    opt.refit.trees = cfg.refit_trees;
    const ComparisonReport rep = compare_cv(data, opt, rng);
    for (const auto& row : rep.rows)
        if (row.controlburn.count < rep.folds)
            warnings.push_back("k = " + std::to_string(row.k) + " unreachable in " +
                               std::to_string(rep.folds - row.controlburn.count) + " of " +
                               std::to_string(rep.folds) + " folds");
    json out = to_json(rep);
    out["features"] = data.names;
    detail::write_json(cfg.output, out);
    const std::string csv_path = detail::sibling(cfg.output, ".csv");
    std::ostringstream csv;
    write_comparison_csv(csv, rep);
    detail::write_text(csv_path, csv.str());
    return {cfg.output, csv_path};
}

inline std::vector<std::string> cmd_synth(const RunConfig& cfg, std::vector<std::string>&) {
    Rng rng(cfg.seed);
    Dataset data;
    if (!cfg.generate.empty()) {
        if (!cfg.input.empty()) throw UsageError("use either --input or --generate");
        if (cfg.rows < 2) throw UsageError("--rows must be >= 2");
        if (cfg.generate == "signals") {
            if (cfg.informative < 1 || cfg.noise < 0) throw UsageError("--informative must be >= 1, --noise >= 0");
            data = synthetic::binary_signals(cfg.rows, cfg.informative, cfg.noise, cfg.coef, rng);
        } else if (cfg.generate == "gaussian-signals") {
            if (cfg.informative < 1 || cfg.noise < 0) throw UsageError("--informative must be >= 1, --noise >= 0");
            data = synthetic::logistic_signals(cfg.rows, cfg.informative, cfg.noise, cfg.coef, rng);
        } else if (cfg.generate == "two-norm") {
            data = synthetic::two_norm(cfg.rows, cfg.informative + cfg.noise, rng);
        } else if (cfg.generate == "friedman1") {
            data = synthetic::friedman1(cfg.rows, cfg.informative + cfg.noise, 1.0, rng);
        } else {
            throw UsageError("unknown generator '" + cfg.generate + "' (signals|gaussian-signals|two-norm|friedman1)");
        }
    } else {
        data = detail::load_input(cfg);
    }
    if (!cfg.duplicate.empty()) {
        const auto cols = detail::resolve_columns(cfg.duplicate, data);
        data = duplicate_features(data, cols, cfg.copies, cfg.sigma, rng);
    }
    std::ostringstream out;
    write_csv(out, data, cfg.generate.empty() ? cfg.label : "y");
    detail::write_text(cfg.output, out.str());
    return {cfg.output};
}

inline std::vector<std::string> cmd_eval(const RunConfig& cfg, std::vector<std::string>& warnings) {
    json out;
    if (cfg.experiment == "rank") {
        const Dataset data = detail::load_input(cfg);
        RankExperimentOptions opt;
        opt.controlburn = detail::controlburn_options(cfg, data);
        Rng rng(cfg.seed);
        out = to_json(uninformative_rank_experiment(data, opt, rng));
        out["experiment"] = "rank";
    } else if (cfg.experiment == "fit-counts") {
        if (!cfg.k) throw UsageError("fit-counts needs --k");
        if (cfg.fit_p < 2 || *cfg.k < 1 || *cfg.k >= cfg.fit_p) throw UsageError("fit-counts needs 1 <= k < p");
        Rng rng(cfg.seed);
        Dataset data = synthetic::binary_signals(cfg.rows, std::min<Index>(3, cfg.fit_p), cfg.fit_p - std::min<Index>(3, cfg.fit_p), cfg.coef, rng);
        const FitCounts expected = fit_count_comparison(data.cols(), *cfg.k);
        FitCounter cb_counter, rfe_counter;
        ControlBurnOptions cb = detail::controlburn_options(cfg, data);
        cb.k_targets = {std::min(*cfg.k, cb.k_max)};
        cb.refit = false;
        cb.counter = &cb_counter;
        Rng cb_rng(next_seed(rng));
        const auto sel = run_controlburn(data, cb, cb_rng);
        warnings = sel.warnings;
        ForestOptions rf;
        rf.trees = cfg.refit_trees;
        rf.counter = &rfe_counter;
        Rng rfe_rng(next_seed(rng));
        rfe_select(data, *cfg.k, rf, rfe_rng);
        out = {{"experiment", "fit-counts"},
               {"p", data.cols()},
               {"k", *cfg.k},
               {"expected", {{"controlburn", expected.controlburn}, {"rfe", expected.rfe}}},
               {"counted", {{"controlburn", cb_counter.grow_phases.load()}, {"rfe", rfe_counter.ensemble_fits.load()}}}};
    } else if (cfg.experiment == "auc") {
        if (cfg.forest.empty()) throw UsageError("auc needs --forest");
        std::ifstream in(cfg.forest);
        if (!in) throw DataError("cannot open forest file '" + cfg.forest + "'");
        json fj;
        try {
            fj = json::parse(in);
        } catch (const json::exception& e) {
            throw DataError("forest file is not valid JSON: " + std::string(e.what()));
        }
        const Forest forest = forest_from_json(fj);
        const Dataset data = detail::load_input(cfg);
        if (data.task != Task::classification) throw UsageError("auc needs a classification dataset");
        out = {{"experiment", "auc"}, {"rows", data.rows()}, {"auc", roc_auc(forest.predict(data.features), data.labels)}};
    } else {
        throw UsageError("unknown experiment '" + cfg.experiment + "' (rank|fit-counts|auc)");
    }
    detail::write_json(cfg.output, out);
    return {cfg.output};
}

// ---------------------------------------------------------------------------
// entry point

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig cfg;
    CLI::App app{"Feature selection by pruning tree ensembles with a weighted LASSO", "controlburn"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub, const std::string& default_output) {
        sub->add_option("--seed", cfg.seed, "root seed for all randomness")->capture_default_str();
        sub->add_option("--threads", cfg.threads, "worker threads (>= 1)")->capture_default_str();
        sub->add_option("--output,-o", cfg.output, "output path (default " + default_output + ")");
    };
    auto data_opts = [&](CLI::App* sub) {
        sub->add_option("--input,-i", cfg.input, "input CSV");
        sub->add_option("--label", cfg.label, "label column")->capture_default_str();
        sub->add_option("--task", cfg.task, "classification|regression|auto")->capture_default_str();
    };
    auto grow_opts = [&](CLI::App* sub) {
        sub->add_option("--grower", cfg.grower, "bag|bagboost")->capture_default_str();
        sub->add_option("--dmax", cfg.dmax, "maximum depth stage")->capture_default_str();
        sub->add_option("--monitor-n", cfg.monitor_n, "convergence window")->capture_default_str();
        sub->add_option("--monitor-eps", cfg.monitor_eps, "convergence tube width")->capture_default_str();
        sub->add_option("--sparse-cost", cfg.sparse_cost, "impurity cost for a feature new to a tree")
            ->capture_default_str();
    };
    auto select_opts = [&](CLI::App* sub) {
        sub->add_option("--costs", cfg.costs, "cost specification JSON");
        sub->add_option("--kmax", cfg.kmax, "sparsity cap")->capture_default_str();
        sub->add_option("--sketch-rows", cfg.sketch_rows, "Gaussian sketch size (squared loss only)");
        sub->add_option("--refit-trees", cfg.refit_trees, "trees in each refit forest")->capture_default_str();
    };

    auto* grow = app.add_subcommand("grow", "grow a forest and write it as JSON plus a JSON-lines trace");
    data_opts(grow);
    grow_opts(grow);
    common(grow, "forest.json");

    auto* select = app.add_subcommand("select", "run ControlBurn feature selection");
    data_opts(select);
    grow_opts(select);
    select_opts(select);
    select->add_option("--lambda", cfg.lambda, "solve once at this penalty");
    select->add_option("--k", cfg.k, "target number of features");
    select->add_flag("--path", cfg.path, "realize every k in 1..kmax");
    common(select, "selection.json");

    auto* compare = app.add_subcommand("compare", "cross-validated comparison with the MDI baseline");
    data_opts(compare);
    grow_opts(compare);
    select_opts(compare);
    compare->add_option("--folds", cfg.folds, "cross-validation folds")->capture_default_str();
    compare->add_option("--k", cfg.k, "single sparsity level");
    compare->add_option("--k-range", cfg.k_range, "sparsity levels, e.g. 1-10 or 1,3,5");
    compare->add_option("--synth-duplicate", cfg.synth_duplicate, "duplicate the top-A MDI features B times (AxB)");
    compare->add_option("--sigma", cfg.sigma, "noise std dev for duplicates")->capture_default_str();
    common(compare, "comparison.json");

    auto* synth = app.add_subcommand("synth", "generate data or add noisy duplicate columns");
    data_opts(synth);
    synth->add_option("--generate", cfg.generate, "signals|gaussian-signals|two-norm|friedman1");
    synth->add_option("--rows", cfg.rows, "rows to generate")->capture_default_str();
    synth->add_option("--informative", cfg.informative, "informative features")->capture_default_str();
    synth->add_option("--noise", cfg.noise, "noise features")->capture_default_str();
    synth->add_option("--coef", cfg.coef, "signal strength")->capture_default_str();
    synth->add_option("--duplicate", cfg.duplicate, "columns to duplicate (indices or names)");
    synth->add_option("--copies", cfg.copies, "copies per duplicated column")->capture_default_str();
    synth->add_option("--sigma", cfg.sigma, "noise std dev for duplicates")->capture_default_str();
    common(synth, "synth.csv");

    auto* eval = app.add_subcommand("eval", "experiments: rank | fit-counts | auc");
    data_opts(eval);
    grow_opts(eval);
    select_opts(eval);
    eval->add_option("--experiment", cfg.experiment, "rank|fit-counts|auc")->capture_default_str();
    eval->add_option("--k", cfg.k, "target k (fit-counts)");
    eval->add_option("--p", cfg.fit_p, "feature count (fit-counts)")->capture_default_str();
    eval->add_option("--rows", cfg.rows, "rows to generate (fit-counts)")->capture_default_str();
    eval->add_option("--coef", cfg.coef, "signal strength (fit-counts)")->capture_default_str();
    eval->add_option("--forest", cfg.forest, "forest JSON (auc)");
    common(eval, "eval.json");

    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "rerun the invocation recorded in a manifest");
    replay->add_option("manifest", manifest_path, "manifest JSON written by an earlier run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : static_cast<int>(ErrorKind::usage);
    }

    if (replay->parsed()) {
        std::vector<std::string> recorded;
        try {
            std::ifstream in(manifest_path);
            if (!in) throw DataError("cannot open manifest '" + manifest_path + "'");
            const json m = json::parse(in);
            recorded = m.at("args").get<std::vector<std::string>>();
            if (recorded.empty() || recorded.front() == "replay") throw DataError("manifest records no runnable command");
        } catch (const json::exception& e) {
            err << "error: malformed manifest: " << e.what() << '\n';
            return static_cast<int>(ErrorKind::data);
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return static_cast<int>(e.kind());
        }
        std::vector<const char*> replay_argv{argv[0]};
        for (const auto& a : recorded) replay_argv.push_back(a.c_str());
        return run(static_cast<int>(replay_argv.size()), replay_argv.data(), out, err);
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (cfg.threads < 1) throw UsageError("--threads must be >= 1");
        std::vector<std::string> warnings, outputs;
        auto dispatch = [&](const char* name, const char* default_output, auto&& cmd) {
            cfg.subcommand = name;
            if (cfg.output.empty()) cfg.output = default_output;
            outputs = cmd(cfg, warnings);
        };
        if (grow->parsed())
            dispatch("grow", "forest.json", cmd_grow);
        else if (select->parsed())
            dispatch("select", "selection.json", cmd_select);
        else if (compare->parsed())
            dispatch("compare", "comparison.json", cmd_compare);
        else if (synth->parsed())
            dispatch("synth", "synth.csv", cmd_synth);
        else
            dispatch("eval", "eval.json", cmd_eval);
        detail::write_manifest(cfg, args, outputs, warnings);
        detail::warn_all(err, warnings);
        for (const auto& o : outputs) out << o << '\n';
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return static_cast<int>(ErrorKind::numerical);
    }
}

} // namespace controlburn::cli
