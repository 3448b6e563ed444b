#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "controlburn/eval.hpp"

namespace controlburn {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// trees and forests

inline json to_json(const TreeModel& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"samples", n.samples},
                         {"impurity", n.impurity}});
    return {{"depth", tree.depth},
            {"n_features", tree.n_features},
            {"nodes", std::move(nodes)},
            {"impurity_decreases", tree.impurity_decreases},
            {"used", tree.used}};
}

inline TreeModel tree_from_json(const json& j) {
    TreeModel tree;
    try {
        tree.depth = j.at("depth").get<int>();
        tree.n_features = j.at("n_features").get<Index>();
        for (const auto& n : j.at("nodes")) {
            TreeNode node;
            node.feature = n.at("feature").get<int>();
            node.threshold = n.at("threshold").get<double>();
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
            node.value = n.at("value").get<double>();
            node.samples = n.at("samples").get<Index>();
            node.impurity = n.at("impurity").get<double>();
            tree.nodes.push_back(node);
        }
        tree.impurity_decreases = j.at("impurity_decreases").get<std::vector<double>>();
        tree.used = j.at("used").get<std::vector<std::uint8_t>>();
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed tree JSON: ") + e.what());
    }
    const auto count = static_cast<int>(tree.nodes.size());
    if (count == 0) throw DataError("tree JSON has no nodes");
    for (const auto& n : tree.nodes) {
        if (n.is_leaf()) continue;
        if (n.feature >= tree.n_features || n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)
            throw DataError("tree JSON has an out-of-range node reference");
    }
    return tree;
}

inline json to_json(const TraceEvent& e) {
    json j = {{"event", e.kind == TraceEvent::Kind::tree ? "tree" : "stage"},
              {"tree", e.tree_index},
              {"depth", e.depth},
              {"stage", e.stage},
              {"train_loss", e.train_loss}};
    if (e.kind == TraceEvent::Kind::stage) {
        j["delta"] = e.delta;
        j["usable_rows"] = e.usable_rows;
        j["skipped_rows"] = e.skipped_rows;
        j["accepted"] = e.accepted;
    }
    return j;
}

/// One JSON object per line.
inline void write_trace(std::ostream& out, const std::vector<TraceEvent>& trace) {
    for (const auto& e : trace) out << to_json(e).dump() << '\n';
}

inline json to_json(const Forest& forest) {
    json trees = json::array();
    for (std::size_t i = 0; i < forest.trees.size(); ++i) {
        json t = to_json(forest.trees[i]);
        t["depth_stage"] = forest.meta[i].depth_stage;
        t["boost_stage"] = forest.meta[i].boost_stage;
        t["oob_rows"] = forest.meta[i].bag.oob.size();
        trees.push_back(std::move(t));
    }
    return {{"mode", to_string(forest.mode)},
            {"task", to_string(forest.task)},
            {"offset", forest.offset},
            {"learning_rate", forest.learning_rate},
            {"n_features", forest.n_features},
            {"stages", forest.stage_count()},
            {"warnings", forest.warnings},
            {"trees", std::move(trees)}};
}

/// Restores a forest for prediction; bags and the growth trace are not stored.
inline Forest forest_from_json(const json& j) {
    Forest forest;
    try {
        const auto mode = j.at("mode").get<std::string>();
        if (mode != "bagged" && mode != "bag_boosted") throw DataError("unknown forest mode '" + mode + "'");
        forest.mode = mode == "bagged" ? GrowMode::bagged : GrowMode::bag_boosted;
        forest.task = parse_task(j.at("task").get<std::string>());
        forest.offset = j.at("offset").get<double>();
        forest.learning_rate = j.at("learning_rate").get<double>();
        forest.n_features = j.at("n_features").get<Index>();
        for (const auto& t : j.at("trees")) {
            forest.trees.push_back(tree_from_json(t));
            TreeMeta meta;
            meta.depth_stage = t.at("depth_stage").get<int>();
            meta.boost_stage = t.at("boost_stage").get<int>();
            forest.meta.push_back(std::move(meta));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed forest JSON: ") + e.what());
    }
    return forest;
}

// ---------------------------------------------------------------------------
// costs

inline Index resolve_feature(const json& ref, const std::vector<std::string>& names) {
    if (ref.is_number_integer()) {
        const auto j = ref.get<Index>();
        if (j < 0 || j >= static_cast<Index>(names.size()))
            throw UsageError("cost file: feature index " + std::to_string(j) + " out of range");
        return j;
    }
    const auto name = ref.get<std::string>();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw UsageError("cost file: unknown feature '" + name + "'");
    return it - names.begin();
}

/// Accepted forms:
///   {"mode": "unit"}
///   {"mode": "per_feature", "costs": {"<name>": c, ...}, "default": c}   (or "costs": [c0, c1, ...])
///   {"mode": "grouped", "groups": [{"features": ["<name>" | index, ...], "cost": c}, ...]}
/// In grouped mode, features not listed become singleton groups of cost 1.
inline CostSpec cost_spec_from_json(const json& j, const std::vector<std::string>& names) {
    const Index p = static_cast<Index>(names.size());
    try {
        const auto mode = j.value("mode", std::string("unit"));
        if (mode == "unit") return CostSpec::unit();
        if (mode == "per_feature") {
            const auto& costs = j.at("costs");
            if (costs.is_array()) {
                auto spec = CostSpec::per_feature(costs.get<std::vector<double>>());
                spec.validate(p);
                return spec;
            }
            std::vector<double> c(static_cast<std::size_t>(p), j.value("default", 1.0));
            for (const auto& [name, value] : costs.items())
                c[static_cast<std::size_t>(resolve_feature(json(name), names))] = value.get<double>();
            auto spec = CostSpec::per_feature(std::move(c));
            spec.validate(p);
            return spec;
        }
        if (mode == "grouped") {
            std::vector<std::vector<Index>> groups;
            std::vector<double> group_costs;
            std::vector<bool> listed(static_cast<std::size_t>(p), false);
            for (const auto& g : j.at("groups")) {
                std::vector<Index> members;
                for (const auto& ref : g.at("features")) {
                    const Index f = resolve_feature(ref, names);
                    members.push_back(f);
                    if (listed[static_cast<std::size_t>(f)])
                        throw UsageError("cost file: feature '" + names[static_cast<std::size_t>(f)] +
                                         "' appears in two groups");
                    listed[static_cast<std::size_t>(f)] = true;
                }
                groups.push_back(std::move(members));
                group_costs.push_back(g.at("cost").get<double>());
            }
            for (Index f = 0; f < p; ++f)
                if (!listed[static_cast<std::size_t>(f)]) {
                    groups.push_back({f});
                    group_costs.push_back(1.0);
                }
            auto spec = CostSpec::grouped(std::move(groups), std::move(group_costs));
            spec.validate(p);
            return spec;
        }
        throw UsageError("cost file: unknown mode '" + mode + "'");
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed cost file: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// pruning and selection

inline json to_json(const Solution& s, const PruneProblem& prob, const std::vector<std::string>& names) {
    json selected = json::array();
    for (Index j : s.selected) selected.push_back(names[static_cast<std::size_t>(j)]);
    json w = json::array(), u = json::array();
    for (Index i = 0; i < s.w.size(); ++i) w.push_back(s.w[i]);
    for (Index i = 0; i < prob.u.size(); ++i) u.push_back(prob.u[i]);
    return {{"lambda", prob.lambda},
            {"loss", to_string(prob.loss)},
            {"objective", s.objective},
            {"kkt_residual", s.kkt_residual},
            {"certified", s.certified},
            {"iterations", s.iterations},
            {"selected", std::move(selected)},
            {"weights", std::move(w)},
            {"costs", std::move(u)}};
}

inline json to_json(const SelectionResult& r) {
    auto name_list = [&](const std::vector<Index>& cols) {
        json out = json::array();
        for (Index j : cols) out.push_back(r.names[static_cast<std::size_t>(j)]);
        return out;
    };
    json records = json::array();
    for (const auto& [k, rec] : r.records) {
        json item = {{"k", k},
                     {"lambda", rec.lambda},
                     {"features", name_list(rec.features)},
                     {"indices", rec.features},
                     {"objective", rec.solution.objective},
                     {"kkt_residual", rec.solution.kkt_residual},
                     {"certified", rec.solution.certified},
                     {"iterations", rec.solution.iterations},
                     {"trees_kept", (rec.solution.w.array() > 0.0).count()}};
        if (rec.refit) item["refit_trees"] = rec.refit->size();
        records.push_back(std::move(item));
    }
    json path = json::array();
    for (const auto& e : r.path) path.push_back({{"lambda", e.lambda}, {"k", e.k}});
    return {{"k_max", r.k_max},
            {"forest_trees", r.forest.size()},
            {"forest_stages", r.forest.stage_count()},
            {"records", std::move(records)},
            {"unreachable", r.unreachable},
            {"budget_exhausted", r.budget_exhausted},
            {"path", std::move(path)},
            {"warnings", r.warnings}};
}

// ---------------------------------------------------------------------------
// evaluation reports

inline json to_json(const MeanStd& s) { return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}}; }

inline json to_json(const ComparisonReport& rep) {
    auto name_list = [&](const std::vector<Index>& cols) {
        json out = json::array();
        for (Index j : cols) out.push_back(rep.names[static_cast<std::size_t>(j)]);
        return out;
    };
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"k", r.k},
                        {"controlburn", to_json(r.controlburn)},
                        {"baseline", to_json(r.baseline)},
                        {"difference", to_json(r.difference)}});
    json folds = json::array();
    for (const auto& f : rep.per_fold) {
        json per_k = json::array();
        for (const auto& [k, auc] : f.baseline_auc) {
            json item = {{"k", k}, {"baseline_auc", auc}, {"baseline_features", name_list(f.baseline_selected.at(k))}};
            if (auto c = f.controlburn_auc.find(k); c != f.controlburn_auc.end()) {
                item["controlburn_auc"] = c->second;
                item["controlburn_features"] = name_list(f.controlburn_selected.at(k));
            } else {
                item["controlburn_auc"] = nullptr;
            }
            per_k.push_back(std::move(item));
        }
        folds.push_back({{"fold", f.fold}, {"results", std::move(per_k)}});
    }
    return {{"folds", rep.folds}, {"rows", std::move(rows)}, {"per_fold", std::move(folds)}};
}

/// k,method,mean_auc,std_auc,folds
inline void write_comparison_csv(std::ostream& out, const ComparisonReport& rep) {
    auto num = [](double v) { return json(v).dump(); };
    out << "k,method,mean_auc,std_auc,folds\n";
    for (const auto& r : rep.rows) {
        out << r.k << ",controlburn," << num(r.controlburn.mean) << ',' << num(r.controlburn.std) << ','
            << r.controlburn.count << '\n';
        out << r.k << ",baseline," << num(r.baseline.mean) << ',' << num(r.baseline.std) << ',' << r.baseline.count
            << '\n';
    }
}

inline json to_json(const RankTrace& t) {
    json points = json::array();
    for (const auto& p : t.points) {
        json item = {{"k", p.k}, {"lambda", p.lambda}, {"selected", p.selected}};
        item["rank"] = p.rank ? json(*p.rank) : json(nullptr);
        points.push_back(std::move(item));
    }
    return {{"column", t.column},
            {"total_features", t.total_features},
            {"full_rank", t.full_rank},
            {"points", std::move(points)}};
}

} // namespace controlburn
