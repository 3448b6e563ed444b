#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "controlburn/grow.hpp"
#include "controlburn/prune.hpp"

namespace controlburn {

enum class Grower { bagging, bag_boosting };

inline Grower parse_grower(std::string_view s) {
    if (s == "bag" || s == "bagging") return Grower::bagging;
    if (s == "bagboost" || s == "bag-boosting" || s == "bag_boosting") return Grower::bag_boosting;
    throw UsageError("unknown grower '" + std::string(s) + "' (expected bag|bagboost)");
}

inline Forest grow_forest(const Dataset& data, Grower grower, const GrowOptions& opt, Rng& rng) {
    return grower == Grower::bagging ? incremental_depth_bagging(data, opt, rng)
                                     : incremental_depth_bag_boosting(data, opt, rng);
}

// ---------------------------------------------------------------------------
// lambda bisection

struct BisectionOptions {
    int budget = 200;
    double lambda_floor = 1e-12;
    double start = 1.0;
};

struct LambdaPoint {
    double lambda = 0.0;
    int k = 0;
};

struct BisectionPath {
    std::map<int, double> lambda_for_k;
    std::vector<LambdaPoint> evaluations;
    std::vector<int> unreachable;
    bool budget_exhausted = false;
};

/// Walks the sparsity targets k' = 1..k_max. Starting from a lambda with k = 0 (found by doubling
/// from `start`), lambda is halved while too few features are selected and moved back up by half
/// the last step (the midpoint of the bracket) when too many are. A target is marked unreachable
/// once its bracket collapses or lambda falls below the floor. `count_at(lambda)` returns k.
template <class CountFn>
BisectionPath bisect_lambda(CountFn&& count_at, int k_max, const BisectionOptions& opt = {}) {
    BisectionPath path;
    int solves = 0;
    auto eval = [&](double lam) {
        const int k = count_at(lam);
        ++solves;
        path.evaluations.push_back({lam, k});
        return k;
    };

    double lam = opt.start;
    while (true) {
        if (solves >= opt.budget) {
            path.budget_exhausted = true;
            return path;
        }
        if (eval(lam) == 0) break;
        lam *= 2.0;
    }

    for (int target = 1; target <= k_max;) {
        auto hit = std::find_if(path.evaluations.begin(), path.evaluations.end(),
                                [&](const LambdaPoint& e) { return e.k == target; });
        if (hit != path.evaluations.end()) {
            path.lambda_for_k[target] = hit->lambda;
            ++target;
            continue;
        }
        double hi = std::numeric_limits<double>::infinity();
        for (const auto& e : path.evaluations)
            if (e.k < target) hi = std::min(hi, e.lambda);
        std::optional<double> lo;
        for (const auto& e : path.evaluations)
            if (e.k > target && e.lambda < hi) lo = std::max(lo.value_or(0.0), e.lambda);

        const double next = lo ? 0.5 * (*lo + hi) : 0.5 * hi;
        const bool collapsed = lo && (hi - *lo) <= 1e-12 * hi;
        if (collapsed || next < opt.lambda_floor) {
            path.unreachable.push_back(target);
            // Nothing beyond this target can be found by going lower once lambda underflows.
            if (!lo) {
                for (int t = target + 1; t <= k_max; ++t) path.unreachable.push_back(t);
                break;
            }
            ++target;
            continue;
        }
        if (solves >= opt.budget) {
            path.budget_exhausted = true;
            for (int t = target; t <= k_max; ++t) path.unreachable.push_back(t);
            break;
        }
        eval(next);
    }
    return path;
}

// ---------------------------------------------------------------------------
// ControlBurn

struct ControlBurnOptions {
    Grower grower = Grower::bag_boosting;
    GrowOptions grow;
    CostSpec costs;
    int k_max = 10;
    /// Sparsity levels to realize; empty means every k in 1..k_max.
    std::vector<int> k_targets;
    /// Solve once at this lambda instead of bisecting.
    std::optional<double> lambda;
    /// Gaussian-sketch the (squared-loss) pruning problem down to this many rows; 0 disables.
    Index sketch_rows = 0;
    SolverOptions solver;
    BisectionOptions bisection;
    bool refit = true;
    ForestOptions refit_forest;
    FitCounter* counter = nullptr;
};

struct SelectionRecord {
    int k = 0;
    double lambda = 0.0;
    std::vector<Index> features;
    Solution solution;
    std::optional<Forest> refit;
};

struct SelectionResult {
    std::map<int, SelectionRecord> records;
    std::vector<int> unreachable;
    std::vector<LambdaPoint> path;
    int k_max = 10;
    std::vector<std::string> names;
    Forest forest;
    std::vector<std::string> warnings;
    bool budget_exhausted = false;
};

/// Predicts with a model refit on `columns` of the original feature matrix.
inline Vector predict_on_columns(const Forest& model, const std::vector<Index>& columns, const Matrix& x) {
    Matrix sub(x.rows(), static_cast<Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) sub.col(static_cast<Index>(j)) = x.col(columns[j]);
    return model.predict(sub);
}

inline Forest refit_on_columns(const Dataset& data, const std::vector<Index>& columns, const ForestOptions& opt,
                               std::uint64_t seed) {
    if (columns.empty()) throw UsageError("cannot refit on an empty feature set");
    Rng rng(seed);
    return fit_random_forest(select_columns(data, columns), opt, rng);
}

/// Grows one forest, then prunes it to each requested sparsity and refits a random forest on each
/// selected feature set.
inline SelectionResult run_controlburn(const Dataset& data, const ControlBurnOptions& opt, Rng& rng) {
    data.validate();
    const int k_cap = static_cast<int>(std::min<Index>(data.cols(), opt.k_max));
    if (opt.k_max < 1) throw UsageError("k_max must be >= 1");
    for (int k : opt.k_targets)
        if (k < 1 || k > k_cap)
            throw UsageError("k = " + std::to_string(k) + " outside [1, " + std::to_string(k_cap) + "]");

    const std::uint64_t grow_seed = next_seed(rng);
    const std::uint64_t sketch_seed = next_seed(rng);
    const std::uint64_t refit_seed = next_seed(rng);

    SelectionResult result;
    result.k_max = opt.k_max;
    result.names = data.names;

    GrowOptions gopt = opt.grow;
    gopt.counter = opt.counter;
    {
        Rng grow_rng(grow_seed);
        result.forest = grow_forest(data, opt.grower, gopt, grow_rng);
    }
    result.warnings = result.forest.warnings;
    if (result.forest.empty()) {
        result.warnings.push_back("grown forest has no trees; nothing to select");
        for (int k : opt.k_targets) result.unreachable.push_back(k);
        return result;
    }

    PruneProblem problem = build_problem(result.forest, data, opt.costs, default_loss(data.task));
    if (opt.sketch_rows > 0) {
        Rng sk(sketch_seed);
        problem = sketch_problem(problem, opt.sketch_rows, sk);
    }

    std::map<double, Solution> solved;
    std::optional<Vector> warm;
    auto solve_at = [&](double lam) -> const Solution& {
        auto it = solved.find(lam);
        if (it != solved.end()) return it->second;
        problem.lambda = lam;
        SolverOptions sopt = opt.solver;
        if (!sopt.warm_start && warm) sopt.warm_start = warm;
        Solution s = solve(problem, sopt);
        if (!s.certified)
            result.warnings.push_back("solve at lambda " + std::to_string(lam) + " not certified (kkt " +
                                      std::to_string(s.kkt_residual) + ")");
        warm = s.w;
        return solved.emplace(lam, std::move(s)).first->second;
    };

    auto make_record = [&](int k, double lam) {
        SelectionRecord rec;
        rec.k = k;
        rec.lambda = lam;
        rec.solution = solve_at(lam);
        rec.features = rec.solution.selected;
        if (opt.refit && !rec.features.empty()) {
            ForestOptions fo = opt.refit_forest;
            fo.counter = opt.counter;
            rec.refit = refit_on_columns(data, rec.features, fo, derive_seed(refit_seed, static_cast<std::uint64_t>(k)));
        }
        return rec;
    };

    if (opt.lambda) {
        const Solution& s = solve_at(*opt.lambda);
        const int k = static_cast<int>(s.selected.size());
        result.path.push_back({*opt.lambda, k});
        result.records[k] = make_record(k, *opt.lambda);
        return result;
    }

    // Sparsities beyond the features the forest actually uses cannot be realized.
    Index forest_features = 0;
    {
        std::vector<std::uint8_t> any(static_cast<std::size_t>(data.cols()), 0);
        for (const auto& t : result.forest.trees)
            for (std::size_t j = 0; j < t.used.size(); ++j) any[j] |= t.used[j];
        forest_features = std::count(any.begin(), any.end(), std::uint8_t{1});
    }
    std::vector<int> wanted = opt.k_targets;
    if (wanted.empty()) {
        wanted.resize(static_cast<std::size_t>(k_cap));
        std::iota(wanted.begin(), wanted.end(), 1);
    }
    const int k_search = std::min<int>(*std::max_element(wanted.begin(), wanted.end()),
                                       static_cast<int>(forest_features));

    BisectionPath path = bisect_lambda(
        [&](double lam) { return static_cast<int>(solve_at(lam).selected.size()); }, k_search, opt.bisection);
    result.path = path.evaluations;
    result.budget_exhausted = path.budget_exhausted;
    if (path.budget_exhausted) result.warnings.push_back("bisection budget exhausted");

    for (int k : wanted) {
        auto it = path.lambda_for_k.find(k);
        if (it == path.lambda_for_k.end()) {
            result.unreachable.push_back(k);
            continue;
        }
        result.records[k] = make_record(k, it->second);
    }
    if (!result.unreachable.empty()) {
        std::string msg = "unreachable k:";
        for (int k : result.unreachable) msg += " " + std::to_string(k);
        result.warnings.push_back(msg);
    }
    return result;
}

// ---------------------------------------------------------------------------
// baselines

/// All features ranked by random-forest MDI (descending, ties by index).
inline std::vector<Index> mdi_ranking(const Forest& forest) {
    const Importances imp = mdi_importances(forest);
    std::vector<Index> order(imp.values.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return imp.values[static_cast<std::size_t>(a)] > imp.values[static_cast<std::size_t>(b)];
    });
    return order;
}

/// Top-k features by MDI of a random forest fit on all features.
inline std::vector<Index> baseline_mdi_select(const Dataset& data, int k, const ForestOptions& opt, Rng& rng) {
    if (k < 1 || k > data.cols()) throw UsageError("k must lie in [1, p]");
    const Forest rf = fit_random_forest(data, opt, rng);
    auto rank = mdi_ranking(rf);
    rank.resize(static_cast<std::size_t>(k));
    return rank;
}

/// Recursive feature elimination: refit and drop the least important feature until k remain.
inline std::vector<Index> rfe_select(const Dataset& data, int k, const ForestOptions& opt, Rng& rng) {
    if (k < 1 || k > data.cols()) throw UsageError("k must lie in [1, p]");
    std::vector<Index> cols(static_cast<std::size_t>(data.cols()));
    std::iota(cols.begin(), cols.end(), Index{0});
    while (static_cast<int>(cols.size()) > k) {
        const Forest rf = fit_random_forest(select_columns(data, cols), opt, rng);
        const auto rank = mdi_ranking(rf);
        cols.erase(cols.begin() + rank.back());
    }
    return cols;
}

struct FitCounts {
    long controlburn = 0;
    long rfe = 0;
};

/// Model-training iterations needed to select k of p features.
inline FitCounts fit_count_comparison(Index p, Index k) {
    if (k < 0 || k > p) throw UsageError("k must not exceed p");
    return {1, static_cast<long>(p - k)};
}

} // namespace controlburn
