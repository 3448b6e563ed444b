#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "controlburn/grow.hpp"

namespace controlburn {

enum class LossKind { squared, logistic };

inline std::string to_string(LossKind loss) { return loss == LossKind::squared ? "squared" : "logistic"; }

inline LossKind default_loss(Task task) { return task == Task::classification ? LossKind::logistic : LossKind::squared; }

/// How much each feature costs when a tree uses it.
struct CostSpec {
    enum class Mode { unit, per_feature, grouped };
    Mode mode = Mode::unit;
    std::vector<double> feature_costs;
    std::vector<std::vector<Index>> groups;
    std::vector<double> group_costs;

    static CostSpec unit() { return {}; }
    static CostSpec per_feature(std::vector<double> costs) { return {Mode::per_feature, std::move(costs), {}, {}}; }
    static CostSpec grouped(std::vector<std::vector<Index>> groups, std::vector<double> costs) {
        return {Mode::grouped, {}, std::move(groups), std::move(costs)};
    }

    void validate(Index p) const {
        switch (mode) {
        case Mode::unit:
            return;
        case Mode::per_feature:
            if (static_cast<Index>(feature_costs.size()) != p)
                throw UsageError("per-feature costs: expected " + std::to_string(p) + " entries, got " +
                                 std::to_string(feature_costs.size()));
            for (double c : feature_costs)
                if (!(c > 0.0) || !std::isfinite(c)) throw UsageError("feature costs must be positive");
            return;
        case Mode::grouped: {
            if (groups.size() != group_costs.size()) throw UsageError("one cost per feature group is required");
            std::vector<int> seen(static_cast<std::size_t>(p), 0);
            for (const auto& g : groups)
                for (Index j : g) {
                    if (j < 0 || j >= p) throw UsageError("group member " + std::to_string(j) + " out of range");
                    ++seen[static_cast<std::size_t>(j)];
                }
            for (Index j = 0; j < p; ++j)
                if (seen[static_cast<std::size_t>(j)] != 1)
                    throw UsageError("feature groups must partition all features (feature " + std::to_string(j) +
                                     " appears " + std::to_string(seen[static_cast<std::size_t>(j)]) + " times)");
            for (double c : group_costs)
                if (!(c > 0.0) || !std::isfinite(c)) throw UsageError("group costs must be positive");
            return;
        }
        }
    }

    /// Penalty weight of a tree with usage vector `used`.
    double tree_cost(const std::vector<std::uint8_t>& used) const {
        double u = 0.0;
        switch (mode) {
        case Mode::unit:
            for (auto b : used) u += b;
            break;
        case Mode::per_feature:
            for (std::size_t j = 0; j < used.size(); ++j)
                if (used[j]) u += feature_costs[j];
            break;
        case Mode::grouped:
            for (std::size_t g = 0; g < groups.size(); ++g)
                if (std::any_of(groups[g].begin(), groups[g].end(),
                                [&](Index j) { return used[static_cast<std::size_t>(j)] != 0; }))
                    u += group_costs[g];
            break;
        }
        return u;
    }
};

using UsageMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// minimize (1/m) L(offset + A w, y) + lambda * u'w  subject to  w >= 0.
/// Squared loss: L = ||y - offset - A w||^2. Logistic loss: labels are 0/1 and
/// L = sum log(1 + exp(-(2y - 1) z)) with margin z = offset + A w.
struct PruneProblem {
    Matrix A;
    UsageMatrix G;
    Vector u;
    LossKind loss = LossKind::squared;
    Vector y;
    double offset = 0.0;
    double lambda = 0.0;

    Index rows() const { return A.rows(); }
    Index trees() const { return A.cols(); }
    Index features() const { return G.rows(); }

    void validate() const {
        if (A.rows() != y.size()) throw UsageError("A rows must match label count");
        if (u.size() != A.cols() || G.cols() != A.cols()) throw UsageError("A, G and u must agree on tree count");
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be finite and >= 0");
        if (!A.allFinite() || !y.allFinite()) throw NumericalError("prune problem contains non-finite values");
        if ((u.array() < 0.0).any()) throw UsageError("penalty weights must be >= 0");
        if (loss == LossKind::logistic)
            for (Index i = 0; i < y.size(); ++i)
                if (y[i] != 0.0 && y[i] != 1.0) throw UsageError("logistic loss needs 0/1 labels");
    }

    Vector margin(const Vector& w) const { return (A * w).array() + offset; }

    /// (1/m) L
    double smooth_loss(const Vector& w) const {
        const Vector z = margin(w);
        if (loss == LossKind::squared) return (y - z).squaredNorm() / static_cast<double>(rows());
        return logistic_loss(y, z);
    }

    Vector gradient(const Vector& w) const {
        const Vector z = margin(w);
        const double inv_m = 1.0 / static_cast<double>(rows());
        if (loss == LossKind::squared) return (-2.0 * inv_m) * (A.transpose() * (y - z));
        Vector r(rows());
        for (Index i = 0; i < rows(); ++i) {
            const double s = 2.0 * y[i] - 1.0;
            r[i] = -s * sigmoid(-s * z[i]);
        }
        return inv_m * (A.transpose() * r);
    }

    double penalty(const Vector& w) const { return lambda * u.dot(w); }
    double objective(const Vector& w) const { return smooth_loss(w) + penalty(w); }

    /// Largest stationarity violation: |g + lambda u| on the support, the negative part of it off the support.
    double kkt_residual(const Vector& w, const Vector& grad) const {
        double r = 0.0;
        for (Index i = 0; i < trees(); ++i) {
            const double s = grad[i] + lambda * u[i];
            r = std::max(r, w[i] > 0.0 ? std::abs(s) : std::max(0.0, -s));
        }
        return r;
    }
    double kkt_residual(const Vector& w) const { return kkt_residual(w, gradient(w)); }

    /// Smallest lambda for which w = 0 satisfies the optimality conditions (penalized trees only).
    double lambda_max() const {
        const Vector g = gradient(Vector::Zero(trees()));
        double lm = 0.0;
        for (Index i = 0; i < trees(); ++i)
            if (u[i] > 0.0) lm = std::max(lm, std::max(0.0, -g[i]) / u[i]);
        return lm;
    }
};

/// Fixed margin offset used by the pruning loss for a forest.
inline double problem_offset(const Forest& forest) {
    if (forest.mode == GrowMode::bag_boosted) return forest.offset;
    if (forest.task == Task::regression) return 0.0;
    return logit(std::clamp(forest.offset, kProbClip, 1.0 - kProbClip));
}

/// Pruning problem for `forest` on the rows of `data`: column i of A is tree i's output, column i
/// of G its used-feature indicator, u_i its cost under `costs`.
inline PruneProblem build_problem(const Forest& forest, const Dataset& data, const CostSpec& costs, LossKind loss,
                                  double lambda = 0.0) {
    if (forest.empty()) throw UsageError("cannot prune an empty forest");
    if (forest.n_features != data.cols()) throw UsageError("forest and dataset disagree on feature count");
    if ((loss == LossKind::logistic) != (data.task == Task::classification))
        throw UsageError("loss must be logistic for classification and squared for regression");
    costs.validate(data.cols());

    PruneProblem prob;
    const Index n = static_cast<Index>(forest.size());
    prob.A.resize(data.rows(), n);
    prob.G = UsageMatrix::Zero(data.cols(), n);
    prob.u.resize(n);
    for (Index i = 0; i < n; ++i) {
        const auto& tree = forest.trees[static_cast<std::size_t>(i)];
        prob.A.col(i) = tree.predict(data.features);
        for (std::size_t j = 0; j < tree.used.size(); ++j) prob.G(static_cast<Index>(j), i) = tree.used[j];
        prob.u[i] = costs.tree_cost(tree.used);
    }
    prob.loss = loss;
    prob.y = data.labels;
    prob.offset = problem_offset(forest);
    prob.lambda = lambda;
    return prob;
}

/// {j : (G w)_j > 0}
inline std::vector<Index> selected_features(const Vector& w, const UsageMatrix& G) {
    std::vector<Index> out;
    for (Index j = 0; j < G.rows(); ++j) {
        double s = 0.0;
        for (Index i = 0; i < G.cols(); ++i)
            if (G(j, i)) s += w[i];
        if (s > 0.0) out.push_back(j);
    }
    return out;
}

struct SolverOptions {
    double tolerance = 1e-6;
    int max_iterations = 10000;
    /// Entries below truncation * max(w) are set to exactly zero after solving.
    double truncation = 1e-8;
    bool record_history = false;
    std::optional<Vector> warm_start;
};

struct Solution {
    Vector w;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool certified = false;
    std::vector<Index> selected;
    /// Objective after each accepted iterate (only with SolverOptions::record_history).
    std::vector<double> history;
};

namespace detail {

/// Largest eigenvalue of A'A by power iteration.
inline double spectral_norm_sq(const Matrix& A) {
    if (A.cols() == 0) return 0.0;
    Vector v = Vector::Ones(A.cols()) / std::sqrt(static_cast<double>(A.cols()));
    double est = 0.0;
    for (int it = 0; it < 50; ++it) {
        Vector w = A.transpose() * (A * v);
        const double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        v = w / nrm;
        if (std::abs(nrm - est) <= 1e-6 * nrm) return nrm;
        est = nrm;
    }
    return est;
}

/// Projected-Newton / active-set refinement. Starting from a feasible point, repeatedly minimizes
/// the objective over the current support with Newton's method, steps back to the feasible boundary
/// when a coordinate would turn negative, and adds the most violating zero coordinate.
class ActiveSetPolish {
public:
    explicit ActiveSetPolish(const PruneProblem& prob) : prob_(prob) {}

    /// Returns true and overwrites `w` when a KKT-certified point is reached.
    bool run(Vector& w, double tol) {
        const Index n = prob_.trees();
        std::vector<Index> support;
        for (Index i = 0; i < n; ++i)
            if (w[i] > 0.0) support.push_back(i);
        Vector x = w;
        const double start = prob_.objective(x);
        const int max_outer = static_cast<int>(3 * n + 10);
        for (int outer = 0; outer < max_outer; ++outer) {
            for (int inner = 0; inner <= static_cast<int>(n) && !support.empty(); ++inner) {
                Vector v = restricted_minimizer(support, x);
                if (!v.allFinite()) return false;
                double alpha = 1.0;
                std::size_t blocking = support.size();
                for (std::size_t k = 0; k < support.size(); ++k) {
                    const double xi = x[support[k]], vi = v[static_cast<Index>(k)];
                    if (vi <= 0.0 && xi / (xi - vi) < alpha) {
                        alpha = xi / (xi - vi);
                        blocking = k;
                    }
                }
                std::vector<Index> keep;
                for (std::size_t k = 0; k < support.size(); ++k) {
                    const Index i = support[k];
                    const double vi = v[static_cast<Index>(k)];
                    x[i] = alpha >= 1.0 ? vi : x[i] + alpha * (vi - x[i]);
                    if (k == blocking || x[i] <= 0.0)
                        x[i] = 0.0;
                    else
                        keep.push_back(i);
                }
                support.swap(keep);
                if (alpha >= 1.0) break;
            }
            const Vector g = prob_.gradient(x);
            Index worst = -1;
            double worst_val = -tol;
            for (Index i = 0; i < n; ++i) {
                if (x[i] > 0.0) continue;
                const double s = g[i] + prob_.lambda * prob_.u[i];
                if (s < worst_val) {
                    worst_val = s;
                    worst = i;
                }
            }
            if (worst < 0) {
                if (prob_.kkt_residual(x, g) <= tol && prob_.objective(x) <= start + 1e-12 * (1.0 + std::abs(start))) {
                    w = x;
                    return true;
                }
                return false;
            }
            if (std::find(support.begin(), support.end(), worst) != support.end()) return false;
            support.push_back(worst);
            std::sort(support.begin(), support.end());
        }
        return false;
    }

private:
    /// Unconstrained minimizer of the objective over coordinates `S` (others held at zero).
    Vector restricted_minimizer(const std::vector<Index>& S, const Vector& x) {
        const Index k = static_cast<Index>(S.size());
        Matrix As(prob_.rows(), k);
        Vector us(k), v(k);
        for (Index c = 0; c < k; ++c) {
            As.col(c) = prob_.A.col(S[static_cast<std::size_t>(c)]);
            us[c] = prob_.u[S[static_cast<std::size_t>(c)]];
            v[c] = x[S[static_cast<std::size_t>(c)]];
        }
        const double inv_m = 1.0 / static_cast<double>(prob_.rows());
        const double lam = prob_.lambda;
        const Vector& y = prob_.y;

        auto solve_system = [&](Matrix H, const Vector& rhs) -> Vector {
            const double ridge = 1e-12 * std::max(1e-300, H.diagonal().cwiseAbs().maxCoeff());
            H.diagonal().array() += ridge;
            Eigen::LDLT<Matrix> ldlt(H);
            return ldlt.solve(rhs);
        };

        if (prob_.loss == LossKind::squared) {
            const Vector r = (y.array() - prob_.offset).matrix();
            Matrix H = (2.0 * inv_m) * (As.transpose() * As);
            const Vector rhs = (2.0 * inv_m) * (As.transpose() * r) - lam * us;
            return solve_system(std::move(H), rhs);
        }

        auto restricted_obj = [&](const Vector& vv) {
            const Vector z = (As * vv).array() + prob_.offset;
            return logistic_loss(y, z) + lam * us.dot(vv);
        };
        double f = restricted_obj(v);
        for (int it = 0; it < 60; ++it) {
            const Vector z = (As * v).array() + prob_.offset;
            Vector r(prob_.rows()), d(prob_.rows());
            for (Index i = 0; i < prob_.rows(); ++i) {
                const double s = 2.0 * y[i] - 1.0;
                const double q = sigmoid(-s * z[i]);
                r[i] = -s * q;
                d[i] = q * (1.0 - q);
            }
            const Vector grad = inv_m * (As.transpose() * r) + lam * us;
            if (grad.cwiseAbs().maxCoeff() <= 1e-13) break;
            Matrix H = inv_m * (As.transpose() * d.asDiagonal() * As);
            const Vector step = solve_system(std::move(H), -grad);
            double t = 1.0;
            const double slope = grad.dot(step);
            bool moved = false;
            for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
                const Vector cand = v + t * step;
                const double fc = restricted_obj(cand);
                if (fc <= f + 1e-4 * t * slope) {
                    v = cand;
                    f = fc;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        return v;
    }

    const PruneProblem& prob_;
};

inline Solution finish(const PruneProblem& prob, Vector w, int iterations, double tol, double truncation,
                       std::vector<double> history) {
    const double wmax = w.size() > 0 ? w.maxCoeff() : 0.0;
    for (Index i = 0; i < w.size(); ++i)
        if (w[i] < truncation * wmax || w[i] < 0.0) w[i] = 0.0;
    Solution sol;
    const Vector g = prob.gradient(w);
    sol.kkt_residual = prob.kkt_residual(w, g);
    sol.certified = sol.kkt_residual <= tol;
    sol.objective = prob.objective(w);
    sol.iterations = iterations;
    sol.selected = selected_features(w, prob.G);
    sol.w = std::move(w);
    sol.history = std::move(history);
    return sol;
}

} // namespace detail

/// Monotone accelerated proximal gradient (FISTA with backtracking) on the non-negative weighted
/// LASSO, with periodic active-set Newton refinement. Stops once the KKT residual is <= tolerance.
inline Solution solve(const PruneProblem& prob, const SolverOptions& opt = {}) {
    prob.validate();
    const Index n = prob.trees();
    const double lam = prob.lambda;
    const Vector lu = lam * prob.u;

    Vector x = Vector::Zero(n);
    if (opt.warm_start) {
        if (opt.warm_start->size() != n) throw UsageError("warm start has the wrong length");
        x = opt.warm_start->cwiseMax(0.0);
    }
    std::vector<double> history;
    double Fx = prob.objective(x);
    if (!std::isfinite(Fx)) throw NumericalError("objective is not finite at the starting point");
    if (opt.record_history) history.push_back(Fx);

    const double sigma2 = detail::spectral_norm_sq(prob.A);
    const double m = static_cast<double>(prob.rows());
    double L = prob.loss == LossKind::squared ? 2.0 * sigma2 / m : sigma2 / (4.0 * m);
    if (!(L > 0.0)) L = 1.0;

    {
        const Vector g = prob.gradient(x);
        if (!g.allFinite()) throw NumericalError("gradient contains NaN");
        if (prob.kkt_residual(x, g) <= opt.tolerance)
            return detail::finish(prob, x, 0, opt.tolerance, opt.truncation, std::move(history));
    }

    detail::ActiveSetPolish polish(prob);
    Vector yk = x, x_prev = x;
    double t = 1.0;
    int next_polish = 5;
    int it = 0;
    while (it < opt.max_iterations) {
        ++it;
        const Vector g = prob.gradient(yk);
        if (!g.allFinite()) throw NumericalError("gradient contains NaN");
        const double fy = prob.smooth_loss(yk);
        Vector z;
        double fz = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            z = (yk - (g + lu) / L).cwiseMax(0.0);
            fz = prob.smooth_loss(z);
            const Vector d = z - yk;
            if (fz <= fy + g.dot(d) + 0.5 * L * d.squaredNorm() + 1e-15 * std::abs(fy)) break;
            L *= 2.0;
        }
        const double Fz = fz + lu.dot(z);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        x_prev = x;
        if (Fz <= Fx) {
            x = z;
            Fx = Fz;
        }
        yk = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
        if (opt.record_history) history.push_back(Fx);

        if (it % 10 == 0 || it == next_polish) {
            const Vector gx = prob.gradient(x);
            if (prob.kkt_residual(x, gx) <= opt.tolerance) break;
        }
        if (it == next_polish) {
            next_polish = it + std::min(2 * it, 400);
            Vector cand = x;
            if (polish.run(cand, opt.tolerance)) {
                const double Fc = prob.objective(cand);
                if (Fc <= Fx + 1e-12 * (1.0 + std::abs(Fx))) {
                    x = cand;
                    Fx = std::min(Fx, Fc);
                    if (opt.record_history) history.push_back(Fx);
                    break;
                }
            }
        }
    }
    return detail::finish(prob, x, it, opt.tolerance, opt.truncation, std::move(history));
}

struct SketchOptions {
    /// Use S = I (requires rows == m); for debugging.
    bool identity = false;
};

/// Gaussian sketch of a squared-loss problem: (A, y - offset) -> c (S A, S (y - offset)) with
/// S_ij ~ N(0, 1/s) and c = sqrt(s / m). The factor keeps the sketched loss, averaged over its s rows,
/// an unbiased estimate of the full loss averaged over m rows, so lambda means the same in both.
inline PruneProblem sketch_problem(const PruneProblem& prob, Index s, Rng& rng, const SketchOptions& sk = {}) {
    if (prob.loss != LossKind::squared) throw UsageError("sketching is only defined for squared loss");
    const Index m = prob.rows();
    if (s < 1 || s > m) throw UsageError("sketch rows must lie in [1, m]");
    PruneProblem out;
    out.G = prob.G;
    out.u = prob.u;
    out.loss = LossKind::squared;
    out.lambda = prob.lambda;
    out.offset = 0.0;
    const Vector centered = (prob.y.array() - prob.offset).matrix();
    if (sk.identity) {
        if (s != m) throw UsageError("identity sketch requires s = m");
        out.A = prob.A;
        out.y = centered;
        return out;
    }
    Matrix S(s, m);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(s)));
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < s; ++i) S(i, j) = normal(rng);
    const double c = std::sqrt(static_cast<double>(s) / static_cast<double>(m));
    out.A = c * (S * prob.A);
    out.y = c * (S * centered);
    return out;
}

inline Solution sketch_solve(const PruneProblem& prob, Index s, Rng& rng, const SolverOptions& opt = {},
                             const SketchOptions& sk = {}) {
    return solve(sketch_problem(prob, s, rng, sk), opt);
}

} // namespace controlburn
