#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "controlburn/dataset.hpp"
#include "controlburn/grow.hpp"

namespace controlburn::synthetic {

/// Binary classification: `informative` standard-normal signals with logit = coef * sum(signals),
/// plus `noise` independent standard-normal columns. Columns are named sig<i> then noise<i>.
inline Dataset logistic_signals(Index m, Index informative, Index noise, double coef, Rng& rng) {
    Dataset d;
    d.task = Task::classification;
    const Index p = informative + noise;
    d.features.resize(m, p);
    d.labels.resize(m);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index i = 0; i < m; ++i) {
        double z = 0.0;
        for (Index j = 0; j < p; ++j) {
            d.features(i, j) = normal(rng);
            if (j < informative) z += coef * d.features(i, j);
        }
        d.labels[i] = unif(rng) < sigmoid(z) ? 1.0 : 0.0;
    }
    for (Index j = 0; j < informative; ++j) d.names.push_back("sig" + std::to_string(j));
    for (Index j = 0; j < noise; ++j) d.names.push_back("noise" + std::to_string(j));
    return d;
}

/// Binary classification on Bernoulli(1/2) features: logit = coef * (sum of the first `informative`
/// features - informative / 2); the remaining `noise` features are independent of y.
inline Dataset binary_signals(Index m, Index informative, Index noise, double coef, Rng& rng) {
    Dataset d;
    d.task = Task::classification;
    const Index p = informative + noise;
    d.features.resize(m, p);
    d.labels.resize(m);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index i = 0; i < m; ++i) {
        double z = -0.5 * coef * static_cast<double>(informative);
        for (Index j = 0; j < p; ++j) {
            d.features(i, j) = coin(rng) ? 1.0 : 0.0;
            if (j < informative) z += coef * d.features(i, j);
        }
        d.labels[i] = unif(rng) < sigmoid(z) ? 1.0 : 0.0;
    }
    for (Index j = 0; j < informative; ++j) d.names.push_back("sig" + std::to_string(j));
    for (Index j = 0; j < noise; ++j) d.names.push_back("noise" + std::to_string(j));
    return d;
}

/// Two spherical Gaussians N(+a, I) and N(-a, I) with a = 2 / sqrt(p) per coordinate; every feature
/// carries the same independent signal.
inline Dataset two_norm(Index m, Index p, Rng& rng) {
    Dataset d;
    d.task = Task::classification;
    d.features.resize(m, p);
    d.labels.resize(m);
    const double a = 2.0 / std::sqrt(static_cast<double>(p));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (Index i = 0; i < m; ++i) {
        const bool pos = coin(rng);
        d.labels[i] = pos ? 1.0 : 0.0;
        for (Index j = 0; j < p; ++j) d.features(i, j) = normal(rng) + (pos ? a : -a);
    }
    for (Index j = 0; j < p; ++j) d.names.push_back("x" + std::to_string(j));
    return d;
}

/// Friedman #1 regression on U(0,1)^p (p >= 5) with uniform noise on [-noise, noise], so labels are bounded.
inline Dataset friedman1(Index m, Index p, double noise, Rng& rng) {
    if (p < 5) throw UsageError("friedman1 needs at least 5 features");
    Dataset d;
    d.task = Task::regression;
    d.features.resize(m, p);
    d.labels.resize(m);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < p; ++j) d.features(i, j) = unif(rng);
        const auto x = d.features.row(i);
        d.labels[i] = 10.0 * std::sin(std::numbers::pi * x(0) * x(1)) + 20.0 * (x(2) - 0.5) * (x(2) - 0.5) +
                      10.0 * x(3) + 5.0 * x(4) + noise * (2.0 * unif(rng) - 1.0);
    }
    for (Index j = 0; j < p; ++j) d.names.push_back("x" + std::to_string(j));
    return d;
}

/// Appends an independent U(0,1) column named `name`.
inline Dataset append_uniform_column(const Dataset& data, const std::string& name, Rng& rng) {
    Dataset out = data;
    out.features.conservativeResize(Eigen::NoChange, data.cols() + 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index i = 0; i < data.rows(); ++i) out.features(i, data.cols()) = unif(rng);
    out.names.push_back(name);
    out.validate();
    return out;
}

} // namespace controlburn::synthetic
