/*
 * Copyright 2026 The gpbound Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef GPBOUND_GPSSM_SIM_HPP
#define GPBOUND_GPSSM_SIM_HPP

#include "gpbound/bound_engine.hpp"
#include "gpbound/hyperparameter_fit.hpp"

#include <cstdio>
#include <random>

namespace gpbound {

// One-dimensional GP state-space experiment: a Matern ground truth
// x_{t+1} = f(x_t), a squared-exponential model fitted to a handful of
// noisy transitions, and MSPE / bound curves for several candidate sets.

struct IntervalScale {
    double lower_factor = 1.0;
    double upper_factor = 1.0;
};

struct RolloutConfig {
    double x0 = 1.0;
    int steps = 10;
    /// Propagate the state with the truth posterior mean instead of the estimate's.
    bool follow_truth = false;
    /// Index of the interval variant whose bound is reported along the rollout.
    std::size_t variant = 0;
};

struct ScenarioConfig {
    KernelSpec truth_kernel{KernelFamily::matern(1), (Vector(2) << 5.2, 1.6).finished()};
    KernelFamily estimate_family = KernelFamily::se_ard(1);
    int n_train = 10;
    double train_lower = -10.0;
    double train_upper = 15.0;
    double noise_var = 0.01;
    double grid_lower = -10.0;
    double grid_upper = 15.0;
    int grid_points = 251;
    /// Boxes [lower_factor * phi_true, upper_factor * phi_true] for the truth family.
    std::vector<IntervalScale> interval_scales{{0.9, 1.1}, {0.0, 2.0}, {0.0, 3.0}};
    /// Entries shared by every variant.
    std::vector<std::pair<KernelFamily, HyperRectangle>> fixed_candidates = default_fixed_candidates();
    FitOptions fit{};
    RolloutConfig rollout{};
    std::uint64_t seed = 1;
    int certificate_budget = 200;

    static std::vector<std::pair<KernelFamily, HyperRectangle>> default_fixed_candidates() {
        auto box = [](double l0, double s0, double l1, double s1) {
            return HyperRectangle((Vector(2) << l0, s0).finished(), (Vector(2) << l1, s1).finished());
        };
        return {{KernelFamily::matern(0), box(1.0, 1.5, 10.0, 2.0)},
                {KernelFamily::matern(2), box(1.0, 1.5, 10.0, 2.0)},
                {KernelFamily::rational_quadratic(1), box(1.0, 0.1, 20.0, 1.0)},
                {KernelFamily::se_ard(1), box(0.1, 0.01, 10.0, 1.0)}};
    }

    void validate() const {
        truth_kernel.validate();
        estimate_family.validate();
        if (n_train < 1) throw ConfigError("n_train must be >= 1");
        if (!(train_lower < train_upper)) throw ConfigError("train_range must satisfy lower < upper");
        if (!(grid_lower <= grid_upper) || grid_points < 1) throw ConfigError("invalid eval grid");
        if (!(noise_var >= 0.0)) throw ConfigError("noise_var must be >= 0");
        if (interval_scales.empty()) throw ConfigError("at least one interval scale is required");
        for (const auto& s : interval_scales)
            if (!(s.lower_factor >= 0.0) || !(s.upper_factor > 0.0) || s.lower_factor > s.upper_factor)
                throw ConfigError("interval scale factors must satisfy 0 <= lower <= upper, upper > 0");
        if (rollout.steps < 0) throw ConfigError("rollout steps must be >= 0");
        if (rollout.variant >= interval_scales.size()) throw ConfigError("rollout variant index out of range");
    }
};

struct Scenario {
    ScenarioConfig config;
    GpModel truth;
    GpModel estimate;
    FitResult fit;
    std::vector<CandidateSet> variants;
    std::vector<std::string> variant_labels;
};

namespace detail {

inline std::string format_factor(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace detail

/// The truth-family box [lf * phi, uf * phi], closed at the family floor.
[[nodiscard]] inline HyperRectangle scaled_box(const KernelSpec& truth, const IntervalScale& s) {
    const double floor = std::max(truth.family.phi_floor(), kPhiFloor);
    return {(s.lower_factor * truth.phi).cwiseMax(floor), s.upper_factor * truth.phi};
}

/// Samples training inputs and a joint prior draw of noisy outputs from the
/// truth, fits the estimate and assembles one candidate set per interval scale.
[[nodiscard]] inline Scenario generate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario sc;
    sc.config = cfg;

    std::mt19937_64 input_rng(stream_seed(cfg.seed, 0));
    std::uniform_real_distribution<double> uniform(cfg.train_lower, cfg.train_upper);
    Matrix X(1, cfg.n_train);
    for (int j = 0; j < cfg.n_train; ++j) X(0, j) = uniform(input_rng);

    const Matrix K = gram(cfg.truth_kernel, X, cfg.noise_var);
    const Matrix L = CholeskyFactor::factorize(K, cfg.noise_var == 0.0).lower();
    std::mt19937_64 output_rng(stream_seed(cfg.seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(cfg.n_train);
    for (int j = 0; j < cfg.n_train; ++j) z[j] = normal(output_rng);
    const Matrix Y = L * z;

    const Dataset data(X, Y, Vector::Constant(1, cfg.noise_var));
    sc.truth = GpModel(cfg.truth_kernel, data);

    FitOptions fit = cfg.fit;
    fit.seed = stream_seed(cfg.seed, 2);
    sc.fit = fit_hyperparameters(cfg.estimate_family, X, Y.col(0), cfg.noise_var, fit);
    sc.estimate = GpModel(sc.fit.spec, data);

    CandidateOptions copts;
    copts.certificate_budget = cfg.certificate_budget;
    copts.check.seed = stream_seed(cfg.seed, 3);
    copts.check.input_radius = std::max({std::abs(cfg.train_lower), std::abs(cfg.train_upper),
                                         std::abs(cfg.grid_lower), std::abs(cfg.grid_upper)});
    for (const auto& s : cfg.interval_scales) {
        std::vector<std::pair<KernelFamily, HyperRectangle>> entries{
            {cfg.truth_kernel.family, scaled_box(cfg.truth_kernel, s)}};
        entries.insert(entries.end(), cfg.fixed_candidates.begin(), cfg.fixed_candidates.end());
        sc.variants.emplace_back(entries, copts);
        sc.variant_labels.push_back(detail::format_factor(s.lower_factor) + "_" +
                                    detail::format_factor(s.upper_factor));
    }
    return sc;
}

/// Uniform 1-D grid, endpoints included.
[[nodiscard]] inline std::vector<Vector> linear_grid(double lower, double upper, int points) {
    std::vector<Vector> grid;
    grid.reserve(static_cast<std::size_t>(std::max(points, 0)));
    for (int n = 0; n < points; ++n) {
        const double t = points == 1 ? 0.0 : static_cast<double>(n) / (points - 1);
        grid.push_back(Vector::Constant(1, n + 1 == points && points > 1 ? upper : lower + t * (upper - lower)));
    }
    return grid;
}

struct ModelCurveRow {
    double x = 0.0;
    double true_mean = 0.0;
    double true_var = 0.0;
    double est_mean = 0.0;
    double est_var = 0.0;
};

/// Posterior mean/variance of truth and estimate over the grid.
[[nodiscard]] inline std::vector<ModelCurveRow> model_curves(const Scenario& sc, const std::vector<Vector>& grid) {
    std::vector<ModelCurveRow> rows;
    rows.reserve(grid.size());
    for (const auto& x : grid) {
        const auto t = sc.truth.predict(x);
        const auto e = sc.estimate.predict(x);
        rows.push_back({x[0], t.mean[0], t.var[0], e.mean[0], e.var[0]});
    }
    return rows;
}

struct StateSpaceRow {
    double x = 0.0;
    double exact_mspe = 0.0;
    double est_var = 0.0;
    std::vector<double> bounds;  ///< closed-form bound per interval variant
};

/// Exact MSPE, the estimate's variance and the closed-form bound of every
/// variant over the grid.
[[nodiscard]] inline std::vector<StateSpaceRow> state_space_curves(const Scenario& sc, const std::vector<Vector>& grid,
                                                                  unsigned threads = 1) {
    BoundOptions opts;
    opts.method = BoundMethod::ClosedForm;
    std::vector<BoundEngine> engines;
    engines.reserve(sc.variants.size());
    for (const auto& v : sc.variants) engines.emplace_back(v, sc.estimate, opts);

    std::vector<StateSpaceRow> rows(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t n) {
        const Vector& x = grid[n];
        StateSpaceRow r;
        r.x = x[0];
        r.exact_mspe = exact_mspe(sc.truth, sc.estimate, x);
        r.est_var = posterior_variance_trace(sc.estimate, x);
        for (const auto& e : engines) r.bounds.push_back(e.closed_form_bound(x));
        rows[n] = std::move(r);
    });
    return rows;
}

struct RolloutTrace {
    std::vector<double> states;
    std::vector<double> exact_mspe;
    std::vector<double> est_var;
    std::vector<double> bound;
    /// Set when the state left [grid_lower, grid_upper] or became non-finite.
    bool truncated = false;
};

/// Iterates the mean dynamics x_{t+1} = mu(x_t) and evaluates the pointwise
/// error quantities at every visited state.
[[nodiscard]] inline RolloutTrace rollout_curves(const Scenario& sc, const CandidateSet& cands, double x0, int steps,
                                                 bool follow_truth = false) {
    if (steps < 0) throw ConfigError("rollout steps must be >= 0");
    BoundOptions opts;
    opts.method = BoundMethod::ClosedForm;
    const BoundEngine engine(cands, sc.estimate, opts);
    const GpModel& dynamics = follow_truth ? sc.truth : sc.estimate;
    RolloutTrace trace;
    double state = x0;
    for (int t = 0; t <= steps; ++t) {
        if (!std::isfinite(state) || state < sc.config.grid_lower || state > sc.config.grid_upper) {
            trace.truncated = true;
            break;
        }
        const Vector x = Vector::Constant(1, state);
        trace.states.push_back(state);
        trace.exact_mspe.push_back(exact_mspe(sc.truth, sc.estimate, x));
        trace.est_var.push_back(posterior_variance_trace(sc.estimate, x));
        trace.bound.push_back(engine.closed_form_bound(x));
        state = dynamics.posterior_mean(x)[0];
    }
    return trace;
}

}  // namespace gpbound

#endif  // GPBOUND_GPSSM_SIM_HPP
