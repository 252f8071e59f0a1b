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

#ifndef GPBOUND_HYPERPARAMETER_FIT_HPP
#define GPBOUND_HYPERPARAMETER_FIT_HPP

#include "gpbound/gp_core.hpp"

#include <limits>
#include <random>

namespace gpbound {

struct FitOptions {
    int restarts = 10;
    std::uint64_t seed = 0;
    /// Starting points are drawn log-uniformly from [start_lower, start_upper].
    double start_lower = 0.1;
    double start_upper = 10.0;
    /// The ascent is projected onto [bound_lower, bound_upper] per coordinate.
    double bound_lower = 1e-3;
    double bound_upper = 1e3;
    int max_iterations = 500;
    /// Stop when the projected gradient (log coordinates) has inf-norm below this.
    double gradient_tolerance = 1e-6;
};

struct RestartRecord {
    Vector start_phi;
    Vector final_phi;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    bool failed = false;
    std::string error;
};

struct FitResult {
    KernelSpec spec;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    std::vector<RestartRecord> restarts;
};

namespace detail {

struct LogSpaceObjective {
    const KernelFamily& family;
    const Matrix& X;
    const Vector& y;
    double noise_var;

    /// Returns false when the Gram matrix cannot be factorized at theta.
    bool operator()(const Vector& theta, double& value, Vector& grad) const {
        try {
            const KernelSpec spec(family, theta.array().exp().matrix());
            auto r = log_marginal_likelihood_with_gradient(spec, X, y, noise_var);
            if (!std::isfinite(r.value) || !r.grad_log_phi.allFinite()) return false;
            value = r.value;
            grad = std::move(r.grad_log_phi);
            return true;
        } catch (const IllConditionedGram&) {
            return false;
        }
    }
};

/// Projected gradient ascent with Barzilai-Borwein trial steps and an Armijo
/// backtracking line search, in log-hyperparameter coordinates.
inline RestartRecord ascend(const LogSpaceObjective& objective, Vector theta, const Vector& lo, const Vector& hi,
                            const FitOptions& opts) {
    RestartRecord rec;
    rec.start_phi = theta.array().exp();
    theta = theta.cwiseMax(lo).cwiseMin(hi);
    double f = 0.0;
    Vector g;
    if (!objective(theta, f, g)) {
        rec.failed = true;
        rec.error = "Gram matrix not positive definite at starting point";
        return rec;
    }
    double step = 1.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        rec.iterations = it;
        const Vector projected = (theta + g).cwiseMax(lo).cwiseMin(hi) - theta;
        if (projected.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
            rec.converged = true;
            break;
        }
        bool accepted = false;
        Vector next, g_next;
        double f_next = 0.0;
        for (int ls = 0; ls < 60; ++ls) {
            next = (theta + step * g).cwiseMax(lo).cwiseMin(hi);
            if (objective(next, f_next, g_next) && f_next >= f + 1e-4 * g.dot(next - theta)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No ascent possible at machine precision: numerically stationary.
            rec.converged = true;
            break;
        }
        const Vector s = next - theta;
        const Vector yk = g - g_next;  // gradient change of the minimization problem -f
        const double sy = s.dot(yk);
        step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-8, 1e4) : std::min(step * 2.0, 1e4);
        theta = next;
        f = f_next;
        g = g_next;
        rec.iterations = it + 1;
    }
    rec.final_phi = theta.array().exp();
    rec.log_likelihood = f;
    return rec;
}

}  // namespace detail

/// Multi-start maximization of the log marginal likelihood of one output
/// column. Deterministic for a fixed `opts.seed`.
[[nodiscard]] inline FitResult fit_hyperparameters(const KernelFamily& family, const Matrix& X, const Vector& y,
                                                   double noise_var, const FitOptions& opts = {}) {
    family.validate();
    if (opts.restarts < 1) throw ConfigError("restarts must be >= 1");
    if (X.cols() < 1) throw FitFailed("cannot fit hyperparameters without training data");
    if (y.size() != X.cols()) throw DimensionError("output column length does not match number of inputs");
    if (family.kind == Family::SquaredExponentialArd && X.rows() != family.n_x)
        throw DimensionError("se_ard n_x does not match the training input dimension");
    for (Index j = 0; j < X.cols(); ++j) family.validate_input(X.col(j));

    const double floor = std::max(family.phi_floor(), kPhiFloor);
    if (!(opts.bound_lower >= floor) || !(opts.bound_upper > opts.bound_lower) ||
        !(opts.start_lower > 0.0) || !(opts.start_upper >= opts.start_lower))
        throw ConfigError("invalid hyperparameter search box");

    const Index l = family.num_hyperparameters();
    const Vector lo = Vector::Constant(l, std::log(opts.bound_lower));
    const Vector hi = Vector::Constant(l, std::log(opts.bound_upper));
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(std::log(opts.start_lower), std::log(opts.start_upper));
    const detail::LogSpaceObjective objective{family, X, y, noise_var};

    FitResult result;
    int best = -1;
    for (int r = 0; r < opts.restarts; ++r) {
        Vector theta(l);
        for (Index i = 0; i < l; ++i) theta[i] = u(rng);
        result.restarts.push_back(detail::ascend(objective, theta, lo, hi, opts));
        const auto& rec = result.restarts.back();
        if (!rec.failed && (best < 0 || rec.log_likelihood > result.log_likelihood)) {
            best = r;
            result.log_likelihood = rec.log_likelihood;
        }
    }
    if (best < 0) throw FitFailed("every restart failed to produce a positive definite Gram matrix");
    result.spec = KernelSpec(family, result.restarts[static_cast<std::size_t>(best)].final_phi);
    return result;
}

}  // namespace gpbound

#endif  // GPBOUND_HYPERPARAMETER_FIT_HPP
