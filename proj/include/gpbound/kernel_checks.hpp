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

#ifndef GPBOUND_KERNEL_CHECKS_HPP
#define GPBOUND_KERNEL_CHECKS_HPP

#include "gpbound/kernels.hpp"

#include <optional>
#include <random>

namespace gpbound {

// Randomized certificates for the two hyperparameter-space properties the
// bounds rely on: componentwise monotonicity and quasi-concavity along
// line segments. Both accept either a KernelFamily or an arbitrary callable
// f(phi, x, x') so that tests can inject counterexamples.

struct CheckOptions {
    std::uint64_t seed = 0x5eed;
    /// Inputs are drawn uniformly from [-radius, radius]^d, or [0, radius]^d
    /// for families restricted to the nonnegative orthant.
    double input_radius = 10.0;
    /// Input dimension for families that do not fix it (all but SE-ARD).
    int input_dim = 1;
    /// Grid points per segment in the quasi-concavity check.
    int line_points = 64;
    /// Relative perturbation for the monotonicity check.
    double relative_step = 1e-3;
    /// A decrease larger than this counts as a violation.
    double tolerance = 1e-12;
};

struct CheckWitness {
    Vector phi;        ///< base point (monotone) or segment start (quasi-concave)
    Vector phi_other;  ///< perturbed point or segment end
    Vector x;
    Vector x_prime;
    int coordinate = -1;  ///< perturbed coordinate (monotone check only)
    double t = 0.0;       ///< segment parameter of the interior dip (quasi-concave check only)
    double value = 0.0;
    double value_other = 0.0;
};

struct CheckReport {
    std::string property;
    bool passed = true;
    int samples = 0;
    std::optional<CheckWitness> witness;
};

namespace detail {

inline Vector sample_in_box(const HyperRectangle& box, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector phi(box.dim());
    for (Index i = 0; i < box.dim(); ++i) phi[i] = box.lower[i] + u(rng) * (box.upper[i] - box.lower[i]);
    return phi;
}

inline Vector sample_input(int dim, bool nonnegative, double radius, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(nonnegative ? 0.0 : -radius, radius);
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x[i] = u(rng);
    return x;
}

inline void require_budget(int budget) {
    if (budget < 1) throw DomainError("sample budget must be >= 1");
}

}  // namespace detail

/// Draws `budget` tuples (phi, x, x', i, delta) and checks
/// f(phi + delta e_i) - f(phi) > -tolerance. Reports the first violation.
template <typename KernelFn>
CheckReport check_componentwise_monotone(KernelFn&& f, const HyperRectangle& box, int input_dim, bool nonneg_inputs,
                                         int budget, const CheckOptions& opts = {}) {
    detail::require_budget(budget);
    std::mt19937_64 rng(opts.seed);
    CheckReport report{"componentwise_monotone", true, 0, std::nullopt};
    if (box.dim() == 0) return report;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(box.dim()) - 1);
    for (int s = 0; s < budget; ++s) {
        const Vector phi = detail::sample_in_box(box, rng);
        const Vector x = detail::sample_input(input_dim, nonneg_inputs, opts.input_radius, rng);
        const Vector xp = detail::sample_input(input_dim, nonneg_inputs, opts.input_radius, rng);
        const int i = pick(rng);
        Vector bumped = phi;
        bumped[i] += opts.relative_step * std::max(std::abs(phi[i]), kPhiFloor);
        const double before = f(phi, x, xp);
        const double after = f(bumped, x, xp);
        ++report.samples;
        if (!(after - before > -opts.tolerance)) {
            report.passed = false;
            report.witness = CheckWitness{phi, bumped, x, xp, i, 0.0, before, after};
            return report;
        }
    }
    return report;
}

inline CheckReport check_componentwise_monotone(const KernelFamily& fam, const HyperRectangle& box, int budget,
                                                const CheckOptions& opts = {}) {
    fam.validate();
    box.validate_for(fam);
    const int dim = fam.kind == Family::SquaredExponentialArd ? fam.n_x : opts.input_dim;
    auto k = [&fam](const Vector& phi, const Vector& x, const Vector& xp) {
        return detail::evaluate(fam, phi, x, xp);
    };
    return check_componentwise_monotone(k, box, dim, fam.input_constraint() == InputConstraint::NonnegativeOrthant,
                                        budget, opts);
}

/// For random segments [phi_a, phi_b] inside the box and random (x, x'),
/// evaluates t -> f((1-t) phi_a + t phi_b) on a uniform grid and rejects any
/// interior point lying strictly below the smaller of the best values on
/// either side of it (the discrete form of quasi-concavity).
template <typename KernelFn>
CheckReport check_line_quasiconcave(KernelFn&& f, const HyperRectangle& box, int input_dim, bool nonneg_inputs,
                                    int budget, const CheckOptions& opts = {}) {
    detail::require_budget(budget);
    std::mt19937_64 rng(opts.seed);
    CheckReport report{"line_quasiconcave", true, 0, std::nullopt};
    const int n = std::max(3, opts.line_points);
    std::vector<double> values(n), prefix(n), suffix(n);
    for (int s = 0; s < budget; ++s) {
        const Vector a = detail::sample_in_box(box, rng);
        const Vector b = detail::sample_in_box(box, rng);
        const Vector x = detail::sample_input(input_dim, nonneg_inputs, opts.input_radius, rng);
        const Vector xp = detail::sample_input(input_dim, nonneg_inputs, opts.input_radius, rng);
        for (int g = 0; g < n; ++g) {
            const double t = static_cast<double>(g) / (n - 1);
            values[g] = f(Vector((1.0 - t) * a + t * b), x, xp);
        }
        prefix[0] = values[0];
        for (int g = 1; g < n; ++g) prefix[g] = std::max(prefix[g - 1], values[g]);
        suffix[n - 1] = values[n - 1];
        for (int g = n - 2; g >= 0; --g) suffix[g] = std::max(suffix[g + 1], values[g]);
        ++report.samples;
        for (int g = 1; g + 1 < n; ++g) {
            const double floor = std::min(prefix[g - 1], suffix[g + 1]);
            const double tol = opts.tolerance * std::max(1.0, std::abs(floor));
            if (values[g] < floor - tol) {
                const double t = static_cast<double>(g) / (n - 1);
                report.passed = false;
                report.witness = CheckWitness{a, b, x, xp, -1, t, values[g], floor};
                return report;
            }
        }
    }
    return report;
}

inline CheckReport check_line_quasiconcave(const KernelFamily& fam, const HyperRectangle& box, int budget,
                                           const CheckOptions& opts = {}) {
    fam.validate();
    box.validate_for(fam);
    const int dim = fam.kind == Family::SquaredExponentialArd ? fam.n_x : opts.input_dim;
    auto k = [&fam](const Vector& phi, const Vector& x, const Vector& xp) {
        return detail::evaluate(fam, phi, x, xp);
    };
    return check_line_quasiconcave(k, box, dim, fam.input_constraint() == InputConstraint::NonnegativeOrthant,
                                   budget, opts);
}

}  // namespace gpbound

#endif  // GPBOUND_KERNEL_CHECKS_HPP
