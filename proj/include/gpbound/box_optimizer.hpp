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

#ifndef GPBOUND_BOX_OPTIMIZER_HPP
#define GPBOUND_BOX_OPTIMIZER_HPP

#include "gpbound/kernels.hpp"

#include <limits>
#include <random>
#include <sstream>
#include <vector>

namespace gpbound {

enum class Extremum { Max, Min };

struct BoxSearchOptions {
    /// First-order tolerance on the width-scaled projected gradient, relative to max(1, |k|).
    double tolerance = 1e-8;
    int max_iterations = 500;
    /// Random starts in addition to the upper corner, lower corner and center.
    int random_starts = 2;
    std::uint64_t seed = 0x0b0c5eedULL;
};

struct BoxOptimum {
    Vector phi;
    double value = 0.0;
    int iterations = 0;
};

namespace detail {

/// Projected gradient ascent of sign * k(phi, x, x') over the box, with the
/// gradient preconditioned by the squared box widths so that every
/// coordinate moves on the scale of its own interval.
inline BoxOptimum projected_ascent(const KernelFamily& fam, const HyperRectangle& box, const ConstVectorRef& x,
                                   const ConstVectorRef& xp, const Vector& start, double sign,
                                   const BoxSearchOptions& opts) {
    const Vector w = box.width();
    Vector phi = box.project(start);
    double f = sign * evaluate(fam, phi, x, xp);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Vector g = sign * evaluate_gradient(fam, phi, x, xp);
        Vector pg = g;
        for (Index i = 0; i < pg.size(); ++i) {
            const bool pinned_hi = phi[i] >= box.upper[i] && g[i] > 0.0;
            const bool pinned_lo = phi[i] <= box.lower[i] && g[i] < 0.0;
            if (pinned_hi || pinned_lo || w[i] == 0.0) pg[i] = 0.0;
        }
        const double measure = pg.cwiseProduct(w).lpNorm<Eigen::Infinity>();
        if (!(measure > opts.tolerance * std::max(1.0, std::abs(f)))) return {phi, sign * f, it};

        const Vector direction = pg.cwiseProduct(w).cwiseProduct(w);
        double step = 1.0 / measure;  // largest coordinate move equals one box width
        bool improved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Vector trial = box.project(phi + step * direction);
            const double ft = sign * evaluate(fam, trial, x, xp);
            if (ft > f) {
                phi = trial;
                f = ft;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) return {phi, sign * f, it};  // stationary at machine precision
    }
    std::ostringstream os;
    os << "box search for " << fam.describe() << " did not reach first-order tolerance " << opts.tolerance
       << " within " << opts.max_iterations << " iterations (last phi = " << phi.transpose() << ")";
    throw OptimizationError(os.str());
}

inline void validate_box_problem(const KernelFamily& fam, const HyperRectangle& box, const ConstVectorRef& x,
                                 const ConstVectorRef& xp) {
    fam.validate();
    box.validate_for(fam);
    if (x.size() != xp.size()) throw DimensionError("kernel inputs differ in dimension");
    fam.validate_input(x);
    fam.validate_input(xp);
}

}  // namespace detail

/// Extremum of phi -> k(phi, x, x') over a hyperparameter box.
///
/// Max mode runs projected ascent from the upper corner, the lower corner,
/// the center and `random_starts` random points and keeps the best; for
/// pseudo-concave kernels every first-order point is a global maximum, the
/// extra starts only guard against numerically flat regions. Min mode
/// enumerates all corners and refines the best one by projected descent.
[[nodiscard]] inline BoxOptimum maximize_over_box(const KernelFamily& fam, const HyperRectangle& box,
                                                  const ConstVectorRef& x, const ConstVectorRef& xp,
                                                  Extremum mode = Extremum::Max, const BoxSearchOptions& opts = {}) {
    detail::validate_box_problem(fam, box, x, xp);
    if ((box.width().array() == 0.0).all()) return {box.lower, detail::evaluate(fam, box.lower, x, xp), 0};

    if (mode == Extremum::Max) {
        std::vector<Vector> starts{box.upper, box.lower, box.center()};
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int r = 0; r < opts.random_starts; ++r) {
            Vector s(box.dim());
            for (Index i = 0; i < box.dim(); ++i) s[i] = box.lower[i] + u(rng) * (box.upper[i] - box.lower[i]);
            starts.push_back(std::move(s));
        }
        BoxOptimum best;
        best.value = -std::numeric_limits<double>::infinity();
        for (const auto& s : starts) {
            auto r = detail::projected_ascent(fam, box, x, xp, s, 1.0, opts);
            if (r.value > best.value) best = std::move(r);
        }
        return best;
    }

    if (box.dim() > 20) throw OptimizationError("corner enumeration limited to 20 hyperparameters");
    const std::uint64_t corners = std::uint64_t{1} << box.dim();
    Vector best_corner = box.lower;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < corners; ++mask) {
        const Vector c = box.corner(mask);
        const double v = detail::evaluate(fam, c, x, xp);
        if (v < best_value) {
            best_value = v;
            best_corner = c;
        }
    }
    auto refined = detail::projected_ascent(fam, box, x, xp, best_corner, -1.0, opts);
    if (refined.value > best_value) return {best_corner, best_value, refined.iterations};
    return refined;
}

}  // namespace gpbound

#endif  // GPBOUND_BOX_OPTIMIZER_HPP
