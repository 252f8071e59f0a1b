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

// Fits a squared-exponential GP to data drawn from a Matern process and
// compares the model's own variance with the true prediction error and the
// two candidate-set bounds at a few test points.

#include "gpbound/gpbound.hpp"

#include <cstdio>

int main() {
    using namespace gpbound;

    ScenarioConfig cfg;
    cfg.interval_scales = {{0.9, 1.1}};
    const Scenario sc = generate_scenario(cfg);
    std::printf("fitted SE hyperparameters: lengthscale %.4f, signal std %.4f\n", sc.fit.spec.phi[0],
                sc.fit.spec.phi[1]);

    const BoundEngine engine(sc.variants.front(), sc.estimate);
    std::printf("%8s %12s %12s %12s %12s\n", "x", "est_var", "exact_mspe", "thm1", "thm2");
    for (double x = -10.0; x <= 15.0; x += 2.5) {
        const Vector p = Vector::Constant(1, x);
        std::printf("%8.2f %12.5f %12.5f %12.5f %12.5f\n", x, posterior_variance_trace(sc.estimate, p),
                    exact_mspe(sc.truth, sc.estimate, p), engine.optimization_bound(p), engine.closed_form_bound(p));
    }
    return 0;
}
