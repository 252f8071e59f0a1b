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

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace gpbound {
namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }
Vector point(double x) { return Vector::Constant(1, x); }

GpModel model_on(const KernelSpec& k, const Matrix& X, double noise) {
    return GpModel(k, Dataset(X, Matrix::Zero(X.cols(), 1), Vector::Constant(1, noise)));
}

TEST(MonteCarlo, AgreesWithPosteriorVarianceForMatchingModels) {
    std::mt19937_64 rng(1);
    const KernelSpec k{KernelFamily::matern(1), v2(2.0, 1.3)};
    const GpModel m = model_on(k, testing::random_inputs(rng, 1, 5), 0.05);
    McConfig cfg;
    cfg.n_samples = 200000;
    cfg.seed = 3;
    const McResult r = mc_mspe(m, m, point(0.4), cfg);
    EXPECT_LE(std::abs(r.estimate - posterior_variance_trace(m, point(0.4))), 3.0 * r.std_error);
}

TEST(MonteCarlo, AgreesWithExactMspeForMisspecifiedPair) {
    std::mt19937_64 rng(2);
    const Matrix X = testing::random_inputs(rng, 1, 5);
    const GpModel truth = model_on({KernelFamily::matern(0), v2(1.5, 1.0)}, X, 0.02);
    const GpModel est = model_on({KernelFamily::se_ard(1), v2(0.7, 0.8)}, X, 0.02);
    McConfig cfg;
    cfg.seed = 4;
    const McResult r = mc_mspe(truth, est, point(1.1), cfg);
    EXPECT_LE(std::abs(r.estimate - exact_mspe(truth, est, point(1.1))), 3.0 * r.std_error);
}

TEST(MonteCarlo, StandardErrorShrinksWithSampleSize) {
    std::mt19937_64 rng(3);
    const GpModel m = model_on({KernelFamily::se_ard(1), v2(1, 1)}, testing::random_inputs(rng, 1, 4), 0.1);
    McConfig small, large;
    small.n_samples = 1000;
    large.n_samples = 100000;
    const double ratio = mc_mspe(m, m, point(0.2), small).std_error / mc_mspe(m, m, point(0.2), large).std_error;
    EXPECT_GT(ratio, 7.0);
    EXPECT_LT(ratio, 14.0);
}

TEST(MonteCarlo, ReproducibleAndThreadInvariant) {
    std::mt19937_64 rng(4);
    const GpModel m = model_on({KernelFamily::se_ard(1), v2(1, 1)}, testing::random_inputs(rng, 1, 4), 0.1);
    McConfig cfg;
    cfg.n_samples = 25000;
    cfg.batch = 1000;
    cfg.seed = 77;
    const McResult a = mc_mspe(m, m, point(0.2), cfg);
    cfg.threads = 4;
    const McResult b = mc_mspe(m, m, point(0.2), cfg);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.n_samples, 25000);
    EXPECT_EQ(a.seed, 77u);
    cfg.seed = 78;
    EXPECT_NE(mc_mspe(m, m, point(0.2), cfg).estimate, a.estimate);
}

TEST(MonteCarlo, RejectsBadConfig) {
    const GpModel m = model_on({KernelFamily::se_ard(1), v2(1, 1)}, Matrix::Zero(1, 2), 0.1);
    McConfig cfg;
    cfg.n_samples = 0;
    EXPECT_THROW((void)mc_mspe(m, m, point(0), cfg), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(GridMax, SingletonBox) {
    const KernelFamily fam = KernelFamily::rational_quadratic(3);
    EXPECT_EQ(grid_max(fam, HyperRectangle::point(v2(1.5, 2)), point(0), point(1), 50),
              kernel_eval(fam, v2(1.5, 2), point(0), point(1)));
}

TEST(GridMax, MonotoneFamilyPeaksAtUpperCorner) {
    const KernelFamily fam = KernelFamily::matern(1);
    const HyperRectangle box(v2(1, 1), v2(3, 2));
    EXPECT_EQ(grid_max(fam, box, point(0), point(2), 40), kernel_eval(fam, box.upper, point(0), point(2)));
}

TEST(GridMax, AgreesWithBoxSearch) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lo(0.1, 2.0), span(0.1, 5.0);
    for (int n = 0; n < 25; ++n) {
        const Vector a = v2(lo(rng), lo(rng));
        const HyperRectangle box(a, a + v2(span(rng), span(rng)));
        const Vector x = testing::random_point(rng, 1, -5, 5), xp = testing::random_point(rng, 1, -5, 5);
        const KernelFamily fam = KernelFamily::se_ard(1);
        const double g = grid_max(fam, box, x, xp, 200);
        const double b = maximize_over_box(fam, box, x, xp).value;
        EXPECT_LE(std::abs(g - b), 1e-3 * std::max(std::abs(b), 1e-300));
        EXPECT_GE(b, g * (1 - 1e-12));
    }
}

TEST(GridMax, RejectsLargeBoxes) {
    const HyperRectangle box(Vector::Constant(5, 1.0), Vector::Constant(5, 2.0));
    EXPECT_THROW((void)grid_max(KernelFamily::se_ard(4), box, Vector::Zero(4), Vector::Zero(4), 3), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(CornerEnumeration, EqualsClosedForm) {
    std::mt19937_64 rng(6);
    const CandidateSet cands({{KernelFamily::matern(1), {v2(1, 1), v2(3, 2)}},
                              {KernelFamily::se_ard(2), {Vector::Constant(3, 0.5), Vector::Constant(3, 1.5)}},
                              {KernelFamily::rational_quadratic(2), {v2(0.5, 0.3), v2(2, 1.1)}}});
    for (int n = 0; n < 20; ++n) {
        const Matrix X = testing::random_inputs(rng, 2, 6);
        const GpModel est = model_on(testing::random_stationary_kernel(rng, 2), X, 0.01);
        BoundOptions opts;
        opts.method = BoundMethod::ClosedForm;
        const BoundEngine engine(cands, est, opts);
        const Vector x = testing::random_point(rng, 2);
        const double a = corner_enum_bound(cands, est, x);
        EXPECT_NEAR(a, engine.closed_form_bound(x), 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST(CornerEnumeration, SingletonGivesPosteriorVariance) {
    std::mt19937_64 rng(7);
    const KernelSpec k{KernelFamily::matern(2), v2(1.4, 0.9)};
    const GpModel est = model_on(k, testing::random_inputs(rng, 1, 6), 0.01);
    EXPECT_NEAR(corner_enum_bound(CandidateSet::singleton(k), est, point(0.3)), posterior_variance_trace(est, point(0.3)),
                1e-8);
}

TEST(CornerEnumeration, TwoEntriesTakeTheMax) {
    std::mt19937_64 rng(8);
    const Matrix X = testing::random_inputs(rng, 1, 5);
    const GpModel est = model_on({KernelFamily::se_ard(1), v2(1, 1)}, X, 0.01);
    const std::pair<KernelFamily, HyperRectangle> a{KernelFamily::matern(1), {v2(1, 1), v2(2, 1.5)}};
    const std::pair<KernelFamily, HyperRectangle> b{KernelFamily::matern(0), {v2(0.5, 0.5), v2(1, 1)}};
    const Vector x = point(0.9);
    const double both = corner_enum_bound(CandidateSet({a, b}), est, x);
    EXPECT_EQ(both, std::max(corner_enum_bound(CandidateSet({a}), est, x), corner_enum_bound(CandidateSet({b}), est, x)));
}

}  // namespace
}  // namespace gpbound
