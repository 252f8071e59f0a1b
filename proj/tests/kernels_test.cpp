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

using testing::reference_kernel;

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double d : v) out[i++] = d;
    return out;
}

std::vector<KernelFamily> all_families() {
    return {KernelFamily::polynomial(1), KernelFamily::polynomial(3), KernelFamily::rational_quadratic(1),
            KernelFamily::rational_quadratic(4), KernelFamily::se_ard(1), KernelFamily::matern(0),
            KernelFamily::matern(1), KernelFamily::matern(2)};
}

Vector random_phi(std::mt19937_64& rng, const KernelFamily& fam) {
    std::uniform_real_distribution<double> u(0.3, 3.0);
    Vector phi(fam.num_hyperparameters());
    for (Index i = 0; i < phi.size(); ++i) phi[i] = u(rng);
    return phi;
}

Vector random_input(std::mt19937_64& rng, const KernelFamily& fam) {
    return fam.input_constraint() == InputConstraint::NonnegativeOrthant ? testing::random_point(rng, 1, 0.0, 3.0)
                                                                         : testing::random_point(rng, 1);
}

TEST(KernelEval, HandValues) {
    EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::se_ard(1), vec({1, 1}), vec({0}), vec({0})), 1.0);
    EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::matern(0), vec({1, 2}), vec({0.7}), vec({0.7})), 4.0);
    // |x - x'|^2 = 2
    EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::rational_quadratic(1), vec({1, 1}), vec({0}), vec({std::sqrt(2.0)})),
                     0.5);
    EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::polynomial(2), vec({1}), vec({1}), vec({1})), 4.0);
}

TEST(KernelEval, MaternAtZeroDistanceIsSignalVariance) {
    for (int p = 0; p <= 2; ++p)
        EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::matern(p), vec({0.01, 1.6}), vec({3}), vec({3})), 1.6 * 1.6);
}

TEST(KernelEval, MatchesReferenceFormulas) {
    std::mt19937_64 rng(11);
    for (const auto& fam : all_families()) {
        for (int n = 0; n < 50; ++n) {
            const Vector phi = random_phi(rng, fam);
            const Vector x = random_input(rng, fam), xp = random_input(rng, fam);
            EXPECT_NEAR(kernel_eval(fam, phi, x, xp), reference_kernel(fam, phi, x, xp),
                        1e-12 * std::max(1.0, reference_kernel(fam, phi, x, xp)))
                << fam.describe();
        }
    }
}

TEST(KernelEval, SeArdUsesPerDimensionLengthscales) {
    const auto fam = KernelFamily::se_ard(2);
    const Vector phi = vec({1.0, 2.0, 1.5});
    const double expected = 2.25 * std::exp(-0.5 * (1.0 + 0.25));
    EXPECT_NEAR(kernel_eval(fam, phi, vec({0, 0}), vec({1, 1})), expected, 1e-15);
}

TEST(KernelEval, SymmetricAndNonnegative) {
    std::mt19937_64 rng(12);
    for (const auto& fam : all_families()) {
        for (int n = 0; n < 100; ++n) {
            const Vector phi = random_phi(rng, fam);
            const Vector x = random_input(rng, fam), xp = random_input(rng, fam);
            const double a = kernel_eval(fam, phi, x, xp);
            EXPECT_EQ(a, kernel_eval(fam, phi, xp, x));
            EXPECT_GE(a, 0.0);
        }
    }
}

TEST(KernelEval, StationaryFamiliesPeakOnTheDiagonal) {
    std::mt19937_64 rng(13);
    for (const auto& fam : all_families()) {
        if (fam.kind == Family::Polynomial) continue;
        for (int n = 0; n < 100; ++n) {
            const Vector phi = random_phi(rng, fam);
            const Vector x = random_input(rng, fam), xp = random_input(rng, fam);
            EXPECT_LE(kernel_eval(fam, phi, x, xp), kernel_eval(fam, phi, x, x));
        }
    }
}

TEST(KernelEval, UpperCornerMaximizesLowerCornerMinimizes) {
    std::mt19937_64 rng(14);
    for (const auto& fam : all_families()) {
        for (int n = 0; n < 30; ++n) {
            Vector lo = random_phi(rng, fam), hi = lo + random_phi(rng, fam);
            const HyperRectangle box(lo, hi);
            const Vector x = random_input(rng, fam), xp = random_input(rng, fam);
            const double top = kernel_eval(fam, hi, x, xp), bottom = kernel_eval(fam, lo, x, xp);
            for (int s = 0; s < 20; ++s) {
                const double v = kernel_eval(fam, testing::random_in_box(rng, box), x, xp);
                EXPECT_LE(v, top * (1 + 1e-12));
                EXPECT_GE(v, bottom * (1 - 1e-12));
            }
        }
    }
}

TEST(KernelEval, GradientMatchesCentralDifferences) {
    std::mt19937_64 rng(15);
    auto families = all_families();
    families.push_back(KernelFamily::se_ard(3));
    for (const auto& fam : families) {
        for (int n = 0; n < 20; ++n) {
            const Vector phi = random_phi(rng, fam);
            const Index d = fam.kind == Family::SquaredExponentialArd ? fam.n_x : 1;
            const bool nonneg = fam.input_constraint() == InputConstraint::NonnegativeOrthant;
            const Vector x = testing::random_point(rng, d, nonneg ? 0.0 : -3.0, 3.0);
            const Vector xp = testing::random_point(rng, d, nonneg ? 0.0 : -3.0, 3.0);
            const Vector g = kernel_gradient(fam, phi, x, xp);
            for (Index i = 0; i < phi.size(); ++i) {
                const double h = 1e-6 * phi[i];
                Vector a = phi, b = phi;
                a[i] += h;
                b[i] -= h;
                const double fd = (reference_kernel(fam, a, x, xp) - reference_kernel(fam, b, x, xp)) / (2 * h);
                EXPECT_NEAR(g[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << fam.describe() << " coordinate " << i;
            }
        }
    }
}

TEST(KernelEval, RejectsBadArguments) {
    EXPECT_THROW((void)kernel_eval(KernelFamily::se_ard(2), vec({1, 1, 1}), vec({0}), vec({0})), DimensionError);
    EXPECT_THROW((void)kernel_eval(KernelFamily::matern(1), vec({1, 1}), vec({0, 1}), vec({0})), DimensionError);
    EXPECT_THROW((void)kernel_eval(KernelFamily::matern(1), vec({1}), vec({0}), vec({0})), DimensionError);
    EXPECT_THROW((void)kernel_eval(KernelFamily::matern(1), vec({0, 1}), vec({0}), vec({0})), DomainError);
    EXPECT_THROW((void)kernel_eval(KernelFamily::rational_quadratic(1), vec({-1, 1}), vec({0}), vec({0})),
                 DomainError);
    EXPECT_THROW((void)kernel_eval(KernelFamily::polynomial(2), vec({1}), vec({-0.5}), vec({1})), DomainError);
    EXPECT_THROW((void)kernel_eval(KernelFamily::matern(3), vec({1, 1}), vec({0}), vec({0})), DomainError);
    EXPECT_THROW((void)kernel_eval(KernelFamily::polynomial(0), vec({1}), vec({0}), vec({0})), DomainError);
    EXPECT_NO_THROW((void)kernel_eval(KernelFamily::polynomial(2), vec({0}), vec({0}), vec({1})));
}

TEST(KernelEval, ErrorKinds) {
    try {
        (void)kernel_eval(KernelFamily::polynomial(2), vec({1}), vec({-0.5}), vec({1}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "domain_violation");
    }
}

TEST(KernelFamilyMeta, HyperparameterCountsAndDomains) {
    EXPECT_EQ(KernelFamily::polynomial(2).num_hyperparameters(), 1);
    EXPECT_EQ(KernelFamily::rational_quadratic(2).num_hyperparameters(), 2);
    EXPECT_EQ(KernelFamily::se_ard(3).num_hyperparameters(), 4);
    EXPECT_EQ(KernelFamily::matern(0).num_hyperparameters(), 2);
    EXPECT_EQ(KernelFamily::polynomial(1).input_constraint(), InputConstraint::NonnegativeOrthant);
    EXPECT_EQ(KernelFamily::matern(1).input_constraint(), InputConstraint::Unrestricted);
    EXPECT_EQ(KernelFamily::polynomial(1).phi_floor(), 0.0);
    EXPECT_EQ(KernelFamily::se_ard(1).phi_floor(), kPhiFloor);
}

TEST(HyperRectangleTest, CornersAndProjection) {
    const HyperRectangle box(vec({1, 2}), vec({3, 4}));
    EXPECT_EQ(box.corner(0), vec({1, 2}));
    EXPECT_EQ(box.corner(1), vec({3, 2}));
    EXPECT_EQ(box.corner(3), vec({3, 4}));
    EXPECT_EQ(box.project(vec({0, 5})), vec({1, 4}));
    EXPECT_TRUE(box.contains(vec({2, 3})));
    EXPECT_FALSE(box.contains(vec({2, 5})));
    EXPECT_THROW(HyperRectangle(vec({2}), vec({1})), DomainError);
    EXPECT_THROW(HyperRectangle(vec({1}), vec({1, 2})), DimensionError);
}

// ---------------------------------------------------------------------------

TEST(PropertyChecks, MonotoneExamplesPass) {
    EXPECT_TRUE(check_componentwise_monotone(KernelFamily::se_ard(1), {vec({0.5, 0.5}), vec({3, 3})}, 1000).passed);
    EXPECT_TRUE(check_componentwise_monotone(KernelFamily::matern(1), {vec({1, 1}), vec({5, 5})}, 1000).passed);
}

TEST(PropertyChecks, QuasiConcaveExamplesPass) {
    EXPECT_TRUE(
        check_line_quasiconcave(KernelFamily::rational_quadratic(1), {vec({1, 0.1}), vec({20, 1})}, 500).passed);
    EXPECT_TRUE(check_line_quasiconcave(KernelFamily::se_ard(1), {vec({0.1, 0.01}), vec({10, 1})}, 500).passed);
}

TEST(PropertyChecks, ReportCountsSamples) {
    const auto r = check_componentwise_monotone(KernelFamily::matern(2), {vec({1, 1}), vec({2, 2})}, 37);
    EXPECT_EQ(r.samples, 37);
    EXPECT_EQ(r.property, "componentwise_monotone");
    EXPECT_FALSE(r.witness.has_value());
}

TEST(PropertyChecks, DecreasingFunctionFailsWithWitness) {
    auto decreasing = [](const Vector& phi, const Vector&, const Vector&) { return -phi[0]; };
    const HyperRectangle box(vec({0.5, 0.5}), vec({3, 3}));
    // Only coordinate 0 decreases; some draw will pick it.
    const auto r = check_componentwise_monotone(decreasing, box, 1, false, 1000);
    ASSERT_FALSE(r.passed);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_EQ(r.witness->coordinate, 0);
    EXPECT_LT(r.witness->value_other, r.witness->value);
}

TEST(PropertyChecks, ConvexBumpFailsQuasiConcavity) {
    auto bump = [](const Vector& phi, const Vector&, const Vector&) { return (phi[0] - 1.0) * (phi[0] - 1.0); };
    const HyperRectangle box(vec({0, 0}), vec({2, 2}));
    const auto r = check_line_quasiconcave(bump, box, 1, false, 500);
    ASSERT_FALSE(r.passed);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_GT(r.witness->t, 0.0);
    EXPECT_LT(r.witness->t, 1.0);
}

TEST(PropertyChecks, DeterministicUnderSeed) {
    auto bump = [](const Vector& phi, const Vector&, const Vector&) { return (phi[0] - 1.0) * (phi[0] - 1.0); };
    const HyperRectangle box(vec({0, 0}), vec({2, 2}));
    CheckOptions opts;
    opts.seed = 99;
    const auto a = check_line_quasiconcave(bump, box, 1, false, 500, opts);
    const auto b = check_line_quasiconcave(bump, box, 1, false, 500, opts);
    ASSERT_TRUE(a.witness && b.witness);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.witness->phi, b.witness->phi);
}

TEST(PropertyChecks, ZeroBudgetRejected) {
    EXPECT_THROW((void)check_componentwise_monotone(KernelFamily::matern(1), {vec({1, 1}), vec({2, 2})}, 0),
                 DomainError);
}

}  // namespace
}  // namespace gpbound
