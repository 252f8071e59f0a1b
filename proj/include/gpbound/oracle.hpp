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

#ifndef GPBOUND_ORACLE_HPP
#define GPBOUND_ORACLE_HPP

#include "gpbound/bound_engine.hpp"

#include <random>

namespace gpbound {

// Independent validators for the bound engine. None of these reuse the
// engine's term assembly: the Monte Carlo estimate samples the truth
// directly, grid_max searches exhaustively, and corner_enum_bound picks
// corners by enumeration instead of by weight sign.

struct McConfig {
    std::int64_t n_samples = 200000;
    std::uint64_t seed = 0;
    std::int64_t batch = 10000;
    unsigned threads = 1;
};

struct McResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo estimate of E||y(x) - mu_hat(x)||^2.
///
/// For every sample and output, (Y_{:,i}, y_i) is drawn jointly from the
/// truth prior at (X, x) with noise only on the training block, and the
/// estimate's posterior-mean weights are applied to the sampled Y. Batches
/// own independent RNG streams derived from (seed, batch index), so the
/// result does not depend on the thread count.
[[nodiscard]] inline McResult mc_mspe(const GpModel& truth, const GpModel& estimate, const ConstVectorRef& x,
                                      const McConfig& cfg) {
    if (cfg.n_samples < 1 || cfg.batch < 1) throw ConfigError("n_samples and batch must be positive");
    if (truth.outputs() != estimate.outputs()) throw DimensionError("truth and estimate output counts differ");
    if (truth.data().X != estimate.data().X)
        throw DimensionError("truth and estimate must be conditioned on the same training inputs");

    const Matrix& X = truth.data().X;
    const Index m = X.cols();
    const Index ny = truth.outputs();
    std::vector<Matrix> chol(static_cast<std::size_t>(ny));
    std::vector<Vector> h(static_cast<std::size_t>(ny));
    for (Index i = 0; i < ny; ++i) {
        const KernelSpec& k = truth.kernel(i);
        Matrix joint(m + 1, m + 1);
        joint.topLeftCorner(m, m) = gram(k, X, truth.data().noise_var[i]);
        const Vector kx = cross_covariance(k, X, x);
        joint.topRightCorner(m, 1) = kx;
        joint.bottomLeftCorner(1, m) = kx.transpose();
        joint(m, m) = kernel_eval(k, x, x);
        chol[static_cast<std::size_t>(i)] = CholeskyFactor::factorize(joint).lower();
        h[static_cast<std::size_t>(i)] = estimate.weights(i, x);
    }

    const std::int64_t n_batches = (cfg.n_samples + cfg.batch - 1) / cfg.batch;
    std::vector<double> sums(static_cast<std::size_t>(n_batches), 0.0);
    std::vector<double> sq_sums(static_cast<std::size_t>(n_batches), 0.0);
    parallel_for(static_cast<std::size_t>(n_batches), cfg.threads, [&](std::size_t b) {
        std::mt19937_64 rng(stream_seed(cfg.seed, b));
        std::normal_distribution<double> normal(0.0, 1.0);
        const std::int64_t begin = static_cast<std::int64_t>(b) * cfg.batch;
        const std::int64_t end = std::min(cfg.n_samples, begin + cfg.batch);
        Vector z(m + 1), sample(m + 1);
        double s = 0.0, s2 = 0.0;
        for (std::int64_t n = begin; n < end; ++n) {
            double err2 = 0.0;
            for (Index i = 0; i < ny; ++i) {
                for (Index r = 0; r <= m; ++r) z[r] = normal(rng);
                sample.noalias() = chol[static_cast<std::size_t>(i)].triangularView<Eigen::Lower>() * z;
                const double mu = h[static_cast<std::size_t>(i)].dot(sample.head(m));
                const double e = sample[m] - mu;
                err2 += e * e;
            }
            s += err2;
            s2 += err2 * err2;
        }
        sums[b] = s;
        sq_sums[b] = s2;
    });

    double s = 0.0, s2 = 0.0;
    for (std::size_t b = 0; b < sums.size(); ++b) {
        s += sums[b];
        s2 += sq_sums[b];
    }
    const double n = static_cast<double>(cfg.n_samples);
    const double mean = s / n;
    const double var = n > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n), cfg.n_samples, cfg.seed};
}

/// Maximum of k(phi, x, x') over a uniform grid with `resolution` points per
/// axis (box corners included). Limited to four hyperparameters.
[[nodiscard]] inline double grid_max(const KernelFamily& fam, const HyperRectangle& box, const ConstVectorRef& x,
                                     const ConstVectorRef& xp, int resolution) {
    fam.validate();
    box.validate_for(fam);
    fam.validate_input(x);
    fam.validate_input(xp);
    const Index l = box.dim();
    if (l > 4) throw ConfigError("grid_max supports at most 4 hyperparameters, got " + std::to_string(l));
    if (resolution < 1) throw ConfigError("grid resolution must be >= 1");

    std::vector<int> counts(static_cast<std::size_t>(l));
    std::int64_t total = 1;
    for (Index a = 0; a < l; ++a) {
        counts[static_cast<std::size_t>(a)] = box.lower[a] == box.upper[a] ? 1 : std::max(2, resolution);
        total *= counts[static_cast<std::size_t>(a)];
    }
    double best = -std::numeric_limits<double>::infinity();
    Vector phi(l);
    for (std::int64_t n = 0; n < total; ++n) {
        std::int64_t rest = n;
        for (Index a = 0; a < l; ++a) {
            const int c = counts[static_cast<std::size_t>(a)];
            const auto g = static_cast<int>(rest % c);
            rest /= c;
            phi[a] = c == 1 ? box.lower[a]
                            : (g == c - 1 ? box.upper[a]
                                          : box.lower[a] + (box.upper[a] - box.lower[a]) * g / (c - 1.0));
        }
        best = std::max(best, detail::evaluate(fam, phi, x, xp));
    }
    return best;
}

/// The closed-form bound with every corner choice made by exhaustive
/// enumeration over all 2^l corners of each box: for each term the corner
/// that maximizes that term's signed contribution is used.
[[nodiscard]] inline double corner_enum_bound(const CandidateSet& cands, const GpModel& estimate,
                                              const ConstVectorRef& x) {
    const Matrix& X = estimate.data().X;
    const Index m = X.cols();
    cands.validate_input(x);
    for (Index p = 0; p < m; ++p) cands.validate_input(X.col(p));

    double total = 0.0;
    for (Index i = 0; i < estimate.outputs(); ++i) {
        Vector h = estimate.weights(i, x);
        for (Index p = 0; p < m; ++p)
            if (std::abs(h[p]) < 1e-14) h[p] = 0.0;
        const double noise = estimate.data().noise_var[i] * h.squaredNorm();
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& e : cands.entries()) {
            if (e.box.dim() > 20) throw ConfigError("corner enumeration limited to 20 hyperparameters");
            std::vector<Vector> corners;
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << e.box.dim()); ++mask)
                corners.push_back(e.box.corner(mask));
            auto best_over_corners = [&](double coeff, const ConstVectorRef& a, const ConstVectorRef& b) {
                double v = -std::numeric_limits<double>::infinity();
                for (const auto& c : corners) v = std::max(v, coeff * detail::evaluate(e.family, c, a, b));
                return v;
            };
            const double alpha = best_over_corners(1.0, x, x);
            double cross = 0.0;
            for (Index p = 0; p < m; ++p) cross += best_over_corners(-2.0 * h[p], x, X.col(p));
            double kappa = 0.0;
            for (Index p = 0; p < m; ++p)
                for (Index q = 0; q < m; ++q) kappa += best_over_corners(h[p] * h[q], X.col(q), X.col(p));
            kappa += noise;
            best = std::max(best, alpha + kappa + cross);
        }
        total += best;
    }
    return total;
}

}  // namespace gpbound

#endif  // GPBOUND_ORACLE_HPP
