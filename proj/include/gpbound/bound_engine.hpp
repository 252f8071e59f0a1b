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

#ifndef GPBOUND_BOUND_ENGINE_HPP
#define GPBOUND_BOUND_ENGINE_HPP

#include "gpbound/box_optimizer.hpp"
#include "gpbound/gp_core.hpp"
#include "gpbound/kernel_checks.hpp"

#include <optional>
#include <utility>

namespace gpbound {

// ---------------------------------------------------------------------------
// Candidate sets
// ---------------------------------------------------------------------------

/// One admissible covariance family together with its hyperparameter box.
struct CandidateEntry {
    KernelFamily family;
    HyperRectangle box;
    /// True when both property checks passed at construction.
    bool certified = false;
};

struct CandidateOptions {
    /// Skip the monotonicity / quasi-concavity certificates. Entries are then
    /// marked uncertified and the closed-form bound refuses them unless its
    /// own override is set.
    bool unsafe = false;
    int certificate_budget = 200;
    CheckOptions check;
};

/// Finite list of (family, box) pairs assumed to contain every output's true
/// covariance function and hyperparameters.
class CandidateSet {
public:
    CandidateSet() = default;

    explicit CandidateSet(const std::vector<std::pair<KernelFamily, HyperRectangle>>& entries,
                          const CandidateOptions& opts = {}) {
        if (entries.empty()) throw ConfigError("candidate set must contain at least one entry");
        for (const auto& [family, box] : entries) {
            family.validate();
            box.validate_for(family);
            CandidateEntry entry{family, box, false};
            if (!opts.unsafe) {
                certify(entry, opts);
                entry.certified = true;
            }
            entries_.push_back(std::move(entry));
        }
    }

    /// The degenerate set {(spec.family, [spec.phi, spec.phi])}.
    static CandidateSet singleton(const KernelSpec& spec, const CandidateOptions& opts = {}) {
        return CandidateSet({{spec.family, HyperRectangle::point(spec.phi)}}, opts);
    }

    [[nodiscard]] const std::vector<CandidateEntry>& entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

    [[nodiscard]] bool all_certified() const {
        return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.certified; });
    }

    /// Whether (family, phi) is a member of some entry.
    [[nodiscard]] bool contains(const KernelSpec& spec) const {
        return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) {
            return e.family == spec.family && e.box.contains(spec.phi);
        });
    }

    /// Rejects inputs that some entry's family cannot be evaluated on.
    void validate_input(const ConstVectorRef& x) const {
        for (const auto& e : entries_) {
            try {
                e.family.validate_input(x);
            } catch (const Error& err) {
                throw DomainError("candidate " + e.family.describe() + " cannot be used here: " + err.what());
            }
        }
    }

private:
    static void certify(const CandidateEntry& e, const CandidateOptions& opts) {
        for (const auto& report : {check_componentwise_monotone(e.family, e.box, opts.certificate_budget, opts.check),
                                   check_line_quasiconcave(e.family, e.box, opts.certificate_budget, opts.check)}) {
            if (!report.passed) {
                std::ostringstream os;
                os << "candidate " << e.family.describe() << " on box [" << e.box.lower.transpose() << "] - ["
                   << e.box.upper.transpose() << "] failed the " << report.property << " check";
                if (report.witness)
                    os << " at phi = [" << report.witness->phi.transpose() << "], x = ["
                       << report.witness->x.transpose() << "], x' = [" << report.witness->x_prime.transpose() << "]";
                throw AssumptionError(os.str());
            }
        }
    }

    std::vector<CandidateEntry> entries_;
};

// ---------------------------------------------------------------------------
// Exact MSPE between a ground-truth model and an estimate
// ---------------------------------------------------------------------------

/// Per-output pieces of the exact error: k(x,x), h^T k(x,X), h^T K h.
struct MspeTerms {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    [[nodiscard]] double total() const { return alpha - 2.0 * beta + gamma; }
};

namespace detail {

inline void require_shared_inputs(const GpModel& truth, const GpModel& estimate) {
    if (truth.outputs() != estimate.outputs())
        throw DimensionError("truth and estimate have different numbers of outputs");
    const Matrix& a = truth.data().X;
    const Matrix& b = estimate.data().X;
    if (a.rows() != b.rows() || a.cols() != b.cols() || a != b)
        throw DimensionError("truth and estimate must be conditioned on the same training inputs");
}

}  // namespace detail

/// Error decomposition for output i at x (truth kernel and Gram, estimate weights).
[[nodiscard]] inline MspeTerms mspe_terms(const GpModel& truth, const GpModel& estimate, Index i,
                                          const ConstVectorRef& x) {
    detail::require_shared_inputs(truth, estimate);
    MspeTerms t;
    t.alpha = kernel_eval(truth.kernel(i), x, x);
    if (truth.size() == 0) return t;
    const Vector h = estimate.weights(i, x);
    t.beta = h.dot(truth.cross_cov(i, x));
    t.gamma = h.dot(truth.gram_matrix(i) * h);
    return t;
}

/// E||y(x) - mu_hat(x)||^2 where y follows the truth GP jointly with its noisy
/// training outputs and mu_hat is the estimate's posterior mean. Depends on
/// the training inputs but not on the observed outputs.
[[nodiscard]] inline double exact_mspe(const GpModel& truth, const GpModel& estimate, const ConstVectorRef& x) {
    double total = 0.0;
    for (Index i = 0; i < truth.outputs(); ++i) total += mspe_terms(truth, estimate, i, x).total();
    return std::max(total, 0.0);
}

/// Trace of the estimate's posterior variance, the error the estimate itself reports.
[[nodiscard]] inline double posterior_variance_trace(const GpModel& model, const ConstVectorRef& x) {
    return model.posterior_var(x).sum();
}

// ---------------------------------------------------------------------------
// Upper bounds
// ---------------------------------------------------------------------------

enum class BoundMethod { Optimization, ClosedForm, Both };

struct BoundOptions {
    BoundMethod method = BoundMethod::Both;
    /// Evaluate the closed form even for uncertified candidate entries.
    bool allow_uncertified = false;
    BoxSearchOptions search;
    /// Weights with |h_p| below this are set to zero before sign splitting.
    double weight_threshold = 1e-14;
};

/// Upper bounds on the MSPE of an estimated GP when the truth is only known
/// to lie in a candidate set.
///
/// The optimization-based bound replaces every truth kernel value by its
/// maximum over the candidate set (dropping the positive-weight minimum
/// term). The closed form assumes monotone kernels on boxes and uses the
/// upper or lower box corner per term, depending on the sign of its weight.
/// Kernel maxima between training pairs and corner Gram matrices depend
/// only on (candidates, X) and are computed once at construction.
class BoundEngine {
public:
    BoundEngine(CandidateSet cands, GpModel estimate, BoundOptions opts = {})
        : cands_(std::move(cands)), estimate_(std::move(estimate)), opts_(opts) {
        if (cands_.size() == 0) throw ConfigError("candidate set is empty");
        const Matrix& X = estimate_.data().X;
        for (const auto& e : cands_.entries()) {
            if (e.family.kind == Family::SquaredExponentialArd && X.cols() > 0 && e.family.n_x != X.rows())
                throw DimensionError("candidate " + e.family.describe() + " does not match input dimension " +
                                     std::to_string(X.rows()));
        }
        for (Index j = 0; j < X.cols(); ++j) cands_.validate_input(X.col(j));
        if (uses_closed_form()) {
            require_certificates();
            build_corner_grams();
        }
        if (uses_optimization()) build_training_kmax();
    }

    [[nodiscard]] const CandidateSet& candidates() const { return cands_; }
    [[nodiscard]] const GpModel& estimate() const { return estimate_; }
    [[nodiscard]] const BoundOptions& options() const { return opts_; }
    [[nodiscard]] bool uses_optimization() const { return opts_.method != BoundMethod::ClosedForm; }
    [[nodiscard]] bool uses_closed_form() const { return opts_.method != BoundMethod::Optimization; }

    /// max over entries j and phi in box j of k_j(phi, x, x').
    [[nodiscard]] double kmax(const ConstVectorRef& x, const ConstVectorRef& xp) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& e : cands_.entries())
            best = std::max(best, maximize_over_box(e.family, e.box, x, xp, Extremum::Max, opts_.search).value);
        return best;
    }

    /// Estimate weights h = K_hat^{-1} k_hat(x, X) for output i, with tiny entries zeroed.
    [[nodiscard]] Vector weights(Index i, const ConstVectorRef& x) const {
        Vector h = estimate_.weights(i, x);
        for (Index p = 0; p < h.size(); ++p)
            if (std::abs(h[p]) < opts_.weight_threshold) h[p] = 0.0;
        if (!h.allFinite()) throw IllConditionedGram("non-finite weight vector");
        return h;
    }

    /// Kernel maxima between the training pairs (cached).
    [[nodiscard]] const Matrix& training_kmax() const {
        if (!uses_optimization()) throw ConfigError("engine was built without the optimization-based bound");
        return training_kmax_;
    }

    /// Lower bound on h^T k(x, X) over the candidate set.
    [[nodiscard]] double beta_lower(Index i, const ConstVectorRef& x) const {
        check_point(x);
        return beta_from_weights(weights(i, x), kmax_to_training(x));
    }

    /// Upper bound on h^T K h over the candidate set (noise included).
    [[nodiscard]] double gamma_upper(Index i, const ConstVectorRef& x) const {
        check_point(x);
        return gamma_from_weights(i, weights(i, x));
    }

    /// n_y * kmax(x, x) + sum_i (gamma_upper_i - 2 beta_lower_i).
    [[nodiscard]] double optimization_bound(const ConstVectorRef& x) const {
        if (!uses_optimization()) throw ConfigError("engine was built without the optimization-based bound");
        check_point(x);
        const Vector kx = kmax_to_training(x);
        const double alpha = kmax(x, x);
        double total = static_cast<double>(estimate_.outputs()) * alpha;
        for (Index i = 0; i < estimate_.outputs(); ++i) {
            const Vector h = weights(i, x);
            total += gamma_from_weights(i, h) - 2.0 * beta_from_weights(h, kx);
        }
        return total;
    }

    /// sum_i max_j { k_j(upper, x, x) + kappa_ij - eta_ij }, corner evaluations only.
    [[nodiscard]] double closed_form_bound(const ConstVectorRef& x) const {
        if (!uses_closed_form()) throw ConfigError("engine was built without the closed-form bound");
        check_point(x);
        const Matrix& X = estimate_.data().X;
        const Index m = X.cols();
        const auto& entries = cands_.entries();
        std::vector<Vector> k_hi(entries.size()), k_lo(entries.size());
        std::vector<double> diag(entries.size());
        for (std::size_t j = 0; j < entries.size(); ++j) {
            const auto& e = entries[j];
            diag[j] = detail::evaluate(e.family, e.box.upper, x, x);
            k_hi[j].resize(m);
            k_lo[j].resize(m);
            for (Index p = 0; p < m; ++p) {
                k_hi[j][p] = detail::evaluate(e.family, e.box.upper, x, X.col(p));
                k_lo[j][p] = detail::evaluate(e.family, e.box.lower, x, X.col(p));
            }
        }
        double total = 0.0;
        for (Index i = 0; i < estimate_.outputs(); ++i) {
            const Vector h = weights(i, x);
            const double noise = estimate_.data().noise_var[i] * h.squaredNorm();
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < entries.size(); ++j) {
                double eta = 0.0;
                for (Index p = 0; p < m; ++p)
                    eta += std::min(h[p], 0.0) * k_hi[j][p] + std::max(h[p], 0.0) * k_lo[j][p];
                eta *= 2.0;
                double kappa = 0.0;
                for (Index p = 0; p < m; ++p) {
                    for (Index q = 0; q < m; ++q) {
                        const double hh = h[p] * h[q];
                        kappa += std::max(hh, 0.0) * upper_gram_[j](q, p) + std::min(hh, 0.0) * lower_gram_[j](q, p);
                    }
                }
                kappa += noise;
                best = std::max(best, diag[j] + kappa - eta);
            }
            total += best;
        }
        return total;
    }

private:
    void check_point(const ConstVectorRef& x) const {
        const Matrix& X = estimate_.data().X;
        if (X.cols() > 0 && x.size() != X.rows())
            throw DimensionError("test point has dimension " + std::to_string(x.size()) + ", training inputs have " +
                                 std::to_string(X.rows()));
        cands_.validate_input(x);
    }

    void require_certificates() const {
        if (opts_.allow_uncertified) return;
        for (const auto& e : cands_.entries())
            if (!e.certified)
                throw AssumptionError("closed-form bound needs monotonicity certificates; candidate " +
                                      e.family.describe() + " is uncertified (use the unsafe override to proceed)");
    }

    void build_corner_grams() {
        const Matrix& X = estimate_.data().X;
        for (const auto& e : cands_.entries()) {
            upper_gram_.push_back(gram(KernelSpec(e.family, e.box.upper), X, 0.0));
            lower_gram_.push_back(gram(KernelSpec(e.family, e.box.lower), X, 0.0));
        }
    }

    void build_training_kmax() {
        const Matrix& X = estimate_.data().X;
        const Index m = X.cols();
        training_kmax_.resize(m, m);
        for (Index p = 0; p < m; ++p) {
            for (Index q = 0; q <= p; ++q) {
                const double v = kmax(X.col(q), X.col(p));
                training_kmax_(p, q) = v;
                training_kmax_(q, p) = v;
            }
        }
    }

    [[nodiscard]] Vector kmax_to_training(const ConstVectorRef& x) const {
        const Matrix& X = estimate_.data().X;
        Vector k(X.cols());
        for (Index p = 0; p < X.cols(); ++p) k[p] = kmax(x, X.col(p));
        return k;
    }

    [[nodiscard]] static double beta_from_weights(const Vector& h, const Vector& kx) {
        double s = 0.0;
        for (Index p = 0; p < h.size(); ++p) s += std::min(h[p], 0.0) * kx[p];
        return s;
    }

    [[nodiscard]] double gamma_from_weights(Index i, const Vector& h) const {
        const Index m = h.size();
        double s = 0.0;
        for (Index p = 0; p < m; ++p)
            for (Index q = 0; q < m; ++q) s += std::max(h[p] * h[q], 0.0) * training_kmax_(q, p);
        return s + estimate_.data().noise_var[i] * h.squaredNorm();
    }

    CandidateSet cands_;
    GpModel estimate_;
    BoundOptions opts_;
    Matrix training_kmax_;
    std::vector<Matrix> upper_gram_;
    std::vector<Matrix> lower_gram_;
};

// ---------------------------------------------------------------------------
// Reports over a grid of test points
// ---------------------------------------------------------------------------

struct BoundReport {
    Vector x;
    std::optional<double> exact_mspe;
    double est_var_trace = 0.0;
    std::optional<double> thm1;
    std::optional<double> thm2;
};

/// Evaluates every requested quantity at each grid point. Points are
/// independent and evaluated in parallel; the result order matches `grid`.
[[nodiscard]] inline std::vector<BoundReport> bound_report(const GpModel* truth, const BoundEngine& engine,
                                                          const std::vector<Vector>& grid, unsigned threads = 1) {
    std::vector<BoundReport> out(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t n) {
        const Vector& x = grid[n];
        BoundReport r;
        r.x = x;
        if (truth != nullptr) r.exact_mspe = exact_mspe(*truth, engine.estimate(), x);
        r.est_var_trace = posterior_variance_trace(engine.estimate(), x);
        if (engine.uses_optimization()) r.thm1 = engine.optimization_bound(x);
        if (engine.uses_closed_form()) r.thm2 = engine.closed_form_bound(x);
        out[n] = std::move(r);
    });
    return out;
}

}  // namespace gpbound

#endif  // GPBOUND_BOUND_ENGINE_HPP
