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

#ifndef GPBOUND_GP_CORE_HPP
#define GPBOUND_GP_CORE_HPP

#include "gpbound/kernels.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace gpbound {

/// Training data. Inputs are stored column-wise (X is n_x x m), outputs
/// row-wise (Y is m x n_y), one noise variance per output.
struct Dataset {
    Matrix X;
    Matrix Y;
    Vector noise_var;

    Dataset() = default;
    Dataset(Matrix inputs, Matrix outputs, Vector noise) : X(std::move(inputs)), Y(std::move(outputs)), noise_var(std::move(noise)) {
        validate();
    }

    [[nodiscard]] Index size() const { return X.cols(); }
    [[nodiscard]] Index input_dim() const { return X.rows(); }
    [[nodiscard]] Index output_dim() const { return Y.cols(); }

    void validate() const {
        if (X.cols() != Y.rows())
            throw DimensionError("dataset has " + std::to_string(X.cols()) + " inputs but " +
                                 std::to_string(Y.rows()) + " output rows");
        if (noise_var.size() != Y.cols())
            throw DimensionError("dataset needs one noise variance per output (" + std::to_string(Y.cols()) +
                                 "), got " + std::to_string(noise_var.size()));
        for (Index i = 0; i < noise_var.size(); ++i)
            if (!(noise_var[i] >= 0.0) || !std::isfinite(noise_var[i]))
                throw DomainError("noise variance must be finite and >= 0");
        if (!X.allFinite() || !Y.allFinite()) throw DomainError("dataset contains non-finite values");
    }
};

/// Gram matrix K_{j'j} = k(phi, X_j', X_j) + delta(j, j') noise_var.
[[nodiscard]] inline Matrix gram(const KernelSpec& spec, const Matrix& X, double noise_var) {
    spec.validate();
    const Index m = X.cols();
    for (Index j = 0; j < m; ++j) spec.family.validate_input(X.col(j));
    Matrix K(m, m);
    for (Index a = 0; a < m; ++a) {
        for (Index b = 0; b <= a; ++b) {
            const double v = detail::evaluate(spec.family, spec.phi, X.col(a), X.col(b));
            K(a, b) = v;
            K(b, a) = v;
        }
        K(a, a) += noise_var;
    }
    return K;
}

/// Vector of k(phi, x, X_j) for all training inputs.
[[nodiscard]] inline Vector cross_covariance(const KernelSpec& spec, const Matrix& X, const ConstVectorRef& x) {
    if (X.cols() > 0 && x.size() != X.rows())
        throw DimensionError("test point has dimension " + std::to_string(x.size()) + ", training inputs have " +
                             std::to_string(X.rows()));
    spec.family.validate_input(x);
    Vector k(X.cols());
    for (Index j = 0; j < X.cols(); ++j) k[j] = detail::evaluate(spec.family, spec.phi, x, X.col(j));
    return k;
}

/// Cholesky factor of a symmetric matrix with escalating diagonal jitter.
///
/// Jitter levels are 1e-10, 1e-9, ..., 1e-4 times the mean diagonal. When
/// `force_jitter` is false a jitter-free factorization is attempted first.
class CholeskyFactor {
public:
    CholeskyFactor() = default;

    static CholeskyFactor factorize(const Matrix& K, bool force_jitter = false) {
        CholeskyFactor f;
        f.n_ = K.rows();
        if (K.rows() != K.cols()) throw DimensionError("cannot factorize a non-square matrix");
        if (f.n_ == 0) return f;
        if (!K.allFinite()) throw IllConditionedGram("Gram matrix contains non-finite entries");
        if (!force_jitter) {
            f.llt_.compute(K);
            if (f.llt_.info() == Eigen::Success && f.has_positive_pivots()) return f;
        }
        const double scale = std::max(K.diagonal().mean(), std::numeric_limits<double>::min());
        for (double level = 1e-10; level <= 1e-4 * 1.0000001; level *= 10.0) {
            Matrix Kj = K;
            Kj.diagonal().array() += level * scale;
            f.llt_.compute(Kj);
            if (f.llt_.info() == Eigen::Success && f.has_positive_pivots()) {
                f.jitter_ = level * scale;
                return f;
            }
        }
        throw IllConditionedGram("Cholesky factorization failed even with jitter 1e-4 x mean diagonal (" +
                                 std::to_string(1e-4 * scale) + ")");
    }

    [[nodiscard]] Index size() const { return n_; }
    [[nodiscard]] double jitter() const { return jitter_; }

    [[nodiscard]] Vector solve(const Vector& b) const {
        if (n_ == 0) return Vector(0);
        return llt_.solve(b);
    }

    [[nodiscard]] Matrix solve(const Matrix& B) const {
        if (n_ == 0) return Matrix(0, B.cols());
        return llt_.solve(B);
    }

    /// log det of the (jittered) matrix.
    [[nodiscard]] double log_det() const {
        double s = 0.0;
        for (Index i = 0; i < n_; ++i) s += std::log(llt_.matrixLLT()(i, i));
        return 2.0 * s;
    }

    /// Lower-triangular L with L L^T = K + jitter I.
    [[nodiscard]] Matrix lower() const {
        if (n_ == 0) return Matrix(0, 0);
        return llt_.matrixL();
    }

private:
    [[nodiscard]] bool has_positive_pivots() const {
        const auto& m = llt_.matrixLLT();
        for (Index i = 0; i < n_; ++i)
            if (!(m(i, i) > 0.0) || !std::isfinite(m(i, i))) return false;
        return true;
    }

    Eigen::LLT<Matrix> llt_;
    Index n_ = 0;
    double jitter_ = 0.0;
};

/// Posterior mean and diagonal variance at one test point.
struct Posterior {
    Vector mean;
    Vector var;
};

/// Multi-output zero-mean GP with one independent kernel per output.
/// Immutable: all factorizations are computed at construction.
class GpModel {
public:
    GpModel() = default;

    GpModel(std::vector<KernelSpec> kernels, Dataset data) : kernels_(std::move(kernels)), data_(std::move(data)) {
        data_.validate();
        if (static_cast<Index>(kernels_.size()) != data_.output_dim())
            throw DimensionError("model needs one kernel per output (" + std::to_string(data_.output_dim()) +
                                 "), got " + std::to_string(kernels_.size()));
        grams_.reserve(kernels_.size());
        factors_.reserve(kernels_.size());
        alpha_.reserve(kernels_.size());
        for (std::size_t i = 0; i < kernels_.size(); ++i) {
            const double noise = data_.noise_var[static_cast<Index>(i)];
            grams_.push_back(gram(kernels_[i], data_.X, noise));
            factors_.push_back(CholeskyFactor::factorize(grams_.back(), noise == 0.0));
            alpha_.push_back(factors_.back().solve(Vector(data_.Y.col(static_cast<Index>(i)))));
        }
    }

    /// Same kernel for every output.
    GpModel(const KernelSpec& kernel, const Dataset& data)
        : GpModel(std::vector<KernelSpec>(static_cast<std::size_t>(data.output_dim()), kernel), data) {}

    [[nodiscard]] const Dataset& data() const { return data_; }
    [[nodiscard]] Index outputs() const { return static_cast<Index>(kernels_.size()); }
    [[nodiscard]] const KernelSpec& kernel(Index i) const { return kernels_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] const std::vector<KernelSpec>& kernels() const { return kernels_; }
    [[nodiscard]] const CholeskyFactor& factor(Index i) const { return factors_.at(static_cast<std::size_t>(i)); }
    /// Gram matrix of output i including the noise variance (no jitter).
    [[nodiscard]] const Matrix& gram_matrix(Index i) const { return grams_.at(static_cast<std::size_t>(i)); }

    /// New model with the same data and different kernels.
    [[nodiscard]] GpModel with_kernels(std::vector<KernelSpec> kernels) const { return {std::move(kernels), data_}; }

    /// New model with different training outputs.
    [[nodiscard]] GpModel with_outputs(Matrix Y) const {
        return {kernels_, Dataset(data_.X, std::move(Y), data_.noise_var)};
    }

    [[nodiscard]] Vector cross_cov(Index i, const ConstVectorRef& x) const {
        return cross_covariance(kernel(i), data_.X, x);
    }

    /// h = K^{-1} k(x*, X): the linear weights the posterior mean applies to Y_{:,i}.
    [[nodiscard]] Vector weights(Index i, const ConstVectorRef& x) const { return factor(i).solve(cross_cov(i, x)); }

    [[nodiscard]] Vector posterior_mean(const ConstVectorRef& x) const {
        Vector mu(outputs());
        for (Index i = 0; i < outputs(); ++i) mu[i] = size() == 0 ? 0.0 : cross_cov(i, x).dot(alpha_[i]);
        return mu;
    }

    /// Diagonal posterior variance; round-off below zero is clamped to 0.
    [[nodiscard]] Vector posterior_var(const ConstVectorRef& x) const {
        Vector var(outputs());
        for (Index i = 0; i < outputs(); ++i) {
            const double prior = kernel_eval(kernel(i), x, x);
            double v = prior;
            if (size() > 0) {
                const Vector k = cross_cov(i, x);
                v -= k.dot(factor(i).solve(k));
            }
            var[i] = std::max(v, 0.0);
        }
        return var;
    }

    [[nodiscard]] Posterior predict(const ConstVectorRef& x) const { return {posterior_mean(x), posterior_var(x)}; }

    [[nodiscard]] Index size() const { return data_.size(); }

private:
    std::vector<KernelSpec> kernels_;
    Dataset data_;
    std::vector<Matrix> grams_;
    std::vector<CholeskyFactor> factors_;
    std::vector<Vector> alpha_;
};

/// log P(y | X, phi) = -y^T K^-1 y / 2 - log det K / 2 - m log(2 pi) / 2.
[[nodiscard]] inline double log_marginal_likelihood(const KernelSpec& spec, const Matrix& X, const Vector& y,
                                                    double noise_var) {
    if (y.size() != X.cols()) throw DimensionError("output column length does not match number of inputs");
    const Matrix K = gram(spec, X, noise_var);
    const auto f = CholeskyFactor::factorize(K, noise_var == 0.0);
    const double m = static_cast<double>(X.cols());
    return -0.5 * y.dot(f.solve(y)) - 0.5 * f.log_det() - 0.5 * m * std::log(2.0 * std::numbers::pi);
}

struct LikelihoodValue {
    double value = 0.0;
    Vector grad_log_phi;  ///< d value / d log(phi)
};

/// Log marginal likelihood and its gradient with respect to log(phi):
/// d/d theta_k = tr((a a^T - K^-1) dK/d theta_k) / 2 with a = K^-1 y.
[[nodiscard]] inline LikelihoodValue log_marginal_likelihood_with_gradient(const KernelSpec& spec, const Matrix& X,
                                                                          const Vector& y, double noise_var) {
    if (y.size() != X.cols()) throw DimensionError("output column length does not match number of inputs");
    const Index m = X.cols();
    const Index l = spec.phi.size();
    const Matrix K = gram(spec, X, noise_var);
    const auto f = CholeskyFactor::factorize(K, noise_var == 0.0);
    const Vector a = f.solve(y);
    LikelihoodValue out;
    out.value = -0.5 * y.dot(a) - 0.5 * f.log_det() - 0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);
    const Matrix W = a * a.transpose() - f.solve(Matrix(Matrix::Identity(m, m)));
    out.grad_log_phi = Vector::Zero(l);
    for (Index p = 0; p < m; ++p) {
        for (Index q = 0; q <= p; ++q) {
            const Vector dk = detail::evaluate_gradient(spec.family, spec.phi, X.col(p), X.col(q));
            const double w = p == q ? W(p, p) : W(p, q) + W(q, p);
            out.grad_log_phi += w * dk;
        }
    }
    out.grad_log_phi = 0.5 * out.grad_log_phi.cwiseProduct(spec.phi);
    return out;
}

}  // namespace gpbound

#endif  // GPBOUND_GP_CORE_HPP
