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

#ifndef GPBOUND_KERNELS_HPP
#define GPBOUND_KERNELS_HPP

#include "gpbound/common.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <string_view>

namespace gpbound {

enum class Family { Polynomial, RationalQuadratic, SquaredExponentialArd, Matern };

/// Which inputs a family is valid on.
enum class InputConstraint { NonnegativeOrthant, Unrestricted };

/// A covariance family with its structural (non-optimized) parameters.
///
/// Hyperparameter layout, all entries scale-like (they enter squared):
///   Polynomial(p)         (x.x' + phi^2)^p                      phi = [offset]
///   RationalQuadratic(p)  s^2 (1 + r^2 / (2 p l^2))^-p           phi = [l, s]
///   SquaredExponentialArd s^2 exp(-sum (dx_i / l_i)^2 / 2)       phi = [l_1..l_n, s]
///   Matern(p), nu = p+1/2 half-integer closed forms               phi = [l, s]
struct KernelFamily {
    Family kind = Family::SquaredExponentialArd;
    int p = 1;    ///< polynomial degree, RQ shape, or Matern index (nu = p + 1/2)
    int n_x = 1;  ///< input dimension; structural only for SE-ARD

    static KernelFamily polynomial(int degree) { return {Family::Polynomial, degree, 1}; }
    static KernelFamily rational_quadratic(int shape) { return {Family::RationalQuadratic, shape, 1}; }
    static KernelFamily se_ard(int input_dim) { return {Family::SquaredExponentialArd, 0, input_dim}; }
    static KernelFamily matern(int index) { return {Family::Matern, index, 1}; }

    [[nodiscard]] Index num_hyperparameters() const {
        switch (kind) {
            case Family::Polynomial: return 1;
            case Family::RationalQuadratic: return 2;
            case Family::SquaredExponentialArd: return n_x + 1;
            case Family::Matern: return 2;
        }
        return 0;
    }

    [[nodiscard]] InputConstraint input_constraint() const {
        return kind == Family::Polynomial ? InputConstraint::NonnegativeOrthant : InputConstraint::Unrestricted;
    }

    /// Smallest admissible hyperparameter value (0 for the polynomial offset).
    [[nodiscard]] double phi_floor() const { return kind == Family::Polynomial ? 0.0 : kPhiFloor; }

    /// Short identifier used in JSON: "poly", "rq", "se_ard", "matern".
    [[nodiscard]] std::string name() const {
        switch (kind) {
            case Family::Polynomial: return "poly";
            case Family::RationalQuadratic: return "rq";
            case Family::SquaredExponentialArd: return "se_ard";
            case Family::Matern: return "matern";
        }
        return "unknown";
    }

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os << name();
        if (kind == Family::SquaredExponentialArd)
            os << "(n_x=" << n_x << ")";
        else
            os << "(p=" << p << ")";
        return os.str();
    }

    void validate() const {
        switch (kind) {
            case Family::Polynomial:
                if (p < 1) throw DomainError("polynomial degree must be >= 1, got " + std::to_string(p));
                break;
            case Family::RationalQuadratic:
                if (p < 1) throw DomainError("rational quadratic p must be >= 1, got " + std::to_string(p));
                break;
            case Family::SquaredExponentialArd:
                if (n_x < 1) throw DomainError("se_ard input dimension must be >= 1");
                break;
            case Family::Matern:
                if (p < 0 || p > 2) throw DomainError("matern index p must be in {0,1,2}, got " + std::to_string(p));
                break;
        }
    }

    /// Checks that phi has the right length and lies in the family's domain.
    void validate_phi(const ConstVectorRef& phi) const {
        if (phi.size() != num_hyperparameters())
            throw DimensionError(describe() + " expects " + std::to_string(num_hyperparameters()) +
                                 " hyperparameters, got " + std::to_string(phi.size()));
        const double floor = phi_floor();
        for (Index i = 0; i < phi.size(); ++i) {
            if (!std::isfinite(phi[i]) || phi[i] < floor) {
                std::ostringstream os;
                os << describe() << " hyperparameter " << i << " = " << phi[i] << " outside domain [" << floor
                   << ", inf)";
                throw DomainError(os.str());
            }
        }
    }

    /// Checks an input point against dimension and domain constraints.
    void validate_input(const ConstVectorRef& x) const {
        if (kind == Family::SquaredExponentialArd && x.size() != n_x)
            throw DimensionError("se_ard kernel has n_x=" + std::to_string(n_x) + " but input has dimension " +
                                 std::to_string(x.size()));
        if (input_constraint() == InputConstraint::NonnegativeOrthant) {
            for (Index i = 0; i < x.size(); ++i)
                if (x[i] < 0.0)
                    throw DomainError("polynomial kernel requires nonnegative inputs; coordinate " +
                                      std::to_string(i) + " is " + std::to_string(x[i]));
        }
    }

    friend bool operator==(const KernelFamily& a, const KernelFamily& b) {
        if (a.kind != b.kind) return false;
        return a.kind == Family::SquaredExponentialArd ? a.n_x == b.n_x : a.p == b.p;
    }
};

/// A family together with concrete hyperparameters.
struct KernelSpec {
    KernelFamily family;
    Vector phi;

    KernelSpec() = default;
    KernelSpec(KernelFamily f, Vector values) : family(f), phi(std::move(values)) { validate(); }

    void validate() const {
        family.validate();
        family.validate_phi(phi);
    }
};

namespace detail {

inline double matern_profile(int p, double u) {
    // (polynomial part) * exp(-u) for nu = p + 1/2
    switch (p) {
        case 0: return std::exp(-u);
        case 1: return (1.0 + u) * std::exp(-u);
        default: return (1.0 + u + u * u / 3.0) * std::exp(-u);
    }
}

/// Kernel value without validation. Callers guarantee dimensions and domain.
inline double evaluate(const KernelFamily& fam, const ConstVectorRef& phi, const ConstVectorRef& x,
                       const ConstVectorRef& xp) {
    switch (fam.kind) {
        case Family::Polynomial: {
            const double base = x.dot(xp) + phi[0] * phi[0];
            return std::pow(base, fam.p);
        }
        case Family::RationalQuadratic: {
            const double r2 = (x - xp).squaredNorm();
            const double l = phi[0];
            const double s = phi[1];
            return s * s * std::pow(1.0 + r2 / (2.0 * fam.p * l * l), -static_cast<double>(fam.p));
        }
        case Family::SquaredExponentialArd: {
            double q = 0.0;
            for (Index i = 0; i < x.size(); ++i) {
                const double z = (x[i] - xp[i]) / phi[i];
                q += z * z;
            }
            const double s = phi[fam.n_x];
            return s * s * std::exp(-0.5 * q);
        }
        case Family::Matern: {
            const double s = phi[1];
            const double d = (x - xp).norm();
            if (d == 0.0) return s * s;  // removable singularity of the Bessel form
            const double u = std::sqrt(2.0 * fam.p + 1.0) * d / phi[0];
            return s * s * matern_profile(fam.p, u);
        }
    }
    return 0.0;
}

/// Gradient of the kernel value with respect to phi, without validation.
inline Vector evaluate_gradient(const KernelFamily& fam, const ConstVectorRef& phi, const ConstVectorRef& x,
                                const ConstVectorRef& xp) {
    Vector g = Vector::Zero(phi.size());
    switch (fam.kind) {
        case Family::Polynomial: {
            const double base = x.dot(xp) + phi[0] * phi[0];
            g[0] = fam.p * std::pow(base, fam.p - 1) * 2.0 * phi[0];
            break;
        }
        case Family::RationalQuadratic: {
            const double r2 = (x - xp).squaredNorm();
            const double l = phi[0];
            const double s = phi[1];
            const double b = 1.0 + r2 / (2.0 * fam.p * l * l);
            g[0] = s * s * std::pow(b, -static_cast<double>(fam.p) - 1.0) * r2 / (l * l * l);
            g[1] = 2.0 * s * std::pow(b, -static_cast<double>(fam.p));
            break;
        }
        case Family::SquaredExponentialArd: {
            const Index n = fam.n_x;
            double q = 0.0;
            for (Index i = 0; i < n; ++i) {
                const double z = (x[i] - xp[i]) / phi[i];
                q += z * z;
            }
            const double e = std::exp(-0.5 * q);
            const double s = phi[n];
            for (Index i = 0; i < n; ++i) {
                const double dx = x[i] - xp[i];
                g[i] = s * s * e * dx * dx / (phi[i] * phi[i] * phi[i]);
            }
            g[n] = 2.0 * s * e;
            break;
        }
        case Family::Matern: {
            const double s = phi[1];
            const double d = (x - xp).norm();
            if (d == 0.0) {
                g[1] = 2.0 * s;
                break;
            }
            const double l = phi[0];
            const double u = std::sqrt(2.0 * fam.p + 1.0) * d / l;
            const double e = std::exp(-u);
            double dprofile_dl = 0.0;  // derivative of profile(u(l)) w.r.t. l
            switch (fam.p) {
                case 0: dprofile_dl = e * u / l; break;
                case 1: dprofile_dl = e * u * u / l; break;
                default: dprofile_dl = e * u * u * (1.0 + u) / (3.0 * l); break;
            }
            g[0] = s * s * dprofile_dl;
            g[1] = 2.0 * s * matern_profile(fam.p, u);
            break;
        }
    }
    return g;
}

}  // namespace detail

/// k(phi, x, x') with full validation of dimensions, hyperparameter domain
/// and input domain.
[[nodiscard]] inline double kernel_eval(const KernelFamily& fam, const ConstVectorRef& phi, const ConstVectorRef& x,
                                        const ConstVectorRef& xp) {
    fam.validate();
    fam.validate_phi(phi);
    if (x.size() != xp.size())
        throw DimensionError("kernel inputs differ in dimension: " + std::to_string(x.size()) + " vs " +
                             std::to_string(xp.size()));
    fam.validate_input(x);
    fam.validate_input(xp);
    return detail::evaluate(fam, phi, x, xp);
}

[[nodiscard]] inline double kernel_eval(const KernelSpec& spec, const ConstVectorRef& x, const ConstVectorRef& xp) {
    return kernel_eval(spec.family, spec.phi, x, xp);
}

/// dk/dphi with the same validation as kernel_eval.
[[nodiscard]] inline Vector kernel_gradient(const KernelFamily& fam, const ConstVectorRef& phi,
                                            const ConstVectorRef& x, const ConstVectorRef& xp) {
    fam.validate();
    fam.validate_phi(phi);
    if (x.size() != xp.size()) throw DimensionError("kernel inputs differ in dimension");
    fam.validate_input(x);
    fam.validate_input(xp);
    return detail::evaluate_gradient(fam, phi, x, xp);
}

/// Axis-aligned box [lower, upper] of hyperparameters.
struct HyperRectangle {
    Vector lower;
    Vector upper;

    HyperRectangle() = default;
    HyperRectangle(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw DimensionError("box bounds differ in dimension: " + std::to_string(lower.size()) + " vs " +
                                 std::to_string(upper.size()));
        for (Index i = 0; i < lower.size(); ++i)
            if (!(lower[i] <= upper[i]))
                throw DomainError("box lower bound exceeds upper bound in coordinate " + std::to_string(i));
    }

    /// Degenerate box {phi}.
    static HyperRectangle point(const Vector& phi) { return {phi, phi}; }

    [[nodiscard]] Index dim() const { return lower.size(); }
    [[nodiscard]] Vector center() const { return 0.5 * (lower + upper); }
    [[nodiscard]] Vector width() const { return upper - lower; }

    /// Corner selected by the bits of `mask`: bit i set picks upper[i].
    [[nodiscard]] Vector corner(std::uint64_t mask) const {
        Vector c = lower;
        for (Index i = 0; i < dim(); ++i)
            if ((mask >> i) & 1u) c[i] = upper[i];
        return c;
    }

    [[nodiscard]] Vector project(const Vector& phi) const { return phi.cwiseMax(lower).cwiseMin(upper); }

    [[nodiscard]] bool contains(const ConstVectorRef& phi) const {
        return phi.size() == dim() && (phi.array() >= lower.array()).all() && (phi.array() <= upper.array()).all();
    }

    /// Both corners inside the family's hyperparameter domain.
    void validate_for(const KernelFamily& fam) const {
        fam.validate_phi(lower);
        fam.validate_phi(upper);
    }
};

}  // namespace gpbound

#endif  // GPBOUND_KERNELS_HPP
