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

#ifndef GPBOUND_COMMON_HPP
#define GPBOUND_COMMON_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gpbound {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using ConstVectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Smallest admissible value for strictly positive hyperparameters
/// (lengthscales and signal deviations). Boxes that are open at zero are
/// closed at this floor.
inline constexpr double kPhiFloor = 1e-8;

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI's JSON error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& message) : Error("dimension_mismatch", message) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error("domain_violation", message) {}
};

class IllConditionedGram : public Error {
public:
    explicit IllConditionedGram(const std::string& message) : Error("ill_conditioned_gram", message) {}
};

class FitFailed : public Error {
public:
    explicit FitFailed(const std::string& message) : Error("fit_failed", message) {}
};

class OptimizationError : public Error {
public:
    explicit OptimizationError(const std::string& message) : Error("optimization_failed", message) {}
};

class AssumptionError : public Error {
public:
    explicit AssumptionError(const std::string& message) : Error("assumption_violation", message) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("parse_error", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

/// SplitMix64 finalizer. Used to derive independent, scheduling-free RNG
/// streams from a (seed, stream index) pair.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

[[nodiscard]] constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Number of worker threads: GPBOUND_THREADS wins over the requested value,
/// and a non-positive request means "all available cores".
[[nodiscard]] inline unsigned resolve_thread_count(int requested = 0) {
    if (const char* env = std::getenv("GPBOUND_THREADS"); env != nullptr && *env != '\0') {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    if (requested > 0) return static_cast<unsigned>(requested);
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) on up to `threads` threads with static
/// contiguous chunking. The first exception thrown by any worker is rethrown.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace gpbound

#endif  // GPBOUND_COMMON_HPP
