#pragma once

// Shared vocabulary of the library: linear algebra aliases, the error
// hierarchy, and the random streams used by every simulation.

#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace truncsa {

using Index = std::int64_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of R^m. Every vector stored by the engine is checked with
/// all_finite() first.
using StateVector = Vector;

inline bool all_finite(const Eigen::Ref<const Matrix>& x) {
    return x.allFinite();
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments; surfaced by the CLI as exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Bad input data (non-positive Gamma observation, malformed CSV row).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during a run (non-finite proposal, singular step
/// matrix). Carries the failing step and, when known, the state.
class NumericError : public Error {
public:
    NumericError(const std::string& what, Index step, Vector state = {})
        : Error(format(what, step, state)), message_(what), step_(step), state_(std::move(state)) {}

    /// The description without the step and state suffix.
    const std::string& message() const noexcept { return message_; }
    Index step() const noexcept { return step_; }
    const Vector& state() const noexcept { return state_; }

private:
    static std::string format(const std::string& what, Index step, const Vector& state) {
        std::ostringstream os;
        os.precision(std::numeric_limits<double>::max_digits10);
        os << what << " (t=" << step;
        if (state.size() > 0) {
            os << ", state=[";
            for (Index i = 0; i < state.size(); ++i) os << (i ? ", " : "") << state(i);
            os << "]";
        }
        os << ")";
        return os.str();
    }

    std::string message_;
    Index step_;
    Vector state_;
};

/// SplitMix64. Used both as the master stream of a trajectory and as the
/// per-step stream from which noise is drawn; satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    bool operator==(const SplitMix64&) const = default;

private:
    std::uint64_t state_;
};

using RandomStream = SplitMix64;
using NoiseEngine = SplitMix64;

inline Matrix identity(Index m) { return Matrix::Identity(m, m); }

inline Vector scalar_vector(double v) { return Vector::Constant(1, v); }

} // namespace truncsa
