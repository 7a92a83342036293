#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/SVD>

#include "core.hpp"
#include "trajectory.hpp"

namespace truncsa {

/// Matrix step-size gamma_t(z). Scalar rules gamma_t = I / a(t) also keep
/// a(t) around, since norming and rate diagnostics are phrased in it.
class StepSizeRule {
public:
    using GammaFn = std::function<Matrix(Index, const Vector&, HistoryView)>;
    using IncrementFn = std::function<Matrix(Index, const Vector&)>;

    StepSizeRule() = default;
    StepSizeRule(Index dim, GammaFn gamma, IncrementFn inverse_increment = {},
                 std::function<double(Index)> scalar_a = {})
        : dim_(dim), gamma_(std::move(gamma)), inverse_increment_(std::move(inverse_increment)),
          scalar_a_(std::move(scalar_a)) {}

    Index dim() const noexcept { return dim_; }

    Matrix gamma_at(Index t, const Vector& z, HistoryView history = {}) const {
        return gamma_(t, z, history);
    }

    bool has_inverse_increment() const noexcept { return static_cast<bool>(inverse_increment_); }
    /// gamma_t^{-1}(z) - gamma_{t-1}^{-1}(z).
    Matrix inverse_increment(Index t, const Vector& z) const {
        if (!inverse_increment_) throw ConfigError("step rule has no inverse increment");
        return inverse_increment_(t, z);
    }

    bool is_scalar() const noexcept { return static_cast<bool>(scalar_a_); }
    double a(Index t) const {
        if (!scalar_a_) throw ConfigError("step rule is not of the scalar form I / a(t)");
        return scalar_a_(t);
    }

private:
    Index dim_ = 0;
    GammaFn gamma_;
    IncrementFn inverse_increment_;
    std::function<double(Index)> scalar_a_;
};

/// gamma_t = I / a(t) with a(0) = 0. The sequence is probed on
/// t = 1..probe_length and must be positive and nondecreasing there.
inline StepSizeRule rule_scalar(std::function<double(Index)> a, Index dim = 1, Index probe_length = 1000) {
    if (dim < 1) throw ConfigError("step rule dimension must be >= 1");
    double prev = 0.0;
    for (Index t = 1; t <= probe_length; ++t) {
        const double v = a(t);
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError("scalar step: a(" + std::to_string(t) + ") must be positive and finite");
        if (v < prev) throw ConfigError("scalar step: a(t) must be nondecreasing (fails at t=" + std::to_string(t) + ")");
        prev = v;
    }
    auto gamma = [a, dim](Index t, const Vector& z, HistoryView) -> Matrix {
        const double v = a(t);
        if (!(v > 0.0) || !std::isfinite(v)) throw NumericError("scalar step: a(t) is not positive", t, z);
        return identity(dim) / v;
    };
    auto increment = [a, dim](Index t, const Vector&) -> Matrix {
        return identity(dim) * (a(t) - (t > 1 ? a(t - 1) : 0.0));
    };
    return {dim, std::move(gamma), std::move(increment), std::move(a)};
}

namespace detail {

inline constexpr double max_condition_number = 1e12;

/// Inverse of a square matrix through its SVD; throws when the condition
/// number exceeds max_condition_number.
inline Matrix guarded_inverse(const Matrix& m, Index t, const Vector& z) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    const double smin = s.size() ? s(s.size() - 1) : 0.0;
    if (!(smax > 0.0) || !(smin > 0.0) || smax / smin > max_condition_number || !std::isfinite(smax))
        throw NumericError("singular inverse step matrix", t, z);
    return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

inline bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline bool is_psd(const Matrix& m, double tol) {
    if (m.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return es.eigenvalues().minCoeff() >= -tol * scale;
}

} // namespace detail

/// Cumulative-derivative rule gamma_t^{-1}(z) = gamma0_inv - sum_{s<=t} R'_s(z),
/// evaluated at the queried point (the live procedure queries the current
/// iterate). When the Jacobian does not depend on s the sum is t R'(z).
/// gamma0_inv must be symmetric positive semi-definite; a singular
/// gamma_t^{-1} is reported as a NumericError naming t.
inline StepSizeRule rule_optimal_from_jacobian(std::function<Matrix(Index, const Vector&)> jacobian,
                                               bool time_invariant, const Matrix& gamma0_inv) {
    if (!jacobian) throw ConfigError("optimal step rule needs the regression Jacobian");
    const Index m = gamma0_inv.rows();
    if (m < 1 || gamma0_inv.cols() != m) throw ConfigError("gamma0_inv must be a nonempty square matrix");
    if (!detail::is_symmetric(gamma0_inv, 1e-10) || !detail::is_psd(gamma0_inv, 1e-12))
        throw ConfigError("gamma0_inv must be symmetric positive semi-definite");

    auto inverse_at = [jacobian, time_invariant, gamma0_inv](Index t, const Vector& z) -> Matrix {
        if (time_invariant) return gamma0_inv - static_cast<double>(t) * jacobian(1, z);
        Matrix acc = gamma0_inv;
        for (Index s = 1; s <= t; ++s) acc -= jacobian(s, z);
        return acc;
    };
    auto gamma = [inverse_at](Index t, const Vector& z, HistoryView) -> Matrix {
        return detail::guarded_inverse(inverse_at(t, z), t, z);
    };
    auto increment = [jacobian](Index t, const Vector& z) -> Matrix { return -jacobian(t, z); };
    return {m, std::move(gamma), std::move(increment)};
}

/// Running conditional Fisher information I_t = I_0 + sum of increments.
class FisherAccumulator {
public:
    explicit FisherAccumulator(Index dim) : info_(Matrix::Zero(dim, dim)) {}
    explicit FisherAccumulator(Matrix initial) : info_(std::move(initial)) {
        if (!detail::is_symmetric(info_, 1e-10) || !detail::is_psd(info_, 1e-10))
            throw ConfigError("initial information must be symmetric positive semi-definite");
    }

    const Matrix& info() const noexcept { return info_; }
    Index count() const noexcept { return count_; }
    Index dim() const noexcept { return info_.rows(); }

    /// Adds a conditional outer-product matrix. Rejects asymmetric or
    /// indefinite increments (tolerance 1e-10).
    FisherAccumulator& add(const Matrix& increment) {
        if (increment.rows() != dim() || increment.cols() != dim())
            throw ConfigError("Fisher increment has the wrong shape");
        if (!increment.allFinite()) throw DataError("Fisher increment is not finite");
        if (!detail::is_symmetric(increment, 1e-10)) throw DataError("Fisher increment is not symmetric");
        if (!detail::is_psd(increment, 1e-10)) throw DataError("Fisher increment is not positive semi-definite");
        info_ += increment;
        ++count_;
        return *this;
    }

    /// Adds the outer product l l^T of a score vector.
    FisherAccumulator& add_score(const Vector& score) {
        if (score.size() != dim()) throw ConfigError("score has the wrong dimension");
        return add(score * score.transpose());
    }

private:
    Matrix info_;
    Index count_ = 0;
};

inline FisherAccumulator fisher_update(FisherAccumulator acc, const Matrix& increment) {
    acc.add(increment);
    return acc;
}

inline FisherAccumulator fisher_update(FisherAccumulator acc, const Vector& score) {
    acc.add_score(score);
    return acc;
}

} // namespace truncsa
