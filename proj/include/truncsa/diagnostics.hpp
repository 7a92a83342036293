#pragma once

// Finite-sample checks of convergence, rate and asymptotic linearity on
// simulated trajectories, numeric probes of the drift conditions, and the
// Toeplitz (weighted running mean) helper.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sa.hpp"

namespace truncsa {

/// 1, 10, 100, ... up to the horizon, always ending at the horizon.
inline std::vector<Index> log_checkpoints(Index horizon, Index per_decade = 1) {
    std::vector<Index> out;
    if (horizon < 1) return out;
    for (double e = 0.0;; e += 1.0 / static_cast<double>(per_decade)) {
        const auto t = static_cast<Index>(std::llround(std::pow(10.0, e)));
        if (t >= horizon) break;
        if (out.empty() || out.back() != t) out.push_back(t);
    }
    out.push_back(horizon);
    return out;
}

// ---------------------------------------------------------------------------
// Asymptotic linearity

struct LinearityPoint {
    Index t = 0;
    Vector iterate;        // Z_t
    Vector linear_part;    // Z*_t = z0 + gamma_t(z0) sum_{s<=t} eps_s(z0)
    Vector residual;       // A_t (Z_t - Z*_t)
    double residual_norm = 0.0;
    Matrix norming;        // A_t
    Matrix eta;            // A_t gamma_t(z0) A_t
};

struct LinearityReport {
    std::vector<LinearityPoint> points;
};

/// Symmetric inverse square root, the default norming for a step matrix.
inline Matrix inverse_sqrt_spd(const Matrix& gamma) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gamma + gamma.transpose()));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw NumericError("step matrix at the root is not positive definite", 0);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

/// Compares the trajectory with its linear representation at the given
/// checkpoints (default: log-spaced). Z*_t is rebuilt from the recorded
/// noise-at-root draws and gamma_at_root only.
inline LinearityReport linearity_residual(const Trajectory& traj, const Vector& root,
                                          const std::function<Matrix(Index)>& gamma_at_root,
                                          const std::function<Matrix(Index)>& norming,
                                          std::vector<Index> checkpoints = {}) {
    if (!traj.has_paired())
        throw ConfigError("linearity residual needs noise-at-root draws; re-run with paired noise enabled");
    if (root.size() != traj.dim()) throw ConfigError("root dimension does not match the trajectory");
    if (checkpoints.empty()) checkpoints = log_checkpoints(traj.size());
    std::sort(checkpoints.begin(), checkpoints.end());
    LinearityReport report;
    Vector noise_sum = Vector::Zero(traj.dim());
    Index s = 0;
    for (Index t : checkpoints) {
        if (t < 1 || t > traj.size()) throw ConfigError("checkpoint " + std::to_string(t) + " outside trajectory");
        for (; s < t; ++s) noise_sum += traj.noise_at_root(s + 1);
        LinearityPoint p;
        p.t = t;
        const Matrix gamma = gamma_at_root(t);
        p.iterate = traj.iterate(t);
        p.linear_part = root + gamma * noise_sum;
        p.norming = norming(t);
        p.residual = p.norming * (p.iterate - p.linear_part);
        p.residual_norm = p.residual.norm();
        p.eta = p.norming * gamma * p.norming;
        report.points.push_back(std::move(p));
    }
    return report;
}

/// Uses the field's root, gamma_t(z0) from the step rule and the default
/// norming A_t = gamma_t(z0)^{-1/2} (sqrt(a_t) I for scalar rules).
inline LinearityReport linearity_residual(const Trajectory& traj, const FieldModel& field,
                                          const StepSizeRule& rule, std::vector<Index> checkpoints = {}) {
    const Vector root = field.root;
    auto gamma = [&rule, root](Index t) { return rule.gamma_at(t, root); };
    std::function<Matrix(Index)> norming;
    if (rule.is_scalar()) {
        const Index m = root.size();
        norming = [&rule, m](Index t) -> Matrix { return identity(m) * std::sqrt(rule.a(t)); };
    } else {
        norming = [gamma](Index t) { return inverse_sqrt_spd(gamma(t)); };
    }
    return linearity_residual(traj, root, gamma, norming, std::move(checkpoints));
}

// ---------------------------------------------------------------------------
// Rate

struct RatePoint {
    Index t = 0;
    double value = 0.0; // a_t^delta ||Z_t - z0||^2
};

struct RateReport {
    double delta = 1.0;
    std::vector<RatePoint> points;
};

inline RateReport rate_tracker(const Trajectory& traj, const Vector& root, const std::function<double(Index)>& a,
                               double delta, std::vector<Index> checkpoints = {}) {
    if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("rate tracker: delta must lie in (0, 1]");
    if (checkpoints.empty()) checkpoints = log_checkpoints(traj.size());
    RateReport r;
    r.delta = delta;
    for (Index t : checkpoints) {
        if (t < 1 || t > traj.size()) throw ConfigError("checkpoint " + std::to_string(t) + " outside trajectory");
        r.points.push_back({t, std::pow(a(t), delta) * (traj.iterate(t) - root).squaredNorm()});
    }
    return r;
}

// ---------------------------------------------------------------------------
// Drift-condition probes

/// max over the grid of (z - z0)^T R_t(z); the sign condition holds on the
/// grid when the result is <= 0.
inline double probe_drift_sign(const FieldModel& field, Index t, const std::vector<Vector>& grid) {
    if (grid.empty()) throw ConfigError("drift probe: empty grid");
    double worst = -std::numeric_limits<double>::infinity();
    for (const Vector& z : grid) worst = std::max(worst, (z - field.root).dot(field.regression(t, z, {})));
    return worst;
}

struct DriftStrength {
    double value = 1.0;
    bool empty_set = false; // annulus does not meet U_{t-1}; value is the convention 1
    Index points_used = 0;
};

/// min of -(z - z0)^T R_t(z) over grid points with eps <= ||z - z0|| <= 1/eps
/// lying in U_{t-1}.
inline DriftStrength probe_drift_strength(const FieldModel& field, Index t, double eps,
                                          const std::vector<Vector>& grid, const ConvexSet& previous_set) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("drift strength probe: eps must lie in (0, 1)");
    const Vector& root = field.root;
    const auto [dmin, dmax] = previous_set.distance_range(root);
    if (dmin > 1.0 / eps || dmax < eps) return {1.0, true, 0};
    DriftStrength out;
    out.value = std::numeric_limits<double>::infinity();
    for (const Vector& z : grid) {
        const double r = (z - root).norm();
        if (r < eps || r > 1.0 / eps || !previous_set.contains(z, 1e-12)) continue;
        out.value = std::min(out.value, -(z - root).dot(field.regression(t, z, {})));
        ++out.points_used;
    }
    if (out.points_used == 0) throw ConfigError("drift strength probe: grid does not meet the annulus");
    return out;
}

/// Regular grid over a bounded box with `per_dim` points per coordinate
/// (dimension <= 2).
inline std::vector<Vector> box_grid(const Vector& lower, const Vector& upper, Index per_dim = 1000) {
    const Index m = lower.size();
    if (m < 1 || m > 2 || upper.size() != m) throw ConfigError("grids are supported for dimension 1 or 2 only");
    if (!lower.allFinite() || !upper.allFinite()) throw ConfigError("grid box must be bounded");
    if (per_dim < 2) throw ConfigError("grid needs at least two points per dimension");
    auto coord = [&](Index i, Index k) {
        return lower(i) + (upper(i) - lower(i)) * static_cast<double>(k) / static_cast<double>(per_dim - 1);
    };
    std::vector<Vector> grid;
    if (m == 1) {
        for (Index k = 0; k < per_dim; ++k) grid.push_back(scalar_vector(coord(0, k)));
    } else {
        for (Index j = 0; j < per_dim; ++j)
            for (Index k = 0; k < per_dim; ++k) {
                Vector z(2);
                z << coord(0, j), coord(1, k);
                grid.push_back(std::move(z));
            }
    }
    return grid;
}

struct LocalExpansionFit {
    double exponent = 0.0;   // p in ||R(z0 + u) + u|| ~ C ||u||^p
    double constant = 0.0;   // C
    bool exact_linear = false;

    bool passes(double eps) const { return exact_linear || exponent >= 1.0 + eps; }
};

/// Fits ||R(z0 + r e) + r e|| ~ C r^p over decreasing radii r by log-log
/// least squares along the direction e (default: first axis). R must be
/// scaled so that R'(z0) = -I.
inline LocalExpansionFit probe_local_expansion(const std::function<Vector(const Vector&)>& regression,
                                               const Vector& root, const std::vector<double>& radii,
                                               std::optional<Vector> direction = std::nullopt) {
    if (radii.size() < 2) throw ConfigError("local expansion probe needs at least two radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw ConfigError("local expansion probe: radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1]))
            throw ConfigError("local expansion probe: radii must be strictly decreasing");
    }
    Vector e = direction.value_or(Vector::Unit(root.size(), 0));
    e.normalize();
    std::vector<double> lx, ly;
    bool all_tiny = true;
    for (double r : radii) {
        const Vector u = r * e;
        const double res = (regression(root + u) + u).norm();
        // Below a few ulps of the evaluation the residual is round-off.
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (r + root.norm());
        if (res > floor) {
            all_tiny = false;
            lx.push_back(std::log(r));
            ly.push_back(std::log(res));
        }
    }
    LocalExpansionFit fit;
    if (all_tiny) {
        fit.exact_linear = true;
        fit.exponent = std::numeric_limits<double>::infinity();
        return fit;
    }
    if (lx.size() < 2) throw ConfigError("local expansion probe: fewer than two radii above round-off");
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.constant = std::exp((sy - fit.exponent * sx) / n);
    return fit;
}

// ---------------------------------------------------------------------------
// Toeplitz averaging and Monte Carlo trend rules

/// Running weighted means (sum_{i<=k} a_i v_i) / (sum_{i<=k} a_i). Entries
/// whose prefix weight is still zero are NaN.
inline std::vector<double> toeplitz_average(const std::vector<double>& weights, const std::vector<double>& values) {
    if (weights.size() != values.size()) throw ConfigError("toeplitz average: length mismatch");
    double total = 0.0;
    for (double a : weights) {
        if (!(a >= 0.0)) throw ConfigError("toeplitz average: weights must be nonnegative");
        total += a;
    }
    if (!(total > 0.0)) throw ConfigError("toeplitz average: weights sum to zero");
    std::vector<double> out(values.size());
    double sw = 0.0, swv = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sw += weights[i];
        swv += weights[i] * values[i];
        out[i] = sw > 0.0 ? swv / sw : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of an empty sample");
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

/// Surrogate for convergence in probability: medians over replications at
/// increasing checkpoints may not grow by more than the slack factor,
/// starting from checkpoint index `from`.
inline bool median_trend_nonincreasing(const std::vector<double>& medians, std::size_t from = 0,
                                       double slack = 0.10) {
    for (std::size_t k = std::max<std::size_t>(from, 1); k < medians.size(); ++k)
        if (medians[k] > (1.0 + slack) * medians[k - 1]) return false;
    return true;
}

} // namespace truncsa
