#pragma once

// Truncated stochastic approximation
//
//     Z_t = Phi_{U_t}( Z_{t-1} + gamma_t(Z_{t-1}) [R_t(Z_{t-1}) + eps_t(Z_{t-1})] )
//
// executed one step at a time. Each step draws its randomness from a
// dedicated per-step stream whose seed comes from the run's master stream,
// so eps_t(Z_{t-1}) and eps_t(z0) are evaluated on the same underlying
// uniforms (common random numbers).

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "core.hpp"
#include "stepsize.hpp"
#include "trajectory.hpp"
#include "truncation.hpp"

namespace truncsa {

using RegressionFn = std::function<Vector(Index, const Vector&, HistoryView)>;
using NoiseFn = std::function<Vector(Index, const Vector&, NoiseEngine&)>;
using JacobianFn = std::function<Matrix(Index, const Vector&)>;

/// Regression field R_t(z) and noise eps_t(z) sharing the root z0.
/// The root is visible to diagnostics only; the engine never reads it
/// except to draw the paired noise-at-root value.
struct FieldModel {
    Vector root;
    RegressionFn regression;
    NoiseFn noise;
    JacobianFn jacobian;               // optional R'_t(z)
    bool time_invariant_jacobian = false;
    bool state_free_noise = false;     // eps_t(z) does not depend on z

    Index dim() const noexcept { return root.size(); }
    bool has_jacobian() const noexcept { return static_cast<bool>(jacobian); }
};

inline StepSizeRule rule_optimal_from_jacobian(const FieldModel& field, const Matrix& gamma0_inv) {
    if (!field.has_jacobian()) throw ConfigError("optimal step rule: field has no regression Jacobian");
    return rule_optimal_from_jacobian(field.jacobian, field.time_invariant_jacobian, gamma0_inv);
}

enum class PairedNoise { automatic, on, off };

struct SaConfig {
    Vector initial;
    StepSizeRule step_rule;
    TruncationSchedule truncation;
    FieldModel field;
    Index horizon = 1;
    std::uint64_t seed = 0;
    PairedNoise paired = PairedNoise::automatic; // automatic: on for m <= 8

    Index dim() const noexcept { return initial.size(); }
    bool records_paired() const noexcept {
        return paired == PairedNoise::on || (paired == PairedNoise::automatic && dim() <= 8);
    }
};

inline void validate(const SaConfig& c) {
    const Index m = c.initial.size();
    if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (m < 1) throw ConfigError("initial point must have dimension >= 1");
    if (!c.initial.allFinite()) throw ConfigError("initial point must be finite");
    if (c.field.root.size() != m) throw ConfigError("field root dimension does not match the initial point");
    if (c.step_rule.dim() != m) throw ConfigError("step rule dimension does not match the initial point");
    if (!c.field.regression || !c.field.noise) throw ConfigError("field model needs regression and noise");
}

/// One truncated step from `state` at time t. `rng` is the run's master
/// stream; exactly one value is taken from it per step.
inline StepRecord sa_step(const Vector& state, Index t, const SaConfig& config, RandomStream& rng,
                          HistoryView history = {}) {
    if (t < 1) throw ConfigError("step index must be >= 1");
    if (!state.allFinite()) throw NumericError("non-finite state", t, state);
    const FieldModel& field = config.field;
    const std::uint64_t step_seed = rng();

    StepRecord rec;
    rec.step = config.step_rule.gamma_at(t, state, history);
    if (!rec.step.allFinite()) throw NumericError("non-finite step matrix", t, state);
    const Vector drift = field.regression(t, state, history);
    NoiseEngine engine(step_seed);
    rec.noise = field.noise(t, state, engine);
    if (config.records_paired()) {
        if (field.state_free_noise) {
            rec.noise_at_root = rec.noise;
        } else {
            NoiseEngine twin(step_seed);
            rec.noise_at_root = field.noise(t, field.root, twin);
        }
    }
    rec.proposed = state + rec.step * (drift + rec.noise);
    if (!rec.proposed.allFinite()) throw NumericError("non-finite proposed point", t, state);

    const ConvexSet set = config.truncation.set_at(t, history);
    if (set.dim() != 0 && set.dim() != state.size())
        throw ConfigError("truncation set dimension does not match the state at t=" + std::to_string(t));
    rec.iterate = set.project(rec.proposed);
    rec.truncated = (rec.iterate.array() != rec.proposed.array()).any();
    return rec;
}

/// Runs the recursion for config.horizon steps. Deterministic in
/// (config, config.seed).
inline Trajectory sa_run(const SaConfig& config) {
    validate(config);
    Trajectory traj(config.initial, config.horizon, config.records_paired());
    RandomStream rng(config.seed);
    Vector state = config.initial;
    for (Index t = 1; t <= config.horizon; ++t) {
        StepRecord rec = sa_step(state, t, config, rng, HistoryView(traj));
        state = rec.iterate;
        traj.append(rec);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// State-free noise samplers

/// N(0, sigma^2) in every coordinate.
inline NoiseFn make_noise_gaussian(double sigma, Index dim = 1) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("gaussian noise: sigma must be positive");
    return [sigma, dim](Index, const Vector&, NoiseEngine& eng) {
        std::normal_distribution<double> normal(0.0, sigma);
        Vector v(dim);
        for (Index i = 0; i < dim; ++i) v(i) = normal(eng);
        return v;
    };
}

/// Student-t with df degrees of freedom, as N(0,1) / sqrt(chi2(df) / df)
/// with both variates taken from the same stream, times `scale`.
inline NoiseFn make_noise_student_t(double df, Index dim = 1, double scale = 1.0) {
    if (!(df > 0.0) || !std::isfinite(df)) throw ConfigError("student-t noise: df must be positive");
    if (!(scale > 0.0)) throw ConfigError("student-t noise: scale must be positive");
    return [df, dim, scale](Index, const Vector&, NoiseEngine& eng) {
        std::normal_distribution<double> normal(0.0, 1.0);
        std::chi_squared_distribution<double> chi2(df);
        Vector v(dim);
        for (Index i = 0; i < dim; ++i) {
            const double z = normal(eng);
            v(i) = scale * z / std::sqrt(chi2(eng) / df);
        }
        return v;
    };
}

inline NoiseFn make_noise_zero(Index dim = 1) {
    return [dim](Index, const Vector&, NoiseEngine&) { return Vector(Vector::Zero(dim)); };
}

} // namespace truncsa
