#pragma once

// Recursive estimators: the linear procedure Z_t = Z_{t-1} + gamma_t (h_t - beta_t Z_{t-1}),
// recursive least squares for AR(1), the generic truncated M-estimator and
// the recursive likelihood estimator of the Gamma shape parameter.
// Observations are consumed one at a time; nothing is ever refit in batch.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "core.hpp"
#include "specfun.hpp"
#include "stepsize.hpp"
#include "truncation.hpp"

namespace truncsa {

// ---------------------------------------------------------------------------
// Linear procedure

template <class Observation>
struct LinearProcedure {
    std::function<Matrix(Index, const Observation&)> beta_at; // predictable, PSD
    std::function<Vector(Index, const Observation&)> h_at;
    // Explicit gamma_t. When empty the canonical choice is used:
    // gamma_t^{-1} = gamma_{t-1}^{-1} + beta_t.
    std::optional<StepSizeRule> gamma_rule;
};

struct LinearState {
    Vector z;
    Matrix gamma_inv; // running gamma_t^{-1}; only read by the canonical rule
};

template <class Observation>
LinearState linear_step(const LinearProcedure<Observation>& proc, LinearState state, Index t,
                        const Observation& obs) {
    const Matrix beta = proc.beta_at(t, obs);
    const Vector h = proc.h_at(t, obs);
    const Index m = state.z.size();
    if (beta.rows() != m || beta.cols() != m || h.size() != m)
        throw ConfigError("linear procedure: dimensions of beta_t, h_t and the state disagree");
    Matrix gamma;
    if (proc.gamma_rule) {
        gamma = proc.gamma_rule->gamma_at(t, state.z);
    } else {
        state.gamma_inv += beta;
        gamma = detail::guarded_inverse(state.gamma_inv, t, state.z);
    }
    state.z += gamma * (h - beta * state.z);
    return state;
}

// ---------------------------------------------------------------------------
// AR(1) recursive least squares

struct Ar1State {
    double theta_hat = 0.0;
    double info = 1.0; // I_t, strictly positive
    double last_x = 0.0;
};

/// theta_t = theta_{t-1} + I_t^{-1} X_{t-1} (X_t - theta_{t-1} X_{t-1}),
/// I_t = I_{t-1} + X_{t-1}^2.
inline Ar1State ar1_step(Ar1State s, double x_new) {
    if (!(s.info > 0.0)) throw ConfigError("AR(1) recursion requires positive information");
    const double x_prev = s.last_x;
    s.info += x_prev * x_prev;
    s.theta_hat += x_prev * (x_new - s.theta_hat * x_prev) / s.info;
    s.last_x = x_new;
    return s;
}

/// X_0 = x0, X_t = theta X_{t-1} + xi_t with xi_t ~ N(0, 1). Returns X_0..X_T.
inline std::vector<double> simulate_ar1(double theta, Index horizon, std::uint64_t seed, double x0 = 0.0) {
    std::vector<double> x(static_cast<std::size_t>(horizon) + 1);
    x[0] = x0;
    SplitMix64 eng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t t = 1; t < x.size(); ++t) x[t] = theta * x[t - 1] + normal(eng);
    return x;
}

// ---------------------------------------------------------------------------
// Generic truncated M-estimator

template <class Observation>
using ScoreFn = std::function<Vector(Index, const Observation&, const Vector&)>;

struct MEstimatorStep {
    Vector theta;
    Vector proposed;
    bool truncated = false;
};

/// theta_t = Phi_{U_t}(theta_{t-1} + gamma_t(theta_{t-1}) psi_t(theta_{t-1})).
template <class Observation>
MEstimatorStep m_estimator_step(const ScoreFn<Observation>& psi, const StepSizeRule& gamma_rule,
                                const TruncationSchedule& truncation, const Vector& theta, Index t,
                                const Observation& obs) {
    if (t < 1) throw ConfigError("step index must be >= 1");
    if (!theta.allFinite()) throw NumericError("non-finite estimate", t, theta);
    MEstimatorStep out;
    out.proposed = theta + gamma_rule.gamma_at(t, theta) * psi(t, obs, theta);
    if (!out.proposed.allFinite()) throw NumericError("non-finite proposed estimate", t, theta);
    out.theta = truncation.set_at(t).project(out.proposed);
    out.truncated = (out.theta.array() != out.proposed.array()).any();
    return out;
}

// ---------------------------------------------------------------------------
// Gamma shape recursive likelihood estimator

struct GammaMleState {
    double theta_hat = 1.0;
    Index t = 0;
    TruncationSchedule schedule;
    bool truncated = false; // whether the last update was projected
    double proposed = 0.0;  // last pre-projection value
};

/// theta_t = Phi_{U_t}(theta_{t-1} + [t psi'(theta_{t-1})]^{-1} [log X_t - psi(theta_{t-1})]).
inline GammaMleState gamma_mle_step(GammaMleState s, double x_new) {
    if (!(x_new > 0.0) || !std::isfinite(x_new))
        throw DataError("gamma observation must be positive and finite");
    if (!(s.theta_hat > 0.0)) throw ConfigError("gamma estimate must be positive");
    const Index t = s.t + 1;
    const double th = s.theta_hat;
    const double proposal =
        th + (std::log(x_new) - specfun::digamma(th)) / (static_cast<double>(t) * specfun::trigamma(th));
    if (!std::isfinite(proposal)) throw NumericError("non-finite proposed estimate", t, scalar_vector(th));
    const ConvexSet set = s.schedule.set_at(t);
    s.theta_hat = set.project(scalar_vector(proposal))(0);
    s.proposed = proposal;
    s.truncated = s.theta_hat != proposal;
    s.t = t;
    return s;
}

/// Score of one Gamma(theta, 1) observation: log x - psi(theta).
inline Vector gamma_score(Index, const double& x, const Vector& theta) {
    return scalar_vector(std::log(x) - specfun::digamma(theta(0)));
}

// ---------------------------------------------------------------------------
// Offline replay

inline std::vector<Ar1State> ar1_replay(const std::vector<double>& x, Ar1State init) {
    std::vector<Ar1State> out;
    if (x.empty()) return out;
    init.last_x = x.front();
    out.reserve(x.size());
    out.push_back(init);
    for (std::size_t i = 1; i < x.size(); ++i) out.push_back(ar1_step(out.back(), x[i]));
    return out;
}

inline std::vector<GammaMleState> gamma_replay(const std::vector<double>& x, GammaMleState init) {
    std::vector<GammaMleState> out;
    out.reserve(x.size() + 1);
    out.push_back(std::move(init));
    for (double v : x) out.push_back(gamma_mle_step(out.back(), v));
    return out;
}

} // namespace truncsa
