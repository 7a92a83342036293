#pragma once

// Ready-made field models: the classical linear field, polynomial fields
// with a single attracting root, and the Gamma-shape likelihood field in
// both its raw score form and its information-normalised form.

#include <cmath>
#include <random>
#include <vector>

#include "sa.hpp"
#include "specfun.hpp"

namespace truncsa {

/// R(u) = -(u - z0), with the given noise.
inline FieldModel linear_field(const Vector& root, NoiseFn noise, bool state_free_noise = true) {
    FieldModel f;
    f.root = root;
    f.regression = [root](Index, const Vector& z, HistoryView) -> Vector { return root - z; };
    f.noise = std::move(noise);
    const Index m = root.size();
    f.jacobian = [m](Index, const Vector&) -> Matrix { return -identity(m); };
    f.time_invariant_jacobian = true;
    f.state_free_noise = state_free_noise;
    return f;
}

/// Scalar field R(z) = -sum_{i=1..l} C_i (z - z0)^i; coeffs[i-1] holds C_i.
inline FieldModel polynomial_field(double root, std::vector<double> coeffs, NoiseFn noise,
                                   bool state_free_noise = true) {
    if (coeffs.empty()) throw ConfigError("polynomial field needs at least one coefficient");
    FieldModel f;
    f.root = scalar_vector(root);
    f.regression = [root, coeffs](Index, const Vector& z, HistoryView) -> Vector {
        const double u = z(0) - root;
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc + *it) * u;
        return scalar_vector(-acc);
    };
    f.jacobian = [root, coeffs](Index, const Vector& z) -> Matrix {
        const double u = z(0) - root;
        double acc = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * u + static_cast<double>(i + 1) * coeffs[i];
        return Matrix::Constant(1, 1, -acc);
    };
    f.time_invariant_jacobian = true;
    f.noise = std::move(noise);
    f.state_free_noise = state_free_noise;
    return f;
}

/// The polynomial of the root-finding study:
/// R(z) = -(z-z0)^7 + 2(z-z0)^6 - 5(z-z0)^5 - 3(z-z0).
inline std::vector<double> study_polynomial_coefficients() { return {3.0, 0.0, 0.0, 0.0, 5.0, -2.0, 1.0}; }

/// One Gamma(theta, 1) observation.
inline double sample_gamma(double theta, NoiseEngine& eng) {
    std::gamma_distribution<double> gamma(theta, 1.0);
    return gamma(eng);
}

/// Gamma(theta, 1) shape model written with step 1/t:
///   R(u)   = (psi(theta) - psi(u)) / psi'(u)
///   eps(u) = (log X - psi(theta)) / psi'(u)
/// so that u + (R + eps)/t is the recursive likelihood update with
/// information t psi'(u). Requires u > 0.
inline FieldModel gamma_normalized_field(double theta) {
    if (!(theta > 0.0)) throw ConfigError("gamma field: theta must be positive");
    const double psi_theta = specfun::digamma(theta);
    FieldModel f;
    f.root = scalar_vector(theta);
    f.regression = [psi_theta](Index t, const Vector& z, HistoryView) -> Vector {
        if (!(z(0) > 0.0)) throw NumericError("gamma field evaluated at a non-positive shape", t, z);
        return scalar_vector((psi_theta - specfun::digamma(z(0))) / specfun::trigamma(z(0)));
    };
    f.noise = [theta, psi_theta](Index t, const Vector& z, NoiseEngine& eng) -> Vector {
        if (!(z(0) > 0.0)) throw NumericError("gamma field evaluated at a non-positive shape", t, z);
        const double x = sample_gamma(theta, eng);
        return scalar_vector((std::log(x) - psi_theta) / specfun::trigamma(z(0)));
    };
    f.state_free_noise = false;
    return f;
}

/// Raw score form: R(u) = psi(theta) - psi(u), eps = log X - psi(theta),
/// R'(u) = -psi'(u). Paired with the cumulative-derivative step rule this
/// reproduces the recursive likelihood update.
inline FieldModel gamma_score_field(double theta) {
    if (!(theta > 0.0)) throw ConfigError("gamma field: theta must be positive");
    const double psi_theta = specfun::digamma(theta);
    FieldModel f;
    f.root = scalar_vector(theta);
    f.regression = [psi_theta](Index t, const Vector& z, HistoryView) -> Vector {
        if (!(z(0) > 0.0)) throw NumericError("gamma field evaluated at a non-positive shape", t, z);
        return scalar_vector(psi_theta - specfun::digamma(z(0)));
    };
    f.noise = [theta, psi_theta](Index, const Vector&, NoiseEngine& eng) -> Vector {
        return scalar_vector(std::log(sample_gamma(theta, eng)) - psi_theta);
    };
    f.jacobian = [](Index t, const Vector& z) -> Matrix {
        if (!(z(0) > 0.0)) throw NumericError("gamma field evaluated at a non-positive shape", t, z);
        return Matrix::Constant(1, 1, -specfun::trigamma(z(0)));
    };
    f.time_invariant_jacobian = true;
    f.state_free_noise = true;
    return f;
}

} // namespace truncsa
