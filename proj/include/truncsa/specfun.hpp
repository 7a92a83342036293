#pragma once

// Digamma and trigamma for positive real arguments: upward recurrence
// until the argument exceeds 6, then the asymptotic series through B_12.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace truncsa::specfun {

struct SpecFunResult {
    double value = 0.0;
    double est_abs_error = 0.0;
};

namespace detail {

inline constexpr double recurrence_threshold = 6.0;

// B_2, B_4, ..., B_12
inline constexpr std::array<double, 6> bernoulli_even = {
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0};
inline constexpr double bernoulli_14 = 7.0 / 6.0;

inline void require_positive(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::domain_error(std::string(name) + ": argument must be positive and finite, got " +
                                std::to_string(x));
}

inline double half_ulp(double v) {
    const double a = std::fabs(v);
    return 0.5 * (std::nextafter(a, std::numeric_limits<double>::infinity()) - a);
}

} // namespace detail

/// psi(x) = d/dx log Gamma(x), with an estimate of the absolute error.
inline SpecFunResult digamma_with_error(double x) {
    detail::require_positive(x, "digamma");
    int shifts = 0;
    double y = x;
    while (y <= detail::recurrence_threshold) {
        y += 1.0;
        ++shifts;
    }
    const double inv = 1.0 / y;
    const double inv2 = inv * inv;
    double series = 0.0;
    double pw = inv2;
    for (int k = 1; k <= 6; ++k) {
        series += detail::bernoulli_even[k - 1] / (2.0 * k) * pw;
        pw *= inv2;
    }
    const double tail = std::fabs(detail::bernoulli_14 / 14.0 * pw);
    // Recurrence accumulated in extended precision, smallest terms first, so
    // the final rounding to double dominates the error.
    long double acc = std::log(y) - 0.5 * inv - series;
    for (int k = shifts - 1; k >= 0; --k) acc -= 1.0L / (static_cast<long double>(x) + k);
    const double value = static_cast<double>(acc);
    const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * (std::log(y) + 1.0);
    return {value, tail + rounding + detail::half_ulp(value)};
}

/// psi'(x) = d^2/dx^2 log Gamma(x), with an estimate of the absolute error.
inline SpecFunResult trigamma_with_error(double x) {
    detail::require_positive(x, "trigamma");
    int shifts = 0;
    double y = x;
    while (y <= detail::recurrence_threshold) {
        y += 1.0;
        ++shifts;
    }
    const double inv = 1.0 / y;
    const double inv2 = inv * inv;
    double series = 0.0;
    double pw = inv2 * inv;
    for (int k = 1; k <= 6; ++k) {
        series += detail::bernoulli_even[k - 1] * pw;
        pw *= inv2;
    }
    const double tail = std::fabs(detail::bernoulli_14 * pw);
    const double base = inv + 0.5 * inv2 + series;
    long double acc = base;
    for (int k = shifts - 1; k >= 0; --k) {
        const long double xk = static_cast<long double>(x) + k;
        acc += 1.0L / (xk * xk);
    }
    const double value = static_cast<double>(acc);
    const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * (base + 2.0);
    return {value, tail + rounding + detail::half_ulp(value)};
}

inline double digamma(double x) { return digamma_with_error(x).value; }
inline double trigamma(double x) { return trigamma_with_error(x).value; }

} // namespace truncsa::specfun
