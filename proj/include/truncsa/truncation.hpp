#pragma once

// Truncation operator (metric projection onto a closed convex set) and the
// time-indexed truncation schedules U_t.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "core.hpp"
#include "trajectory.hpp"

namespace truncsa {

struct Box {
    Vector lower;
    Vector upper;
};

struct Ball {
    Vector center;
    double radius = 0.0;
};

struct WholeSpace {};

/// A nonempty closed convex subset of R^m. Only boxes, balls and the whole
/// space are representable, so every value is a valid truncation set.
class ConvexSet {
public:
    ConvexSet() : set_(WholeSpace{}) {}

    static ConvexSet whole_space() { return ConvexSet(); }

    static ConvexSet box(Vector lower, Vector upper) {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw ConfigError("box bounds must have equal nonzero dimension");
        for (Index i = 0; i < lower.size(); ++i) {
            if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i))
                throw ConfigError("box requires lower <= upper componentwise");
        }
        return ConvexSet(Box{std::move(lower), std::move(upper)});
    }

    static ConvexSet interval(double lower, double upper) {
        return box(scalar_vector(lower), scalar_vector(upper));
    }

    static ConvexSet ball(Vector center, double radius) {
        if (!(radius >= 0.0) || !std::isfinite(radius))
            throw ConfigError("ball radius must be finite and nonnegative");
        if (center.size() == 0 || !center.allFinite()) throw ConfigError("ball center must be finite");
        return ConvexSet(Ball{std::move(center), radius});
    }

    bool is_box() const { return std::holds_alternative<Box>(set_); }
    bool is_ball() const { return std::holds_alternative<Ball>(set_); }
    bool is_whole_space() const { return std::holds_alternative<WholeSpace>(set_); }
    const Box& as_box() const { return std::get<Box>(set_); }
    const Ball& as_ball() const { return std::get<Ball>(set_); }

    /// Dimension, or 0 for the whole space (which fits any dimension).
    Index dim() const {
        if (is_box()) return as_box().lower.size();
        if (is_ball()) return as_ball().center.size();
        return 0;
    }

    bool contains(const Vector& z, double tol = 0.0) const {
        if (const auto* b = std::get_if<Box>(&set_))
            return ((z - b->lower).array() >= -tol).all() && ((b->upper - z).array() >= -tol).all();
        if (const auto* b = std::get_if<Ball>(&set_)) return (z - b->center).norm() <= b->radius + tol;
        return true;
    }

    /// Nearest point of the set in the Euclidean norm; z itself when z is inside.
    Vector project(const Vector& z) const {
        if (const auto* b = std::get_if<Box>(&set_)) return z.cwiseMax(b->lower).cwiseMin(b->upper);
        if (const auto* b = std::get_if<Ball>(&set_)) {
            const Vector d = z - b->center;
            const double n = d.norm();
            if (n <= b->radius) return z;
            return b->center + (b->radius / n) * d;
        }
        return z;
    }

    /// Smallest and largest Euclidean distance from p to points of the set.
    /// The distances over a convex set form an interval, which is what the
    /// annulus test of the drift-strength probe relies on.
    std::pair<double, double> distance_range(const Vector& p) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        if (const auto* b = std::get_if<Box>(&set_)) {
            const double lo = (p - project(p)).norm();
            double far2 = 0.0;
            for (Index i = 0; i < p.size(); ++i) {
                const double d = std::max(std::fabs(p(i) - b->lower(i)), std::fabs(p(i) - b->upper(i)));
                far2 += d * d;
            }
            return {lo, std::sqrt(far2)};
        }
        if (const auto* b = std::get_if<Ball>(&set_)) {
            const double c = (p - b->center).norm();
            return {std::max(0.0, c - b->radius), c + b->radius};
        }
        return {0.0, inf};
    }

private:
    template <class S>
    explicit ConvexSet(S s) : set_(std::move(s)) {}

    std::variant<WholeSpace, Box, Ball> set_;
};

inline Vector project(const ConvexSet& set, const Vector& z) { return set.project(z); }

enum class ScheduleKind { trivial, fixed, expanding, gamma_mt, shrinking_aux };

inline std::string to_string(ScheduleKind k) {
    switch (k) {
    case ScheduleKind::trivial: return "trivial";
    case ScheduleKind::fixed: return "fixed";
    case ScheduleKind::expanding: return "expanding";
    case ScheduleKind::gamma_mt: return "gamma_mt";
    case ScheduleKind::shrinking_aux: return "shrinking_aux";
    }
    return "?";
}

/// Time-indexed family of truncation sets U_t, t >= 1. Immutable.
class TruncationSchedule {
public:
    using SetFn = std::function<ConvexSet(Index, HistoryView)>;

    TruncationSchedule() : kind_(ScheduleKind::trivial), fn_([](Index, HistoryView) { return ConvexSet(); }) {}
    TruncationSchedule(ScheduleKind kind, SetFn fn) : kind_(kind), fn_(std::move(fn)) {}

    ScheduleKind kind() const noexcept { return kind_; }

    ConvexSet set_at(Index t, HistoryView history = {}) const {
        if (t < 1) throw ConfigError("truncation sets are indexed from t = 1");
        return fn_(t, history);
    }

private:
    ScheduleKind kind_;
    SetFn fn_;
};

inline TruncationSchedule schedule_trivial() { return {}; }

/// U_t = Box[lower, upper] for every t.
inline TruncationSchedule schedule_fixed(const Vector& lower, const Vector& upper) {
    if (lower.size() != upper.size() || lower.size() == 0)
        throw ConfigError("fixed truncation: bounds must have equal nonzero dimension");
    if (!((upper - lower).array() > 0.0).all())
        throw ConfigError("fixed truncation requires lower < upper componentwise");
    ConvexSet set = ConvexSet::box(lower, upper);
    return {ScheduleKind::fixed, [set](Index, HistoryView) { return set; }};
}

inline TruncationSchedule schedule_fixed(double lower, double upper) {
    return schedule_fixed(scalar_vector(lower), scalar_vector(upper));
}

/// U_t = Box[-u(t), u(t)] in dimension m.
inline TruncationSchedule schedule_expanding(std::function<double(Index)> u, Index m = 1) {
    if (m < 1) throw ConfigError("expanding truncation: dimension must be >= 1");
    return {ScheduleKind::expanding, [u = std::move(u), m](Index t, HistoryView) {
                const double r = u(t);
                if (!(r > 0.0) || !std::isfinite(r))
                    throw ConfigError("expanding truncation: u(" + std::to_string(t) + ") = " +
                                      std::to_string(r) + " is not positive");
                return ConvexSet::box(Vector::Constant(m, -r), Vector::Constant(m, r));
            }};
}

/// U_t = [c1 (log(t+2))^{-1/2}, c2 (t+2)]: lower bound drifting to 0 and
/// upper bound growing linearly, for positive-parameter models.
inline TruncationSchedule schedule_gamma_mt(double c1, double c2) {
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigError("gamma_mt truncation requires c1, c2 > 0");
    return {ScheduleKind::gamma_mt, [c1, c2](Index t, HistoryView) {
                const double s = static_cast<double>(t) + 2.0;
                return ConvexSet::interval(c1 / std::sqrt(std::log(s)), c2 * s);
            }};
}

enum class RadiusRule { sum, max };

/// Balls shrinking around an auxiliary estimate:
/// U_t = Ball(aux(t), c (1/d(t) + 1/a(t))), or with max in place of the sum.
inline TruncationSchedule schedule_shrinking_aux(std::function<Vector(Index, HistoryView)> aux, double c,
                                                 std::function<double(Index)> d,
                                                 std::function<double(Index)> a,
                                                 RadiusRule rule = RadiusRule::sum) {
    if (!(c > 0.0)) throw ConfigError("shrinking truncation requires c > 0");
    return {ScheduleKind::shrinking_aux,
            [aux = std::move(aux), c, d = std::move(d), a = std::move(a), rule](Index t, HistoryView h) {
                const double dt = d(t), at = a(t);
                if (!(dt > 0.0) || !(at > 0.0))
                    throw ConfigError("shrinking truncation: d(t) and a(t) must be positive at t=" +
                                      std::to_string(t));
                const double radius = rule == RadiusRule::sum ? c * (1.0 / dt + 1.0 / at)
                                                              : c * std::max(1.0 / dt, 1.0 / at);
                if (!(radius > 0.0)) throw ConfigError("shrinking truncation: radius must be positive");
                return ConvexSet::ball(aux(t, h), radius);
            }};
}

/// Convenience overload for an auxiliary estimate that depends on t only.
inline TruncationSchedule schedule_shrinking_aux(std::function<Vector(Index)> aux, double c,
                                                 std::function<double(Index)> d,
                                                 std::function<double(Index)> a,
                                                 RadiusRule rule = RadiusRule::sum) {
    return schedule_shrinking_aux([aux = std::move(aux)](Index t, HistoryView) { return aux(t); }, c,
                                  std::move(d), std::move(a), rule);
}

/// Finite-horizon stand-in for "z0 lies in U_t eventually": the first
/// t* in [t_min, t_max] such that z0 is in U_t for every t in [t*, t_max].
/// Empty when z0 is outside U_{t_max}.
inline std::optional<Index> admissibility_probe(const TruncationSchedule& schedule, const Vector& z0,
                                                Index t_min, Index t_max) {
    if (t_min < 1 || t_max < t_min) throw ConfigError("admissibility probe needs 1 <= t_min <= t_max");
    std::optional<Index> first;
    for (Index t = t_max; t >= t_min; --t) {
        if (!schedule.set_at(t).contains(z0)) break;
        first = t;
    }
    return first;
}

} // namespace truncsa
