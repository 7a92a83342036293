#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <truncsa/diagnostics.hpp>
#include <truncsa/models.hpp>

#include "oracles.hpp"

using namespace truncsa;
using Catch::Approx;

namespace {

StepSizeRule inv_t(Index m = 1) { return rule_scalar([](Index t) { return static_cast<double>(t); }, m); }

SaConfig gamma_config(const TruncationSchedule& schedule, std::uint64_t seed, Index horizon) {
    SaConfig c;
    c.initial = scalar_vector(1.0);
    c.field = gamma_normalized_field(0.3);
    c.step_rule = inv_t();
    c.truncation = schedule;
    c.horizon = horizon;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("log checkpoints") {
    CHECK(log_checkpoints(10000) == std::vector<Index>{1, 10, 100, 1000, 10000});
    CHECK(log_checkpoints(2500) == std::vector<Index>{1, 10, 100, 1000, 2500});
    CHECK(log_checkpoints(1) == std::vector<Index>{1});
}

TEST_CASE("linearity residual vanishes in the classical linear case") {
    Vector root(2);
    root << 3.0, -1.0;
    SaConfig c;
    c.initial = Vector::Zero(2);
    c.field = linear_field(root, make_noise_student_t(4.0, 2));
    c.step_rule = inv_t(2);
    c.horizon = 10000;
    c.seed = 77;
    const Trajectory traj = sa_run(c);
    const LinearityReport r = linearity_residual(traj, c.field, c.step_rule);
    CHECK(r.points.size() == 5);
    for (const auto& p : r.points) {
        CHECK(p.residual_norm <= 1e-12 * std::sqrt(static_cast<double>(p.t)) * (1.0 + root.norm()));
        CHECK(p.norming.isApprox(std::sqrt(static_cast<double>(p.t)) * Matrix::Identity(2, 2)));
        CHECK(p.eta.isApprox(Matrix::Identity(2, 2)));
    }
}

TEST_CASE("linear representation does not depend on the truncation schedule") {
    const Trajectory a = sa_run(gamma_config(schedule_gamma_mt(0.1, 1.0), 5, 2000));
    const Trajectory b = sa_run(gamma_config(schedule_fixed(0.003, 100.0), 5, 2000));
    const StepSizeRule rule = inv_t();
    const FieldModel f = gamma_normalized_field(0.3);
    const LinearityReport ra = linearity_residual(a, f, rule), rb = linearity_residual(b, f, rule);
    REQUIRE(ra.points.size() == rb.points.size());
    for (std::size_t k = 0; k < ra.points.size(); ++k) CHECK(ra.points[k].linear_part == rb.points[k].linear_part);
}

TEST_CASE("linearity needs paired draws") {
    SaConfig c = gamma_config(schedule_gamma_mt(0.1, 1.0), 1, 50);
    c.paired = PairedNoise::off;
    const Trajectory t = sa_run(c);
    CHECK_THROWS_AS(linearity_residual(t, c.field, c.step_rule), ConfigError);
}

TEST_CASE("rate tracker") {
    SaConfig c;
    c.initial = scalar_vector(5.0);
    c.field = linear_field(scalar_vector(1.0), make_noise_zero());
    c.step_rule = rule_scalar([](Index) { return 2.0; });
    c.horizon = 200;
    const Trajectory contract = sa_run(c);
    const auto a = [](Index t) { return static_cast<double>(t); };
    for (double delta : {0.1, 0.5, 1.0}) {
        const RateReport r = rate_tracker(contract, c.field.root, a, delta);
        CHECK(r.points.back().value < 1e-50);
    }

    c.field.regression = [](Index, const Vector& z, HistoryView) -> Vector { return Vector::Zero(z.size()); };
    const Trajectory frozen = sa_run(c);
    const RateReport r = rate_tracker(frozen, c.field.root, a, 0.5);
    for (const auto& p : r.points) CHECK(p.value == Approx(std::sqrt(static_cast<double>(p.t)) * 16.0));
    CHECK_THROWS_AS(rate_tracker(frozen, c.field.root, a, 0.0), ConfigError);
    CHECK_THROWS_AS(rate_tracker(frozen, c.field.root, a, 1.5), ConfigError);
}

TEST_CASE("drift sign probe") {
    const FieldModel poly = polynomial_field(2.0, study_polynomial_coefficients(), make_noise_zero());
    for (Index t : {1, 10, 1000}) {
        const double b = std::log(3.0 * t);
        CHECK(probe_drift_sign(poly, t, box_grid(scalar_vector(-b), scalar_vector(b), 1000)) <= 0.0);
    }
    FieldModel repel = linear_field(scalar_vector(0.0), make_noise_zero());
    repel.regression = [](Index, const Vector& z, HistoryView) -> Vector { return z; };
    CHECK(probe_drift_sign(repel, 1, box_grid(scalar_vector(-1.0), scalar_vector(1.0), 11)) > 0.0);
    CHECK(probe_drift_sign(poly, 1, {scalar_vector(2.0)}) == 0.0);
    CHECK_THROWS_AS(probe_drift_sign(poly, 1, {}), ConfigError);
}

TEST_CASE("drift strength probe") {
    const FieldModel lin = linear_field(scalar_vector(0.0), make_noise_zero());
    std::vector<Vector> grid;
    for (int k = -100; k <= 100; ++k) grid.push_back(scalar_vector(0.1 * k));
    const DriftStrength d = probe_drift_strength(lin, 1, 0.1, grid, ConvexSet());
    CHECK(d.value == Approx(0.01).epsilon(1e-12));
    CHECK_FALSE(d.empty_set);

    const FieldModel poly = polynomial_field(2.0, study_polynomial_coefficients(), make_noise_zero());
    const double b = std::log(3.0 * 1000);
    const auto pg = box_grid(scalar_vector(-b), scalar_vector(b), 1000);
    const ConvexSet u = ConvexSet::interval(-b, b);
    const DriftStrength dp = probe_drift_strength(poly, 1000, 0.5, pg, u);
    CHECK(dp.value > 0.0);
    double oracle_min = std::numeric_limits<double>::infinity();
    for (const Vector& z : pg) {
        const double r = std::fabs(z(0) - 2.0);
        if (r >= 0.5 && r <= 2.0) oracle_min = std::min(oracle_min, -(z(0) - 2.0) * poly.regression(1, z, {})(0));
    }
    CHECK(dp.value == oracle_min);

    const DriftStrength empty = probe_drift_strength(lin, 1, 0.5, grid, ConvexSet::interval(10.0, 11.0));
    CHECK(empty.empty_set);
    CHECK(empty.value == 1.0);
    CHECK_THROWS_AS(probe_drift_strength(lin, 1, 0.5, {scalar_vector(0.0)}, ConvexSet()), ConfigError);
    CHECK_THROWS_AS(probe_drift_strength(lin, 1, 1.5, grid, ConvexSet()), ConfigError);
}

TEST_CASE("grids") {
    CHECK(box_grid(scalar_vector(0.0), scalar_vector(1.0), 1000).size() == 1000);
    CHECK(box_grid(Vector::Zero(2), Vector::Ones(2), 30).size() == 900);
    CHECK_THROWS_AS(box_grid(Vector::Zero(3), Vector::Ones(3), 10), ConfigError);
}

TEST_CASE("local expansion probe") {
    const std::vector<double> radii{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
    const Vector root = scalar_vector(0.7);
    const auto quad = probe_local_expansion(
        [&](const Vector& z) -> Vector { const double u = z(0) - 0.7; return scalar_vector(-u + u * u); }, root, radii);
    CHECK(quad.exponent == Approx(2.0).margin(1e-6));
    CHECK(quad.constant == Approx(1.0).margin(1e-5));
    CHECK(quad.passes(0.5));

    const auto lin = probe_local_expansion([&](const Vector& z) -> Vector { return root - z; }, root, radii);
    CHECK(lin.exact_linear);

    const FieldModel g = gamma_normalized_field(0.4);
    const auto gf = probe_local_expansion(
        [&](const Vector& z) { return g.regression(1, z, {}); }, scalar_vector(0.4), {1e-2, 5e-3, 2e-3, 1e-3, 5e-4});
    CHECK(gf.exponent == Approx(2.0).margin(0.05));
    CHECK(gf.passes(0.5));

    CHECK_THROWS_AS(probe_local_expansion([&](const Vector& z) { return z; }, root, {1e-2, 1e-1}), ConfigError);
}

TEST_CASE("toeplitz average") {
    const std::size_t n = 10000;
    std::vector<double> ones(n, 1.0), harm(n), sq(n), to5(n), constant(n, 3.25);
    for (std::size_t i = 0; i < n; ++i) {
        harm[i] = 1.0 / static_cast<double>(i + 1);
        sq[i] = std::sqrt(static_cast<double>(i + 1));
        to5[i] = 5.0 + 3.0 / std::sqrt(static_cast<double>(i + 1));
    }
    for (double v : toeplitz_average(sq, constant)) REQUIRE(v == Approx(3.25).epsilon(1e-14));
    const auto h = toeplitz_average(ones, harm);
    CHECK(h.back() == Approx(oracle::harmonic(10000) / 10000.0).epsilon(1e-12));
    CHECK(h.back() == Approx(9.7876e-4).epsilon(1e-4));
    CHECK(std::fabs(toeplitz_average(sq, to5).back() - 5.0) < 0.05);

    std::vector<double> scaled(sq);
    for (double& w : scaled) w *= 1e6;
    const auto a = toeplitz_average(sq, harm), b = toeplitz_average(scaled, harm);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(a[i] == Approx(b[i]).epsilon(1e-13));

    CHECK(std::isnan(toeplitz_average({0.0, 1.0}, {4.0, 2.0})[0]));
    CHECK_THROWS_AS(toeplitz_average({1.0, -1.0}, {1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(toeplitz_average({0.0, 0.0}, {1.0, 1.0}), ConfigError);
}

TEST_CASE("median trend rule") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(median_trend_nonincreasing({1.0, 0.5, 0.54}));
    CHECK_FALSE(median_trend_nonincreasing({1.0, 0.5, 0.56}));
    CHECK(median_trend_nonincreasing({1.0, 2.0, 0.5}, 2));
}
