#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <truncsa/truncation.hpp>

#include "oracles.hpp"

using namespace truncsa;
using Catch::Approx;

namespace {

Vector v2(double a, double b) {
    Vector z(2);
    z << a, b;
    return z;
}

std::vector<ConvexSet> sample_sets(std::mt19937_64& rng, Index m) {
    std::normal_distribution<double> n(0.0, 2.0);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<ConvexSet> sets{ConvexSet::whole_space()};
    for (int i = 0; i < 20; ++i) {
        Vector lo(m), hi(m), c(m);
        for (Index k = 0; k < m; ++k) {
            lo(k) = n(rng);
            hi(k) = lo(k) + u(rng);
            c(k) = n(rng);
        }
        sets.push_back(ConvexSet::box(lo, hi));
        sets.push_back(ConvexSet::ball(c, u(rng)));
    }
    sets.push_back(ConvexSet::ball(Vector::Zero(m), 0.0));
    return sets;
}

} // namespace

TEST_CASE("projection examples") {
    const ConvexSet box = ConvexSet::interval(-2.0, 3.0);
    CHECK(box.project(scalar_vector(5.0))(0) == 3.0);
    CHECK(box.project(scalar_vector(1.0))(0) == 1.0);
    const Vector p = ConvexSet::ball(Vector::Zero(2), 1.0).project(v2(3.0, 4.0));
    CHECK(p(0) == Approx(0.6).margin(1e-15));
    CHECK(p(1) == Approx(0.8).margin(1e-15));
    CHECK(ConvexSet::whole_space().project(v2(1e300, -7.0)) == v2(1e300, -7.0));
    CHECK(ConvexSet::ball(v2(1.0, 1.0), 0.0).project(v2(1.0, 1.0)) == v2(1.0, 1.0));
    CHECK(ConvexSet::ball(v2(1.0, 1.0), 0.0).project(v2(5.0, 1.0)) == v2(1.0, 1.0));
}

TEST_CASE("set construction is validated") {
    CHECK_THROWS_AS(ConvexSet::interval(1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(ConvexSet::ball(Vector::Zero(2), -1.0), ConfigError);
    CHECK_THROWS_AS(ConvexSet::box(Vector::Zero(2), Vector::Zero(3)), ConfigError);
    CHECK_NOTHROW(ConvexSet::interval(1.0, 1.0));
}

TEST_CASE("projection properties on random sets and points") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n(0.0, 5.0);
    for (Index m : {1, 2, 3, 5}) {
        for (const ConvexSet& set : sample_sets(rng, m)) {
            for (int k = 0; k < 50; ++k) {
                Vector x(m), y(m);
                for (Index i = 0; i < m; ++i) {
                    x(i) = n(rng);
                    y(i) = n(rng);
                }
                const Vector px = set.project(x), py = set.project(y);
                CHECK(set.contains(px, 1e-12));
                CHECK((set.project(px) - px).norm() <= 1e-12);
                CHECK((px - py).norm() <= (x - y).norm() + 1e-12);
                if (set.contains(x)) CHECK(px == x);
            }
        }
    }
}

TEST_CASE("box projection agrees with brute-force grid search") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 3.0);
    for (Index m : {1, 2, 3}) {
        const int per_dim = m == 3 ? 41 : 201;
        for (int trial = 0; trial < 10; ++trial) {
            Vector lo(m), hi(m), z(m);
            for (Index i = 0; i < m; ++i) {
                lo(i) = n(rng);
                hi(i) = lo(i) + 2.0;
                z(i) = n(rng);
            }
            const Vector exact = ConvexSet::box(lo, hi).project(z);
            const Vector grid = oracle::grid_nearest_in_box(lo, hi, z, per_dim);
            const double h = 2.0 / (per_dim - 1);
            CHECK((exact - grid).norm() <= std::sqrt(static_cast<double>(m)) * h);
            CHECK((exact - z).norm() <= (grid - z).norm() + 1e-12);
        }
    }
}

TEST_CASE("ball projection minimizes distance over sampled points of the ball") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    const ConvexSet ball = ConvexSet::ball(v2(1.0, -2.0), 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector z = v2(4.0 * n(rng), 4.0 * n(rng));
        const Vector p = ball.project(z);
        for (int k = 0; k < 200; ++k) {
            const Vector u = ball.project(v2(1.0 + 2.0 * n(rng), -2.0 + 2.0 * n(rng)));
            CHECK((p - z).norm() <= (u - z).norm() + 1e-12);
        }
    }
}

TEST_CASE("fixed schedule") {
    const TruncationSchedule s = schedule_fixed(0.003, 100.0);
    CHECK(s.kind() == ScheduleKind::fixed);
    for (Index t : {1, 10, 1000}) {
        const Box b = s.set_at(t).as_box();
        CHECK(b.lower(0) == 0.003);
        CHECK(b.upper(0) == 100.0);
    }
    CHECK(s.set_at(10).project(scalar_vector(200.0))(0) == 100.0);
    CHECK_THROWS_AS(schedule_fixed(1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(s.set_at(0), ConfigError);
}

TEST_CASE("expanding schedule") {
    const TruncationSchedule s = schedule_expanding([](Index t) { return std::log(3.0 * t); });
    CHECK(s.set_at(1).as_box().upper(0) == Approx(1.0986122886681098).epsilon(1e-15));
    CHECK(s.set_at(1).as_box().lower(0) == -s.set_at(1).as_box().upper(0));
    for (Index t = 1; t < 10000; ++t) {
        const Box a = s.set_at(t).as_box();
        const Box b = s.set_at(t + 1).as_box();
        REQUIRE(b.lower(0) <= a.lower(0));
        REQUIRE(b.upper(0) >= a.upper(0));
    }
    const double C = 2.0, r = 1.0, l = 7.0;
    const TruncationSchedule power = schedule_expanding([=](Index t) { return C * std::pow(t, r / (2 * l)); }, 2);
    CHECK(power.set_at(16).as_box().upper(1) == Approx(C * std::pow(16.0, r / 14.0)));
    const TruncationSchedule bad = schedule_expanding([](Index t) { return std::log(t); });
    CHECK_THROWS_AS(bad.set_at(1), ConfigError);
}

TEST_CASE("gamma_mt schedule") {
    const TruncationSchedule s = schedule_gamma_mt(0.1, 1.0);
    const Box b1 = s.set_at(1).as_box();
    CHECK(b1.lower(0) == Approx(0.1 / std::sqrt(std::log(3.0))).epsilon(1e-15));
    CHECK(b1.lower(0) == Approx(0.09541).margin(5e-5));
    CHECK(b1.upper(0) == 3.0);
    double lo = b1.lower(0), hi = b1.upper(0);
    for (Index t = 2; t <= 1000000; ++t) {
        const Box b = s.set_at(t).as_box();
        if (!(b.lower(0) < lo && b.upper(0) > hi)) FAIL("not monotone at t=" << t);
        lo = b.lower(0);
        hi = b.upper(0);
    }
    CHECK_THROWS_AS(schedule_gamma_mt(0.0, 1.0), ConfigError);
}

TEST_CASE("shrinking auxiliary schedule") {
    const Vector z0 = v2(1.0, 2.0);
    auto t_seq = [](Index t) { return static_cast<double>(t); };
    const TruncationSchedule sum = schedule_shrinking_aux([z0](Index) { return z0; }, 1.0, t_seq, t_seq);
    const TruncationSchedule mx =
        schedule_shrinking_aux([z0](Index) { return z0; }, 1.0, t_seq, t_seq, RadiusRule::max);
    for (Index t = 1; t <= 1000; ++t) {
        const Ball& b = sum.set_at(t).as_ball();
        REQUIRE(b.radius == Approx(2.0 / t).epsilon(1e-15));
        REQUIRE(sum.set_at(t).contains(z0));
        REQUIRE(b.radius >= mx.set_at(t).as_ball().radius);
    }
    const Vector e1 = v2(1.0, 0.0);
    for (double c : {1.0, 1.5, 4.0}) {
        const TruncationSchedule off = schedule_shrinking_aux(
            [z0, e1](Index t) -> Vector { return z0 + e1 / static_cast<double>(t); }, c, t_seq, t_seq);
        for (Index t = 1; t <= 1000; ++t) REQUIRE(off.set_at(t).contains(z0, 1e-15));
    }
    const TruncationSchedule bad =
        schedule_shrinking_aux([z0](Index) { return z0; }, 1.0, [](Index) { return 0.0; }, t_seq);
    CHECK_THROWS_AS(bad.set_at(1), ConfigError);
}

TEST_CASE("admissibility probe") {
    const TruncationSchedule mt = schedule_gamma_mt(0.1, 1.0);
    CHECK(admissibility_probe(mt, scalar_vector(0.1), 1, 100000) == Index{1});
    // 0.1 (log(t+2))^{-1/2} <= 0.05 iff t + 2 >= e^4.
    const Index expected = static_cast<Index>(std::ceil(std::exp(4.0) - 2.0));
    CHECK(expected == 53);
    CHECK(admissibility_probe(mt, scalar_vector(0.05), 1, 100000) == Index{53});
    CHECK_FALSE(admissibility_probe(schedule_fixed(0.0, 1.0), scalar_vector(2.0), 1, 1000).has_value());
    CHECK(admissibility_probe(schedule_trivial(), scalar_vector(2.0), 1, 10) == Index{1});
}
