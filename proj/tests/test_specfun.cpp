#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <truncsa/specfun.hpp>

#include "oracles.hpp"

using namespace truncsa;
using Catch::Approx;

namespace {
const std::vector<double> grid{0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 6.3, 17.0, 50.0};
}

TEST_CASE("oracles reproduce known constants") {
    CHECK(std::fabs(oracle::digamma(1.0) + 0.57721566490153286) < 1e-14);
    CHECK(std::fabs(oracle::trigamma(1.0) - std::numbers::pi * std::numbers::pi / 6.0) < 1e-14);
    CHECK(std::fabs(oracle::digamma(0.5) - (-0.57721566490153286 - 2.0 * std::log(2.0))) < 1e-14);
    CHECK(std::fabs(oracle::trigamma(0.5) - std::numbers::pi * std::numbers::pi / 2.0) < 1e-13);
}

TEST_CASE("digamma and trigamma match the series oracles") {
    for (double x : grid) {
        INFO("x = " << x);
        CHECK(std::fabs(specfun::digamma(x) - oracle::digamma(x)) <= 1e-10);
        CHECK(std::fabs(specfun::trigamma(x) - oracle::trigamma(x)) <= 1e-10);
    }
}

TEST_CASE("known values") {
    CHECK(specfun::digamma(1.0) == Approx(-0.57721566490153286).margin(1e-14));
    CHECK(specfun::digamma(2.0) - specfun::digamma(1.0) == Approx(1.0).margin(1e-14));
    CHECK(specfun::trigamma(1.0) == Approx(1.6449340668482264).margin(1e-14));
    CHECK(specfun::trigamma(0.1) == Approx(101.4332).margin(1e-4));
}

TEST_CASE("bounds hold on the grid") {
    for (double x : {0.1, 0.5, 1.0, 5.0, 50.0, 0.01, 0.05, 2.0, 6.3, 17.0}) {
        INFO("x = " << x);
        CHECK(specfun::digamma(x) < std::log(x));
        CHECK(specfun::trigamma(x) >= 1.0 / x);
        CHECK(specfun::trigamma(x) <= (1.0 + x) / (x * x));
    }
    CHECK(specfun::digamma(10.0) < std::log(10.0));
}

TEST_CASE("monotonicity and derivative consistency") {
    double prev_psi = -std::numeric_limits<double>::infinity();
    double prev_tri = std::numeric_limits<double>::infinity();
    for (double x = 0.01; x < 100.0; x *= 1.1) {
        const double p = specfun::digamma(x), q = specfun::trigamma(x);
        CHECK(p > prev_psi);
        CHECK(q < prev_tri);
        prev_psi = p;
        prev_tri = q;
    }
    const double h = 1e-4;
    for (double x : {0.5, 1.0, 2.0, 6.3, 17.0, 50.0}) {
        INFO("x = " << x);
        const double fd = (specfun::digamma(x + h) - specfun::digamma(x - h)) / (2.0 * h);
        CHECK(std::fabs(fd - specfun::trigamma(x)) <= 1e-6 * std::max(1.0, specfun::trigamma(x)));
    }
}

TEST_CASE("error estimate stays within the documented bound") {
    for (double x = 1e-3; x <= 1e3; x *= 1.37) {
        INFO("x = " << x);
        const auto d = specfun::digamma_with_error(x);
        const auto t = specfun::trigamma_with_error(x);
        CHECK(d.est_abs_error <= 1e-10);
        CHECK(t.est_abs_error <= 1e-10);
        CHECK(std::fabs(d.value - oracle::digamma(x)) <= std::max(d.est_abs_error, 1e-14));
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(specfun::digamma(0.0), std::domain_error);
    CHECK_THROWS_AS(specfun::trigamma(-1.0), std::domain_error);
    CHECK_THROWS_AS(specfun::digamma(std::nan("")), std::domain_error);
}
