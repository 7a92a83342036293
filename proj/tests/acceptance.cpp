// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantities and wall time. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <truncsa/truncsa.hpp>

#include "oracles.hpp"

using namespace truncsa;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

template <class... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double abs_median(const std::vector<ReplicationResult>& runs, double target) {
    std::vector<double> d;
    for (const auto& r : runs) d.push_back(std::fabs(r.final_value - target));
    return median(d);
}

// 1. Exact linearity in the classical linear case.
Outcome exact_linearity() {
    Vector root(2);
    root << 1.5, -0.5;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        SaConfig c;
        c.initial = Vector::Zero(2);
        c.field = linear_field(root, make_noise_student_t(7.0, 2));
        c.step_rule = rule_scalar([](Index t) { return static_cast<double>(t); }, 2);
        c.horizon = 10000;
        c.seed = seed;
        const Trajectory traj = sa_run(c);
        Vector sum = Vector::Zero(2);
        for (Index t = 1; t <= traj.size(); ++t) sum += traj.noise_at_root(t);
        const Vector linear = root + sum / static_cast<double>(c.horizon);
        worst = std::max(worst, (traj.last() - linear).norm());
    }
    const double bound = 1e-12 * (1.0 + root.norm());
    return {worst <= bound, fmt("max |Z_T - Z*_T| = %.3g (bound %.3g), 50 seeds, T = 1e4", worst, bound)};
}

// 2. Polynomial example converges to the root.
Outcome polynomial_convergence() {
    const Scenario s = builtin_scenario("poly", {"horizon=100000", "replications=500", "paired_noise=off"});
    const ScenarioResult r = simulate(s, 1, jobs());
    std::vector<double> finals;
    Index close = 0;
    for (const auto& rep : r.runs[0]) {
        finals.push_back(rep.final_value);
        close += std::fabs(rep.final_value - 2.0) < 0.1;
    }
    const double frac = static_cast<double>(close) / static_cast<double>(finals.size());
    const double mean = oracle::sample_mean(finals);
    return {frac >= 0.99 && std::fabs(mean - 2.0) <= 0.05,
            fmt("fraction |Z_T - 2| < 0.1 = %.4f (need >= 0.99), mean Z_T = %.5f (need within 0.05 of 2)", frac, mean)};
}

// 3. Trajectories from -2, 0, 5 reach [1.5, 2.5] within 30 steps.
Outcome polynomial_trajectories() {
    const Scenario s = builtin_scenario("poly", {"mode=trajectory", "replications=100"});
    const ScenarioResult r = simulate(s, 1, jobs());
    Index good = 0;
    for (Index rep = 0; rep < 100; ++rep) {
        bool all = true;
        for (std::size_t k = 0; k < 3; ++k) {
            const Trajectory& traj = *r.runs[k][static_cast<std::size_t>(rep)].trajectory;
            bool entered = false;
            for (Index t = 1; t <= 30 && !entered; ++t) {
                const double z = traj.iterate(t)(0);
                entered = z >= 1.5 && z <= 2.5;
            }
            all = all && entered;
        }
        good += all;
    }
    return {good >= 90, fmt("%d of 100 seeds have all three paths enter [1.5, 2.5] by t = 30 (need >= 90)",
                            static_cast<int>(good))};
}

// 4. Moving truncations beat fixed ones for the gamma shape.
Outcome gamma_mt_vs_ft() {
    const std::vector<std::string> base{"horizon=1000", "checkpoints=[1000]", "replications=200", "paired_noise=off",
                                        "outputs=[\"histogram\"]"};
    const double mt = abs_median(simulate(builtin_scenario("gamma_mt", base), 1, jobs()).runs[0], 0.1);
    const double ft = abs_median(simulate(builtin_scenario("gamma_ft", base), 1, jobs()).runs[0], 0.1);
    const double mt_long =
        abs_median(simulate(builtin_scenario("gamma_mt", {"horizon=100000", "checkpoints=[100000]", "replications=200", "paired_noise=off",
                                                          "outputs=[\"histogram\"]"}),
                            1, jobs())
                       .runs[0],
                   0.1);
    return {mt < ft && mt_long < 0.02,
            fmt("T = 1e3: median |err| MT = %.5f, FT = %.5f (need MT < FT); T = 1e5: MT = %.5f (need < 0.02)", mt, ft,
                mt_long)};
}

// 5. Efficiency: variance of sqrt(T)(theta_T - theta) against 1/psi'(theta).
Outcome gamma_efficiency() {
    const double theta = 0.5;
    const Scenario s = builtin_scenario("gamma_mt", {"model.theta=0.5", "horizon=10000", "replications=1000",
                                                     "paired_noise=off", "outputs=[\"histogram\"]",
                                                     "histogram.statistic=\"scaled_error\""});
    const ScenarioResult r = simulate(s, 1, jobs());
    std::vector<double> scaled;
    for (const auto& rep : r.runs[0]) scaled.push_back(rep.statistic);
    const double var = oracle::sample_variance(scaled);
    const double target = 1.0 / oracle::trigamma(theta);
    const double rel = std::fabs(var / target - 1.0);
    return {rel <= 0.15, fmt("Var = %.5f, 1/trigamma(0.5) = %.5f, relative deviation %.4f (need <= 0.15)", var, target,
                             rel)};
}

// 6. AR(1): recursion equals the batch formula; normalized error has unit variance.
Outcome ar1() {
    double worst = 0.0;
    for (double theta : {-0.9, 0.0, 0.5, 0.99, 1.0}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const std::vector<double> x = simulate_ar1(theta, 2000, seed);
            const std::vector<Ar1State> s = ar1_replay(x, Ar1State{});
            const double batch = oracle::ar1_batch(x, 2000, 1.0, 0.0);
            worst = std::max(worst, std::fabs(s.back().theta_hat - batch) / std::max(std::fabs(batch), 1e-300));
        }
    }
    const Scenario sc = builtin_scenario("ar1", {"replications=1000", "outputs=[\"histogram\"]"});
    const ScenarioResult r = simulate(sc, 1, jobs());
    std::vector<double> z;
    for (const auto& rep : r.runs[0]) z.push_back(rep.statistic);
    const double var = oracle::sample_variance(z);
    return {worst <= 1e-10 && std::fabs(var - 1.0) <= 0.10,
            fmt("max relative gap to batch = %.3g (need <= 1e-10); Var(sqrt(I_T)(theta_T - theta)) = %.4f (need within "
                "0.10 of 1)",
                worst, var)};
}

// 7. Special functions against series oracles and bounds.
Outcome specfun_oracles() {
    double worst = 0.0;
    bool bounds = true;
    for (double x : {0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 6.3, 17.0, 50.0}) {
        worst = std::max(worst, std::fabs(specfun::digamma(x) - oracle::digamma(x)));
        worst = std::max(worst, std::fabs(specfun::trigamma(x) - oracle::trigamma(x)));
        const double tg = specfun::trigamma(x);
        bounds = bounds && tg >= 1.0 / x && tg <= (1.0 + x) / (x * x) && specfun::digamma(x) <= std::log(x);
    }
    return {worst <= 1e-10 && bounds,
            fmt("max |kernel - oracle| = %.3g (need <= 1e-10); bounds %s", worst, bounds ? "hold" : "violated")};
}

// 8. Linearity residual medians do not grow.
Outcome linearity_trend() {
    const Scenario s = builtin_scenario("gamma_mt", {"horizon=10000", "replications=200",
                                                     "checkpoints=[100, 1000, 10000]", "outputs=[\"linearity\"]"});
    const ScenarioResult r = simulate(s, 1, jobs());
    std::vector<double> medians;
    for (std::size_t k = 0; k < r.checkpoints.size(); ++k) {
        std::vector<double> v;
        for (const auto& rep : r.runs[0]) v.push_back(rep.linearity[k]);
        medians.push_back(median(v));
    }
    return {median_trend_nonincreasing(medians, 0, 0.10),
            fmt("median residual at t = 1e2, 1e3, 1e4: %.4g, %.4g, %.4g (10%% slack)", medians[0], medians[1],
                medians[2])};
}

// 9. Projection and schedule properties.
Outcome projection_properties() {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 3.0);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    Index checks = 0, failures = 0;
    auto check = [&](bool ok) {
        ++checks;
        failures += !ok;
    };
    auto random_vec = [&](Index m) {
        Vector v(m);
        for (Index i = 0; i < m; ++i) v(i) = n(rng);
        return v;
    };
    for (Index m = 1; m <= 4; ++m) {
        for (int s = 0; s < 50; ++s) {
            const Vector lo = random_vec(m);
            Vector hi = lo;
            for (Index i = 0; i < m; ++i) hi(i) += u(rng);
            for (const ConvexSet& set : {ConvexSet::box(lo, hi), ConvexSet::ball(random_vec(m), u(rng)),
                                         ConvexSet::whole_space()}) {
                for (int k = 0; k < 100; ++k) {
                    const Vector x = 3.0 * random_vec(m), y = 3.0 * random_vec(m);
                    const Vector px = set.project(x), py = set.project(y);
                    check(set.contains(px, 1e-12));
                    check((set.project(px) - px).norm() <= 1e-12);
                    check((px - py).norm() <= (x - y).norm() + 1e-12);
                    for (int j = 0; j < 5; ++j) check((px - x).norm() <= (set.project(random_vec(m)) - x).norm() + 1e-12);
                }
            }
        }
    }
    for (Index m = 1; m <= 3; ++m) {
        for (int s = 0; s < 5; ++s) {
            const Vector lo = random_vec(m), hi = lo + Vector::Constant(m, 2.0), z = 2.0 * random_vec(m);
            const int per = m == 3 ? 41 : 201;
            const Vector g = oracle::grid_nearest_in_box(lo, hi, z, per);
            check((ConvexSet::box(lo, hi).project(z) - g).norm() <= std::sqrt(double(m)) * 2.0 / (per - 1));
        }
    }
    const TruncationSchedule mt = schedule_gamma_mt(0.1, 1.0);
    check(std::fabs(mt.set_at(1).as_box().lower(0) - 0.1 / std::sqrt(std::log(3.0))) < 1e-15);
    check(mt.set_at(1).as_box().upper(0) == 3.0);
    check(admissibility_probe(mt, scalar_vector(0.1), 1, 100000) == Index{1});
    check(admissibility_probe(mt, scalar_vector(0.05), 1, 100000) == Index{53});
    check(!admissibility_probe(schedule_fixed(0.003, 100.0), scalar_vector(200.0), 1, 1000).has_value());
    const TruncationSchedule ex = schedule_expanding([](Index t) { return std::log(3.0 * t); });
    for (Index t = 1; t < 10000; ++t) check(ex.set_at(t + 1).as_box().upper(0) >= ex.set_at(t).as_box().upper(0));
    return {failures == 0, fmt("%d property checks, %d failures; admissibility t* = 53 reproduced", int(checks),
                               int(failures))};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double max_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "exact linearity oracle", 1.0, exact_linearity},
        {2, "polynomial convergence", 120.0, polynomial_convergence},
        {3, "polynomial trajectories", 10.0, polynomial_trajectories},
        {4, "gamma MT vs FT", 120.0, gamma_mt_vs_ft},
        {5, "gamma efficiency", 180.0, gamma_efficiency},
        {6, "AR(1) batch equivalence", 30.0, ar1},
        {7, "special function oracles", 1.0, specfun_oracles},
        {8, "linearity residual trend", 60.0, linearity_trend},
        {9, "projection and schedule properties", 5.0, projection_properties},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.max_seconds;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s criterion %d (%s): %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.max_seconds, in_time ? "" : " TIME LIMIT EXCEEDED");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
