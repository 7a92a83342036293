#pragma once

// Multi-replication execution of a scenario and the files it produces.
// Replication r of every starting point uses seed base_seed + r.

#include <atomic>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "diagnostics.hpp"
#include "estimators.hpp"
#include "io.hpp"
#include "scenario.hpp"

namespace truncsa {

struct Ar1Path {
    std::vector<double> x;          // X_0..X_T
    std::vector<Ar1State> states;   // recursive estimates, index t
    std::vector<double> batch;      // batch least squares, index t
};

struct ReplicationResult {
    Index start = 0;
    Index rep = 0;
    std::uint64_t seed = 0;
    double statistic = 0.0;
    double final_value = 0.0;
    Index truncations = 0;
    std::optional<Trajectory> trajectory;
    std::optional<Ar1Path> ar1;
    std::vector<double> linearity; // residual norm per checkpoint
    Matrix eta;                    // A_T gamma_T(z0) A_T at the last checkpoint
    std::vector<double> rate;      // a_t^delta ||Z_t - z0||^2 per checkpoint
};

struct ScenarioResult {
    Scenario scenario;
    std::uint64_t base_seed = 0;
    std::vector<Index> checkpoints;
    std::vector<std::vector<ReplicationResult>> runs; // [start][rep]
};

namespace detail {

/// Batch least squares (I_0 theta_0 + sum X_{s-1} X_s) / (I_0 + sum X_{s-1}^2).
inline std::vector<double> ar1_batch(const std::vector<double>& x, double info0, double theta0) {
    std::vector<double> out{theta0};
    long double num = static_cast<long double>(info0) * theta0, den = info0;
    for (std::size_t s = 1; s < x.size(); ++s) {
        num += static_cast<long double>(x[s - 1]) * x[s];
        den += static_cast<long double>(x[s - 1]) * x[s - 1];
        out.push_back(static_cast<double>(num / den));
    }
    return out;
}

/// a_t for rate tracking: a(t) for scalar rules, otherwise the inverse of
/// the largest eigenvalue of gamma_t(z0).
inline std::function<double(Index)> rate_weight(const StepSizeRule& rule, const Vector& root) {
    if (rule.is_scalar()) return [&rule](Index t) { return rule.a(t); };
    return [&rule, root](Index t) {
        Eigen::JacobiSVD<Matrix> svd(rule.gamma_at(t, root));
        return 1.0 / svd.singularValues()(0);
    };
}

inline ReplicationResult run_sa_replication(const Scenario& s, Index start, Index rep, std::uint64_t seed,
                                            const std::vector<Index>& checkpoints) {
    const SaConfig config = build_sa_config(s, s.starts[static_cast<std::size_t>(start)], seed);
    if (s.wants(Output::linearity) && !config.records_paired())
        throw ConfigError("linearity output needs paired noise; set paired_noise = \"on\"");
    Trajectory traj = sa_run(config);
    ReplicationResult r;
    r.start = start;
    r.rep = rep;
    r.seed = seed;
    r.truncations = traj.truncation_count();
    const Vector& root = config.field.root;
    r.final_value = traj.last()(0);
    r.statistic = s.histogram.statistic == Statistic::final_iterate
                      ? r.final_value
                      : std::sqrt(static_cast<double>(s.horizon)) * (r.final_value - root(0));
    if (s.wants(Output::linearity)) {
        const LinearityReport lr = linearity_residual(traj, config.field, config.step_rule, checkpoints);
        for (const auto& p : lr.points) r.linearity.push_back(p.residual_norm);
        r.eta = lr.points.back().eta;
    }
    if (s.wants(Output::rate)) {
        const RateReport rr =
            rate_tracker(traj, root, rate_weight(config.step_rule, root), s.diagnostics.delta, checkpoints);
        for (const auto& p : rr.points) r.rate.push_back(p.value);
    }
    if (s.wants(Output::trajectory)) r.trajectory = std::move(traj);
    return r;
}

inline void ar1_diagnostics(const Scenario& s, const Ar1Path& path, const std::vector<Index>& checkpoints,
                            ReplicationResult& r) {
    const double theta = s.model.theta;
    long double noise_sum = 0.0L;
    std::size_t k = 0;
    for (Index t = 1; t <= s.horizon && k < checkpoints.size(); ++t) {
        const auto i = static_cast<std::size_t>(t);
        noise_sum += static_cast<long double>(path.x[i - 1]) * (path.x[i] - theta * path.x[i - 1]);
        if (t != checkpoints[k]) continue;
        const double info = path.states[i].info;
        const double err = path.states[i].theta_hat - theta;
        if (s.wants(Output::linearity)) {
            const double linear = theta + static_cast<double>(noise_sum) / info;
            r.linearity.push_back(std::fabs(std::sqrt(info) * (path.states[i].theta_hat - linear)));
        }
        if (s.wants(Output::rate)) r.rate.push_back(std::pow(info, s.diagnostics.delta) * err * err);
        ++k;
    }
    r.eta = Matrix::Identity(1, 1);
}

inline ReplicationResult run_ar1_replication(const Scenario& s, Index rep, std::uint64_t seed,
                                             const std::vector<Index>& checkpoints) {
    Ar1Path path;
    path.x = simulate_ar1(s.model.theta, s.horizon, seed, s.model.x0);
    Ar1State init;
    init.theta_hat = s.model.theta0;
    init.info = s.model.info0;
    path.states = ar1_replay(path.x, init);
    ReplicationResult r;
    r.rep = rep;
    r.seed = seed;
    const Ar1State& last = path.states.back();
    r.final_value = last.theta_hat;
    r.statistic = s.histogram.statistic == Statistic::final_iterate
                      ? r.final_value
                      : std::sqrt(last.info) * (last.theta_hat - s.model.theta);
    ar1_diagnostics(s, path, checkpoints, r);
    if (s.wants(Output::trajectory)) {
        path.batch = ar1_batch(path.x, s.model.info0, s.model.theta0);
        r.ar1 = std::move(path);
    }
    return r;
}

inline std::string with_context(const std::string& what, Index start, Index rep, std::size_t nstarts) {
    std::string ctx = "rep " + std::to_string(rep);
    if (nstarts > 1) ctx = "start " + std::to_string(start) + ", " + ctx;
    return ctx + ": " + what;
}

} // namespace detail

/// Runs every (start, replication) pair, up to `jobs` at a time. Results
/// are stored in replication order regardless of completion order. The
/// first failing replication (in that order) aborts the scenario.
inline ScenarioResult simulate(const Scenario& s, std::uint64_t base_seed, unsigned jobs = 1) {
    validate(s);
    ScenarioResult out;
    out.scenario = s;
    out.base_seed = base_seed;
    out.checkpoints = s.checkpoints.empty() ? log_checkpoints(s.horizon) : s.checkpoints;
    std::sort(out.checkpoints.begin(), out.checkpoints.end());
    const bool ar1 = s.model.kind == ModelKind::ar1;
    const std::size_t nstarts = ar1 ? 1 : s.starts.size();
    const auto nreps = static_cast<std::size_t>(s.replications);
    const std::size_t ntasks = nstarts * nreps;

    std::vector<ReplicationResult> results(ntasks);
    std::vector<std::exception_ptr> errors(ntasks);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t i; !failed && (i = next++) < ntasks;) {
            const auto start = static_cast<Index>(i / nreps);
            const auto rep = static_cast<Index>(i % nreps);
            const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(rep);
            try {
                results[i] = ar1 ? detail::run_ar1_replication(s, rep, seed, out.checkpoints)
                                 : detail::run_sa_replication(s, start, rep, seed, out.checkpoints);
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };
    const unsigned nthreads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(ntasks)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < nthreads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < ntasks; ++i) {
        if (!errors[i]) continue;
        const auto start = static_cast<Index>(i / nreps);
        const auto rep = static_cast<Index>(i % nreps);
        try {
            std::rethrow_exception(errors[i]);
        } catch (const NumericError& e) {
            throw NumericError(detail::with_context(e.message(), start, rep, nstarts), e.step(), e.state());
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(detail::with_context(e.what(), start, rep, nstarts));
        }
    }
    out.runs.resize(nstarts);
    for (std::size_t i = 0; i < ntasks; ++i) out.runs[i / nreps].push_back(std::move(results[i]));
    return out;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string suffixed(const std::string& stem, std::size_t k, std::size_t n, const char* ext) {
    return n > 1 ? stem + "_start" + std::to_string(k) + ext : stem + ext;
}

inline nlohmann::json to_json(const Vector& v) {
    nlohmann::json j = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

inline nlohmann::json to_json(const Matrix& m) {
    nlohmann::json j = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        j.push_back(std::move(row));
    }
    return j;
}

inline std::vector<double> column(const std::vector<ReplicationResult>& runs,
                                  std::vector<double> ReplicationResult::*field, std::size_t k) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back((r.*field)[k]);
    return v;
}

} // namespace detail

/// Medians over replications of a per-checkpoint series, plus the trend rule.
inline nlohmann::json checkpoint_report(const std::vector<Index>& checkpoints, const std::vector<ReplicationResult>& runs,
                                        std::vector<double> ReplicationResult::*field, const char* key) {
    std::vector<double> medians;
    for (std::size_t k = 0; k < checkpoints.size(); ++k) medians.push_back(median(detail::column(runs, field, k)));
    nlohmann::json j;
    j["checkpoints"] = checkpoints;
    j[key] = medians;
    j["replications"] = runs.size();
    j["median_nonincreasing"] = median_trend_nonincreasing(medians);
    return j;
}

inline std::string ar1_trajectory_csv(const std::vector<ReplicationResult>& runs) {
    std::string out = "t,rep,x,theta_hat,info,theta_batch\n";
    for (const auto& r : runs) {
        const Ar1Path& p = *r.ar1;
        for (std::size_t t = 0; t < p.x.size(); ++t)
            out += std::to_string(t) + "," + std::to_string(r.rep) + "," + format_double(p.x[t]) + "," +
                   format_double(p.states[t].theta_hat) + "," + format_double(p.states[t].info) + "," +
                   format_double(p.batch[t]) + "\n";
    }
    return out;
}

inline nlohmann::json summary_json(const ScenarioResult& res) {
    const Scenario& s = res.scenario;
    nlohmann::json j;
    j["name"] = s.name;
    j["base_seed"] = res.base_seed;
    j["horizon"] = s.horizon;
    j["replications"] = s.replications;
    j["statistic"] = detail::name_of(detail::statistic_names(), s.histogram.statistic);
    j["starts"] = nlohmann::json::array();
    for (std::size_t k = 0; k < res.runs.size(); ++k) {
        std::vector<double> stat;
        double truncations = 0.0;
        for (const auto& r : res.runs[k]) {
            stat.push_back(r.statistic);
            truncations += static_cast<double>(r.truncations);
        }
        const SampleSummary sum = summarize(stat);
        nlohmann::json e;
        if (s.model.kind != ModelKind::ar1) e["start"] = detail::to_json(s.starts[k]);
        e["mean"] = sum.mean;
        e["variance"] = sum.variance;
        nlohmann::json q;
        for (const auto& [p, v] : sum.quantiles) q[format_double(p)] = v;
        e["quantiles"] = q;
        e["truncation_rate"] = truncations / (static_cast<double>(stat.size()) * static_cast<double>(s.horizon));
        j["starts"].push_back(std::move(e));
    }
    return j;
}

/// Writes one file per requested output plus summary.json into `dir`.
/// Returns the paths written.
inline std::vector<std::filesystem::path> write_outputs(const ScenarioResult& res, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    const Scenario& s = res.scenario;
    const std::size_t n = res.runs.size();
    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        const fs::path p = dir / name;
        write_text_file(p, text);
        written.push_back(p);
    };
    for (std::size_t k = 0; k < n; ++k) {
        const auto& runs = res.runs[k];
        if (s.wants(Output::trajectory)) {
            std::string text;
            if (s.model.kind == ModelKind::ar1) {
                text = ar1_trajectory_csv(runs);
            } else {
                text = trajectory_csv_header(s.dim(), runs.front().trajectory->has_paired());
                for (const auto& r : runs) append_trajectory_csv(text, *r.trajectory, r.rep);
            }
            emit(detail::suffixed("trajectory", k, n, ".csv"), text);
        }
        if (s.wants(Output::histogram) && runs.size() >= 2) {
            std::vector<double> stat;
            for (const auto& r : runs) stat.push_back(r.statistic);
            emit(detail::suffixed("histogram", k, n, ".csv"),
                 histogram_csv(make_histogram(stat, s.histogram.bins, s.histogram.range)));
        }
        if (s.wants(Output::linearity)) {
            std::string csv = "rep,t,residual_norm\n";
            for (const auto& r : runs)
                for (std::size_t c = 0; c < res.checkpoints.size(); ++c)
                    csv += std::to_string(r.rep) + "," + std::to_string(res.checkpoints[c]) + "," +
                           format_double(r.linearity[c]) + "\n";
            emit(detail::suffixed("linearity", k, n, ".csv"), csv);
            nlohmann::json j = checkpoint_report(res.checkpoints, runs, &ReplicationResult::linearity, "residual_norm");
            j["eta_estimate"] = detail::to_json(runs.front().eta);
            emit(detail::suffixed("linearity", k, n, ".json"), j.dump(2) + "\n");
        }
        if (s.wants(Output::rate)) {
            std::string csv = "rep,t,value\n";
            for (const auto& r : runs)
                for (std::size_t c = 0; c < res.checkpoints.size(); ++c)
                    csv += std::to_string(r.rep) + "," + std::to_string(res.checkpoints[c]) + "," +
                           format_double(r.rate[c]) + "\n";
            emit(detail::suffixed("rate", k, n, ".csv"), csv);
            nlohmann::json j = checkpoint_report(res.checkpoints, runs, &ReplicationResult::rate, "value");
            j["delta"] = s.diagnostics.delta;
            emit(detail::suffixed("rate", k, n, ".json"), j.dump(2) + "\n");
        }
    }
    emit("summary.json", summary_json(res).dump(2) + "\n");
    return written;
}

} // namespace truncsa
