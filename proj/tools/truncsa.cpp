// truncsa: run simulation scenarios and diagnostics from the command line.
//
//   truncsa run <scenario.toml> [--seed N] [--jobs K] [--out DIR]
//   truncsa builtin poly|gamma_mt|gamma_ft|ar1 [--override key=val]... [--seed N] [--jobs K] [--out DIR]
//   truncsa diag linearity|rate|probe <traj.csv> <model.toml>
//   truncsa replay ar1|gamma <data.csv> [--theta0 X] [--info0 X]
//
// Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
// 3 numeric failure during a run.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include <truncsa/truncsa.hpp>

namespace {

using namespace truncsa;
using nlohmann::json;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Scenario& s) {
    if (flag) return *flag;
    if (const char* env = std::getenv("TRUNCSA_SEED")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("TRUNCSA_SEED is not an unsigned integer: ") + env);
    }
    return s.seed;
}

void run_and_write(const Scenario& s, std::uint64_t seed, unsigned jobs, const std::string& out) {
    const ScenarioResult res = simulate(s, seed, jobs);
    for (const auto& p : write_outputs(res, out)) std::cout << p.string() << "\n";
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

std::vector<Index> checkpoints_for(const Scenario& s, Index horizon) {
    std::vector<Index> cps;
    for (Index c : s.checkpoints)
        if (c <= horizon) cps.push_back(c);
    return cps.empty() ? log_checkpoints(horizon) : cps;
}

json diag_linearity_sa(const std::vector<RecordedRun>& runs, const Scenario& s) {
    const FieldModel field = build_field(s);
    const StepSizeRule rule = build_step_rule(s, field);
    const std::vector<Index> cps = checkpoints_for(s, runs.front().trajectory.size());
    std::vector<ReplicationResult> rows;
    Matrix eta;
    for (const auto& run : runs) {
        const LinearityReport lr = linearity_residual(run.trajectory, field, rule, cps);
        ReplicationResult r;
        for (const auto& p : lr.points) r.linearity.push_back(p.residual_norm);
        eta = lr.points.back().eta;
        rows.push_back(std::move(r));
    }
    json j = checkpoint_report(cps, rows, &ReplicationResult::linearity, "residual_norm");
    json e = json::array();
    for (Index i = 0; i < eta.rows(); ++i) {
        json row = json::array();
        for (Index k = 0; k < eta.cols(); ++k) row.push_back(eta(i, k));
        e.push_back(row);
    }
    j["eta_estimate"] = e;
    return j;
}

json diag_rate_sa(const std::vector<RecordedRun>& runs, const Scenario& s) {
    const FieldModel field = build_field(s);
    const StepSizeRule rule = build_step_rule(s, field);
    const std::vector<Index> cps = checkpoints_for(s, runs.front().trajectory.size());
    const auto a = detail::rate_weight(rule, field.root);
    std::vector<ReplicationResult> rows;
    for (const auto& run : runs) {
        ReplicationResult r;
        for (const auto& p : rate_tracker(run.trajectory, field.root, a, s.diagnostics.delta, cps).points)
            r.rate.push_back(p.value);
        rows.push_back(std::move(r));
    }
    json j = checkpoint_report(cps, rows, &ReplicationResult::rate, "value");
    j["delta"] = s.diagnostics.delta;
    return j;
}

// Probe grid: the bounding box of U clipped to root +/- grid_radius.
std::vector<Vector> probe_grid(const Scenario& s, const ConvexSet& set, const Vector& root) {
    const double r = s.diagnostics.grid_radius;
    Vector lo = root.array() - r;
    Vector hi = root.array() + r;
    if (set.is_box()) {
        lo = lo.cwiseMax(set.as_box().lower);
        hi = hi.cwiseMin(set.as_box().upper);
    } else if (set.is_ball()) {
        const Ball& ball = set.as_ball();
        lo = lo.cwiseMax(Vector(ball.center.array() - ball.radius));
        hi = hi.cwiseMin(Vector(ball.center.array() + ball.radius));
    }
    if ((lo.array() > hi.array()).any()) return {};
    return box_grid(lo, hi, s.diagnostics.grid_points);
}

json diag_probe(Index horizon, const Scenario& s) {
    const FieldModel field = build_field(s);
    const TruncationSchedule schedule = build_truncation(s);
    json j;
    j["checkpoints"] = json::array();
    j["drift_sign"] = json::array();
    j["drift_strength"] = json::array();
    j["empty_set"] = json::array();
    j["probe_eps"] = s.diagnostics.probe_eps;
    for (Index t : checkpoints_for(s, horizon)) {
        const ConvexSet prev = schedule.set_at(std::max<Index>(1, t - 1), {});
        const std::vector<Vector> grid = probe_grid(s, prev, field.root);
        j["checkpoints"].push_back(t);
        if (grid.empty()) {
            j["drift_sign"].push_back(nullptr);
            j["drift_strength"].push_back(1.0);
            j["empty_set"].push_back(true);
            continue;
        }
        j["drift_sign"].push_back(probe_drift_sign(field, t, grid));
        const DriftStrength ds = probe_drift_strength(field, t, s.diagnostics.probe_eps, grid, prev);
        j["drift_strength"].push_back(ds.value);
        j["empty_set"].push_back(ds.empty_set);
    }
    if (field.dim() == 1) {
        double scale = 1.0;
        if (field.has_jacobian()) scale = -1.0 / field.jacobian(1, field.root)(0, 0);
        auto reg = [&field, scale](const Vector& z) -> Vector { return scale * field.regression(1, z, {}); };
        const LocalExpansionFit fit = probe_local_expansion(reg, field.root, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3});
        j["local_expansion"] = {{"exponent", fit.exponent}, {"constant", fit.constant}, {"exact_linear", fit.exact_linear}};
    }
    return j;
}

Index ar1_horizon(const CsvTable& tbl) {
    Index h = 0;
    const std::size_t ct = tbl.column("t");
    for (const auto& r : tbl.rows) h = std::max(h, static_cast<Index>(r[ct]));
    return h;
}

json diag_ar1(const std::string& what, const std::string& path, const Scenario& s) {
    const CsvTable tbl = read_csv_file(path);
    const std::size_t ct = tbl.column("t"), crep = tbl.column("rep"), cx = tbl.column("x"),
                      cth = tbl.column("theta_hat"), cinfo = tbl.column("info");
    const Index horizon = ar1_horizon(tbl);
    const std::vector<Index> cps = checkpoints_for(s, horizon);
    std::map<Index, std::vector<std::vector<double>>> by_rep;
    for (const auto& r : tbl.rows) by_rep[static_cast<Index>(r[crep])].push_back(r);
    std::vector<ReplicationResult> rows;
    Scenario sc = s;
    sc.horizon = horizon;
    sc.outputs = {what == "rate" ? Output::rate : Output::linearity};
    for (auto& [rep, data] : by_rep) {
        std::sort(data.begin(), data.end(), [ct](const auto& a, const auto& b) { return a[ct] < b[ct]; });
        if (static_cast<Index>(data.size()) != horizon + 1)
            throw DataError(path + ": rep " + std::to_string(rep) + " is incomplete");
        Ar1Path p;
        for (const auto& r : data) {
            p.x.push_back(r[cx]);
            Ar1State st;
            st.theta_hat = r[cth];
            st.info = r[cinfo];
            st.last_x = r[cx];
            p.states.push_back(st);
        }
        ReplicationResult res;
        detail::ar1_diagnostics(sc, p, cps, res);
        rows.push_back(std::move(res));
    }
    if (what == "rate") {
        json j = checkpoint_report(cps, rows, &ReplicationResult::rate, "value");
        j["delta"] = s.diagnostics.delta;
        return j;
    }
    json j = checkpoint_report(cps, rows, &ReplicationResult::linearity, "residual_norm");
    j["eta_estimate"] = json::array({json::array({1.0})});
    return j;
}

json run_diag(const std::string& what, const std::string& traj_path, const std::string& model_path) {
    const Scenario s = load_scenario(model_path);
    if (s.model.kind == ModelKind::ar1) {
        if (what == "probe") throw ConfigError("drift probes need a field model; ar1 is an estimator");
        return diag_ar1(what, traj_path, s);
    }
    const std::vector<RecordedRun> runs = read_trajectory_csv(traj_path);
    if (runs.empty()) throw DataError(traj_path + ": no trajectories");
    for (const auto& r : runs)
        if (r.trajectory.dim() != s.dim()) throw ConfigError("trajectory dimension does not match the model");
    if (what == "linearity") return diag_linearity_sa(runs, s);
    if (what == "rate") return diag_rate_sa(runs, s);
    return diag_probe(runs.front().trajectory.size(), s);
}

void run_replay(const std::string& model, const std::string& path, double theta0, double info0) {
    const std::vector<double> x = read_observations(path);
    if (model == "ar1") {
        if (x.empty()) throw DataError(path + ": no observations");
        Ar1State init;
        init.theta_hat = theta0;
        init.info = info0;
        const auto states = ar1_replay(x, init);
        std::cout << "t,theta_hat,info\n";
        for (std::size_t t = 0; t < states.size(); ++t)
            std::cout << t << "," << format_double(states[t].theta_hat) << "," << format_double(states[t].info) << "\n";
    } else {
        GammaMleState init;
        init.theta_hat = theta0;
        init.schedule = schedule_gamma_mt(0.1, 1.0);
        const auto states = gamma_replay(x, init);
        std::cout << "t,theta_hat,proposed,truncated\n";
        for (std::size_t t = 0; t < states.size(); ++t)
            std::cout << t << "," << format_double(states[t].theta_hat) << "," << format_double(states[t].proposed)
                      << "," << (states[t].truncated ? 1 : 0) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Truncated stochastic approximation: simulations and diagnostics"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string out = "out";

    auto* run = app.add_subcommand("run", "Run a scenario file");
    std::string scenario_path;
    run->add_option("scenario", scenario_path, "Scenario TOML file")->required();

    auto* builtin = app.add_subcommand("builtin", "Run a builtin scenario");
    std::string builtin_name;
    std::vector<std::string> overrides;
    bool print_only = false;
    builtin->add_option("name", builtin_name, "Scenario name")->required()->check(CLI::IsMember(builtin_names()));
    builtin->add_option("--override", overrides, "key=value applied to the scenario (mode=trajectory selects the path preset)");
    builtin->add_flag("--print", print_only, "Print the resolved scenario TOML and exit");

    for (auto* sub : {run, builtin}) {
        sub->add_option("--seed", seed, "Base seed (replication r uses seed + r)");
        sub->add_option("--jobs", jobs, "Concurrent replications")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "Output directory");
    }

    auto* diag = app.add_subcommand("diag", "Diagnostics on a recorded trajectory CSV");
    std::string diag_kind, traj_path, model_path;
    diag->add_option("kind", diag_kind)->required()->check(CLI::IsMember({"linearity", "rate", "probe"}));
    diag->add_option("trajectory", traj_path, "Trajectory CSV")->required();
    diag->add_option("model", model_path, "Scenario TOML describing the model")->required();

    auto* replay = app.add_subcommand("replay", "Run a recursive estimator over a t,x data file");
    std::string replay_model, data_path;
    double theta0 = std::numeric_limits<double>::quiet_NaN(), info0 = 1.0;
    replay->add_option("model", replay_model)->required()->check(CLI::IsMember({"ar1", "gamma"}));
    replay->add_option("data", data_path, "CSV with columns t,x")->required();
    replay->add_option("--theta0", theta0, "Starting estimate (ar1: 0, gamma: 1)");
    replay->add_option("--info0", info0, "ar1 starting information");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const Scenario s = load_scenario(scenario_path);
            run_and_write(s, resolve_seed(seed, s), jobs, out);
        } else if (*builtin) {
            const Scenario s = builtin_scenario(builtin_name, overrides);
            if (print_only)
                std::cout << serialize_scenario(s);
            else
                run_and_write(s, resolve_seed(seed, s), jobs, out);
        } else if (*diag) {
            std::cout << run_diag(diag_kind, traj_path, model_path).dump(2) << "\n";
        } else if (*replay) {
            if (std::isnan(theta0)) theta0 = replay_model == "ar1" ? 0.0 : 1.0;
            run_replay(replay_model, data_path, theta0, info0);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << " (step " << e.step() << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
