#pragma once

// Scenario description for the simulation harness, its TOML encoding and
// the builtin scenarios. A scenario names a model, its noise, a step rule,
// a truncation schedule, starting points and what to record.
//
//     name = "poly"
//     horizon = 10000
//     replications = 500
//     starts = [[0.0]]
//     outputs = ["histogram"]
//     model = { kind = "polynomial", root = [2.0], coeffs = [3, 0, 0, 0, 5, -2, 1] }
//     noise = { kind = "student_t", df = 7.0, scale = 1.0 }
//     step = { kind = "scalar", a = "3*t" }
//     truncation = { kind = "expanding", u = "log(3*t)" }

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "models.hpp"
#include "sa.hpp"
#include "sequence.hpp"
#include "stepsize.hpp"
#include "truncation.hpp"

namespace truncsa {

namespace detail {
inline bool same(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.size() == 0 || a == b);
}
} // namespace detail

enum class ModelKind { linear, polynomial, gamma, gamma_score, ar1 };
enum class NoiseKind { none, gaussian, student_t };
enum class StepKind { scalar, optimal };
enum class Statistic { final_iterate, scaled_error };
enum class Output { trajectory, histogram, linearity, rate };

struct ModelSpec {
    ModelKind kind = ModelKind::linear;
    Vector root = Vector::Zero(1);  // linear, polynomial
    std::vector<double> coeffs;     // polynomial: C_1..C_l
    double theta = 1.0;             // gamma, gamma_score, ar1
    double info0 = 1.0;             // ar1: I_0
    double theta0 = 0.0;            // ar1: starting estimate
    double x0 = 0.0;                // ar1: X_0

    bool operator==(const ModelSpec& o) const {
        return kind == o.kind && detail::same(root, o.root) && coeffs == o.coeffs && theta == o.theta &&
               info0 == o.info0 && theta0 == o.theta0 && x0 == o.x0;
    }
};

struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double sigma = 1.0; // gaussian
    double df = 7.0;    // student_t
    double scale = 1.0; // student_t
    bool operator==(const NoiseSpec&) const = default;
};

struct StepSpec {
    StepKind kind = StepKind::scalar;
    ScalarSequence a = ScalarSequence::power(1.0);
    double gamma0_inv = 1.0; // optimal: gamma_0^{-1} = gamma0_inv * I
    bool operator==(const StepSpec&) const = default;
};

struct TruncationSpec {
    ScheduleKind kind = ScheduleKind::trivial;
    Vector lower, upper;                              // fixed
    ScalarSequence u = ScalarSequence::log(3.0);      // expanding
    double c1 = 0.1, c2 = 1.0;                        // gamma_mt
    Vector center;                                    // shrinking_aux (fixed auxiliary point)
    double c = 1.0;
    ScalarSequence d = ScalarSequence::power(1.0);
    ScalarSequence a = ScalarSequence::power(1.0);
    RadiusRule rule = RadiusRule::sum;

    bool operator==(const TruncationSpec& o) const {
        return kind == o.kind && detail::same(lower, o.lower) && detail::same(upper, o.upper) && u == o.u &&
               c1 == o.c1 && c2 == o.c2 && detail::same(center, o.center) && c == o.c && d == o.d && a == o.a &&
               rule == o.rule;
    }
};

struct HistogramSpec {
    Index bins = 30;
    std::optional<std::pair<double, double>> range; // empty: auto
    Statistic statistic = Statistic::final_iterate;
    bool operator==(const HistogramSpec&) const = default;
};

struct DiagnosticsSpec {
    double delta = 0.9;      // rate exponent
    double probe_eps = 0.5;  // drift-strength annulus
    Index grid_points = 1000;
    double grid_radius = 10.0; // half-width of the probe grid for unbounded sets
    bool operator==(const DiagnosticsSpec&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    ModelSpec model;
    NoiseSpec noise;
    StepSpec step;
    TruncationSpec truncation;
    std::vector<Vector> starts{Vector::Zero(1)};
    Index horizon = 1000;
    Index replications = 1;
    std::vector<Index> checkpoints; // empty: log-spaced
    std::vector<Output> outputs{Output::histogram};
    HistogramSpec histogram;
    DiagnosticsSpec diagnostics;
    PairedNoise paired = PairedNoise::automatic;
    std::uint64_t seed = 1;

    Index dim() const { return model.kind == ModelKind::linear || model.kind == ModelKind::polynomial
                                   ? model.root.size() : 1; }
    bool wants(Output o) const { return std::find(outputs.begin(), outputs.end(), o) != outputs.end(); }

    bool operator==(const Scenario& o) const {
        if (starts.size() != o.starts.size()) return false;
        for (std::size_t i = 0; i < starts.size(); ++i)
            if (!detail::same(starts[i], o.starts[i])) return false;
        return name == o.name && model == o.model && noise == o.noise && step == o.step &&
               truncation == o.truncation && horizon == o.horizon && replications == o.replications &&
               checkpoints == o.checkpoints && outputs == o.outputs && histogram == o.histogram &&
               diagnostics == o.diagnostics && paired == o.paired && seed == o.seed;
    }
};

// ---------------------------------------------------------------------------
// Enum spellings

namespace detail {

template <class E>
using Names = std::vector<std::pair<E, const char*>>;

inline const Names<ModelKind>& model_names() {
    static const Names<ModelKind> n{{ModelKind::linear, "linear"},
                                    {ModelKind::polynomial, "polynomial"},
                                    {ModelKind::gamma, "gamma"},
                                    {ModelKind::gamma_score, "gamma_score"},
                                    {ModelKind::ar1, "ar1"}};
    return n;
}
inline const Names<NoiseKind>& noise_names() {
    static const Names<NoiseKind> n{
        {NoiseKind::none, "none"}, {NoiseKind::gaussian, "gaussian"}, {NoiseKind::student_t, "student_t"}};
    return n;
}
inline const Names<StepKind>& step_names() {
    static const Names<StepKind> n{{StepKind::scalar, "scalar"}, {StepKind::optimal, "optimal"}};
    return n;
}
inline const Names<ScheduleKind>& schedule_names() {
    static const Names<ScheduleKind> n{{ScheduleKind::trivial, "none"},
                                       {ScheduleKind::fixed, "fixed"},
                                       {ScheduleKind::expanding, "expanding"},
                                       {ScheduleKind::gamma_mt, "gamma_mt"},
                                       {ScheduleKind::shrinking_aux, "shrinking_aux"}};
    return n;
}
inline const Names<Statistic>& statistic_names() {
    static const Names<Statistic> n{{Statistic::final_iterate, "final"}, {Statistic::scaled_error, "scaled_error"}};
    return n;
}
inline const Names<Output>& output_names() {
    static const Names<Output> n{{Output::trajectory, "trajectory"},
                                 {Output::histogram, "histogram"},
                                 {Output::linearity, "linearity"},
                                 {Output::rate, "rate"}};
    return n;
}
inline const Names<PairedNoise>& paired_names() {
    static const Names<PairedNoise> n{
        {PairedNoise::automatic, "auto"}, {PairedNoise::on, "on"}, {PairedNoise::off, "off"}};
    return n;
}
inline const Names<RadiusRule>& radius_names() {
    static const Names<RadiusRule> n{{RadiusRule::sum, "sum"}, {RadiusRule::max, "max"}};
    return n;
}

template <class E>
const char* name_of(const Names<E>& names, E e) {
    for (const auto& [k, v] : names)
        if (k == e) return v;
    return "?";
}

template <class E>
E enum_of(const Names<E>& names, const std::string& s, const char* what) {
    for (const auto& [k, v] : names)
        if (s == v) return k;
    std::string allowed;
    for (const auto& [k, v] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(v);
    throw ConfigError(std::string("unknown ") + what + " \"" + s + "\" (expected one of: " + allowed + ")");
}

// ---------------------------------------------------------------------------
// TOML readers

class TableReader {
public:
    TableReader(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

    bool has(const char* key) const { return t_.contains(key); }

    const toml::node& node(const char* key) const {
        const toml::node* n = t_.get(key);
        if (!n) throw ConfigError("missing key " + where(key));
        return *n;
    }

    double number(const char* key, std::optional<double> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            node(key);
        }
        return as_number(node(key), where(key));
    }

    Index integer(const char* key, std::optional<Index> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            node(key);
        }
        return as_integer(node(key), where(key));
    }

    std::string string(const char* key, std::optional<std::string> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            node(key);
        }
        const auto v = node(key).value<std::string>();
        if (!v) throw ConfigError(where(key) + " must be a string");
        return *v;
    }

    Vector vector(const char* key) const { return as_vector(node(key), where(key)); }

    std::vector<double> numbers(const char* key) const {
        const Vector v = vector(key);
        return {v.data(), v.data() + v.size()};
    }

    ScalarSequence sequence(const char* key, ScalarSequence fallback) const {
        if (!has(key)) return fallback;
        const toml::node& n = node(key);
        if (n.is_number()) return ScalarSequence::constant(as_number(n, where(key)));
        return ScalarSequence::parse(string(key));
    }

    TableReader table(const char* key) const {
        const toml::table* sub = node(key).as_table();
        if (!sub) throw ConfigError(where(key) + " must be a table");
        return {*sub, where(key)};
    }

    static double as_number(const toml::node& n, const std::string& where) {
        if (auto v = n.value<double>()) return *v;
        throw ConfigError(where + " must be a number");
    }

    static Index as_integer(const toml::node& n, const std::string& where) {
        if (const auto* i = n.as_integer()) return i->get();
        if (const auto* f = n.as_floating_point()) {
            const double d = f->get();
            if (d == std::floor(d) && std::fabs(d) < 9.0e15) return static_cast<Index>(d);
        }
        throw ConfigError(where + " must be an integer");
    }

    static Vector as_vector(const toml::node& n, const std::string& where) {
        if (n.is_number()) return scalar_vector(as_number(n, where));
        const toml::array* arr = n.as_array();
        if (!arr || arr->empty()) throw ConfigError(where + " must be a number or a nonempty array of numbers");
        Vector v(static_cast<Index>(arr->size()));
        for (std::size_t i = 0; i < arr->size(); ++i) v(static_cast<Index>(i)) = as_number((*arr)[i], where);
        return v;
    }

    std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const toml::table& t_;
    std::string path_;
};

inline toml::array to_array(const Vector& v) {
    toml::array a;
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline toml::array to_array(const std::vector<double>& v) {
    toml::array a;
    for (double x : v) a.push_back(x);
    return a;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Parse / serialize

inline Scenario scenario_from_toml(const toml::table& root) {
    using detail::TableReader;
    const TableReader r(root, "");
    Scenario s;
    s.name = r.string("name", s.name);
    s.horizon = r.integer("horizon", s.horizon);
    s.replications = r.integer("replications", s.replications);
    s.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<Index>(s.seed)));

    {
        const TableReader m = r.table("model");
        s.model.kind = detail::enum_of(detail::model_names(), m.string("kind"), "model kind");
        switch (s.model.kind) {
        case ModelKind::linear: s.model.root = m.vector("root"); break;
        case ModelKind::polynomial:
            s.model.root = m.vector("root");
            if (s.model.root.size() != 1) throw ConfigError("model.root: polynomial models are scalar");
            s.model.coeffs = m.numbers("coeffs");
            break;
        case ModelKind::gamma:
        case ModelKind::gamma_score: s.model.theta = m.number("theta"); break;
        case ModelKind::ar1:
            s.model.theta = m.number("theta");
            s.model.info0 = m.number("info0", 1.0);
            s.model.theta0 = m.number("theta0", 0.0);
            s.model.x0 = m.number("x0", 0.0);
            break;
        }
    }
    if (r.has("noise")) {
        const TableReader n = r.table("noise");
        s.noise.kind = detail::enum_of(detail::noise_names(), n.string("kind"), "noise kind");
        s.noise.sigma = n.number("sigma", 1.0);
        s.noise.df = n.number("df", 7.0);
        s.noise.scale = n.number("scale", 1.0);
    }
    if (r.has("step")) {
        const TableReader st = r.table("step");
        s.step.kind = detail::enum_of(detail::step_names(), st.string("kind"), "step kind");
        s.step.a = st.sequence("a", s.step.a);
        s.step.gamma0_inv = st.number("gamma0_inv", 1.0);
    }
    if (r.has("truncation")) {
        const TableReader tr = r.table("truncation");
        TruncationSpec& t = s.truncation;
        t.kind = detail::enum_of(detail::schedule_names(), tr.string("kind"), "truncation kind");
        switch (t.kind) {
        case ScheduleKind::trivial: break;
        case ScheduleKind::fixed:
            t.lower = tr.vector("lower");
            t.upper = tr.vector("upper");
            break;
        case ScheduleKind::expanding: t.u = tr.sequence("u", t.u); break;
        case ScheduleKind::gamma_mt:
            t.c1 = tr.number("c1");
            t.c2 = tr.number("c2");
            break;
        case ScheduleKind::shrinking_aux:
            t.center = tr.vector("center");
            t.c = tr.number("c", 1.0);
            t.d = tr.sequence("d", t.d);
            t.a = tr.sequence("a", t.a);
            t.rule = detail::enum_of(detail::radius_names(), tr.string("radius", "sum"), "radius rule");
            break;
        }
    }
    if (r.has("starts")) {
        const toml::array* arr = r.node("starts").as_array();
        if (!arr || arr->empty()) throw ConfigError("starts must be a nonempty array");
        s.starts.clear();
        for (const toml::node& n : *arr) s.starts.push_back(TableReader::as_vector(n, "starts"));
    } else if (r.has("initial")) {
        s.starts = {r.vector("initial")};
    }
    if (r.has("checkpoints")) {
        const toml::array* arr = r.node("checkpoints").as_array();
        if (!arr) throw ConfigError("checkpoints must be an array of integers");
        for (const toml::node& n : *arr) s.checkpoints.push_back(TableReader::as_integer(n, "checkpoints"));
    }
    if (r.has("outputs")) {
        const toml::array* arr = r.node("outputs").as_array();
        if (!arr) throw ConfigError("outputs must be an array of strings");
        s.outputs.clear();
        for (const toml::node& n : *arr) {
            const auto v = n.value<std::string>();
            if (!v) throw ConfigError("outputs must be an array of strings");
            s.outputs.push_back(detail::enum_of(detail::output_names(), *v, "output"));
        }
    }
    if (r.has("histogram")) {
        const TableReader h = r.table("histogram");
        s.histogram.bins = h.integer("bins", s.histogram.bins);
        if (h.has("range")) {
            const toml::node& n = h.node("range");
            if (n.value<std::string>() == std::optional<std::string>("auto")) {
                s.histogram.range.reset();
            } else {
                const Vector v = TableReader::as_vector(n, "histogram.range");
                if (v.size() != 2) throw ConfigError("histogram.range must be \"auto\" or [lo, hi]");
                s.histogram.range = std::make_pair(v(0), v(1));
            }
        }
        s.histogram.statistic =
            detail::enum_of(detail::statistic_names(), h.string("statistic", "final"), "histogram statistic");
    }
    if (r.has("diagnostics")) {
        const TableReader d = r.table("diagnostics");
        s.diagnostics.delta = d.number("delta", s.diagnostics.delta);
        s.diagnostics.probe_eps = d.number("probe_eps", s.diagnostics.probe_eps);
        s.diagnostics.grid_points = d.integer("grid_points", s.diagnostics.grid_points);
        s.diagnostics.grid_radius = d.number("grid_radius", s.diagnostics.grid_radius);
    }
    s.paired = detail::enum_of(detail::paired_names(), r.string("paired_noise", "auto"), "paired_noise");
    return s;
}

/// Structural checks that do not need the model to be built.
inline void validate(const Scenario& s) {
    if (s.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (s.replications < 1) throw ConfigError("replications must be >= 1");
    if (s.starts.empty()) throw ConfigError("at least one starting point is required");
    for (Index c : s.checkpoints)
        if (c < 1 || c > s.horizon) throw ConfigError("checkpoints must lie in [1, horizon]");
    if (s.histogram.bins < 2) throw ConfigError("histogram.bins must be >= 2");
    if (s.histogram.range && !(s.histogram.range->first < s.histogram.range->second))
        throw ConfigError("histogram.range must satisfy lo < hi");
    if (!(s.diagnostics.delta > 0.0 && s.diagnostics.delta <= 1.0)) throw ConfigError("diagnostics.delta must lie in (0, 1]");
    if (s.model.kind != ModelKind::ar1) {
        for (const Vector& z : s.starts)
            if (z.size() != s.dim()) throw ConfigError("starting point dimension does not match the model");
    }
}

inline Scenario parse_scenario(std::string_view text, std::string_view source = "scenario") {
    toml::table tbl;
    try {
        tbl = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e;
        throw ConfigError("TOML error: " + os.str());
    }
    Scenario s = scenario_from_toml(tbl);
    validate(s);
    return s;
}

inline toml::table scenario_to_toml(const Scenario& s) {
    using detail::to_array;
    toml::table root;
    root.insert("name", s.name);
    root.insert("horizon", static_cast<std::int64_t>(s.horizon));
    root.insert("replications", static_cast<std::int64_t>(s.replications));
    root.insert("seed", static_cast<std::int64_t>(s.seed));
    root.insert("paired_noise", detail::name_of(detail::paired_names(), s.paired));

    toml::array starts;
    for (const Vector& z : s.starts) starts.push_back(to_array(z));
    root.insert("starts", std::move(starts));
    if (!s.checkpoints.empty()) {
        toml::array cps;
        for (Index c : s.checkpoints) cps.push_back(static_cast<std::int64_t>(c));
        root.insert("checkpoints", std::move(cps));
    }
    toml::array outs;
    for (Output o : s.outputs) outs.push_back(detail::name_of(detail::output_names(), o));
    root.insert("outputs", std::move(outs));

    toml::table model;
    model.insert("kind", detail::name_of(detail::model_names(), s.model.kind));
    switch (s.model.kind) {
    case ModelKind::linear: model.insert("root", to_array(s.model.root)); break;
    case ModelKind::polynomial:
        model.insert("root", to_array(s.model.root));
        model.insert("coeffs", to_array(s.model.coeffs));
        break;
    case ModelKind::gamma:
    case ModelKind::gamma_score: model.insert("theta", s.model.theta); break;
    case ModelKind::ar1:
        model.insert("theta", s.model.theta);
        model.insert("info0", s.model.info0);
        model.insert("theta0", s.model.theta0);
        model.insert("x0", s.model.x0);
        break;
    }
    root.insert("model", std::move(model));

    toml::table noise;
    noise.insert("kind", detail::name_of(detail::noise_names(), s.noise.kind));
    noise.insert("sigma", s.noise.sigma);
    noise.insert("df", s.noise.df);
    noise.insert("scale", s.noise.scale);
    root.insert("noise", std::move(noise));

    toml::table step;
    step.insert("kind", detail::name_of(detail::step_names(), s.step.kind));
    step.insert("a", s.step.a.to_string());
    step.insert("gamma0_inv", s.step.gamma0_inv);
    root.insert("step", std::move(step));

    toml::table tr;
    const TruncationSpec& t = s.truncation;
    tr.insert("kind", detail::name_of(detail::schedule_names(), t.kind));
    switch (t.kind) {
    case ScheduleKind::trivial: break;
    case ScheduleKind::fixed:
        tr.insert("lower", to_array(t.lower));
        tr.insert("upper", to_array(t.upper));
        break;
    case ScheduleKind::expanding: tr.insert("u", t.u.to_string()); break;
    case ScheduleKind::gamma_mt:
        tr.insert("c1", t.c1);
        tr.insert("c2", t.c2);
        break;
    case ScheduleKind::shrinking_aux:
        tr.insert("center", to_array(t.center));
        tr.insert("c", t.c);
        tr.insert("d", t.d.to_string());
        tr.insert("a", t.a.to_string());
        tr.insert("radius", detail::name_of(detail::radius_names(), t.rule));
        break;
    }
    root.insert("truncation", std::move(tr));

    toml::table hist;
    hist.insert("bins", static_cast<std::int64_t>(s.histogram.bins));
    if (s.histogram.range) {
        toml::array range;
        range.push_back(s.histogram.range->first);
        range.push_back(s.histogram.range->second);
        hist.insert("range", std::move(range));
    } else {
        hist.insert("range", "auto");
    }
    hist.insert("statistic", detail::name_of(detail::statistic_names(), s.histogram.statistic));
    root.insert("histogram", std::move(hist));

    toml::table diag;
    diag.insert("delta", s.diagnostics.delta);
    diag.insert("probe_eps", s.diagnostics.probe_eps);
    diag.insert("grid_points", static_cast<std::int64_t>(s.diagnostics.grid_points));
    diag.insert("grid_radius", s.diagnostics.grid_radius);
    root.insert("diagnostics", std::move(diag));
    return root;
}

inline std::string serialize_scenario(const Scenario& s) {
    std::ostringstream os;
    os << scenario_to_toml(s) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Overrides and builtins

/// Applies "a.b.c=value" to a TOML table. The value is read as a TOML
/// value when possible (numbers, arrays, inline tables, quoted strings)
/// and as a bare string otherwise.
inline void apply_override(toml::table& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    key.erase(std::remove(key.begin(), key.end(), ' '), key.end());

    toml::table* tbl = &root;
    std::size_t start = 0;
    for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
        const std::string part = key.substr(start, dot - start);
        if (!tbl->contains(part)) tbl->insert(part, toml::table{});
        tbl = (*tbl)[part].as_table();
        if (!tbl) throw ConfigError("override path " + key + " crosses a non-table value");
    }
    const std::string leaf = key.substr(start);
    if (leaf.empty()) throw ConfigError("override key is empty: " + assignment);
    try {
        toml::table parsed = toml::parse("v = " + value);
        tbl->insert_or_assign(leaf, *parsed.get("v"));
    } catch (const toml::parse_error&) {
        tbl->insert_or_assign(leaf, value);
    }
}

inline std::vector<std::string> builtin_names() { return {"poly", "gamma_mt", "gamma_ft", "ar1"}; }

/// TOML text of a builtin scenario. `mode` selects between the histogram
/// study (default) and the short trajectory runs used for path plots.
inline std::string builtin_scenario_text(const std::string& name, const std::string& mode = "histogram") {
    if (mode != "histogram" && mode != "trajectory")
        throw ConfigError("unknown builtin mode \"" + mode + "\" (expected histogram or trajectory)");
    const bool traj = mode == "trajectory";
    std::ostringstream os;
    if (name == "poly") {
        os << "name = \"poly\"\n"
           << "model = { kind = \"polynomial\", root = [2.0], coeffs = [3.0, 0.0, 0.0, 0.0, 5.0, -2.0, 1.0] }\n"
           << "noise = { kind = \"student_t\", df = 7.0, scale = 1.0 }\n"
           << "step = { kind = \"scalar\", a = \"3*t\" }\n"
           << "truncation = { kind = \"expanding\", u = \"log(3*t)\" }\n";
        if (traj)
            os << "horizon = 30\nreplications = 1\nstarts = [[-2.0], [0.0], [5.0]]\noutputs = [\"trajectory\"]\n";
        else
            os << "horizon = 10000\nreplications = 500\nstarts = [[0.0]]\noutputs = [\"histogram\"]\n"
               << "histogram = { bins = 40, statistic = \"final\" }\n";
    } else if (name == "gamma_mt" || name == "gamma_ft") {
        os << "name = \"" << name << "\"\n"
           << "model = { kind = \"gamma\", theta = 0.1 }\n"
           << "step = { kind = \"scalar\", a = \"t\" }\n"
           << "starts = [[1.0]]\n";
        if (name == "gamma_mt")
            os << "truncation = { kind = \"gamma_mt\", c1 = 0.1, c2 = 1.0 }\n";
        else
            os << "truncation = { kind = \"fixed\", lower = [0.003], upper = [100.0] }\n";
        if (traj)
            os << "horizon = 10000\nreplications = 1\noutputs = [\"trajectory\"]\n";
        else
            os << "horizon = 10000\nreplications = 200\ncheckpoints = [100, 1000, 10000]\n"
               << "outputs = [\"histogram\", \"linearity\"]\n"
               << "histogram = { bins = 40, statistic = \"final\" }\n";
    } else if (name == "ar1") {
        os << "name = \"ar1\"\n"
           << "model = { kind = \"ar1\", theta = 0.5, info0 = 1.0, theta0 = 0.0, x0 = 0.0 }\n"
           << "horizon = 2000\n";
        if (traj)
            os << "replications = 1\noutputs = [\"trajectory\"]\n";
        else
            os << "replications = 1000\noutputs = [\"histogram\", \"rate\", \"linearity\"]\n"
               << "histogram = { bins = 40, statistic = \"scaled_error\" }\n";
    } else {
        throw ConfigError("unknown builtin scenario \"" + name + "\"");
    }
    return os.str();
}

/// Builtin scenario with overrides applied. An override "mode=..." picks
/// the preset; the others are applied to its TOML table before parsing.
inline Scenario builtin_scenario(const std::string& name, const std::vector<std::string>& overrides = {}) {
    std::string mode = "histogram";
    std::vector<std::string> rest;
    for (const std::string& o : overrides) {
        if (o.rfind("mode=", 0) == 0)
            mode = o.substr(5);
        else
            rest.push_back(o);
    }
    toml::table tbl = toml::parse(builtin_scenario_text(name, mode));
    for (const std::string& o : rest) apply_override(tbl, o);
    Scenario s = scenario_from_toml(tbl);
    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// Building library objects

inline NoiseFn build_noise(const Scenario& s) {
    const Index m = s.dim();
    switch (s.noise.kind) {
    case NoiseKind::none: return make_noise_zero(m);
    case NoiseKind::gaussian: return make_noise_gaussian(s.noise.sigma, m);
    case NoiseKind::student_t: return make_noise_student_t(s.noise.df, m, s.noise.scale);
    }
    return make_noise_zero(m);
}

inline FieldModel build_field(const Scenario& s) {
    switch (s.model.kind) {
    case ModelKind::linear: return linear_field(s.model.root, build_noise(s));
    case ModelKind::polynomial: return polynomial_field(s.model.root(0), s.model.coeffs, build_noise(s));
    case ModelKind::gamma: return gamma_normalized_field(s.model.theta);
    case ModelKind::gamma_score: return gamma_score_field(s.model.theta);
    case ModelKind::ar1: break;
    }
    throw ConfigError("the ar1 model is an estimator, not a field model");
}

inline StepSizeRule build_step_rule(const Scenario& s, const FieldModel& field) {
    const Index m = s.dim();
    if (s.step.kind == StepKind::scalar) return rule_scalar(s.step.a.function(), m);
    return rule_optimal_from_jacobian(field, identity(m) * s.step.gamma0_inv);
}

inline TruncationSchedule build_truncation(const Scenario& s) {
    const TruncationSpec& t = s.truncation;
    switch (t.kind) {
    case ScheduleKind::trivial: return schedule_trivial();
    case ScheduleKind::fixed: return schedule_fixed(t.lower, t.upper);
    case ScheduleKind::expanding: return schedule_expanding(t.u.function(), s.dim());
    case ScheduleKind::gamma_mt: return schedule_gamma_mt(t.c1, t.c2);
    case ScheduleKind::shrinking_aux: {
        const Vector center = t.center;
        return schedule_shrinking_aux([center](Index) { return center; }, t.c, t.d.function(), t.a.function(),
                                      t.rule);
    }
    }
    return schedule_trivial();
}

inline SaConfig build_sa_config(const Scenario& s, const Vector& start, std::uint64_t seed) {
    SaConfig c;
    c.initial = start;
    c.field = build_field(s);
    c.step_rule = build_step_rule(s, c.field);
    c.truncation = build_truncation(s);
    c.horizon = s.horizon;
    c.seed = seed;
    c.paired = s.paired;
    validate(c);
    return c;
}

} // namespace truncsa
