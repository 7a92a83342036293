#pragma once

// Plain-text input and output: number formatting, CSV reading, histograms,
// summary statistics and the trajectory CSV format.
//
// Trajectory CSV (SA runs): one row per (rep, t) with t = 0 holding the
// starting point,
//     t,rep,truncated,z_1..z_m,prop_1..prop_m,eps_1..eps_m[,eps0_1..eps0_m]
// Step matrices are not serialized.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trajectory.hpp"

namespace truncsa {

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline double parse_double(std::string_view s, const std::string& where) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError(where + ": cannot parse number \"" + std::string(s) + "\"");
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

/// Header plus numeric rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("CSV has no column \"" + name + "\"");
        return static_cast<std::size_t>(it - header.begin());
    }
    bool has_column(const std::string& name) const {
        return std::find(header.begin(), header.end(), name) != header.end();
    }
};

inline CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError(source + ": empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (auto f : split_csv_line(line)) t.header.emplace_back(f);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != t.header.size())
            throw DataError(source + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) row.push_back(parse_double(f, source + ":" + std::to_string(lineno)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return read_csv(in, path.string());
}

/// Observation file with schema `t,x`; returns x ordered by t.
inline std::vector<double> read_observations(const std::filesystem::path& path) {
    const CsvTable tbl = read_csv_file(path);
    const std::size_t ct = tbl.column("t"), cx = tbl.column("x");
    std::vector<std::pair<double, double>> rows;
    for (const auto& r : tbl.rows) rows.emplace_back(r[ct], r[cx]);
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> x;
    for (const auto& [t, v] : rows) x.push_back(v);
    return x;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Histograms and summaries

struct Histogram {
    std::vector<double> edges; // bins + 1 edges
    std::vector<Index> counts;

    Index total() const {
        Index n = 0;
        for (Index c : counts) n += c;
        return n;
    }
};

/// Equal-width bins over `range` (or [min, max] when empty). Values outside
/// a fixed range are counted in the nearest edge bin, so the counts always
/// sum to the sample size.
inline Histogram make_histogram(const std::vector<double>& samples, Index bins,
                                std::optional<std::pair<double, double>> range = std::nullopt) {
    if (samples.size() < 2) throw DataError("histogram needs at least two samples");
    if (bins < 2) throw ConfigError("histogram needs at least two bins");
    for (double v : samples)
        if (!std::isfinite(v)) throw DataError("histogram sample is not finite");
    double lo, hi;
    if (range) {
        lo = range->first;
        hi = range->second;
        if (!(lo < hi)) throw ConfigError("histogram range must satisfy lo < hi");
    } else {
        const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
        lo = *mn;
        hi = *mx;
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (Index k = 0; k <= bins; ++k)
        h.edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    h.edges.back() = hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : samples) {
        auto k = static_cast<Index>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
        k = std::clamp<Index>(k, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(k)];
    }
    return h;
}

inline std::string histogram_csv(const Histogram& h) {
    std::string out = "bin,lower,upper,count\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k)
        out += std::to_string(k) + "," + format_double(h.edges[k]) + "," + format_double(h.edges[k + 1]) + "," +
               std::to_string(h.counts[k]) + "\n";
    return out;
}

/// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw DataError("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct SampleSummary {
    Index n = 0;
    double mean = 0.0;
    double variance = 0.0; // unbiased
    std::vector<std::pair<double, double>> quantiles;
};

inline SampleSummary summarize(const std::vector<double>& v) {
    if (v.empty()) throw DataError("summary of an empty sample");
    SampleSummary s;
    s.n = static_cast<Index>(v.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) mean += (v[i] - mean) / static_cast<double>(i + 1);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.mean = mean;
    s.variance = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
    for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) s.quantiles.emplace_back(p, quantile(v, p));
    return s;
}

// ---------------------------------------------------------------------------
// Trajectory CSV

inline std::string trajectory_csv_header(Index m, bool paired) {
    std::string h = "t,rep,truncated";
    for (const char* p : {"z_", "prop_", "eps_", "eps0_"}) {
        if (std::string_view(p) == "eps0_" && !paired) continue;
        for (Index i = 1; i <= m; ++i) h += "," + std::string(p) + std::to_string(i);
    }
    return h + "\n";
}

/// Rows for one replication; the t = 0 row carries the start with zero noise.
inline void append_trajectory_csv(std::string& out, const Trajectory& traj, Index rep) {
    const Index m = traj.dim();
    auto put = [&out](const Vector& v) {
        for (Index i = 0; i < v.size(); ++i) {
            out += ',';
            out += format_double(v(i));
        }
    };
    const Vector zero = Vector::Zero(m);
    out += "0," + std::to_string(rep) + ",0";
    put(traj.initial());
    put(traj.initial());
    put(zero);
    if (traj.has_paired()) put(zero);
    out += '\n';
    for (Index t = 1; t <= traj.size(); ++t) {
        out += std::to_string(t) + "," + std::to_string(rep) + "," + (traj.truncated(t) ? "1" : "0");
        put(traj.iterate(t));
        put(traj.proposed(t));
        put(traj.noise(t));
        if (traj.has_paired()) put(traj.noise_at_root(t));
        out += '\n';
    }
}

struct RecordedRun {
    Index rep = 0;
    Trajectory trajectory;
};

/// Reads a trajectory CSV back, one run per rep in order of first
/// appearance. Rows must be ordered by t within each rep.
inline std::vector<RecordedRun> read_trajectory_csv(const std::filesystem::path& path) {
    const CsvTable tbl = read_csv_file(path);
    const std::size_t ct = tbl.column("t"), crep = tbl.column("rep"), ctr = tbl.column("truncated");
    Index m = 0;
    while (tbl.has_column("z_" + std::to_string(m + 1))) ++m;
    if (m == 0) throw DataError(path.string() + ": no z_ columns");
    const bool paired = tbl.has_column("eps0_1");
    auto cols = [&](const std::string& prefix) {
        std::vector<std::size_t> c;
        for (Index i = 1; i <= m; ++i) c.push_back(tbl.column(prefix + std::to_string(i)));
        return c;
    };
    const auto cz = cols("z_"), cp = cols("prop_"), ce = cols("eps_");
    const auto ce0 = paired ? cols("eps0_") : std::vector<std::size_t>{};
    auto vec = [m](const std::vector<double>& row, const std::vector<std::size_t>& c) {
        Vector v(m);
        for (Index i = 0; i < m; ++i) v(i) = row[c[static_cast<std::size_t>(i)]];
        return v;
    };

    std::vector<RecordedRun> runs;
    std::map<Index, std::size_t> slot;
    for (const auto& row : tbl.rows) {
        const auto rep = static_cast<Index>(row[crep]);
        const auto t = static_cast<Index>(row[ct]);
        auto it = slot.find(rep);
        if (t == 0) {
            if (it != slot.end()) throw DataError(path.string() + ": rep " + std::to_string(rep) + " restarts");
            slot.emplace(rep, runs.size());
            runs.push_back({rep, Trajectory(vec(row, cz), 0, paired)});
            continue;
        }
        if (it == slot.end()) throw DataError(path.string() + ": rep " + std::to_string(rep) + " lacks a t=0 row");
        Trajectory& traj = runs[it->second].trajectory;
        if (t != traj.size() + 1)
            throw DataError(path.string() + ": rep " + std::to_string(rep) + " skips to t=" + std::to_string(t));
        StepRecord r;
        r.iterate = vec(row, cz);
        r.proposed = vec(row, cp);
        r.noise = vec(row, ce);
        if (paired) r.noise_at_root = vec(row, ce0);
        r.truncated = row[ctr] != 0.0;
        r.step = Matrix::Zero(m, m);
        traj.append(r);
    }
    return runs;
}

} // namespace truncsa
