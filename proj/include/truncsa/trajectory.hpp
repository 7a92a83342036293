#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "core.hpp"

namespace truncsa {

/// Everything recorded for a single step t of the truncated recursion.
struct StepRecord {
    Vector iterate;                      // Z_t, after projection
    Vector proposed;                     // Z_{t-1} + gamma_t (R_t + eps_t), before projection
    Vector noise;                        // eps_t(Z_{t-1})
    std::optional<Vector> noise_at_root; // eps_t(z0) from the same per-step randomness
    bool truncated = false;
    Matrix step;                         // gamma_t(Z_{t-1})
};

/// Column-major record of a run. Index 0 holds the starting point; steps
/// are 1-based like the recursion itself.
class Trajectory {
public:
    Trajectory() = default;

    Trajectory(Vector initial, Index capacity, bool paired)
        : initial_(std::move(initial)), paired_(paired) {
        const Index m = initial_.size();
        iterates_.resize(m, capacity);
        proposed_.resize(m, capacity);
        noise_.resize(m, capacity);
        if (paired_) noise_at_root_.resize(m, capacity);
        steps_.resize(m, m * capacity);
        truncated_.reserve(static_cast<std::size_t>(capacity));
    }

    Index dim() const noexcept { return initial_.size(); }
    Index size() const noexcept { return size_; }
    Index capacity() const noexcept { return iterates_.cols(); }
    bool has_paired() const noexcept { return paired_; }
    bool empty() const noexcept { return size_ == 0; }

    const Vector& initial() const noexcept { return initial_; }

    /// Z_t for 0 <= t <= size().
    Vector iterate(Index t) const {
        check(t, 0);
        return t == 0 ? initial_ : Vector(iterates_.col(t - 1));
    }
    Vector last() const { return iterate(size_); }

    Vector proposed(Index t) const { check(t, 1); return proposed_.col(t - 1); }
    Vector noise(Index t) const { check(t, 1); return noise_.col(t - 1); }
    Vector noise_at_root(Index t) const {
        check(t, 1);
        if (!paired_) throw ConfigError("trajectory was recorded without noise-at-root draws");
        return noise_at_root_.col(t - 1);
    }
    bool truncated(Index t) const { check(t, 1); return truncated_[static_cast<std::size_t>(t - 1)]; }
    Matrix step_matrix(Index t) const {
        check(t, 1);
        const Index m = dim();
        return steps_.block(0, (t - 1) * m, m, m);
    }

    Index truncation_count() const {
        Index n = 0;
        for (bool b : truncated_) n += b;
        return n;
    }

    void append(const StepRecord& r) {
        const Index m = dim();
        if (size_ == capacity()) grow();
        iterates_.col(size_) = r.iterate;
        proposed_.col(size_) = r.proposed;
        noise_.col(size_) = r.noise;
        if (paired_) {
            if (!r.noise_at_root) throw ConfigError("paired trajectory requires noise-at-root draws");
            noise_at_root_.col(size_) = *r.noise_at_root;
        }
        steps_.block(0, size_ * m, m, m) = r.step;
        truncated_.push_back(r.truncated);
        ++size_;
    }

private:
    void check(Index t, Index lo) const {
        if (t < lo || t > size_) throw std::out_of_range("trajectory index " + std::to_string(t));
    }

    void grow() {
        const Index m = dim();
        const Index cap = std::max<Index>(16, 2 * capacity());
        iterates_.conservativeResize(m, cap);
        proposed_.conservativeResize(m, cap);
        noise_.conservativeResize(m, cap);
        if (paired_) noise_at_root_.conservativeResize(m, cap);
        steps_.conservativeResize(m, m * cap);
    }

    Vector initial_;
    bool paired_ = false;
    Index size_ = 0;
    Matrix iterates_, proposed_, noise_, noise_at_root_, steps_;
    std::vector<bool> truncated_;
};

/// Read-only view of the steps recorded so far, handed to predictable
/// quantities (R_t, gamma_t, U_t) that may depend on the past. Empty
/// when the caller has no history.
class HistoryView {
public:
    HistoryView() = default;
    HistoryView(const Trajectory& traj) : traj_(&traj) {} // NOLINT(implicit)

    bool empty() const noexcept { return traj_ == nullptr || traj_->empty(); }
    Index size() const noexcept { return traj_ ? traj_->size() : 0; }
    const Trajectory* get() const noexcept { return traj_; }

private:
    const Trajectory* traj_ = nullptr;
};

} // namespace truncsa
