#pragma once

#include <cmath>
#include <vector>

#include "zrp/errors.hpp"

namespace zrp {

/// Fenwick tree over event rates: point updates and weighted sampling both in
/// O(log n). The grand total is cached incrementally; rebuild() recomputes all
/// aggregates from the leaves to kill floating-point drift.
class RateIndex {
public:
    explicit RateIndex(int n_slots)
        : leaf_(static_cast<std::size_t>(n_slots), 0.0),
          tree_(static_cast<std::size_t>(n_slots) + 1, 0.0), total_(0.0) {}

    int size() const { return static_cast<int>(leaf_.size()); }

    double get(int i) const { return leaf_[static_cast<std::size_t>(i)]; }

    void set(int i, double rate) {
        double d = rate - leaf_[static_cast<std::size_t>(i)];
        if (d == 0.0) return;
        leaf_[static_cast<std::size_t>(i)] = rate;
        total_ += d;
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < tree_.size(); j += j & (~j + 1))
            tree_[j] += d;
    }

    double total() const { return total_; }

    /// Index of the slot owning position u in the cumulative rate, u in
    /// [0, total). Zero-rate slots are skipped.
    int sample(double u) const {
        std::size_t pos = 0;
        std::size_t mask = 1;
        while ((mask << 1) < tree_.size()) mask <<= 1;
        for (; mask > 0; mask >>= 1) {
            std::size_t next = pos + mask;
            if (next < tree_.size() && tree_[next] <= u) {
                u -= tree_[next];
                pos = next;
            }
        }
        // pos slots have cumulative rate <= u, so slot pos is hit; nudge past
        // zero-rate slots if rounding parked us on one.
        int i = static_cast<int>(pos);
        while (i < size() - 1 && leaf_[static_cast<std::size_t>(i)] <= 0.0) ++i;
        return i;
    }

    /// Recompute aggregates; returns the drift |old total - new total|.
    double rebuild() {
        double old_total = total_;
        std::fill(tree_.begin(), tree_.end(), 0.0);
        total_ = 0.0;
        for (std::size_t i = 0; i < leaf_.size(); ++i) {
            total_ += leaf_[i];
            std::size_t j = i + 1;
            tree_[j] += leaf_[i];
            std::size_t parent = j + (j & (~j + 1));
            if (parent < tree_.size()) tree_[parent] += tree_[j];
        }
        return std::abs(old_total - total_);
    }

private:
    std::vector<double> leaf_;
    std::vector<double> tree_;  // 1-based internal nodes
    double total_;
};

} // namespace zrp
