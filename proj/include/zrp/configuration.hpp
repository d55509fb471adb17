#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "zrp/errors.hpp"

namespace zrp {

/// Occupation numbers eta(x) on the sites x = 1..N-1, with the total particle
/// count kept in sync. Plain value type; copy to move between threads.
class Configuration {
public:
    Configuration() = default;

    explicit Configuration(int n_sites) : occ_(static_cast<std::size_t>(n_sites), 0), total_(0) {
        if (n_sites < 1) throw ConfigError("configuration needs at least one site");
    }

    static Configuration from_occupancies(std::vector<std::uint32_t> occ) {
        if (occ.empty()) throw ConfigError("configuration needs at least one site");
        Configuration c;
        c.occ_ = std::move(occ);
        c.total_ = 0;
        for (auto k : c.occ_) c.total_ += k;
        return c;
    }

    int n_sites() const { return static_cast<int>(occ_.size()); }

    /// Occupancy at site x, x in 1..N-1.
    std::uint32_t at(int x) const { return occ_[static_cast<std::size_t>(x - 1)]; }

    std::uint64_t total() const { return total_; }

    void add_at(int x) {
        auto& v = occ_[static_cast<std::size_t>(x - 1)];
        if (v == std::numeric_limits<std::uint32_t>::max())
            throw OccupancyOverflow("occupancy overflow at site " + std::to_string(x));
        ++v;
        ++total_;
    }

    void remove_at(int x) {
        auto& v = occ_[static_cast<std::size_t>(x - 1)];
        if (v == 0) throw ImpossibleEvent("removal from empty site " + std::to_string(x));
        --v;
        --total_;
    }

    const std::vector<std::uint32_t>& occupancies() const { return occ_; }

    bool operator==(const Configuration& o) const = default;

    /// Componentwise partial order eta <= xi.
    bool dominated_by(const Configuration& xi) const {
        if (occ_.size() != xi.occ_.size()) return false;
        for (std::size_t i = 0; i < occ_.size(); ++i)
            if (occ_[i] > xi.occ_[i]) return false;
        return true;
    }

private:
    std::vector<std::uint32_t> occ_;
    std::uint64_t total_ = 0;
};

} // namespace zrp
