#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "zrp/configuration.hpp"
#include "zrp/errors.hpp"

namespace zrp {

/// Flat array of occupancies.
inline nlohmann::json configuration_to_json(const Configuration& c) {
    return nlohmann::json(c.occupancies());
}

inline Configuration configuration_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("configuration json must be a non-empty array");
    return Configuration::from_occupancies(j.get<std::vector<std::uint32_t>>());
}

/// Binary layout: little-endian u64 site count, then one u32 per site.
inline std::vector<std::uint8_t> configuration_to_binary(const Configuration& c) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + 4 * c.occupancies().size());
    std::uint64_t n = c.occupancies().size();
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((n >> (8 * i)) & 0xff));
    for (std::uint32_t v : c.occupancies())
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    return out;
}

inline Configuration configuration_from_binary(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) throw ConfigError("binary configuration truncated");
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    if (bytes.size() != 8 + 4 * n) throw ConfigError("binary configuration has wrong length");
    std::vector<std::uint32_t> occ(n);
    for (std::uint64_t s = 0; s < n; ++s) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes[8 + 4 * s + i]) << (8 * i);
        occ[s] = v;
    }
    return Configuration::from_occupancies(std::move(occ));
}

} // namespace zrp
