#pragma once

#include <cmath>
#include <cstdint>

namespace zrp {

namespace detail {

/// SplitMix64 output stage (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

} // namespace detail

/// Counter-based random stream. The state is (key, counter); output i is a
/// pure function of (key, i), so streams keyed by (master seed, replica,
/// purpose) are reproducible and independent of evaluation order across
/// threads. Satisfies the UniformRandomBitGenerator concept.
class CounterRng {
public:
    CounterRng() : CounterRng(0, 0, 0) {}

    CounterRng(std::uint64_t master_seed, std::uint64_t replica, std::uint64_t purpose = 0) {
        std::uint64_t k = detail::mix64(master_seed + detail::kGolden);
        k = detail::mix64(k ^ (replica * 0xd6e8feb86659fd93ull + detail::kGolden));
        k = detail::mix64(k ^ (purpose * 0xa5a5b9bdbcbcaaabull + detail::kGolden));
        key_ = k;
        counter_ = 0;
    }

    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }

    result_type operator()() {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as argument of log.
    double uniform_pos() {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    /// Exponential waiting time with the given rate.
    double exponential(double rate) {
        return -std::log(uniform_pos()) / rate;
    }

    /// Derive an independent substream without disturbing this one.
    CounterRng split(std::uint64_t purpose) const {
        CounterRng r;
        r.key_ = detail::mix64(key_ ^ (purpose * 0xd6e8feb86659fd93ull + detail::kGolden));
        r.counter_ = 0;
        return r;
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace zrp
