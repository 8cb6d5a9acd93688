#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace signsynth {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stage tags separate the random streams drawn for one index.
enum class Stage : std::uint32_t {
    Variant = 1,
    Placement = 2,
    Environment = 3,
    Occlusion = 4,
    Effect = 5,
};

/// Identity of a random stream: (global seed, index, stage).
struct RngKey {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    Stage stage = Stage::Variant;

    friend bool operator==(const RngKey&, const RngKey&) = default;
};

/// Counter-based generator. Draw i of key (s, n, t) is
///
///     mix64(mix64(mix64(s) ^ n) ^ (t << 40 | i))
///
/// Since mix64 is bijective, two keys with the same seed and stage but
/// different indices differ already at draw 0, and any key replays exactly.
/// The counter is 40 bits wide, far beyond what one record consumes.
class Rng {
public:
    explicit Rng(RngKey key)
        : base_(mix64(mix64(key.seed) ^ key.index)),
          tag_(static_cast<std::uint64_t>(key.stage) << 40) {}

    /// Stream for a bare 64-bit seed (used for seeds stored in parameters).
    explicit Rng(std::uint64_t seed) : Rng(RngKey{seed, 0, Stage::Effect}) {}

    std::uint64_t next_u64() { return mix64(base_ ^ (tag_ | (counter_++ & kCounterMask))); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi); returns lo when lo == hi.
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Uniform in (0, hi].
    double uniform_open_closed(double hi) { return hi * (1.0 - next_unit()); }

    /// Uniform integer in the closed range [lo, hi] (Lemire rejection).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64());
        const std::uint64_t limit = (0 - span) % span;
        for (;;) {
            const std::uint64_t x = next_u64();
            const unsigned __int128 m = static_cast<unsigned __int128>(x) * span;
            if (static_cast<std::uint64_t>(m) >= limit)
                return lo + static_cast<std::int64_t>(m >> 64);
        }
    }

    std::uint64_t draws() const { return counter_; }

private:
    static constexpr std::uint64_t kCounterMask = (1ULL << 40) - 1;
    std::uint64_t base_;
    std::uint64_t tag_;
    std::uint64_t counter_ = 0;
};

/// 64-bit FNV-1a, used for config and content fingerprints.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace signsynth
