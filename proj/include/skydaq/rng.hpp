#pragma once

#include <cstdint>

// Deterministic, seed-stable random primitives. The simulator derives one
// 64-bit stream key per (seed, instant, stream, frame) tuple and then hashes
// pixel indices against it, so output bytes depend only on the configuration
// and never on evaluation order.

namespace skydaq {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Mix an ordered list of values into one stream key.
inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

// Fast 32-bit finalizer (lowbias32) for per-index draws inside hot loops.
inline std::uint32_t hash32(std::uint32_t x) {
    x ^= x >> 16;
    x *= 0x7feb352du;
    x ^= x >> 15;
    x *= 0x846ca68bu;
    x ^= x >> 16;
    return x;
}

// Uniform in [0, 1).
inline double u01(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Uniform in [-1, 1), from a 32-bit hash; cheap enough for per-pixel noise.
inline float signed_unit(std::uint32_t h) {
    return static_cast<float>(h >> 8) * 0x1.0p-23f - 1.0f;
}

// Small sequential generator for places where a stream is more natural.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }
    double uniform() { return u01(next_u64()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::uint64_t state_;
};

}  // namespace skydaq
