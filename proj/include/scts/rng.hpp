#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace scts {

// SplitMix64 finalizer. Bijective on uint64, good avalanche.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Order-sensitive hash combiner for deriving child seeds from a base seed
// plus a list of discriminators (indices, design names, tau values, ...).
// Stable across platforms: strings are folded byte by byte, doubles by
// their IEEE-754 bit pattern.
class SeedHasher {
public:
    explicit SeedHasher(uint64_t base) : h_(mix64(base ^ 0x1905fa3c0b2dULL)) {}

    SeedHasher& mix(uint64_t v) {
        h_ = mix64(h_ ^ mix64(v));
        return *this;
    }
    SeedHasher& mix(int v) { return mix(static_cast<uint64_t>(static_cast<int64_t>(v))); }
    SeedHasher& mix(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        return mix(bits);
    }
    SeedHasher& mix(std::string_view s) {
        mix(static_cast<uint64_t>(s.size()));
        uint64_t acc = 0;
        int k = 0;
        for (unsigned char c : s) {
            acc |= static_cast<uint64_t>(c) << (8 * k);
            if (++k == 8) {
                mix(acc);
                acc = 0;
                k = 0;
            }
        }
        if (k > 0) mix(acc);
        return *this;
    }

    uint64_t digest() const { return h_; }

private:
    uint64_t h_;
};

template <typename... Parts>
uint64_t stable_hash(uint64_t base, const Parts&... parts) {
    SeedHasher h(base);
    (h.mix(parts), ...);
    return h.digest();
}

// Deterministic uniform/normal stream. SplitMix64 core, Box-Muller normals.
// Not std::normal_distribution: its draw sequence is implementation-defined,
// which would break frozen oracles and byte-identical reruns.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform on [0,1), 53 random bits.
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_normal();

    // Bernoulli(1/2), exact over the dyadic uniform.
    int next_coin() { return next_uniform() < 0.5 ? 1 : 0; }

private:
    uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace scts
