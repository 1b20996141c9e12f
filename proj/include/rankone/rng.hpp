#pragma once

#include "rankone/common.hpp"

namespace rankone {

// splitmix64 finalizer; used both as a mixer and to expand seeds
inline u64 mix64(u64 x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from (master seed, tags). Streams are a
// pure function of their tags, so schedules are reproducible no matter in
// which order stages get generated.
inline u64 stream_seed(u64 master, u64 tag_a, u64 tag_b = 0) {
    u64 s = mix64(master ^ 0x8f462907533deacdULL);
    s = mix64(s ^ mix64(tag_a));
    s = mix64(s ^ mix64(tag_b ^ 0x1d8e4e27c47d124fULL));
    return s;
}

// xoshiro256** with splitmix64 seeding. std::uniform_int_distribution is
// implementation-defined, so uniform draws are done by hand (rejection
// sampling) to keep outputs identical across toolchains.
class Rng {
public:
    explicit Rng(u64 seed) {
        u64 sm = seed;
        for (auto& word : state_) {
            sm += 0x9e3779b97f4a7c15ULL;
            u64 z = sm;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    u64 next() {
        const u64 result = rotl(state_[1] * 5, 7) * 9;
        const u64 t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on {0, ..., n-1}, unbiased
    u64 below(u64 n) {
        if (n == 0) throw parameter_error("Rng::below(0)");
        const u64 threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            const u64 r = next();
            if (r >= threshold) return r % n;
        }
    }

    // uniform on {lo, ..., hi} inclusive
    u64 between(u64 lo, u64 hi) {
        return lo + below(hi - lo + 1);
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    static u64 rotl(u64 x, int k) { return (x << k) | (x >> (64 - k)); }
    u64 state_[4];
};

} // namespace rankone
