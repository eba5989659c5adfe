#pragma once

#include <cstdint>

namespace linsbft {

// SplitMix64. The standard library engines are portable but the
// distributions are not (uniform_int_distribution output differs across
// implementations), and reproducibility of whole traces byte-for-byte is a
// hard requirement, so the generator and the range reduction are both
// pinned here.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound); bound = 0 returns 0. Modulo bias is far below
    // anything the 3-sigma checks can see at desk scale.
    uint64_t below(uint64_t bound) { return bound ? next() % bound : 0; }

    // Uniform in [lo, hi] inclusive.
    uint64_t range(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

    // True with probability pct/100.
    bool percent(uint32_t pct) { return below(100) < pct; }

    // Derive an independent stream; used to give each subsystem (delays,
    // fault schedule, payloads) its own seed from the scenario seed.
    Rng fork(uint64_t salt) {
        Rng r(state_ ^ (salt * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull));
        r.next();
        return r;
    }

private:
    uint64_t state_;
};

}  // namespace linsbft
