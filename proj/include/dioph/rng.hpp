#pragma once

// Deterministic, platform-stable random streams.  Sample i of an experiment
// draws from a stream derived from (master seed, i), so per-sample work can
// be scheduled in any order and still reproduce bit-identical output.

#include "dioph/big.hpp"

#include <cstdint>

namespace dioph {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& s : s_) s = splitmix64(sm);
    }

    // xoshiro256**
    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased draw in [0, bound) via rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

    // Uniform dyadic rational in [0,1) with `bits` random bits: exact-arithmetic
    // stand-in for a Lebesgue draw at resolution 2^-bits.
    Rat uniform_dyadic(unsigned bits) {
        Int num = 0;
        unsigned produced = 0;
        while (produced < bits) {
            unsigned take = bits - produced >= 64 ? 64 : bits - produced;
            num <<= take;
            num += Int(static_cast<unsigned long>(next() >> (64 - take)));
            produced += take;
        }
        Int den = 1;
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), bits);
        return make_rat(num, den);
    }

    // Uniform big integer in [lo, hi] inclusive.
    Int uniform_int(const Int& lo, const Int& hi) {
        Int span = hi - lo + 1;
        size_t bits = mpz_sizeinbase(span.get_mpz_t(), 2);
        while (true) {
            Int v = 0;
            size_t produced = 0;
            while (produced < bits) {
                size_t take = bits - produced >= 64 ? 64 : bits - produced;
                v <<= take;
                v += Int(static_cast<unsigned long>(next() >> (64 - take)));
                produced += take;
            }
            if (v < span) return lo + v;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Stream for sample `index` under a master seed.
inline Rng stream_rng(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t mix = master_seed;
    (void)splitmix64(mix);
    mix ^= 0x5851f42d4c957f2dULL * (index + 1);
    return Rng(splitmix64(mix));
}

}  // namespace dioph
