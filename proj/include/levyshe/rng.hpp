#pragma once

#include <cmath>
#include <cstdint>

namespace levyshe {

// Counter-style generator: a Weyl sequence through the splitmix64 output mix.
// Streams derived from (seed, stream) are deterministic and independent of
// thread scheduling, which is what replicate-level reproducibility needs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        state_ = mix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
        state_ ^= mix(stream + 0xbf58476d1ce4e5b9ULL);
        next();  // decouple from the seeding pattern
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // in [0,1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // in (0,1]
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    std::uint64_t poisson(double mean);

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

}  // namespace levyshe
