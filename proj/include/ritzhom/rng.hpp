#pragma once

#include <cstdint>
#include <random>

#include "ritzhom/common.hpp"

namespace ritzhom {

// Seedable, platform-independent uniform generator: std::mt19937_64 (fully
// specified by the standard) with an explicit 53-bit mantissa mapping, so the
// double stream is reproducible across implementations. uniform01() returns
// values in the open interval (0,1): ((x >> 11) + 0.5) * 2^-53.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {
        const std::uint64_t x = gen_();
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace ritzhom
