#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace sqlab {

/// Deterministic, splittable random stream (xoshiro256++ seeded via splitmix64).
///
/// All randomness in the library flows through this class so that runs are
/// bit-reproducible across platforms for a given master seed. Derived streams
/// (per suite, per trial) are independent by construction, which lets trial
/// loops run in parallel without changing any result.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    /// Stream derived from (master, stream-tag, index); used for per-trial seeding.
    static Rng derive(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

    std::uint64_t u64();

    /// Uniform in [0, bound); bound must be nonzero. Unbiased (rejection).
    std::uint64_t below(std::uint64_t bound);

    /// k uniform bits, 0 <= k <= 32.
    std::uint32_t bits(int k);

    /// Uniform double in [0, 1) with 53 random bits.
    double real();

    bool bernoulli(double p);

    bool bit() { return bits(1) != 0; }

    /// Independent child stream.
    Rng split(std::uint64_t stream);

  private:
    std::array<std::uint64_t, 4> s_;
};

/// FNV-1a hash of a label, for turning suite names into stream tags.
std::uint64_t stream_tag(std::string_view label);

}  // namespace sqlab
