#pragma once

#include <bit>
#include <cstdint>

#include "sqlab/errors.hpp"

namespace sqlab {

/// Largest dimension with dense 2^n truth-table support.
inline constexpr int kMaxDenseDim = 24;

inline constexpr std::uint32_t low_mask(int n) {
    return n >= 32 ? 0xffffffffu : ((1u << n) - 1u);
}

/// A point of {0,1}^n, packed into one word. Coordinate i lives at bit i.
class BitVector {
  public:
    BitVector(int n, std::uint32_t bits) : n_(n), bits_(bits) {
        if (n < 1 || n > kMaxDenseDim)
            throw DimensionMismatch("BitVector: dimension out of [1,24]");
        if ((bits & ~low_mask(n)) != 0)
            throw DimensionMismatch("BitVector: bits set above position n");
    }

    int dim() const { return n_; }
    std::uint32_t value() const { return bits_; }
    bool bit(int i) const { return (bits_ >> i) & 1u; }
    int popcount() const { return std::popcount(bits_); }

    friend bool operator==(const BitVector&, const BitVector&) = default;

  private:
    int n_;
    std::uint32_t bits_;
};

/// A subcube of {0,1}^n: the fixed coordinates and their assigned bits.
struct Restriction {
    std::uint32_t fixed_mask = 0;
    std::uint32_t fixed_value = 0;

    Restriction() = default;
    Restriction(std::uint32_t mask, std::uint32_t value) : fixed_mask(mask), fixed_value(value) {
        if ((value & ~mask) != 0)
            throw QueryError("Restriction: assigned bits outside the fixed set");
    }

    bool fixes(int i) const { return (fixed_mask >> i) & 1u; }
    bool contains(std::uint32_t x) const { return (x & fixed_mask) == fixed_value; }
    int fixed_count() const { return std::popcount(fixed_mask); }

    void check_dim(int n) const {
        if ((fixed_mask & ~low_mask(n)) != 0)
            throw DimensionMismatch("Restriction: fixed coordinate outside [n]");
    }
};

}  // namespace sqlab
