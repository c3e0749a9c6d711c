#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "sqlab/bitvec.hpp"
#include "sqlab/rng.hpp"

namespace sqlab {

/// A fixed-point-free permutation of {0,1}^n: either x -> x XOR delta with
/// delta != 0 (always fixed-point-free), or an explicit table checked for
/// bijectivity and for the absence of fixed points at construction.
class Permutation {
  public:
    static Permutation xor_shift(int n, std::uint32_t delta);
    static Permutation table(int n, std::vector<std::uint32_t> pi);
    /// Random fixed-point-free permutation with odd and even cycles.
    static Permutation random_fixed_point_free(int n, Rng& rng);

    int dim() const { return n_; }
    bool is_xor_shift() const { return std::holds_alternative<XorShift>(form_); }
    std::uint32_t xor_delta() const;

    std::uint32_t apply(std::uint32_t x) const {
        if (const auto* xs = std::get_if<XorShift>(&form_)) return x ^ xs->delta;
        return std::get<Table>(form_).pi[x];
    }

    /// Scans the whole domain; true when pi(x) != x everywhere.
    bool fixed_point_free_exhaustive() const;

  private:
    struct XorShift {
        std::uint32_t delta;
    };
    struct Table {
        std::vector<std::uint32_t> pi;
    };

    Permutation(int n, std::variant<XorShift, Table> f) : n_(n), form_(std::move(f)) {}

    int n_;
    std::variant<XorShift, Table> form_;
};

}  // namespace sqlab
