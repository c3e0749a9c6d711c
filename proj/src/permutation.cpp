#include "sqlab/permutation.hpp"

#include <numeric>

namespace sqlab {

Permutation Permutation::xor_shift(int n, std::uint32_t delta) {
    if (n < 1 || n > kMaxDenseDim) throw DimensionMismatch("Permutation: dimension out of [1,24]");
    if (delta == 0) throw QueryError("xor_shift: delta = 0 has fixed points");
    if ((delta & ~low_mask(n)) != 0) throw DimensionMismatch("xor_shift: delta outside {0,1}^n");
    return Permutation(n, XorShift{delta});
}

Permutation Permutation::table(int n, std::vector<std::uint32_t> pi) {
    if (n < 1 || n > kMaxDenseDim) throw DimensionMismatch("Permutation: dimension out of [1,24]");
    const std::size_t size = std::size_t{1} << n;
    if (pi.size() != size) throw DimensionMismatch("Permutation::table: length is not 2^n");
    std::vector<bool> seen(size, false);
    for (std::size_t x = 0; x < size; ++x) {
        if (pi[x] >= size || seen[pi[x]]) throw QueryError("Permutation::table: not a bijection");
        if (pi[x] == x) throw QueryError("Permutation::table: fixed point at x");
        seen[pi[x]] = true;
    }
    return Permutation(n, Table{std::move(pi)});
}

Permutation Permutation::random_fixed_point_free(int n, Rng& rng) {
    const std::size_t size = std::size_t{1} << n;
    std::vector<std::uint32_t> perm(size);
    std::iota(perm.begin(), perm.end(), 0u);
    // Fisher-Yates, then repair fixed points by swapping with a neighbor.
    for (std::size_t i = size - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.below(i + 1)]);
    for (std::size_t x = 0; x < size; ++x) {
        if (perm[x] == x) {
            const std::size_t other = x == 0 ? 1 : x - 1;
            std::swap(perm[x], perm[other]);
        }
    }
    return table(n, std::move(perm));
}

std::uint32_t Permutation::xor_delta() const {
    if (const auto* xs = std::get_if<XorShift>(&form_)) return xs->delta;
    throw QueryError("xor_delta: not an xor-shift permutation");
}

bool Permutation::fixed_point_free_exhaustive() const {
    const std::uint32_t size = 1u << n_;
    for (std::uint32_t x = 0; x < size; ++x)
        if (apply(x) == x) return false;
    return true;
}

}  // namespace sqlab
