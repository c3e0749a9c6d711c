#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "sqlab/bitvec.hpp"
#include "sqlab/rng.hpp"

namespace sqlab {

/// A {0,1}-valued function on {0,1}^n.
///
/// Two bodies: a dense packed truth table (n <= 24), or a lazily realized
/// p-biased random function that memoizes every point it has been asked about,
/// so repeated evaluation at the same point always returns the same bit.
/// Copies of a lazy function share the memo table.
class BooleanFunction {
  public:
    static BooleanFunction dense(int n, std::vector<std::uint64_t> words);
    static BooleanFunction from_bits(int n, const std::function<bool(std::uint32_t)>& fn);
    static BooleanFunction constant(int n, bool value);
    /// 0/1 XOR of the coordinates in `mask` (constant 0 when mask = 0).
    static BooleanFunction parity(int n, std::uint32_t mask);
    static BooleanFunction dictator(int n, int i);
    /// Uniformly random dense truth table.
    static BooleanFunction random(int n, Rng& rng);
    /// Dense realization of a p-biased random function (every point drawn now).
    static BooleanFunction random_biased(int n, double p, Rng& rng);
    /// Lazily realized p-biased random function with its own stream. No dimension cap.
    static BooleanFunction lazy_biased(int n, double p, Rng rng);

    int dim() const { return n_; }
    bool is_dense() const { return lazy_ == nullptr; }
    double bias() const;  // lazy only

    /// Unchecked evaluation (hot path).
    bool operator()(std::uint32_t x) const {
        if (lazy_) return lazy_eval(x);
        return (words_[x >> 6] >> (x & 63u)) & 1u;
    }

    /// Checked evaluation; throws DimensionMismatch when x.dim() != dim().
    bool eval(const BitVector& x) const;

    /// f(x) with the first `prefix_len` coordinates freshly rerandomized.
    /// A new draw per call: this is the stochastic function f^{>l}.
    bool prefix_randomized_eval(int prefix_len, std::uint32_t x, Rng& rng) const;

    /// Number of ones in the table (dense only).
    std::uint64_t ones_count() const;

    const std::vector<std::uint64_t>& words() const;

    friend bool operator==(const BooleanFunction& a, const BooleanFunction& b);

  private:
    struct LazyState {
        double p;
        Rng rng;
        std::unordered_map<std::uint32_t, bool> memo;
        mutable std::mutex mu;
        LazyState(double p_, Rng rng_) : p(p_), rng(std::move(rng_)) {}
    };

    BooleanFunction(int n, std::vector<std::uint64_t> w) : n_(n), words_(std::move(w)) {}
    BooleanFunction(int n, std::shared_ptr<LazyState> s) : n_(n), lazy_(std::move(s)) {}
    bool lazy_eval(std::uint32_t x) const;

    int n_ = 0;
    std::vector<std::uint64_t> words_;
    std::shared_ptr<LazyState> lazy_;
};

}  // namespace sqlab
