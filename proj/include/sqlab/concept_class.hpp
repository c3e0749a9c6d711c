#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sqlab/boolean_function.hpp"
#include "sqlab/labeled.hpp"

namespace sqlab {

/// An enumerable class of boolean functions on {0,1}^n.
///
/// member_eval lets ERM and distance computations avoid materializing dense
/// tables; erm returns the empirical-risk minimizer with ties broken by
/// enumeration order.
class ConceptClass {
  public:
    virtual ~ConceptClass() = default;

    virtual int dim() const = 0;
    virtual std::size_t size() const = 0;
    virtual BooleanFunction member(std::size_t idx) const = 0;
    virtual bool member_eval(std::size_t idx, std::uint32_t x) const = 0;
    virtual std::string name() const = 0;

    /// (index of argmin, its error count). Throws on an empty class.
    virtual std::pair<std::size_t, std::size_t> erm(std::span<const Example> samples) const;
};

/// Parities chi_S as 0/1 XOR functions, |S| <= max_arity, ordered by mask.
/// The empty set (constant 0) is included only when include_empty is set;
/// the full class over all 2^n masks is Parities(n, n, true).
class ParityClass final : public ConceptClass {
  public:
    ParityClass(int n, int max_arity, bool include_empty = false);

    int dim() const override { return n_; }
    std::size_t size() const override { return masks_.size(); }
    BooleanFunction member(std::size_t idx) const override;
    bool member_eval(std::size_t idx, std::uint32_t x) const override;
    std::string name() const override;
    std::pair<std::size_t, std::size_t> erm(std::span<const Example> samples) const override;

    std::uint32_t mask(std::size_t idx) const { return masks_[idx]; }

  private:
    int n_;
    int max_arity_;
    std::vector<std::uint32_t> masks_;
};

/// All functions of at most k fixed coordinates: every size-k support set
/// (lexicographic) crossed with every truth table on it (as an integer).
class JuntaClass final : public ConceptClass {
  public:
    JuntaClass(int n, int k);

    int dim() const override { return n_; }
    std::size_t size() const override;
    BooleanFunction member(std::size_t idx) const override;
    bool member_eval(std::size_t idx, std::uint32_t x) const override;
    std::string name() const override;

    /// Exact ERM in O(supports * samples): per support set, each of the 2^k
    /// cells takes its majority label (ties prefer 0, which is the smallest
    /// table integer among the minimizers).
    std::pair<std::size_t, std::size_t> erm(std::span<const Example> samples) const override;

  private:
    std::uint32_t support_mask(std::size_t support_idx) const;
    std::uint32_t cell_of(std::uint32_t support, std::uint32_t x) const;

    int n_;
    int k_;
    std::vector<std::uint32_t> supports_;
};

/// The n dictator functions x -> x_i.
class DictatorClass final : public ConceptClass {
  public:
    explicit DictatorClass(int n) : n_(n) {}
    int dim() const override { return n_; }
    std::size_t size() const override { return static_cast<std::size_t>(n_); }
    BooleanFunction member(std::size_t idx) const override;
    bool member_eval(std::size_t idx, std::uint32_t x) const override { return (x >> idx) & 1u; }
    std::string name() const override { return "dictators"; }

  private:
    int n_;
};

class ExplicitClass final : public ConceptClass {
  public:
    explicit ExplicitClass(std::vector<BooleanFunction> members, std::string label = "explicit");
    int dim() const override;
    std::size_t size() const override { return members_.size(); }
    BooleanFunction member(std::size_t idx) const override { return members_[idx]; }
    bool member_eval(std::size_t idx, std::uint32_t x) const override { return members_[idx](x); }
    std::string name() const override { return label_; }

  private:
    std::vector<BooleanFunction> members_;
    std::string label_;
};

}  // namespace sqlab
