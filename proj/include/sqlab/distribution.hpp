#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "sqlab/bitvec.hpp"
#include "sqlab/boolean_function.hpp"
#include "sqlab/rng.hpp"

namespace sqlab {

/// A PMF over {0,1}^n in structured or explicit form.
///
/// Structured forms (uniform, subcube-uniform, point mass) carry exact
/// probabilities and exact squared 2-norms; explicit weight vectors are
/// normalized on construction when the total mass is within 1e-6 of one,
/// and rejected otherwise.
class Distribution {
  public:
    static Distribution uniform(int n);
    static Distribution subcube(int n, const Restriction& r);
    static Distribution point_mass(int n, std::uint32_t x0);
    static Distribution explicit_pmf(int n, std::vector<double> weights);

    int dim() const { return n_; }
    double pmf(std::uint32_t x) const;
    double l2_norm_sq() const;
    std::uint32_t sample(Rng& rng) const;

    bool is_uniform() const { return std::holds_alternative<Uniform>(form_); }
    bool is_point_mass() const { return std::holds_alternative<PointMass>(form_); }
    bool is_explicit() const { return std::holds_alternative<Explicit>(form_); }
    const Restriction* subcube_restriction() const;

    /// Exact expectation of `fn` over the support; structured forms iterate
    /// only their support.
    template <class F>
    double expect(F&& fn) const {
        double acc = 0.0;
        for_each_support([&](std::uint32_t x, double p) { acc += p * fn(x); });
        return acc;
    }

    /// Visits every support point with its probability.
    template <class Visitor>
    void for_each_support(Visitor&& visit) const {
        if (const auto* u = std::get_if<Uniform>(&form_)) {
            (void)u;
            const std::uint32_t size = 1u << n_;
            const double p = 1.0 / static_cast<double>(size);
            for (std::uint32_t x = 0; x < size; ++x) visit(x, p);
        } else if (const auto* s = std::get_if<Subcube>(&form_)) {
            const double p = 1.0 / static_cast<double>(std::uint64_t{1} << free_count_);
            const std::uint32_t combos = 1u << free_count_;
            for (std::uint32_t j = 0; j < combos; ++j)
                visit(s->r.fixed_value | scatter(j), p);
        } else if (const auto* pm = std::get_if<PointMass>(&form_)) {
            visit(pm->x0, 1.0);
        } else {
            const auto& w = std::get<Explicit>(form_).weights;
            for (std::uint32_t x = 0; x < w.size(); ++x)
                if (w[x] > 0.0) visit(x, w[x]);
        }
    }

    friend bool operator==(const Distribution&, const Distribution&);

  private:
    struct Uniform {
        bool operator==(const Uniform&) const = default;
    };
    struct Subcube {
        Restriction r;
        bool operator==(const Subcube& o) const {
            return r.fixed_mask == o.r.fixed_mask && r.fixed_value == o.r.fixed_value;
        }
    };
    struct PointMass {
        std::uint32_t x0;
        bool operator==(const PointMass&) const = default;
    };
    struct Explicit {
        std::vector<double> weights;
        std::vector<double> cumulative;
        bool operator==(const Explicit& o) const { return weights == o.weights; }
    };

    Distribution(int n, std::variant<Uniform, Subcube, PointMass, Explicit> f);
    std::uint32_t scatter(std::uint32_t free_bits) const;

    int n_;
    std::variant<Uniform, Subcube, PointMass, Explicit> form_;
    std::vector<int> free_positions_;  // subcube only
    int free_count_ = 0;
};

/// E_{x~D}[f(x)], exact PMF-weighted sum over the support.
double mean(const BooleanFunction& f, const Distribution& d);

/// Pr_{x~D}[f(x) != g(x)].
double dist(const BooleanFunction& f, const BooleanFunction& g, const Distribution& d);

}  // namespace sqlab
