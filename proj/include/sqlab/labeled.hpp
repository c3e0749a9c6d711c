#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "sqlab/boolean_function.hpp"
#include "sqlab/distribution.hpp"

namespace sqlab {

/// A labeled example (x, y).
struct Example {
    std::uint32_t x;
    bool y;
};

/// The refutation-instance distribution over X x {0,1}: a marginal over X
/// plus a conditional label rule y(x) in [0,1].
class LabeledDistribution {
  public:
    /// y = g(x) deterministically.
    static LabeledDistribution deterministic(Distribution marginal, BooleanFunction g);
    /// y ~ Bern(p) independently of x (the noise side of biased refutation).
    static LabeledDistribution constant_bernoulli(Distribution marginal, double p);
    /// General conditional rule: y(x) table of length 2^n with entries in [0,1].
    static LabeledDistribution general(Distribution marginal, std::vector<double> y);

    int dim() const { return marginal_.dim(); }
    const Distribution& marginal() const { return marginal_; }

    /// Conditional label mean y(x).
    double label_mean(std::uint32_t x) const;

    /// Overall positive rate p = E_{(x,y)}[y], exact.
    double positive_rate() const;

    Example sample(Rng& rng) const;

    bool is_constant_bernoulli() const { return std::holds_alternative<Bernoulli>(labels_); }
    const BooleanFunction* deterministic_rule() const;

    /// Exact E_{(x,y)}[phi(x,y)] for phi given by its two label slices.
    template <class F0, class F1>
    double expect_pair(F0&& phi0, F1&& phi1) const {
        return marginal_.expect([&](std::uint32_t x) {
            const double y = label_mean(x);
            return (1.0 - y) * phi0(x) + y * phi1(x);
        });
    }

  private:
    struct Deterministic {
        BooleanFunction g;
    };
    struct Bernoulli {
        double p;
    };
    struct General {
        std::vector<double> y;
    };

    LabeledDistribution(Distribution m, std::variant<Deterministic, Bernoulli, General> l)
        : marginal_(std::move(m)), labels_(std::move(l)) {}

    Distribution marginal_;
    std::variant<Deterministic, Bernoulli, General> labels_;
};

/// Pr_{(x,y)~Dref}[f(x) != y], exact:
/// sum_x D_x(x) (f(x)(1-y(x)) + (1-f(x))y(x)).
double err(const BooleanFunction& f, const LabeledDistribution& dref);

}  // namespace sqlab
