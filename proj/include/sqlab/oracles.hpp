#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqlab/boolean_function.hpp"
#include "sqlab/distribution.hpp"
#include "sqlab/labeled.hpp"
#include "sqlab/permutation.hpp"
#include "sqlab/rng.hpp"

namespace sqlab {

/// Per-oracle limits; operations fail with BudgetExhausted once a limit trips.
struct QueryBudget {
    std::optional<std::uint64_t> max_mq;
    std::optional<std::uint64_t> max_sq;
    std::optional<std::uint64_t> max_samples;

    static QueryBudget unlimited() { return {}; }
};

/// How an oracle degrades the exact value of a query.
///
/// The adversarial modes make the "within tau" adversary of the oracle
/// definitions explicit: Exact answers truthfully, RoundToGrid snaps to a
/// tau-grid, AdversarialSign returns exactly truth +- tau with the sign chosen
/// by a caller-supplied policy, and Sampling estimates by Monte Carlo with a
/// declared failure probability.
class ToleranceMode {
  public:
    using SignPolicy = std::function<int(double exact)>;

    static ToleranceMode exact();
    static ToleranceMode round_to_grid(double tau);
    /// Default policy: always +tau. The policy may be stateful.
    static ToleranceMode adversarial_sign(double tau, SignPolicy policy = nullptr);
    static ToleranceMode sampling(int num_samples, double tau);

    double tolerance() const { return tau_; }
    bool is_exact() const { return kind_ == Kind::Exact; }
    bool is_sampling() const { return kind_ == Kind::Sampling; }
    int sample_count() const { return num_samples_; }

    /// 2 exp(-2 m tau^2), the Hoeffding bound declared by Sampling mode.
    double declared_failure_probability() const;

    /// Degrades an exact value (not valid for Sampling mode).
    double apply(double exact) const;

  private:
    enum class Kind { Exact, RoundToGrid, AdversarialSign, Sampling };
    Kind kind_ = Kind::Exact;
    double tau_ = 0.0;
    int num_samples_ = 0;
    mutable SignPolicy policy_;
};

/// A test function phi: {0,1}^n -> [0,1]. Values are range-checked on use.
/// Common shapes carry a tag so Exact-mode oracles can take closed-form paths.
class TestFunction {
  public:
    enum class Tag { Generic, One, HalfPlusHalfChi };

    TestFunction() = default;
    static TestFunction one();
    /// (chi_S + 1)/2, the [0,1] rescale of a parity.
    static TestFunction half_plus_half_chi(std::uint32_t s);
    static TestFunction from_fn(std::function<double(std::uint32_t)> fn);
    static TestFunction from_dense(std::vector<double> values);
    /// phi = h as a 0/1 function.
    static TestFunction from_bool(const BooleanFunction& h);
    /// phi(x) = x_i.
    static TestFunction coordinate(int i);

    double operator()(std::uint32_t x) const;
    Tag tag() const { return tag_; }
    std::uint32_t chi_mask() const { return chi_mask_; }

  private:
    std::function<double(std::uint32_t)> fn_;
    Tag tag_ = Tag::One;
    std::uint32_t chi_mask_ = 0;
};

/// One of the five MQ-SQ query types.
///
///   I:   E_{x~D*}[phi(x) f(x)]
///   II:  E_{x~D*}[phi(x) f(x) f(pi(x))]
///   III: E_{x~D}[phi(x)]
///   IV:  E_{x~D}[phi(x) f(x)]
///   V:   E_{x~D}[phi(x) f(x) f(pi(x))]
///
/// D* is chosen by the learner; D is the unknown marginal. pi must be
/// fixed-point-free.
struct MqsqQuery {
    enum class Type { I, II, III, IV, V };

    Type type;
    TestFunction phi;
    std::optional<Distribution> dstar;
    std::optional<Permutation> pi;

    static MqsqQuery type1(TestFunction phi, Distribution dstar);
    static MqsqQuery type2(TestFunction phi, Distribution dstar, Permutation pi);
    static MqsqQuery type3(TestFunction phi);
    static MqsqQuery type4(TestFunction phi);
    static MqsqQuery type5(TestFunction phi, Permutation pi);

    bool is_customized() const { return type == Type::I || type == Type::II; }
};

/// I.i.d. labeled-example stream with sample accounting.
class ExampleOracle {
  public:
    ExampleOracle(LabeledDistribution source, Rng rng,
                  QueryBudget budget = QueryBudget::unlimited())
        : source_(std::move(source)), rng_(std::move(rng)), budget_(budget) {}

    Example draw();
    std::vector<Example> draw(std::size_t m);
    std::uint64_t samples_drawn() const { return drawn_; }
    const LabeledDistribution& source() const { return source_; }
    Rng& rng() { return rng_; }

  private:
    LabeledDistribution source_;
    Rng rng_;
    QueryBudget budget_;
    std::uint64_t drawn_ = 0;
};

/// Membership-query access to a target function, with a query counter and an
/// ordered query log (capped; count-only afterwards).
class MembershipOracle {
  public:
    static constexpr std::size_t kLogCap = 1'000'000;

    explicit MembershipOracle(BooleanFunction target,
                              QueryBudget budget = QueryBudget::unlimited());
    /// Raw-callback target, used when the reduction answers queries itself.
    MembershipOracle(int n, std::function<bool(std::uint32_t)> target,
                     QueryBudget budget = QueryBudget::unlimited());

    bool query(const BitVector& x);
    bool query_raw(std::uint32_t x);

    int dim() const { return n_; }
    std::uint64_t queries_made() const { return count_; }
    const std::vector<std::uint32_t>& log() const { return log_; }
    void write_log_jsonl(std::ostream& os) const;

  private:
    int n_;
    std::function<bool(std::uint32_t)> target_;
    QueryBudget budget_;
    std::uint64_t count_ = 0;
    std::vector<std::uint32_t> log_;
};

/// Answers MQ-SQ queries. Concrete implementations: the real oracle backed by
/// (f, D), and the reduction's simulated oracle backed by a refutation SQ
/// oracle. Tracks query counts and the largest ||D*||_2^2 seen.
class MqsqOracleBase {
  public:
    virtual ~MqsqOracleBase() = default;

    double answer(const MqsqQuery& q);

    std::uint64_t queries_made() const { return count_; }
    double max_dstar_l2_sq() const { return max_dstar_l2_sq_; }
    int dim() const { return n_; }

  protected:
    explicit MqsqOracleBase(int n) : n_(n) {}
    virtual double answer_impl(const MqsqQuery& q) = 0;
    virtual void check_budget() {}

    int n_;
    std::uint64_t count_ = 0;
    double max_dstar_l2_sq_ = 0.0;
};

/// The real MQ-SQ oracle for a target f and marginal D, degraded by `mode`.
/// Exact values are full-support sums; over a uniform D* the oracle keeps
/// spectrum and autocorrelation caches so repeated Type I/II queries with
/// tagged phi cost O(1).
class MqsqOracle : public MqsqOracleBase {
  public:
    MqsqOracle(BooleanFunction f, Distribution marginal, ToleranceMode mode, Rng rng,
               QueryBudget budget = QueryBudget::unlimited());

    /// Brute-force expectation, no caches, no mode; public so tests can
    /// compare the served answers against an independent summation.
    double exact_value(const MqsqQuery& q) const;

    const BooleanFunction& target() const { return f_; }

  protected:
    double answer_impl(const MqsqQuery& q) override;
    void check_budget() override;

  private:
    double fast_exact(const MqsqQuery& q);
    double sampled_estimate(const MqsqQuery& q);
    void build_caches();

    BooleanFunction f_;
    Distribution marginal_;
    ToleranceMode mode_;
    Rng rng_;
    QueryBudget budget_;

    bool caches_built_ = false;
    double f_mean_uniform_ = 0.0;
    std::vector<double> wht01_;     // unnormalized WHT of the 0/1 table
    std::vector<double> autocorr_;  // E_U[f(x) f(x xor d)] indexed by d
};

/// A test function on X x {0,1}, stored as its two label slices.
struct PairTestFunction {
    TestFunction phi0;  // phi(., 0)
    TestFunction phi1;  // phi(., 1)

    static PairTestFunction label_only();                      // phi(x,y) = y
    static PairTestFunction of_x(TestFunction phi);            // phi(x,y) = phi(x)
    static PairTestFunction x_times_label(TestFunction phi);   // phi(x,y) = phi(x) y
    static PairTestFunction from_slices(TestFunction phi0, TestFunction phi1);

    double operator()(std::uint32_t x, bool y) const { return y ? phi1(x) : phi0(x); }
};

/// Answers E_{(x,y)~Dref}[phi(x,y)] within its tolerance.
class RefutationSqOracleBase {
  public:
    virtual ~RefutationSqOracleBase() = default;
    double answer(const PairTestFunction& phi);
    std::uint64_t queries_made() const { return count_; }

  protected:
    virtual double answer_impl(const PairTestFunction& phi) = 0;
    std::uint64_t count_ = 0;
};

class RefutationSqOracle : public RefutationSqOracleBase {
  public:
    RefutationSqOracle(LabeledDistribution dref, ToleranceMode mode, Rng rng,
                       QueryBudget budget = QueryBudget::unlimited());

    double exact_value(const PairTestFunction& phi) const;
    const LabeledDistribution& source() const { return dref_; }

  protected:
    double answer_impl(const PairTestFunction& phi) override;

  private:
    LabeledDistribution dref_;
    ToleranceMode mode_;
    Rng rng_;
    QueryBudget budget_;
};

/// SQ oracle for weak learning: answers E_{x~D}[phi(x) f*(x)] within tau'.
class WeakSqOracle {
  public:
    WeakSqOracle(BooleanFunction target, Distribution d, ToleranceMode mode, Rng rng);

    double answer(const TestFunction& phi);
    double exact_value(const TestFunction& phi) const;
    std::uint64_t queries_made() const { return count_; }
    const Distribution& distribution() const { return d_; }
    const BooleanFunction& target() const { return f_; }

  private:
    BooleanFunction f_;
    Distribution d_;
    ToleranceMode mode_;
    Rng rng_;
    std::uint64_t count_ = 0;
};

}  // namespace sqlab
