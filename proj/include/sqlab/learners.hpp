#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlab/concept_class.hpp"
#include "sqlab/oracles.hpp"

namespace sqlab {

/// A learner's output: a concrete function, or reject (bottom).
struct Hypothesis {
    std::optional<BooleanFunction> fn;
    std::string learner;
    std::uint64_t mq_used = 0;
    std::uint64_t sq_used = 0;
    std::uint64_t samples_used = 0;

    bool rejected() const { return !fn.has_value(); }
    static Hypothesis reject(std::string learner_name);
    static Hypothesis of(BooleanFunction f, std::string learner_name);
};

/// Declared contract of a testable learner with queries.
struct TlqContract {
    double c = 1.0;
    double eps = 0.1;
    double delta = 0.1;
    std::size_t samples = 0;  // m
    std::size_t queries = 0;  // q
};

/// Testable learner with queries: unlabeled samples from the unknown marginal
/// plus membership access to the unknown target. Must stay within its
/// declared sample and query budget.
class TlqLearner {
  public:
    virtual ~TlqLearner() = default;
    virtual TlqContract contract() const = 0;
    virtual Hypothesis run(std::span<const std::uint32_t> samples, MembershipOracle& mq,
                           Rng& rng) = 0;
};

/// Declared contract of an MQ-SQ learner.
struct MqsqContract {
    double c = 1.0;
    double eps = 0.1;
    double delta = 0.1;
    std::size_t queries = 0;
    double tau = 0.0;
    double max_dstar_l2_sq = 0.0;  // bound over all Type I/II queries it makes
};

/// Learner that touches the instance only through the five MQ-SQ query types.
class MqsqLearner {
  public:
    virtual ~MqsqLearner() = default;
    virtual int dim() const = 0;
    virtual MqsqContract contract() const = 0;
    virtual Hypothesis run(MqsqOracleBase& oracle, Rng& rng) = 0;
};

// ---------------------------------------------------------------------------
// MQ-SQ implementations of query-based learning primitives.

/// Influence of coordinate i, optionally within a restriction, from one
/// Type I and one Type II query over the subcube-uniform D*:
/// 2 E[f] - 2 E[f(x) f(x xor e_i)]. Off from the truth by at most 4 tau.
double influence_mqsq(MqsqOracleBase& oracle, int i,
                      const std::optional<Restriction>& r = std::nullopt);

struct JuntaLearnOptions {
    int k = 2;
    /// Keep threshold for estimated influences.
    double influence_threshold = 0.0;  // 0 -> 2^-k
};

/// Learns a k-junta: influence scan to find the relevant set, then one
/// subcube-mean Type I query per assignment, rounded to the nearer bit.
/// Throws ContractViolation when more than k coordinates pass the threshold.
Hypothesis learn_junta_mqsq(MqsqOracleBase& oracle, const JuntaLearnOptions& opt);

/// Fourier coefficient of the +-1 version of f at S, from two Type I queries
/// with phi = (chi_S+1)/2 and phi = 1.
double km_coeff_mqsq(MqsqOracleBase& oracle, std::uint32_t s);

/// Estimate of the bucket weight sum_{U subseteq ~J} f_hat(S u U)^2 for the
/// +-1 version of f, S subseteq J: averages chi_S(delta) E[f(x)f(x xor delta)]
/// over delta drawn uniformly from the J-subcube, converting pair expectations
/// to the +-1 convention with Type I means. delta = 0 contributes exactly 1.
double km_weight_mqsq(MqsqOracleBase& oracle, std::uint32_t s, std::uint32_t j, int num_samples,
                      Rng& rng);

struct KmOptions {
    int sparsity = 4;
    double eps = 0.1;
    /// Keep-bucket threshold; 0 -> eps^2 / (4 s).
    double bucket_threshold = 0.0;
    /// delta samples per weight estimate; 0 -> ceil(32 ln(40 n s / eps) / theta^2), capped at 1e5.
    int weight_samples = 0;
    std::size_t max_live_buckets = 0;  // 0 -> 4 s / eps^2
};

/// Kushilevitz-Mansour sparse-spectrum learner on the uniform distribution.
Hypothesis km_learn(MqsqOracleBase& oracle, const KmOptions& opt, Rng& rng);

/// Empirical-risk minimizer over an enumerable class; ties broken by
/// enumeration order.
Hypothesis erm_agnostic(std::span<const Example> samples, const ConceptClass& cls);

// ---------------------------------------------------------------------------
// Reference TL-Q learner (trusted family = {uniform}).

struct ReferenceTlqOptions {
    double eps = 0.1;
    double c = 1.0;
    double delta = 0.1;
    std::size_t sample_need = 40;     // declared m (tester sees all of them)
    std::size_t train_count = 14;     // labeled via MQ, fed to ERM
    std::size_t estimate_count = 6;   // labeled via MQ, error estimate split
    std::size_t fresh_queries = 8;    // self-generated uniform validation MQs
    double tester_delta = 0.04;       // tester failure budget under uniform
    double validation_delta = 0.05;
};

/// Phase 1 tests the marginal against uniform (first moments, pairwise
/// moments, birthday collisions, with Hoeffding slack on top of the eps/4
/// tolerance); phase 2 labels a split via MQ, runs ERM, and cross-checks the
/// winner at fresh self-generated uniform points. The tester is a pragmatic
/// uniformity proxy: its contract is validated empirically on the instance
/// families the reduction suites use, not proved sound for all alternatives.
class ReferenceTlqLearner final : public TlqLearner {
  public:
    ReferenceTlqLearner(std::shared_ptr<const ConceptClass> cls, ReferenceTlqOptions opt);

    TlqContract contract() const override;
    Hypothesis run(std::span<const std::uint32_t> samples, MembershipOracle& mq,
                   Rng& rng) override;

  private:
    bool marginal_looks_uniform(std::span<const std::uint32_t> samples) const;

    std::shared_ptr<const ConceptClass> cls_;
    ReferenceTlqOptions opt_;
};

// ---------------------------------------------------------------------------
// MQ-SQ testable junta learner (trusted family = {uniform}).

struct MqsqJuntaTestableOptions {
    int n = 12;
    int k = 2;
    double tau = 0.04;
    double eps = 0.05;
    double c = 1.0;
    double delta = 0.1;
    double moment_threshold = 0.1;       // |E_D[x_i] - 1/2| gate
    double correlation_threshold = 0.08; // level-<=2 label-correlation gate
    double validation_slack = 0.0;       // 0 -> eps + 5 tau
};

/// Testable k-junta learner in the MQ-SQ model. Checks first moments of the
/// unknown marginal (Type III), scans influences over the uniform D*
/// (Types I/II), and either assembles the junta from subcube means and
/// validates it against the marginal, or -- when the influence profile rules
/// out a k-junta -- sweeps level-<=2 label correlations (Types III/IV):
/// a deviation from the product form rejects the marginal, a clean sweep
/// falls back to the constant fit (any hypothesis is competitive when the
/// target is far from every junta). Completeness of the fallback path is
/// validated empirically on random-function instances.
class MqsqJuntaTestableLearner final : public MqsqLearner {
  public:
    explicit MqsqJuntaTestableLearner(MqsqJuntaTestableOptions opt);

    int dim() const override { return opt_.n; }
    MqsqContract contract() const override;
    Hypothesis run(MqsqOracleBase& oracle, Rng& rng) override;

  private:
    MqsqJuntaTestableOptions opt_;
};

}  // namespace sqlab
