#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlab/learners.hpp"
#include "sqlab/oracles.hpp"

namespace sqlab {

enum class Verdict { Noise, Structure, Error };

enum class ErrorReason { None, InsufficientSamples, DuplicateInTest, TestQueryOverlap };

std::string to_string(Verdict v);
std::string to_string(ErrorReason r);

// ---------------------------------------------------------------------------
// Filtered sample distribution

/// The marginal induced by rejection-filtering refutation examples to points
/// where the p-biased function f agrees with the label:
///   D(x) = D_x(x) (p (1-y(x)) (1-f(x)) + (1-p) y(x) f(x)) / Z.
/// Returns (D, Z); throws QueryError when Z = 0 (f disagrees with every label
/// on the support).
std::pair<Distribution, double> filtered_distribution(const LabeledDistribution& dref,
                                                      const BooleanFunction& f);

// ---------------------------------------------------------------------------
// Algorithm: refutation from a testable learner with queries

/// Parameters and sample-size arithmetic for the refutation reduction.
///
/// The validity predicate mirrors the reduction theorem's hypotheses. The
/// first (eta) inequality is always enforced; the asymptotic regime checks
/// (eps^2 >= c k sup||D_x||_2 and (m + q/eps^2) * ratio <= 1/sup||D_x||_2)
/// are enforced in strict mode and reported as regime warnings otherwise,
/// since no desk-scale dimension satisfies them with the default constants.
struct RefutationParams {
    int n = 0;
    double eta = 0.0;
    double eps = 0.05;
    double c = 1.0;
    std::size_t learner_m = 0;
    std::size_t learner_q = 0;

    double C1 = 50.0;  // p-hat sample constant
    double C2 = 8.0;   // reserved Bernoulli-pool constant
    double C3 = 50.0;  // test-set constant
    double feed_factor = 1.5;
    double k_const = 10.0;
    double much_less_ratio = 100.0;

    double alpha() const { return c * eta + 4.0 * eps; }
    double noise_threshold() const { return c * eta + 3.0 * eps; }

    std::size_t phat_count() const;
    std::size_t pool_count() const;
    std::size_t test_count() const;
    std::size_t feed_count() const;
    /// Total samples Algorithm BiasedRefutation consumes.
    std::size_t m_prime() const;

    /// Throws ConfigError naming the violated predicate. Returns the list of
    /// regime warnings (empty in strict mode, which throws instead).
    std::vector<std::string> validate(double sup_dx_l2, bool strict) const;

    static RefutationParams for_learner(int n, const TlqLearner& learner, double eta);
};

struct RefutationRecord {
    Verdict verdict = Verdict::Error;
    ErrorReason reason = ErrorReason::None;
    double p_hat = 0.0;
    bool phat_exit = false;
    bool learner_rejected = false;
    double test_err = -1.0;
    std::size_t accepted = 0;
    std::size_t pool_used = 0;
    std::size_t mq_count = 0;
    std::size_t samples_consumed = 0;

    nlohmann::json to_json() const;
};

/// BiasedRefutation: estimates the label bias, lazily realizes a p-biased
/// function from a reserved label pool, filters the stream to agreement
/// points, runs the testable learner on the filtered sample with membership
/// queries served from the realized table, and compares the held-out test
/// error against c eta + 3 eps.
RefutationRecord biased_refutation(std::span<const Example> examples,
                                   const RefutationParams& params, TlqLearner& learner, Rng& rng);

/// Convenience: draws m' examples from the oracle and runs the algorithm.
RefutationRecord run_refutation(ExampleOracle& oracle, const RefutationParams& params,
                                TlqLearner& learner, Rng& rng);

// ---------------------------------------------------------------------------
// Parameter accounting: TL-Q to agnostic learning

struct AgnosticParamsReport {
    double m_prime = 0.0;
    double sample_bound = 0.0;
    double time_bound = 0.0;
    double excess_error = 0.0;
    bool vacuous = false;
    std::vector<std::string> regime_warnings;
    nlohmann::json to_json() const;
};

/// Pure arithmetic on the reduction chain's bounds (the learning-by-refutation
/// inner loop is cited, not executed): m' = (m + 1/eps^2)/eps + q,
/// samples = m'^3/eps^2, time = m'^2 (m' + t)/eps^2,
/// excess = 1 - 1/c + 8 eps/c + eps, flagged vacuous when >= 1.
AgnosticParamsReport tlq_to_agnostic_params(const TlqContract& contract, double time_t,
                                            double sup_dx_l2, double k_const, double ratio,
                                            bool strict);

// ---------------------------------------------------------------------------
// Junta pipeline: refuter -> feature selection -> decision tree

using RefuterFn = std::function<RefutationRecord(std::span<const Example>, Rng&)>;
/// Draws one labeled pair (x, y = f(x)) with x uniform over the free cube.
using PairSampler = std::function<Example(Rng&)>;

struct FeatureSelectOptions {
    int k = 2;
    double delta = 0.05;
    std::size_t samples_per_run = 0;     // examples fed to the refuter per run
    std::size_t runs_per_estimate = 0;   // 0 -> ceil(ln(2(n+1)/delta) / (2 acc^2))
    double accuracy = 0.0;               // 0 -> 1/(6k)
    double gap_threshold = 0.0;          // 0 -> 1/(3k) - accuracy
    int threads = 1;
};

/// Estimates Pr[refuter says structure on f^{>l}] for every prefix length and
/// returns the smallest coordinate whose consecutive estimates drop by the
/// gap threshold. Throws ContractViolation when no gap qualifies.
int feature_select(const RefuterFn& refuter, const PairSampler& sampler, int n,
                   const FeatureSelectOptions& opt, Rng& rng);

struct JuntaPipelineOptions {
    int k = 2;
    double eps = 0.025;
    double delta = 0.1;
    std::size_t mean_check_samples = 0;  // 0 -> from (eps, delta, k)
    std::size_t starvation_factor = 64;
    FeatureSelectOptions select;
};

/// Per-dimension refuter factory: the tree learner calls refuters on
/// projected restrictions of shrinking dimension.
struct RefuterFactory {
    std::function<RefuterFn(int dim)> make;
    std::function<std::size_t(int dim)> samples_per_run;
};

/// Grows a decision tree for a k-junta target from a (4 eps, 0)-refuter:
/// nodes whose restricted function is not 4 eps-close to constant are split
/// on a feature chosen by feature_select over the restriction-conditioned,
/// projected sample stream; leaves take the majority label. Depth beyond k
/// throws ContractViolation.
Hypothesis learn_junta_via_refutation(const RefuterFactory& factory, const PairSampler& sampler,
                                      int n, const JuntaPipelineOptions& opt, Rng& rng);

// ---------------------------------------------------------------------------
// MQ-SQ testable learning -> SQ refutation

/// SQ refutation algorithm: consumes only refutation SQ queries.
class SqRefuter {
  public:
    struct Declared {
        std::size_t queries = 0;
        double tau = 0.0;
        double alpha = 0.25;
        double eta = 0.0;
    };

    virtual ~SqRefuter() = default;
    virtual Declared declared() const = 0;
    virtual Verdict run(RefutationSqOracleBase& oracle, Rng& rng) = 0;
};

struct MqsqToSqParams {
    double alpha = 0.4;
    double eta = 0.0;
    double B = 0.0;               // concentration budget
    double sup_dx_l2_sq = 0.0;    // sup over the family of ||D_x||_2^2
    /// Worst-case label bias magnitude used in the p^2(1-p)^2 condition.
    double p_min = 0.0;           // 0 -> alpha
};

/// Builds the SQ refuter that simulates an MQ-SQ testable learner: Type I/II
/// queries are answered p-hat E[phi] / p-hat^2 E[phi] in closed form, Types
/// III/IV/V forward one SQ each, bottom maps to structure, and a returned
/// hypothesis is scored by the three closing queries against
/// min(p-hat, 1-p-hat) - 5 tau'. Construction checks the reduction's three
/// parameter conditions against the learner's declared contract.
class MqsqToSqRefuter final : public SqRefuter {
  public:
    MqsqToSqRefuter(std::shared_ptr<MqsqLearner> learner, MqsqToSqParams params);

    Declared declared() const override;
    Verdict run(RefutationSqOracleBase& oracle, Rng& rng) override;

    std::size_t last_sq_count() const { return last_sq_count_; }
    double tau_prime() const;

  private:
    std::shared_ptr<MqsqLearner> learner_;
    MqsqToSqParams params_;
    std::size_t last_sq_count_ = 0;
};

// ---------------------------------------------------------------------------
// SQ refutation -> SQ weak learning

struct WeakLearnParams {
    double eps = 0.0;        // target advantage
    double tau_prime = 0.0;  // weak-learning oracle tolerance
    int amplification_rounds = 8;
    int max_rounding_attempts = 0;  // 0 -> ceil(16 / tau)

    /// Checks alpha <= 1/2 - (eps + 2 tau') and tau >= 4 eps + 22 tau'.
    void validate(double alpha, double tau) const;
};

struct WeakLearnResult {
    Hypothesis hypothesis;
    struct LowCorrAnswer {
        PairTestFunction phi;
        double answer;
    };
    std::vector<LowCorrAnswer> low_corr_log;
    std::size_t sq_count = 0;
    bool constant_shortcut = false;
    int rounds_used = 0;
};

/// Simulates the refuter against the weak-learning SQ oracle. Low-correlation
/// queries are answered E[phi(x,0) + p-hat Delta(x)] (with D known and
/// evaluable); the first high-correlation query aborts the simulation and is
/// rounded into a classifier, retrying until the estimated error clears
/// 1/2 - eps - 3 tau'. A refuter that finishes all queries low-correlated has
/// run a noise-indistinguishable transcript: structure is a contract
/// violation, noise triggers another amplification round.
WeakLearnResult sq_refuter_to_weak_learner(SqRefuter& refuter, WeakSqOracle& oracle,
                                           const WeakLearnParams& params, Rng& rng);

/// Independent per-point Bernoulli realization of phi, complemented when
/// `complement` is set.
BooleanFunction round_classifier(const TestFunction& phi, int n, bool complement, Rng& rng);

/// SQ refuter for dictators that sweeps the label-coordinate agreement rates
/// E[1{x_i = y}]; any rate far from 1/2 is structure.
class CoordinateCorrelationRefuter final : public SqRefuter {
  public:
    CoordinateCorrelationRefuter(int n, double tau, double alpha, double margin = 0.0);
    Declared declared() const override;
    Verdict run(RefutationSqOracleBase& oracle, Rng& rng) override;

  private:
    int n_;
    double tau_;
    double alpha_;
    double margin_;
};

}  // namespace sqlab
