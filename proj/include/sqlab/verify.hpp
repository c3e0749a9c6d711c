#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "sqlab/concept_class.hpp"
#include "sqlab/oracles.hpp"
#include "sqlab/permutation.hpp"
#include "sqlab/reductions.hpp"

namespace sqlab {

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Wilson score interval for a binomial proportion (default z for 95%).
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959964);

/// Seeded Monte-Carlo estimate of verdict probabilities.
struct TrialReport {
    std::string suite;
    std::uint64_t master_seed = 0;
    std::size_t trials = 0;
    std::map<std::string, std::size_t> outcomes;
    std::string point_key;
    double point_estimate = 0.0;
    WilsonInterval interval;

    nlohmann::json to_json() const;
};

/// Runs `trials` independent seeded trials and reports the frequency and
/// Wilson interval of `point_key` among the labels `run` returns. Trial i
/// uses Rng::derive(seed, tag(suite), i), so aggregation is order-free and
/// thread-count-independent.
TrialReport estimate_verdict_prob(const std::function<std::string(std::size_t, Rng&)>& run,
                                  std::size_t trials, std::uint64_t seed, const std::string& suite,
                                  const std::string& point_key, int threads = 1);

// ---------------------------------------------------------------------------
// Concentration suites

struct ConcentrationReport {
    std::string suite;
    nlohmann::json regime;
    std::size_t trials = 0;
    std::size_t violations = 0;
    /// The nominal tail expression with its unknown constant slot.
    std::string bound_expr;

    double violation_rate() const {
        return trials == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(trials);
    }
    nlohmann::json to_json() const;
};

/// |Z - p(1-p)| <= delta_rel * p(1-p) over random p-biased f against dref.
ConcentrationReport check_z_concentration(const LabeledDistribution& dref, double p,
                                          double delta_rel, std::size_t trials,
                                          std::uint64_t seed, int threads = 1);

/// Pr_D[g != f] <= Pr_Dref[g != y] + delta over random (f, g) pairs, where D
/// is the filtered distribution of (dref, f).
ConcentrationReport check_error_blowup(const LabeledDistribution& dref, double p, double delta,
                                       std::size_t trials, std::uint64_t seed, int threads = 1);

/// Type I/II deviations from p E[phi] and p^2 E[phi] over random p-biased f.
/// Also rebuilds and verifies the three-coloring of pi's cycle decomposition
/// (no vertex twice within a color class); a bad coloring throws.
ConcentrationReport check_type12(const Distribution& dstar, double p, const Permutation& pi,
                                 const TestFunction& phi, std::size_t trials, double eps,
                                 std::uint64_t seed, int threads = 1);

/// Type III/IV/V deviations against their refutation-side targets, with the
/// filtered distribution recomputed from (dref, f) per trial.
ConcentrationReport check_type345(const LabeledDistribution& dref, const TestFunction& phi,
                                  const Permutation& pi, std::size_t trials, double eps,
                                  std::uint64_t seed, int threads = 1);

/// Edge coloring of the permutation graph {x -> pi(x)} into at most three
/// classes with no repeated vertex inside a class. Exposed for the type-12
/// suite's structural check.
std::vector<int> three_color_permutation(const Permutation& pi);

// ---------------------------------------------------------------------------
// SQ dimension

enum class SqDimMode { Exact, Greedy };

struct SqDimResult {
    std::size_t value = 0;
    bool exact = true;  // greedy results are lower bounds only
};

/// Largest d with d members whose pairwise distances all lie in
/// [(1 - 1/d^3)/2, (1 + 1/d^3)/2]. Exact mode (|C| <= 24) searches cliques of
/// the band graph for candidate d descending; greedy grows cliques instead
/// and labels its answer a lower bound.
SqDimResult sq_dimension(const ConceptClass& cls, const Distribution& d, SqDimMode mode);

/// Independent O(2^|C|) oracle: enumerate every subset and test the band
/// condition directly. |C| <= 20.
std::size_t sq_dimension_bruteforce(const ConceptClass& cls, const Distribution& d);

// ---------------------------------------------------------------------------
// MQ-SQ lower-bound compatibility

struct LowerBoundReport {
    std::size_t d = 0;
    double q_threshold = 0.0;
    double tau_threshold = 0.0;
    double norm_threshold = 0.0;
    bool q_small = false;
    bool tau_large = false;
    bool marginal_norm_small = false;
    bool dstar_norm_small = false;
    bool inside_forbidden = false;

    nlohmann::json to_json() const;
};

/// One admissible instantiation of the SQ-dimension lower bound's asymptotic
/// preconditions (exponent 1/3, factor 10): a declared learner with
/// q <= 10 d^{1/3}, tau >= d^{-1/3}/10, and both norms <= d^{-1/3}/10 sits in
/// the forbidden region. d = 1 is trivially compatible.
LowerBoundReport lower_bound_check(std::size_t q, double tau, double max_dstar_l2_sq,
                                   double marginal_l2_sq, std::size_t d);

}  // namespace sqlab
