#include "sqlab/suites.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "sqlab/fourier.hpp"
#include "sqlab/parallel.hpp"
#include "sqlab/serialize.hpp"
#include "sqlab/verify.hpp"

namespace sqlab {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ToleranceMode alternating_adversary(double tau) {
    return ToleranceMode::adversarial_sign(
        tau, [calls = 0](double) mutable { return (calls++ % 2) ? -1 : 1; });
}

/// Random junta on `k` of `n` coordinates with a nonconstant table.
BooleanFunction plant_junta(int n, int k, Rng& rng, std::uint32_t* support_out) {
    std::uint32_t support = 0;
    while (std::popcount(support) < k) support |= 1u << rng.below(n);
    const std::uint32_t cells = 1u << k;
    std::uint32_t table = 0;
    while (table == 0 || table == low_mask(static_cast<int>(cells)))
        table = rng.bits(static_cast<int>(cells));
    std::vector<int> pos;
    for (int i = 0; i < n; ++i)
        if ((support >> i) & 1u) pos.push_back(i);
    if (support_out) *support_out = support;
    return BooleanFunction::from_bits(n, [&](std::uint32_t x) {
        std::uint32_t cell = 0;
        for (std::size_t j = 0; j < pos.size(); ++j) cell |= ((x >> pos[j]) & 1u) << j;
        return static_cast<bool>((table >> cell) & 1u);
    });
}

// ---------------------------------------------------------------------------
// Calibrated refutation regimes.
//
// The reduction theorem leaves its constants free; these values are the
// desk-scale calibration documented in the README: small test sets keep the
// birthday-collision error exits rare at n = 12, and the Bernoulli pool is
// sized to cover its actual consumption with slack.

struct RefuteRegime {
    double eps = 0.05;
    double eta = 0.0;
    double C1 = 5.0;
    double C2 = 0.1;
    double C3 = 0.045;
    double feed_factor = 1.5;
    ReferenceTlqOptions learner;
};

RefuteRegime parity_regime() {
    RefuteRegime r;
    r.eps = 0.05;
    r.C1 = 5.0;
    r.C2 = 0.1;
    r.C3 = 0.03;
    r.learner.eps = r.eps;
    r.learner.sample_need = 20;
    r.learner.train_count = 12;
    r.learner.estimate_count = 4;
    r.learner.fresh_queries = 6;
    return r;
}

RefuteRegime junta_regime() {
    RefuteRegime r;
    r.eps = 0.025;
    r.C1 = 0.5;
    r.C2 = 0.02;
    r.C3 = 0.00375;
    r.learner.eps = r.eps;
    r.learner.sample_need = 30;
    r.learner.train_count = 24;
    r.learner.estimate_count = 4;
    r.learner.fresh_queries = 4;
    return r;
}

struct RefuteSetup {
    std::shared_ptr<const ConceptClass> cls;
    std::shared_ptr<ReferenceTlqLearner> learner;
    RefutationParams params;
    std::vector<std::string> warnings;
};

RefuteSetup make_refute_setup(std::shared_ptr<const ConceptClass> cls, const RefuteRegime& regime,
                              bool strict) {
    RefuteSetup s;
    s.cls = cls;
    s.learner = std::make_shared<ReferenceTlqLearner>(cls, regime.learner);
    s.params = RefutationParams::for_learner(cls->dim(), *s.learner, regime.eta);
    s.params.C1 = regime.C1;
    s.params.C2 = regime.C2;
    s.params.C3 = regime.C3;
    s.params.feed_factor = regime.feed_factor;
    const double sup_dx_l2 = std::sqrt(std::ldexp(1.0, -cls->dim()));
    s.warnings = s.params.validate(sup_dx_l2, strict);
    return s;
}

RefuterFactory junta_refuter_factory(int k, const RefuteRegime& regime) {
    RefuterFactory factory;
    factory.make = [k, regime](int dim) -> RefuterFn {
        auto cls = std::make_shared<JuntaClass>(dim, std::min(k, dim));
        RefuteSetup setup = make_refute_setup(cls, regime, false);
        return [setup](std::span<const Example> examples, Rng& rng) {
            return biased_refutation(examples, setup.params, *setup.learner, rng);
        };
    };
    factory.samples_per_run = [k, regime](int dim) {
        auto cls = std::make_shared<JuntaClass>(dim, std::min(k, dim));
        return make_refute_setup(cls, regime, false).params.m_prime();
    };
    return factory;
}

// ---------------------------------------------------------------------------
// Criterion 1: Fourier engine round-trip and Parseval.

CriterionResult c01_fourier(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{1, "fourier round-trip and Parseval", false, 0.0, {}};
    std::size_t checked = 0;
    double worst_roundtrip = 0.0;
    double worst_parseval = 0.0;
    std::mutex mu;
    parallel_for(threads, 11, [&](std::size_t ni) {
        const int n = static_cast<int>(ni) + 4;
        double local_rt = 0.0, local_pv = 0.0;
        std::size_t local_checked = 0;
        for (int t = 0; t < 100; ++t) {
            Rng rng = Rng::derive(seed, stream_tag("fourier"), ni * 1000 + t);
            const BooleanFunction f = BooleanFunction::random(n, rng);
            const std::vector<double> table = pm1_table(f);
            const FourierSpectrum spec = walsh_hadamard(table, n);
            const std::vector<double> back = inverse_walsh_hadamard(spec);
            for (std::size_t i = 0; i < table.size(); ++i)
                local_rt = std::max(local_rt, std::abs(back[i] - table[i]));
            local_pv = std::max(local_pv, std::abs(spec.parseval_sum() - 1.0));
            ++local_checked;
        }
        std::lock_guard<std::mutex> lock(mu);
        worst_roundtrip = std::max(worst_roundtrip, local_rt);
        worst_parseval = std::max(worst_parseval, local_pv);
        checked += local_checked;
    });
    res.seconds = elapsed_seconds(start);
    res.pass = worst_roundtrip <= 1e-12 && worst_parseval <= 1e-9 && checked == 1100 &&
               res.seconds < 10.0;
    res.details = {{"functions", checked},
                   {"worst_roundtrip", worst_roundtrip},
                   {"worst_parseval", worst_parseval}};
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 2: influence via MQ-SQ within 4 tau under an adversarial oracle.

CriterionResult c02_influence(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{2, "influence via MQ-SQ within 4 tau", false, 0.0, {}};
    const double tau = 0.01;
    const int n = 10;
    std::size_t violations = 0;
    double worst = 0.0;
    std::mutex mu;
    parallel_for(threads, 500, [&](std::size_t t) {
        Rng rng = Rng::derive(seed, stream_tag("influence"), t);
        const BooleanFunction f = BooleanFunction::random(n, rng);
        std::optional<Restriction> r;
        if (rng.bit()) {
            const int fix = 1 + static_cast<int>(rng.below(4));
            std::uint32_t mask = 0;
            while (std::popcount(mask) < fix) mask |= 1u << rng.below(n);
            r = Restriction{mask, rng.bits(n) & mask};
        }
        int i = static_cast<int>(rng.below(n));
        while (r && r->fixes(i)) i = static_cast<int>(rng.below(n));

        MqsqOracle oracle(f, Distribution::uniform(n), alternating_adversary(tau), rng.split(7));
        const double est = influence_mqsq(oracle, i, r);
        const double exact = r ? influence_exact(f, i, *r) : influence_exact(f, i);
        const double dev = std::abs(est - exact);
        std::lock_guard<std::mutex> lock(mu);
        worst = std::max(worst, dev);
        if (dev > 4.0 * tau + 1e-12) ++violations;
    });
    res.seconds = elapsed_seconds(start);
    res.pass = violations == 0;
    res.details = {{"triples", 500}, {"tau", tau}, {"violations", violations}, {"worst", worst}};
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 3: KM exact recovery of planted sparse targets.

CriterionResult c03_km(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{3, "KM exact recovery of sparse targets", false, 0.0, {}};
    std::size_t recovered = 0;
    std::mutex mu;
    parallel_for(threads, 50, [&](std::size_t t) {
        Rng rng = Rng::derive(seed, stream_tag("km"), t);
        const int n = 8 + 2 * static_cast<int>(rng.below(3));  // 8, 10, or 12
        const int vars = 1 + static_cast<int>(rng.below(3));   // <= 3 vars => <= 8 coefficients
        const BooleanFunction f = plant_junta(n, vars, rng, nullptr);

        // True +-1 sparsity, for the tolerance precondition tau <= eps/(8s).
        const FourierSpectrum spec = walsh_hadamard(pm1_table(f), n);
        int sparsity = 0;
        for (double coeff : spec.coeff)
            if (std::abs(coeff) > 1e-9) ++sparsity;

        MqsqOracle oracle(f, Distribution::uniform(n), ToleranceMode::exact(), rng.split(3));
        KmOptions opt;
        opt.sparsity = sparsity;
        opt.eps = 0.1;
        Rng km_rng = rng.split(4);
        const Hypothesis h = km_learn(oracle, opt, km_rng);
        const double distance = dist(*h.fn, f, Distribution::uniform(n));
        std::lock_guard<std::mutex> lock(mu);
        if (distance == 0.0) ++recovered;
    });
    res.seconds = elapsed_seconds(start);
    res.pass = recovered == 50 && res.seconds < 120.0;
    res.details = {{"targets", 50}, {"recovered", recovered}};
    return res;
}

// ---------------------------------------------------------------------------
// Criteria 4 and 5: BiasedRefutation, structure and noise cases.

TrialReport refute_trial_report(const RefuteSetup& setup, bool structure, double noise_p,
                                std::size_t trials, std::uint64_t seed, const std::string& name,
                                const std::string& key, int threads) {
    return estimate_verdict_prob(
        [&](std::size_t, Rng& rng) {
            LabeledDistribution dref =
                structure ? LabeledDistribution::deterministic(
                                Distribution::uniform(setup.params.n),
                                setup.cls->member(rng.below(setup.cls->size())))
                          : LabeledDistribution::constant_bernoulli(
                                Distribution::uniform(setup.params.n), noise_p);
            ExampleOracle oracle(std::move(dref), rng.split(11));
            return to_string(run_refutation(oracle, setup.params, *setup.learner, rng).verdict);
        },
        trials, seed, name, key, threads);
}

CriterionResult c04_refute_structure(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{4, "refutation completeness on 3-parities", false, 0.0, {}};
    const RefuteSetup setup =
        make_refute_setup(std::make_shared<ParityClass>(12, 3, false), parity_regime(), false);
    const TrialReport rep =
        refute_trial_report(setup, true, 0.0, 400, seed, "refute_structure", "structure", threads);
    res.seconds = elapsed_seconds(start);
    res.pass = rep.interval.lo >= 0.66 && res.seconds < 300.0;
    res.details = rep.to_json();
    res.details["regime_warnings"] = setup.warnings;
    return res;
}

CriterionResult c05_refute_noise(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{5, "refutation soundness at p in {0.5, 0.3, 0.7}", false, 0.0, {}};
    const RefuteSetup setup =
        make_refute_setup(std::make_shared<ParityClass>(12, 3, false), parity_regime(), false);
    res.details = json::array();
    bool all_ok = true;
    for (double p : {0.5, 0.3, 0.7}) {
        const TrialReport rep = refute_trial_report(
            setup, false, p, 400, seed + static_cast<std::uint64_t>(p * 100), "refute_noise",
            "noise", threads);
        all_ok = all_ok && rep.interval.lo >= 0.66;
        json entry = rep.to_json();
        entry["p"] = p;
        res.details.push_back(entry);
    }
    res.seconds = elapsed_seconds(start);
    res.pass = all_ok && res.seconds < 300.0;
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 6: filtered-distribution identities.

CriterionResult c06_filtered(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{6, "filtered distribution noise identity and E[Z]", false, 0.0, {}};
    Rng rng = Rng::derive(seed, stream_tag("filtered"), 0);

    // Noise case: D = D_x pointwise for 20 (D_x, p) pairs.
    std::vector<Distribution> marginals;
    marginals.push_back(Distribution::uniform(8));
    marginals.push_back(Distribution::subcube(8, Restriction{0b101u, 0b001u}));
    {
        std::vector<double> w(std::size_t{1} << 6);
        double total = 0.0;
        for (double& v : w) total += (v = rng.real() + 0.05);
        for (double& v : w) v /= total;
        marginals.push_back(Distribution::explicit_pmf(6, std::move(w)));
    }
    marginals.push_back(Distribution::uniform(10));

    double worst_pointwise = 0.0;
    for (const Distribution& dx : marginals) {
        for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const LabeledDistribution dref = LabeledDistribution::constant_bernoulli(dx, p);
            const BooleanFunction f = BooleanFunction::random_biased(dx.dim(), p, rng);
            const auto [d, z] = filtered_distribution(dref, f);
            (void)z;
            dx.for_each_support([&](std::uint32_t x, double px) {
                worst_pointwise = std::max(worst_pointwise, std::abs(d.pmf(x) - px));
            });
        }
    }

    // E[Z] = p(1-p) over the randomness of f, deterministic labels, n = 12.
    const int n = 12;
    const BooleanFunction g = plant_junta(n, 3, rng, nullptr);
    const LabeledDistribution dref =
        LabeledDistribution::deterministic(Distribution::uniform(n), g);
    const double p = dref.positive_rate();
    double z_sum = 0.0;
    std::mutex mu;
    parallel_for(threads, 10000, [&](std::size_t t) {
        Rng trial_rng = Rng::derive(seed, stream_tag("filtered_z"), t);
        const BooleanFunction f = BooleanFunction::random_biased(n, p, trial_rng);
        const double z = dref.marginal().expect([&](std::uint32_t x) {
            const double y = dref.label_mean(x);
            const double fx = f(x) ? 1.0 : 0.0;
            return (1.0 - p) * y * fx + p * (1.0 - y) * (1.0 - fx);
        });
        std::lock_guard<std::mutex> lock(mu);
        z_sum += z;
    });
    const double z_mean = z_sum / 10000.0;
    const double z_dev = std::abs(z_mean - p * (1.0 - p));

    res.seconds = elapsed_seconds(start);
    res.pass = worst_pointwise <= 1e-12 && z_dev <= 0.01;
    res.details = {{"pairs", 20},
                   {"worst_pointwise", worst_pointwise},
                   {"z_mean", z_mean},
                   {"z_target", p * (1.0 - p)},
                   {"z_dev", z_dev}};
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 7: concentration suites.

CriterionResult c07_concentration(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{7, "concentration suites (Z, blowup, type12, type345)", false, 0.0, {}};
    const int n = 14;
    const double p = 0.5;
    const std::size_t trials = 1000;
    Rng rng = Rng::derive(seed, stream_tag("concentration_setup"), 0);

    const LabeledDistribution dref = LabeledDistribution::deterministic(
        Distribution::uniform(n), BooleanFunction::parity(n, 1u));

    // |Z - p(1-p)| <= 0.05 is delta_rel = 0.2 of p(1-p) at p = 1/2.
    const ConcentrationReport z_rep =
        check_z_concentration(dref, p, 0.2, trials, seed + 1, threads);
    const ConcentrationReport blow_rep =
        check_error_blowup(dref, p, 0.05, trials, seed + 2, threads);

    std::vector<double> phi_table(std::size_t{1} << n);
    for (double& v : phi_table) v = rng.real();
    const TestFunction phi = TestFunction::from_dense(std::move(phi_table));
    const Permutation pi_explicit = Permutation::random_fixed_point_free(n, rng);
    const ConcentrationReport t12_rep = check_type12(Distribution::uniform(n), p, pi_explicit,
                                                     phi, trials, 0.05, seed + 3, threads);
    const Permutation pi_xor = Permutation::xor_shift(n, 1u | (1u << 5));
    const ConcentrationReport t345_rep =
        check_type345(dref, phi, pi_xor, trials, 0.05, seed + 4, threads);

    res.seconds = elapsed_seconds(start);
    const double cap = 0.02;
    res.pass = z_rep.violation_rate() <= cap && blow_rep.violation_rate() <= cap &&
               t12_rep.violation_rate() <= cap && t345_rep.violation_rate() <= cap;
    res.details = json::array(
        {z_rep.to_json(), blow_rep.to_json(), t12_rep.to_json(), t345_rep.to_json()});
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 8: junta pipeline end to end.

CriterionResult c08_junta_pipeline(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{8, "junta pipeline: feature selection and tree learning", false, 0.0, {}};
    const int n = 10;
    const int k = 3;
    const RefuteRegime regime = junta_regime();
    const RefuterFactory factory = junta_refuter_factory(k, regime);
    const RefuterFn root_refuter = factory.make(n);
    const std::size_t samples_per_run = factory.samples_per_run(n);

    // Part A: feature_select returns a relevant coordinate.
    std::size_t relevant_hits = 0;
    std::mutex mu;
    parallel_for(threads, 100, [&](std::size_t t) {
        Rng rng = Rng::derive(seed, stream_tag("feature_select"), t);
        std::uint32_t support = 0;
        const int kk = 1 + static_cast<int>(rng.below(k));
        const BooleanFunction f = plant_junta(n, kk, rng, &support);
        const PairSampler sampler = [f, n](Rng& r) {
            const std::uint32_t x = r.bits(n);
            return Example{x, f(x)};
        };
        FeatureSelectOptions fs;
        fs.k = k;
        fs.delta = 0.05;
        fs.samples_per_run = samples_per_run;
        fs.runs_per_estimate = 1600;
        try {
            const int picked = feature_select(root_refuter, sampler, n, fs, rng);
            if ((support >> picked) & 1u) {
                std::lock_guard<std::mutex> lock(mu);
                ++relevant_hits;
            }
        } catch (const ContractViolation&) {
        }
    });

    // Part B: end-to-end decision-tree learning, exact recovery.
    std::size_t exact_trees = 0;
    parallel_for(threads, 50, [&](std::size_t t) {
        Rng rng = Rng::derive(seed, stream_tag("junta_tree"), t);
        const int kk = 1 + static_cast<int>(rng.below(k));
        const BooleanFunction f = plant_junta(n, kk, rng, nullptr);
        const PairSampler sampler = [f, n](Rng& r) {
            const std::uint32_t x = r.bits(n);
            return Example{x, f(x)};
        };
        JuntaPipelineOptions opt;
        opt.k = k;
        opt.eps = regime.eps;
        opt.delta = 0.1;
        try {
            const Hypothesis h = learn_junta_via_refutation(factory, sampler, n, opt, rng);
            if (dist(*h.fn, f, Distribution::uniform(n)) == 0.0) {
                std::lock_guard<std::mutex> lock(mu);
                ++exact_trees;
            }
        } catch (const ContractViolation&) {
        }
    });

    res.seconds = elapsed_seconds(start);
    res.pass = relevant_hits >= 95 && exact_trees >= 45 && res.seconds < 900.0;
    res.details = {{"feature_select_hits", relevant_hits},
                   {"feature_select_trials", 100},
                   {"exact_trees", exact_trees},
                   {"tree_trials", 50}};
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 9: MQ-SQ testable learning -> SQ refutation.

struct Mqsq2SqRegime {
    MqsqJuntaTestableOptions learner;
    MqsqToSqParams reduction;
    double oracle_tau = 0.01;
};

Mqsq2SqRegime mqsq2sq_regime(int n, int k) {
    Mqsq2SqRegime r;
    r.learner.n = n;
    r.learner.k = k;
    r.learner.tau = 0.04;
    r.learner.eps = 0.05;
    r.reduction.alpha = 0.35;
    r.reduction.eta = 0.0;
    r.reduction.sup_dx_l2_sq = std::ldexp(1.0, -n);
    r.reduction.p_min = 0.35;
    r.oracle_tau = r.learner.tau / 4.0;
    return r;
}

CriterionResult c09_mqsq_to_sq(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{9, "MQ-SQ testable learner to SQ refuter", false, 0.0, {}};
    const int n = 12;
    const Mqsq2SqRegime regime = mqsq2sq_regime(n, 2);
    auto learner = std::make_shared<MqsqJuntaTestableLearner>(regime.learner);
    const std::size_t budget = learner->contract().queries + 4;

    std::size_t sq_violations = 0;
    std::mutex mu;
    auto trial = [&](bool structure) {
        return [&, structure](std::size_t, Rng& rng) -> std::string {
            LabeledDistribution dref =
                structure ? LabeledDistribution::deterministic(Distribution::uniform(n),
                                                               plant_junta(n, 2, rng, nullptr))
                          : LabeledDistribution::constant_bernoulli(Distribution::uniform(n), 0.5);
            RefutationSqOracle oracle(std::move(dref), alternating_adversary(regime.oracle_tau),
                                      rng.split(5));
            MqsqToSqRefuter refuter(learner, regime.reduction);
            const Verdict v = refuter.run(oracle, rng);
            if (refuter.last_sq_count() > budget) {
                std::lock_guard<std::mutex> lock(mu);
                ++sq_violations;
            }
            return to_string(v);
        };
    };

    const TrialReport structure_rep =
        estimate_verdict_prob(trial(true), 200, seed, "mqsq2sq_structure", "structure", threads);
    const TrialReport noise_rep =
        estimate_verdict_prob(trial(false), 200, seed, "mqsq2sq_noise", "noise", threads);

    res.seconds = elapsed_seconds(start);
    res.pass = structure_rep.interval.lo >= 0.66 && noise_rep.interval.lo >= 0.66 &&
               sq_violations == 0;
    res.details = {{"structure", structure_rep.to_json()},
                   {"noise", noise_rep.to_json()},
                   {"sq_budget", budget},
                   {"sq_violations", sq_violations}};
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 10: SQ refutation -> SQ weak learning.

CriterionResult c10_weak_learning(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{10, "SQ refuter to SQ weak learner on dictators", false, 0.0, {}};
    const int n = 8;
    const double tau = 0.1;
    const double eps = tau / 8.0;
    const double taup = 0.002;
    const BooleanFunction target = BooleanFunction::dictator(n, 3);
    const Distribution uniform = Distribution::uniform(n);
    const LabeledDistribution dref = LabeledDistribution::deterministic(uniform, target);
    RefutationSqOracle replay_oracle(dref, ToleranceMode::exact(), Rng(0));

    std::size_t good_classifiers = 0;
    std::size_t replay_violations = 0;
    std::size_t replayed_queries = 0;
    std::mutex mu;
    parallel_for(threads, 100, [&](std::size_t t) {
        Rng rng = Rng::derive(seed, stream_tag("weaklearn"), t);
        WeakSqOracle oracle(target, uniform, alternating_adversary(taup), rng.split(9));
        CoordinateCorrelationRefuter refuter(n, tau, 0.45);
        WeakLearnParams params;
        params.eps = eps;
        params.tau_prime = taup;
        const WeakLearnResult out = sq_refuter_to_weak_learner(refuter, oracle, params, rng);
        const double error = dist(*out.hypothesis.fn, target, uniform);
        std::size_t local_violations = 0;
        for (const auto& entry : out.low_corr_log)
            if (std::abs(entry.answer - replay_oracle.exact_value(entry.phi)) > tau)
                ++local_violations;
        std::lock_guard<std::mutex> lock(mu);
        replayed_queries += out.low_corr_log.size();
        replay_violations += local_violations;
        if (error <= 0.5 - eps) ++good_classifiers;
    });

    res.seconds = elapsed_seconds(start);
    res.pass = good_classifiers >= 67 && replay_violations == 0;
    res.details = {{"trials", 100},
                   {"good_classifiers", good_classifiers},
                   {"replayed_queries", replayed_queries},
                   {"replay_violations", replay_violations}};
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 11: SQ dimension, exact and brute force.

CriterionResult c11_sq_dimension(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{11, "SQ dimension exact mode and brute-force agreement", false, 0.0, {}};
    bool parity_ok = true;
    json parity_values = json::array();
    for (int n : {2, 3, 4}) {
        const ParityClass all(n, n, true);
        const SqDimResult r = sq_dimension(all, Distribution::uniform(n), SqDimMode::Exact);
        parity_values.push_back({{"n", n}, {"d", r.value}});
        if (r.value != (std::size_t{1} << n) || !r.exact) parity_ok = false;
    }

    std::size_t agreements = 0;
    std::mutex mu;
    parallel_for(threads, 50, [&](std::size_t t) {
        Rng rng = Rng::derive(seed, stream_tag("sqdim"), t);
        const int n = 6;
        const std::size_t count = 2 + rng.below(11);  // |C| <= 12
        std::vector<BooleanFunction> members;
        members.reserve(count);
        for (std::size_t i = 0; i < count; ++i) members.push_back(BooleanFunction::random(n, rng));
        const ExplicitClass cls(std::move(members));
        const SqDimResult exact = sq_dimension(cls, Distribution::uniform(n), SqDimMode::Exact);
        const std::size_t brute = sq_dimension_bruteforce(cls, Distribution::uniform(n));
        if (exact.value == brute && exact.exact) {
            std::lock_guard<std::mutex> lock(mu);
            ++agreements;
        }
    });

    res.seconds = elapsed_seconds(start);
    res.pass = parity_ok && agreements == 50;
    res.details = {{"parities", parity_values}, {"random_agreements", agreements}};
    return res;
}

// ---------------------------------------------------------------------------
// Criterion 12: determinism of a representative selftest slice.

std::string determinism_slice(std::uint64_t seed, int threads) {
    json all = json::array();
    {
        const RefuteSetup setup = make_refute_setup(std::make_shared<ParityClass>(10, 2, false),
                                                    parity_regime(), false);
        all.push_back(
            refute_trial_report(setup, true, 0.0, 60, seed, "det_refute", "structure", threads)
                .to_json());
    }
    {
        const LabeledDistribution dref = LabeledDistribution::deterministic(
            Distribution::uniform(10), BooleanFunction::parity(10, 1u));
        all.push_back(check_z_concentration(dref, 0.5, 0.2, 100, seed, threads).to_json());
    }
    {
        Rng rng = Rng::derive(seed, stream_tag("det_km"), 0);
        const BooleanFunction f = plant_junta(8, 2, rng, nullptr);
        MqsqOracle oracle(f, Distribution::uniform(8), ToleranceMode::exact(), rng.split(3));
        KmOptions opt;
        opt.sparsity = 4;
        opt.eps = 0.1;
        Rng km_rng = rng.split(4);
        const Hypothesis h = km_learn(oracle, opt, km_rng);
        all.push_back(hypothesis_to_json(h, seed));
    }
    return all.dump();
}

CriterionResult c12_determinism(std::uint64_t seed, int threads) {
    const auto start = Clock::now();
    CriterionResult res{12, "byte-identical outputs for a fixed seed", false, 0.0, {}};
    const std::string once = determinism_slice(seed, 1);
    const std::string again = determinism_slice(seed, 1);
    const std::string threaded = determinism_slice(seed, threads > 1 ? threads : 2);
    res.seconds = elapsed_seconds(start);
    res.pass = once == again && once == threaded;
    res.details = {{"bytes", once.size()},
                   {"rerun_identical", once == again},
                   {"thread_count_invariant", once == threaded}};
    return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Acceptance driver

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, int threads,
                                            std::ostream* progress) {
    using Runner = CriterionResult (*)(std::uint64_t, int);
    const Runner runners[] = {c01_fourier,          c02_influence,      c03_km,
                              c04_refute_structure, c05_refute_noise,   c06_filtered,
                              c07_concentration,    c08_junta_pipeline, c09_mqsq_to_sq,
                              c10_weak_learning,    c11_sq_dimension,   c12_determinism};
    std::vector<CriterionResult> results;
    results.reserve(std::size(runners));
    for (Runner r : runners) {
        CriterionResult res = r(seed, threads);
        if (progress) {
            (*progress) << (res.pass ? "[PASS] " : "[FAIL] ") << "criterion " << res.id << ": "
                        << res.name << " (" << res.seconds << " s)\n";
            progress->flush();
        }
        results.push_back(std::move(res));
    }
    return results;
}

// ---------------------------------------------------------------------------
// CLI suite runners

namespace {

json criterion_to_json(const CriterionResult& r) {
    return json{{"id", r.id},
                {"name", r.name},
                {"pass", r.pass},
                {"seconds", r.seconds},
                {"details", r.details}};
}

SuiteOutput selftest_suite(const ExperimentConfig& cfg, std::ostream* progress) {
    SuiteOutput out;
    out.csv_columns = {"id", "name", "pass", "seconds"};
    const auto results = run_acceptance(cfg.seed, cfg.threads, progress);
    for (const auto& r : results) {
        out.records.push_back(criterion_to_json(r));
        out.ok = out.ok && r.pass;
    }
    return out;
}

std::size_t suite_trials(const ExperimentConfig& cfg, std::size_t fallback) {
    return cfg.trials > 0 ? cfg.trials : fallback;
}

SuiteOutput refute_suite(const ExperimentConfig& cfg) {
    require_allowed_keys(cfg.params,
                         {"n", "arity", "labels", "p", "eps", "eta", "c", "C1", "C2", "C3",
                          "feed_factor", "sample_need", "train_count", "estimate_count",
                          "fresh_queries"},
                         "refute params");
    const json& p = cfg.params;
    const int n = p.value("n", 12);
    const int arity = p.value("arity", 3);
    const std::string labels = p.value("labels", std::string("structure"));
    if (labels != "structure" && labels != "noise")
        throw ConfigError("refute params: labels must be 'structure' or 'noise'");
    const double noise_p = p.value("p", 0.5);

    RefuteRegime regime = parity_regime();
    regime.eps = p.value("eps", regime.eps);
    regime.eta = p.value("eta", regime.eta);
    regime.learner.c = p.value("c", regime.learner.c);
    regime.C1 = p.value("C1", regime.C1);
    regime.C2 = p.value("C2", regime.C2);
    regime.C3 = p.value("C3", regime.C3);
    regime.feed_factor = p.value("feed_factor", regime.feed_factor);
    regime.learner.eps = regime.eps;
    regime.learner.sample_need = p.value("sample_need", regime.learner.sample_need);
    regime.learner.train_count = p.value("train_count", regime.learner.train_count);
    regime.learner.estimate_count = p.value("estimate_count", regime.learner.estimate_count);
    regime.learner.fresh_queries = p.value("fresh_queries", regime.learner.fresh_queries);

    const RefuteSetup setup = make_refute_setup(std::make_shared<ParityClass>(n, arity, false),
                                                regime, cfg.strict_regime_checks);
    const std::size_t trials = suite_trials(cfg, 400);
    const TrialReport rep = refute_trial_report(setup, labels == "structure", noise_p, trials,
                                                cfg.seed, "refute_" + labels, labels, cfg.threads);

    SuiteOutput out;
    out.csv_columns = {"suite",     "seed",      "trials",    "point_key", "point_estimate",
                       "wilson_lo", "wilson_hi", "structure", "noise",     "error"};
    json row = rep.to_json();
    for (const char* key : {"structure", "noise", "error"})
        row[key] = rep.outcomes.count(key) ? rep.outcomes.at(key) : 0;
    out.records.push_back(row);
    out.manifest["regime_warnings"] = setup.warnings;
    out.manifest["m_prime"] = setup.params.m_prime();
    out.ok = rep.interval.lo >= 0.66;
    return out;
}

SuiteOutput junta_suite(const ExperimentConfig& cfg) {
    require_allowed_keys(cfg.params, {"n", "k", "mode", "runs_per_estimate"}, "junta params");
    const int n = cfg.params.value("n", 10);
    const int k = cfg.params.value("k", 3);
    const std::string mode = cfg.params.value("mode", std::string("select"));
    if (mode != "select" && mode != "tree")
        throw ConfigError("junta params: mode must be 'select' or 'tree'");
    const RefuteRegime regime = junta_regime();
    const RefuterFactory factory = junta_refuter_factory(k, regime);
    const std::size_t trials = suite_trials(cfg, mode == "select" ? 100 : 50);

    SuiteOutput out;
    out.csv_columns = {"trial", "k", "ok", "picked", "distance"};
    std::vector<json> rows(trials);
    std::size_t ok_count = 0;
    std::mutex mu;
    const RefuterFn root_refuter = factory.make(n);
    const std::size_t samples_per_run = factory.samples_per_run(n);
    parallel_for(cfg.threads, trials, [&](std::size_t t) {
        Rng rng = Rng::derive(cfg.seed, stream_tag("junta_suite"), t);
        std::uint32_t support = 0;
        const int kk = 1 + static_cast<int>(rng.below(k));
        const BooleanFunction f = plant_junta(n, kk, rng, &support);
        const PairSampler sampler = [f, n](Rng& r) {
            const std::uint32_t x = r.bits(n);
            return Example{x, f(x)};
        };
        json row{{"trial", t}, {"k", kk}, {"ok", false}, {"picked", -1}, {"distance", -1.0}};
        try {
            if (mode == "select") {
                FeatureSelectOptions fs;
                fs.k = k;
                fs.delta = 0.05;
                fs.samples_per_run = samples_per_run;
                fs.runs_per_estimate = cfg.params.value("runs_per_estimate", std::size_t{1600});
                const int picked = feature_select(root_refuter, sampler, n, fs, rng);
                row["picked"] = picked;
                row["ok"] = ((support >> picked) & 1u) != 0;
            } else {
                JuntaPipelineOptions opt;
                opt.k = k;
                opt.eps = regime.eps;
                opt.delta = 0.1;
                const Hypothesis h = learn_junta_via_refutation(factory, sampler, n, opt, rng);
                const double d = dist(*h.fn, f, Distribution::uniform(n));
                row["distance"] = d;
                row["ok"] = d == 0.0;
            }
        } catch (const ContractViolation& e) {
            row["error"] = e.what();
        }
        std::lock_guard<std::mutex> lock(mu);
        if (row["ok"].get<bool>()) ++ok_count;
        rows[t] = std::move(row);
    });
    out.records.assign(rows.begin(), rows.end());
    out.manifest["ok_count"] = ok_count;
    out.ok = mode == "select" ? ok_count * 100 >= trials * 95 : ok_count * 100 >= trials * 90;
    return out;
}

SuiteOutput km_suite(const ExperimentConfig& cfg) {
    require_allowed_keys(cfg.params, {"n", "vars", "eps", "mode", "tau"}, "km params");
    const int n = cfg.params.value("n", 10);
    const int vars = cfg.params.value("vars", 3);
    const double eps = cfg.params.value("eps", 0.1);
    const std::string mode = cfg.params.value("mode", std::string("exact"));
    const std::size_t trials = suite_trials(cfg, 50);

    SuiteOutput out;
    out.csv_columns = {"trial", "n", "sparsity", "distance", "ok"};
    std::vector<json> rows(trials);
    std::size_t ok_count = 0;
    std::mutex mu;
    parallel_for(cfg.threads, trials, [&](std::size_t t) {
        Rng rng = Rng::derive(cfg.seed, stream_tag("km_suite"), t);
        const BooleanFunction f = plant_junta(n, vars, rng, nullptr);
        const FourierSpectrum spec = walsh_hadamard(pm1_table(f), n);
        int sparsity = 0;
        for (double coeff : spec.coeff)
            if (std::abs(coeff) > 1e-9) ++sparsity;
        KmOptions opt;
        opt.sparsity = sparsity;
        opt.eps = eps;
        ToleranceMode oracle_mode = ToleranceMode::exact();
        if (mode == "adversarial") {
            const double theta = eps * eps / (4.0 * sparsity);
            oracle_mode = alternating_adversary(cfg.params.value("tau", theta / 4.0));
        }
        MqsqOracle oracle(f, Distribution::uniform(n), oracle_mode, rng.split(3));
        Rng km_rng = rng.split(4);
        const Hypothesis h = km_learn(oracle, opt, km_rng);
        const double d = dist(*h.fn, f, Distribution::uniform(n));
        std::lock_guard<std::mutex> lock(mu);
        if (d <= eps) ++ok_count;
        rows[t] = json{
            {"trial", t}, {"n", n}, {"sparsity", sparsity}, {"distance", d}, {"ok", d <= eps}};
    });
    out.records.assign(rows.begin(), rows.end());
    out.manifest["ok_count"] = ok_count;
    out.ok = ok_count == trials;
    return out;
}

SuiteOutput mqsq2sq_suite(const ExperimentConfig& cfg) {
    require_allowed_keys(cfg.params, {"n", "k", "instance", "alpha", "tau", "eps"},
                         "mqsq2sq params");
    const int n = cfg.params.value("n", 12);
    const int k = cfg.params.value("k", 2);
    const std::string instance = cfg.params.value("instance", std::string("structure"));
    if (instance != "structure" && instance != "noise")
        throw ConfigError("mqsq2sq params: instance must be 'structure' or 'noise'");
    Mqsq2SqRegime regime = mqsq2sq_regime(n, k);
    regime.reduction.alpha = cfg.params.value("alpha", regime.reduction.alpha);
    regime.learner.tau = cfg.params.value("tau", regime.learner.tau);
    regime.learner.eps = cfg.params.value("eps", regime.learner.eps);
    regime.oracle_tau = regime.learner.tau / 4.0;
    auto learner = std::make_shared<MqsqJuntaTestableLearner>(regime.learner);
    const std::size_t budget = learner->contract().queries + 4;
    const std::size_t trials = suite_trials(cfg, 200);

    std::size_t sq_violations = 0;
    std::mutex mu;
    const TrialReport rep = estimate_verdict_prob(
        [&](std::size_t, Rng& rng) -> std::string {
            LabeledDistribution dref =
                instance == "structure"
                    ? LabeledDistribution::deterministic(Distribution::uniform(n),
                                                         plant_junta(n, k, rng, nullptr))
                    : LabeledDistribution::constant_bernoulli(Distribution::uniform(n), 0.5);
            RefutationSqOracle oracle(std::move(dref), alternating_adversary(regime.oracle_tau),
                                      rng.split(5));
            MqsqToSqRefuter refuter(learner, regime.reduction);
            const Verdict v = refuter.run(oracle, rng);
            if (refuter.last_sq_count() > budget) {
                std::lock_guard<std::mutex> lock(mu);
                ++sq_violations;
            }
            return to_string(v);
        },
        trials, cfg.seed, "mqsq2sq_" + instance, instance, cfg.threads);

    SuiteOutput out;
    out.csv_columns = {"suite",     "seed",      "trials",    "point_key", "point_estimate",
                       "wilson_lo", "wilson_hi", "structure", "noise",     "error"};
    json row = rep.to_json();
    for (const char* key : {"structure", "noise", "error"})
        row[key] = rep.outcomes.count(key) ? rep.outcomes.at(key) : 0;
    out.records.push_back(row);
    out.manifest["sq_budget"] = budget;
    out.manifest["sq_violations"] = sq_violations;
    out.ok = rep.interval.lo >= 0.66 && sq_violations == 0;
    return out;
}

SuiteOutput weaklearn_suite(const ExperimentConfig& cfg) {
    require_allowed_keys(cfg.params, {"n", "coordinate", "tau", "tau_prime", "eps", "alpha"},
                         "weaklearn params");
    const int n = cfg.params.value("n", 8);
    const int coord = cfg.params.value("coordinate", 3);
    const double tau = cfg.params.value("tau", 0.1);
    const double taup = cfg.params.value("tau_prime", 0.002);
    const double eps = cfg.params.value("eps", tau / 8.0);
    const double alpha = cfg.params.value("alpha", 0.45);
    const std::size_t trials = suite_trials(cfg, 100);

    const BooleanFunction target = BooleanFunction::dictator(n, coord);
    const Distribution uniform = Distribution::uniform(n);
    const LabeledDistribution dref = LabeledDistribution::deterministic(uniform, target);
    RefutationSqOracle replay_oracle(dref, ToleranceMode::exact(), Rng(0));

    SuiteOutput out;
    out.csv_columns = {"trial", "error", "ok", "low_corr_queries", "replay_max_dev"};
    std::vector<json> rows(trials);
    std::size_t ok_count = 0, replay_violations = 0;
    std::mutex mu;
    parallel_for(cfg.threads, trials, [&](std::size_t t) {
        Rng rng = Rng::derive(cfg.seed, stream_tag("weaklearn_suite"), t);
        WeakSqOracle oracle(target, uniform, alternating_adversary(taup), rng.split(9));
        CoordinateCorrelationRefuter refuter(n, tau, alpha);
        WeakLearnParams params;
        params.eps = eps;
        params.tau_prime = taup;
        const WeakLearnResult res = sq_refuter_to_weak_learner(refuter, oracle, params, rng);
        const double error = dist(*res.hypothesis.fn, target, uniform);
        double replay_max = 0.0;
        for (const auto& entry : res.low_corr_log)
            replay_max = std::max(replay_max,
                                  std::abs(entry.answer - replay_oracle.exact_value(entry.phi)));
        std::lock_guard<std::mutex> lock(mu);
        if (error <= 0.5 - eps) ++ok_count;
        if (replay_max > tau) ++replay_violations;
        rows[t] = json{{"trial", t},
                       {"error", error},
                       {"ok", error <= 0.5 - eps},
                       {"low_corr_queries", res.low_corr_log.size()},
                       {"replay_max_dev", replay_max}};
    });
    out.records.assign(rows.begin(), rows.end());
    out.manifest["ok_count"] = ok_count;
    out.manifest["replay_violations"] = replay_violations;
    out.ok = ok_count * 3 >= trials * 2 && replay_violations == 0;
    return out;
}

SuiteOutput concentration_suite(const ExperimentConfig& cfg) {
    require_allowed_keys(cfg.params, {"check", "n", "p", "eps", "delta"}, "concentration params");
    const std::string check = cfg.params.value("check", std::string("all"));
    const int n = cfg.params.value("n", 14);
    const double p = cfg.params.value("p", 0.5);
    const double eps = cfg.params.value("eps", 0.05);
    const double delta = cfg.params.value("delta", 0.2);
    const std::size_t trials = suite_trials(cfg, 1000);

    Rng rng = Rng::derive(cfg.seed, stream_tag("concentration_cli"), 0);
    const LabeledDistribution dref = LabeledDistribution::deterministic(
        Distribution::uniform(n), BooleanFunction::parity(n, 1u));
    std::vector<double> phi_table(std::size_t{1} << n);
    for (double& v : phi_table) v = rng.real();
    const TestFunction phi = TestFunction::from_dense(std::move(phi_table));

    SuiteOutput out;
    out.csv_columns = {"suite", "trials", "violations", "violation_rate"};
    auto push = [&](const ConcentrationReport& rep, double cap) {
        out.records.push_back(rep.to_json());
        out.ok = out.ok && rep.violation_rate() <= cap;
    };
    if (check == "z" || check == "all")
        push(check_z_concentration(dref, p, delta, trials, cfg.seed + 1, cfg.threads), 0.02);
    if (check == "blowup" || check == "all")
        push(check_error_blowup(dref, p, eps, trials, cfg.seed + 2, cfg.threads), 0.02);
    if (check == "type12" || check == "all") {
        const Permutation pi = Permutation::random_fixed_point_free(n, rng);
        push(check_type12(Distribution::uniform(n), p, pi, phi, trials, eps, cfg.seed + 3,
                          cfg.threads),
             0.02);
    }
    if (check == "type345" || check == "all") {
        const Permutation pi = Permutation::xor_shift(n, 0b100001u);
        push(check_type345(dref, phi, pi, trials, eps, cfg.seed + 4, cfg.threads), 0.02);
    }
    if (out.records.empty())
        throw ConfigError("concentration params: check must be z|blowup|type12|type345|all");
    return out;
}

SuiteOutput sqdim_suite(const ExperimentConfig& cfg) {
    require_allowed_keys(cfg.params, {"class", "n", "arity", "include_empty", "mode", "count"},
                         "sqdim params");
    const std::string cls_name = cfg.params.value("class", std::string("parities"));
    const int n = cfg.params.value("n", 4);
    const std::string mode_name = cfg.params.value("mode", std::string("exact"));
    const SqDimMode mode = mode_name == "greedy" ? SqDimMode::Greedy : SqDimMode::Exact;

    SuiteOutput out;
    out.csv_columns = {"instance", "class", "n", "d", "exact"};
    if (cls_name == "parities") {
        const int arity = cfg.params.value("arity", n);
        const ParityClass cls(n, arity, cfg.params.value("include_empty", true));
        const SqDimResult r = sq_dimension(cls, Distribution::uniform(n), mode);
        out.records.push_back(json{
            {"instance", 0}, {"class", cls.name()}, {"n", n}, {"d", r.value}, {"exact", r.exact}});
    } else if (cls_name == "random") {
        const std::size_t count = cfg.params.value("count", std::size_t{10});
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng = Rng::derive(cfg.seed, stream_tag("sqdim_cli"), i);
            const std::size_t members = 2 + rng.below(11);
            std::vector<BooleanFunction> fs;
            for (std::size_t j = 0; j < members; ++j)
                fs.push_back(BooleanFunction::random(n, rng));
            const ExplicitClass cls(std::move(fs));
            const SqDimResult r = sq_dimension(cls, Distribution::uniform(n), mode);
            out.records.push_back(json{{"instance", i},
                                       {"class", cls.name()},
                                       {"n", n},
                                       {"d", r.value},
                                       {"exact", r.exact}});
        }
    } else {
        throw ConfigError("sqdim params: class must be 'parities' or 'random'");
    }
    return out;
}

}  // namespace

SuiteOutput run_suite(const ExperimentConfig& cfg, std::ostream* progress) {
    SuiteOutput out;
    if (cfg.suite == "selftest") out = selftest_suite(cfg, progress);
    else if (cfg.suite == "refute") out = refute_suite(cfg);
    else if (cfg.suite == "junta") out = junta_suite(cfg);
    else if (cfg.suite == "km") out = km_suite(cfg);
    else if (cfg.suite == "mqsq2sq") out = mqsq2sq_suite(cfg);
    else if (cfg.suite == "weaklearn") out = weaklearn_suite(cfg);
    else if (cfg.suite == "concentration") out = concentration_suite(cfg);
    else if (cfg.suite == "sqdim") out = sqdim_suite(cfg);
    else throw ConfigError("unknown suite '" + cfg.suite + "'");

    out.manifest["schema_version"] = 1;
    out.manifest["suite"] = cfg.suite;
    out.manifest["seed"] = cfg.seed;
    out.manifest["threads"] = cfg.threads;
    out.manifest["params"] = cfg.params;
    out.manifest["columns"] = out.csv_columns;
    out.manifest["ok"] = out.ok;
    return out;
}

std::string records_to_csv(const std::vector<nlohmann::json>& records,
                           const std::vector<std::string>& columns) {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const json& row : records) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) os << ",";
            if (!row.contains(columns[i])) continue;
            const json& cell = row.at(columns[i]);
            if (cell.is_string()) os << cell.get<std::string>();
            else os << cell.dump();
        }
        os << "\n";
    }
    return os.str();
}

void write_suite_output(const SuiteOutput& out, const std::string& out_dir,
                        const std::string& format) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream mf(fs::path(out_dir) / "manifest.json");
        mf << out.manifest.dump(2) << "\n";
    }
    if (format == "csv") {
        std::ofstream rf(fs::path(out_dir) / "records.csv");
        rf << records_to_csv(out.records, out.csv_columns);
    } else {
        std::ofstream rf(fs::path(out_dir) / "records.json");
        rf << json(out.records).dump(2) << "\n";
    }
}

}  // namespace sqlab
