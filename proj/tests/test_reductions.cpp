#include <doctest.h>

#include <cmath>
#include <map>

#include "sqlab/reductions.hpp"
#include "sqlab/verify.hpp"

using namespace sqlab;

namespace {

/// Minimal TL-Q learner used to exercise the reduction plumbing without the
/// statistics of the reference learner: labels the training points through
/// the oracle and runs ERM over a fixed class.
class ErmTlqLearner final : public TlqLearner {
  public:
    ErmTlqLearner(std::shared_ptr<const ConceptClass> cls, TlqContract contract)
        : cls_(std::move(cls)), contract_(contract) {}
    TlqContract contract() const override { return contract_; }
    Hypothesis run(std::span<const std::uint32_t> samples, MembershipOracle& mq,
                   Rng& rng) override {
        (void)rng;
        std::vector<Example> labeled;
        const std::size_t use = std::min(samples.size(), contract_.queries);
        for (std::size_t i = 0; i < use; ++i)
            labeled.push_back({samples[i], mq.query_raw(samples[i])});
        const auto [idx, errs] = cls_->erm(labeled);
        (void)errs;
        return Hypothesis::of(cls_->member(idx), "erm_tlq");
    }

  private:
    std::shared_ptr<const ConceptClass> cls_;
    TlqContract contract_;
};

class RejectingMqsqLearner final : public MqsqLearner {
  public:
    explicit RejectingMqsqLearner(int n) : n_(n) {}
    int dim() const override { return n_; }
    MqsqContract contract() const override {
        MqsqContract c;
        c.queries = 2;
        c.tau = 0.02;
        c.eps = 0.05;
        c.max_dstar_l2_sq = std::ldexp(1.0, -(n_ - 2));
        return c;
    }
    Hypothesis run(MqsqOracleBase& oracle, Rng&) override {
        oracle.answer(MqsqQuery::type1(TestFunction::one(), Distribution::uniform(n_)));
        oracle.answer(MqsqQuery::type4(TestFunction::one()));
        return Hypothesis::reject("always_bottom");
    }

  private:
    int n_;
};

class AlwaysNoiseRefuter final : public SqRefuter {
  public:
    Declared declared() const override { return {4, 0.1, 0.45, 0.0}; }
    Verdict run(RefutationSqOracleBase& oracle, Rng&) override {
        for (int i = 0; i < 4; ++i) oracle.answer(PairTestFunction::label_only());
        return Verdict::Noise;
    }
};

}  // namespace

TEST_CASE("filtered distribution, constant-bernoulli labels") {
    const int n = 8;
    const Distribution u = Distribution::uniform(n);
    for (double p : {0.2, 0.5, 0.8}) {
        Rng rng(stream_tag("filt") + static_cast<std::uint64_t>(p * 10));
        const LabeledDistribution dref = LabeledDistribution::constant_bernoulli(u, p);
        const BooleanFunction f = BooleanFunction::random_biased(n, p, rng);
        const auto [d, z] = filtered_distribution(dref, f);
        CHECK(z == doctest::Approx(p * (1.0 - p)).epsilon(1e-12));
        double worst = 0.0;
        for (std::uint32_t x = 0; x < (1u << n); ++x)
            worst = std::max(worst, std::abs(d.pmf(x) - u.pmf(x)));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("filtered distribution, deterministic labels at p = 1/2") {
    // y = g and p = 1/2 reduce the PMF to a reweighting of the agreement set:
    // D(x) = D_x(x) 1{f(x) = g(x)} / Pr[f = g], Z = Pr[f = g] / 2.
    const int n = 8;
    const Distribution u = Distribution::uniform(n);
    const BooleanFunction g = BooleanFunction::parity(n, 0b1101u);  // balanced, so p = 1/2
    Rng rng(2);
    const BooleanFunction f = BooleanFunction::random_biased(n, 0.5, rng);
    const LabeledDistribution dref = LabeledDistribution::deterministic(u, g);
    REQUIRE(dref.positive_rate() == doctest::Approx(0.5));

    double agree_mass = 0.0;
    for (std::uint32_t x = 0; x < (1u << n); ++x)
        if (f(x) == g(x)) agree_mass += u.pmf(x);
    const auto [d, z] = filtered_distribution(dref, f);
    CHECK(z == doctest::Approx(0.5 * agree_mass).epsilon(1e-12));
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
        const double expected = f(x) == g(x) ? u.pmf(x) / agree_mass : 0.0;
        CHECK(d.pmf(x) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("filtered distribution, empty agreement throws") {
    const int n = 4;
    const Distribution u = Distribution::uniform(n);
    const LabeledDistribution dref =
        LabeledDistribution::deterministic(u, BooleanFunction::constant(n, false));
    CHECK_THROWS_AS(filtered_distribution(dref, BooleanFunction::constant(n, true)), QueryError);
}

TEST_CASE("filtered distribution matches a rejection-sampling histogram") {
    const int n = 8;
    const Distribution u = Distribution::uniform(n);
    const BooleanFunction g = BooleanFunction::parity(n, 0b11u);
    const LabeledDistribution dref = LabeledDistribution::deterministic(u, g);
    const double p = dref.positive_rate();
    Rng rng(3);
    const BooleanFunction f = BooleanFunction::random_biased(n, p, rng);
    const auto [d, z] = filtered_distribution(dref, f);
    (void)z;

    std::vector<double> hist(1u << n, 0.0);
    std::size_t accepted = 0;
    Rng sim(4);
    while (accepted < 1000000) {
        const Example e = dref.sample(sim);
        const bool fx = f(e.x);
        if (e.y != fx) continue;
        const bool accept = fx ? !sim.bernoulli(p) : sim.bernoulli(p);
        if (!accept) continue;
        hist[e.x] += 1.0;
        ++accepted;
    }
    double tv = 0.0;
    double total_mass = 0.0;
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
        tv += std::abs(hist[x] / 1000000.0 - d.pmf(x));
        total_mass += d.pmf(x);
    }
    CHECK(total_mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(tv / 2.0 <= 0.02);
}

TEST_CASE("z concentration and error blow-up in the calibrated regime") {
    const int n = 14;
    const LabeledDistribution dref = LabeledDistribution::deterministic(
        Distribution::uniform(n), BooleanFunction::parity(n, 0b1u));
    const ConcentrationReport z = check_z_concentration(dref, 0.5, 0.1, 1000, 77, 2);
    CHECK(z.violation_rate() <= 0.01);
    const ConcentrationReport blow = check_error_blowup(dref, 0.5, 0.1, 1000, 78, 2);
    CHECK(blow.violation_rate() <= 0.01);
}

TEST_CASE("refutation params arithmetic and validation") {
    RefutationParams p;
    p.n = 12;
    p.eps = 0.05;
    p.eta = 0.0;
    p.c = 1.0;
    p.learner_m = 20;
    p.learner_q = 18;
    p.C1 = 5.0;
    p.C2 = 0.1;
    p.C3 = 0.03;
    CHECK(p.phat_count() == 2000);
    CHECK(p.test_count() == 12);
    CHECK(p.m_prime() == p.phat_count() + p.pool_count() + p.feed_count());

    // The eta predicate is a hard error.
    RefutationParams bad = p;
    bad.eta = 0.31;  // (1/2 - 4 eps)/c = 0.3
    CHECK_THROWS_WITH_AS(bad.validate(std::ldexp(1.0, -6), false),
                         doctest::Contains("eta >= (1/2 - 4 eps)/c"), ConfigError);

    // The asymptotic regime checks warn at desk scale and throw in strict mode.
    const auto warnings = p.validate(std::sqrt(std::ldexp(1.0, -12)), false);
    CHECK(warnings.size() == 2);
    CHECK_THROWS_AS(p.validate(std::sqrt(std::ldexp(1.0, -12)), true), ConfigError);
}

TEST_CASE("biased refutation short-circuits on extreme label bias") {
    const int n = 10;
    auto cls = std::make_shared<ParityClass>(n, 2, false);
    TlqContract contract;
    contract.eps = 0.05;
    contract.samples = 16;
    contract.queries = 16;
    ErmTlqLearner learner(cls, contract);
    RefutationParams params = RefutationParams::for_learner(n, learner, 0.0);
    params.C1 = 5.0;
    params.C2 = 0.1;
    params.C3 = 0.03;

    // Labels at eps/10: the p-hat exit fires before any filtering.
    ExampleOracle oracle(
        LabeledDistribution::constant_bernoulli(Distribution::uniform(n), params.eps / 10.0),
        Rng(5));
    Rng rng(6);
    const RefutationRecord rec = run_refutation(oracle, params, learner, rng);
    CHECK(rec.verdict == Verdict::Structure);
    CHECK(rec.phat_exit);
    CHECK(rec.samples_consumed == params.phat_count());
}

TEST_CASE("biased refutation error exits carry their declared reason") {
    const int n = 10;
    auto cls = std::make_shared<ParityClass>(n, 2, false);
    TlqContract contract;
    contract.eps = 0.05;
    contract.samples = 8;
    contract.queries = 8;
    ErmTlqLearner learner(cls, contract);
    RefutationParams params = RefutationParams::for_learner(n, learner, 0.0);
    params.C1 = 5.0;
    params.C2 = 0.1;
    params.C3 = 0.03;

    {
        // Too few examples for even the p-hat stage.
        std::vector<Example> few(10, Example{0, true});
        Rng rng(7);
        const RefutationRecord rec = biased_refutation(few, params, learner, rng);
        CHECK(rec.verdict == Verdict::Error);
        CHECK(rec.reason == ErrorReason::InsufficientSamples);
    }
    {
        // A point-mass marginal forces duplicates into the test split.
        ExampleOracle oracle(
            LabeledDistribution::constant_bernoulli(Distribution::point_mass(n, 33), 0.5),
            Rng(8));
        Rng rng(9);
        const RefutationRecord rec = run_refutation(oracle, params, learner, rng);
        CHECK(rec.verdict == Verdict::Error);
        CHECK(rec.reason == ErrorReason::DuplicateInTest);
    }
}

TEST_CASE("biased refutation consumes at most the declared sample budget") {
    const int n = 12;
    auto cls = std::make_shared<ParityClass>(n, 2, false);
    TlqContract contract;
    contract.eps = 0.05;
    contract.samples = 16;
    contract.queries = 16;
    ErmTlqLearner learner(cls, contract);
    RefutationParams params = RefutationParams::for_learner(n, learner, 0.0);
    params.C1 = 5.0;
    params.C2 = 0.1;
    params.C3 = 0.03;
    for (int t = 0; t < 20; ++t) {
        Rng rng(stream_tag("budget") + t);
        ExampleOracle oracle(
            LabeledDistribution::deterministic(Distribution::uniform(n),
                                               cls->member(rng.below(cls->size()))),
            rng.split(1));
        const RefutationRecord rec = run_refutation(oracle, params, learner, rng);
        CHECK(oracle.samples_drawn() == params.m_prime());
        CHECK(rec.samples_consumed <= params.m_prime());
        CHECK(rec.pool_used <= params.pool_count());
        CHECK(rec.mq_count <= contract.queries);
    }
}

TEST_CASE("tlq to agnostic parameter accounting") {
    TlqContract c;
    c.c = 1.0;
    c.eps = 0.1;
    c.samples = 100;
    c.queries = 50;
    const AgnosticParamsReport rep =
        tlq_to_agnostic_params(c, 1000.0, std::sqrt(std::ldexp(1.0, -20)), 10.0, 100.0, false);
    CHECK(rep.m_prime == doctest::Approx((100.0 + 100.0) / 0.1 + 50.0));  // 2050
    CHECK(rep.sample_bound == doctest::Approx(2050.0 * 2050.0 * 2050.0 / 0.01));
    CHECK(rep.excess_error == doctest::Approx(1.0 - 1.0 + 0.8 + 0.1));
    CHECK_FALSE(rep.vacuous);

    TlqContract huge_c = c;
    huge_c.c = 1e9;
    const AgnosticParamsReport vac =
        tlq_to_agnostic_params(huge_c, 1000.0, std::sqrt(std::ldexp(1.0, -20)), 10.0, 100.0,
                               false);
    CHECK(vac.vacuous);

    CHECK_THROWS_AS(
        tlq_to_agnostic_params(c, 1000.0, std::sqrt(std::ldexp(1.0, -6)), 10.0, 100.0, true),
        ConfigError);
}

TEST_CASE("round classifier") {
    const int n = 6;
    Rng rng(10);
    CHECK(dist(round_classifier(TestFunction::one(), n, false, rng),
               BooleanFunction::constant(n, true), Distribution::uniform(n)) == 0.0);

    const BooleanFunction target = BooleanFunction::parity(n, 0b101u);
    const BooleanFunction exact_round =
        round_classifier(TestFunction::from_bool(target), n, false, rng);
    CHECK(dist(exact_round, target, Distribution::uniform(n)) == 0.0);

    // phi = 1/2 against a balanced target: expected error is exactly 1/2.
    const TestFunction half = TestFunction::from_fn([](std::uint32_t) { return 0.5; });
    double total = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const BooleanFunction h = round_classifier(half, n, false, rng);
        total += dist(h, target, Distribution::uniform(n));
    }
    CHECK(std::abs(total / 1000.0 - 0.5) < 0.02);
}

TEST_CASE("mqsq-to-sq refuter maps bottom to structure and audits queries") {
    const int n = 10;
    auto learner = std::make_shared<RejectingMqsqLearner>(n);
    MqsqToSqParams params;
    params.alpha = 0.35;
    params.eta = 0.0;
    params.sup_dx_l2_sq = std::ldexp(1.0, -n);
    MqsqToSqRefuter refuter(learner, params);
    CHECK(refuter.declared().queries == learner->contract().queries + 4);

    RefutationSqOracle oracle(
        LabeledDistribution::constant_bernoulli(Distribution::uniform(n), 0.5),
        ToleranceMode::exact(), Rng(11));
    Rng rng(12);
    CHECK(refuter.run(oracle, rng) == Verdict::Structure);
    CHECK(refuter.last_sq_count() <= learner->contract().queries + 4);
}

TEST_CASE("mqsq-to-sq refuter construction checks the parameter conditions") {
    const int n = 10;
    auto learner = std::make_shared<RejectingMqsqLearner>(n);
    MqsqToSqParams params;
    params.alpha = 0.05;  // below c eta + eps + (c+4) tau + 6 tau'
    params.sup_dx_l2_sq = std::ldexp(1.0, -n);
    CHECK_THROWS_WITH_AS(MqsqToSqRefuter(learner, params), doctest::Contains("condition 1"),
                         ConfigError);

    MqsqToSqParams bad_b;
    bad_b.alpha = 0.35;
    bad_b.sup_dx_l2_sq = std::ldexp(1.0, -n);
    bad_b.B = 1e9;
    CHECK_THROWS_WITH_AS(MqsqToSqRefuter(learner, bad_b), doctest::Contains("condition 2"),
                         ConfigError);
}

TEST_CASE("learner exceeding its declared dstar norm bound is reported") {
    const int n = 10;
    class Greedy final : public MqsqLearner {
      public:
        int dim() const override { return 10; }
        MqsqContract contract() const override {
            MqsqContract c;
            c.queries = 1;
            c.tau = 0.02;
            c.eps = 0.05;
            c.max_dstar_l2_sq = std::ldexp(1.0, -9);
            return c;
        }
        Hypothesis run(MqsqOracleBase& oracle, Rng&) override {
            // Point mass: far above the declared norm bound.
            oracle.answer(
                MqsqQuery::type1(TestFunction::one(), Distribution::point_mass(10, 0)));
            return Hypothesis::reject("greedy");
        }
    };
    auto learner = std::make_shared<Greedy>();
    MqsqToSqParams params;
    params.alpha = 0.35;
    params.sup_dx_l2_sq = std::ldexp(1.0, -n);
    MqsqToSqRefuter refuter(learner, params);
    RefutationSqOracle oracle(
        LabeledDistribution::constant_bernoulli(Distribution::uniform(n), 0.5),
        ToleranceMode::exact(), Rng(13));
    Rng rng(14);
    CHECK_THROWS_AS(refuter.run(oracle, rng), ContractViolation);
}

TEST_CASE("weak learner constant shortcut") {
    const int n = 8;
    const BooleanFunction ones = BooleanFunction::constant(n, true);
    WeakSqOracle oracle(ones, Distribution::uniform(n), ToleranceMode::exact(), Rng(15));
    CoordinateCorrelationRefuter refuter(n, 0.1, 0.45);
    WeakLearnParams params;
    params.eps = 0.0125;
    params.tau_prime = 0.002;
    Rng rng(16);
    const WeakLearnResult res = sq_refuter_to_weak_learner(refuter, oracle, params, rng);
    CHECK(res.constant_shortcut);
    CHECK(dist(*res.hypothesis.fn, ones, Distribution::uniform(n)) == 0.0);
}

TEST_CASE("weak learner parameter validation") {
    WeakLearnParams params;
    params.eps = 0.2;  // breaks alpha <= 1/2 - (eps + 2 tau')
    params.tau_prime = 0.1;
    CHECK_THROWS_AS(params.validate(0.45, 0.1), ConfigError);
}

TEST_CASE("weak learner flags a refuter that never diverges") {
    const int n = 8;
    const BooleanFunction target = BooleanFunction::dictator(n, 3);
    WeakSqOracle oracle(target, Distribution::uniform(n), ToleranceMode::exact(), Rng(17));
    AlwaysNoiseRefuter refuter;
    WeakLearnParams params;
    params.eps = 0.0125;
    params.tau_prime = 0.002;
    params.amplification_rounds = 3;
    Rng rng(18);
    CHECK_THROWS_AS(sq_refuter_to_weak_learner(refuter, oracle, params, rng), ContractViolation);
}

TEST_CASE("weak learner on dictators beats random guessing") {
    const int n = 8;
    const double tau = 0.1;
    const double eps = tau / 8.0;
    const BooleanFunction target = BooleanFunction::dictator(n, 3);
    const Distribution u = Distribution::uniform(n);
    RefutationSqOracle replay(LabeledDistribution::deterministic(u, target),
                              ToleranceMode::exact(), Rng(0));
    for (int t = 0; t < 10; ++t) {
        Rng rng(stream_tag("weak") + t);
        WeakSqOracle oracle(target, u,
                            ToleranceMode::adversarial_sign(
                                0.002, [c = t](double) mutable { return (c++ % 2) ? -1 : 1; }),
                            rng.split(1));
        CoordinateCorrelationRefuter refuter(n, tau, 0.45);
        WeakLearnParams params;
        params.eps = eps;
        params.tau_prime = 0.002;
        const WeakLearnResult res = sq_refuter_to_weak_learner(refuter, oracle, params, rng);
        CHECK(dist(*res.hypothesis.fn, target, u) <= 0.5 - eps);
        for (const auto& entry : res.low_corr_log)
            CHECK(std::abs(entry.answer - replay.exact_value(entry.phi)) <= tau);
    }
}

TEST_CASE("feature selection on a dictator") {
    const int n = 8;
    auto cls = std::make_shared<JuntaClass>(n, 2);
    ReferenceTlqOptions lopt;
    lopt.eps = 0.025;
    lopt.sample_need = 30;
    lopt.train_count = 24;
    lopt.estimate_count = 4;
    lopt.fresh_queries = 4;
    auto learner = std::make_shared<ReferenceTlqLearner>(cls, lopt);
    RefutationParams params = RefutationParams::for_learner(n, *learner, 0.0);
    params.C1 = 0.5;
    params.C2 = 0.02;
    params.C3 = 0.00375;

    const BooleanFunction f = BooleanFunction::dictator(n, 0);
    const PairSampler sampler = [f, n](Rng& r) {
        const std::uint32_t x = r.bits(n);
        return Example{x, f(x)};
    };
    const RefuterFn refuter = [&](std::span<const Example> ex, Rng& rng) {
        return biased_refutation(ex, params, *learner, rng);
    };
    FeatureSelectOptions fs;
    fs.k = 2;
    fs.delta = 0.05;
    fs.samples_per_run = params.m_prime();
    fs.runs_per_estimate = 700;
    Rng rng(19);
    CHECK(feature_select(refuter, sampler, n, fs, rng) == 0);

    // Constant targets violate the mean precondition: every prefix behaves
    // identically and no qualifying gap exists.
    const BooleanFunction constant = BooleanFunction::constant(n, true);
    const PairSampler const_sampler = [constant, n](Rng& r) {
        const std::uint32_t x = r.bits(n);
        return Example{x, constant(x)};
    };
    CHECK_THROWS_AS(feature_select(refuter, const_sampler, n, fs, rng), ContractViolation);
}

TEST_CASE("junta tree learning recovers a two-coordinate parity") {
    const int n = 10;
    const int k = 2;
    auto make_setup = [&](int dim) {
        auto cls = std::make_shared<JuntaClass>(dim, std::min(k, dim));
        ReferenceTlqOptions lopt;
        lopt.eps = 0.025;
        lopt.sample_need = 30;
        lopt.train_count = 24;
        lopt.estimate_count = 4;
        lopt.fresh_queries = 4;
        auto learner = std::make_shared<ReferenceTlqLearner>(cls, lopt);
        RefutationParams params = RefutationParams::for_learner(dim, *learner, 0.0);
        params.C1 = 0.5;
        params.C2 = 0.02;
        params.C3 = 0.00375;
        return std::make_pair(learner, params);
    };
    RefuterFactory factory;
    factory.make = [&](int dim) -> RefuterFn {
        auto [learner, params] = make_setup(dim);
        return [learner, params](std::span<const Example> ex, Rng& rng) {
            return biased_refutation(ex, params, *learner, rng);
        };
    };
    factory.samples_per_run = [&](int dim) { return make_setup(dim).second.m_prime(); };

    const BooleanFunction f = BooleanFunction::parity(n, 0b11u);
    const PairSampler sampler = [f, n](Rng& r) {
        const std::uint32_t x = r.bits(n);
        return Example{x, f(x)};
    };
    JuntaPipelineOptions opt;
    opt.k = k;
    opt.eps = 0.025;
    opt.delta = 0.1;
    Rng rng(20);
    const Hypothesis h = learn_junta_via_refutation(factory, sampler, n, opt, rng);
    CHECK(dist(*h.fn, f, Distribution::uniform(n)) == 0.0);

    // Constant target: depth-0 tree.
    const BooleanFunction zero = BooleanFunction::constant(n, false);
    const PairSampler zero_sampler = [zero, n](Rng& r) {
        const std::uint32_t x = r.bits(n);
        return Example{x, zero(x)};
    };
    const Hypothesis leaf = learn_junta_via_refutation(factory, zero_sampler, n, opt, rng);
    CHECK(dist(*leaf.fn, zero, Distribution::uniform(n)) == 0.0);
}
