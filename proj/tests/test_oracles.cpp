#include <doctest.h>

#include <cmath>
#include <set>

#include "sqlab/oracles.hpp"

using namespace sqlab;

namespace {

// Brute-force reference for every query type, fully independent of the
// oracle's fast paths and caches.
double reference_value(const BooleanFunction& f, const Distribution& marginal,
                       const MqsqQuery& q) {
    const std::uint32_t size = 1u << f.dim();
    auto pmf = [&](const Distribution& d, std::uint32_t x) { return d.pmf(x); };
    double acc = 0.0;
    for (std::uint32_t x = 0; x < size; ++x) {
        const double fx = f(x) ? 1.0 : 0.0;
        switch (q.type) {
            case MqsqQuery::Type::I:
                acc += pmf(*q.dstar, x) * q.phi(x) * fx;
                break;
            case MqsqQuery::Type::II:
                acc += pmf(*q.dstar, x) * q.phi(x) * fx * (f(q.pi->apply(x)) ? 1.0 : 0.0);
                break;
            case MqsqQuery::Type::III:
                acc += pmf(marginal, x) * q.phi(x);
                break;
            case MqsqQuery::Type::IV:
                acc += pmf(marginal, x) * q.phi(x) * fx;
                break;
            case MqsqQuery::Type::V:
                acc += pmf(marginal, x) * q.phi(x) * fx * (f(q.pi->apply(x)) ? 1.0 : 0.0);
                break;
        }
    }
    return acc;
}

MqsqQuery random_query(int n, Rng& rng) {
    const int which = static_cast<int>(rng.below(5));
    TestFunction phi;
    switch (rng.below(3)) {
        case 0: phi = TestFunction::one(); break;
        case 1: phi = TestFunction::half_plus_half_chi(rng.bits(n)); break;
        default: {
            std::vector<double> t(1u << n);
            for (double& v : t) v = rng.real();
            phi = TestFunction::from_dense(std::move(t));
        }
    }
    Distribution dstar = rng.bit() ? Distribution::uniform(n)
                                   : Distribution::subcube(n, Restriction{0b11u, rng.bits(2)});
    Permutation pi = Permutation::xor_shift(n, 1 + rng.below((1u << n) - 1));
    switch (which) {
        case 0: return MqsqQuery::type1(phi, dstar);
        case 1: return MqsqQuery::type2(phi, dstar, pi);
        case 2: return MqsqQuery::type3(phi);
        case 3: return MqsqQuery::type4(phi);
        default: return MqsqQuery::type5(phi, pi);
    }
}

}  // namespace

TEST_CASE("example oracle draws") {
    const int n = 6;
    Rng rng(1);
    const BooleanFunction g = BooleanFunction::random(n, rng);
    ExampleOracle det(LabeledDistribution::deterministic(Distribution::uniform(n), g), Rng(2));
    for (const Example& e : det.draw(200)) CHECK(e.y == g(e.x));
    CHECK(det.samples_drawn() == 200);

    ExampleOracle coin(
        LabeledDistribution::constant_bernoulli(Distribution::uniform(n), 0.5), Rng(3));
    double ones = 0;
    for (const Example& e : coin.draw(100000)) ones += e.y ? 1 : 0;
    CHECK(std::abs(ones / 100000.0 - 0.5) < 0.01);

    ExampleOracle point(
        LabeledDistribution::constant_bernoulli(Distribution::point_mass(n, 17), 0.3), Rng(4));
    for (const Example& e : point.draw(50)) CHECK(e.x == 17u);

    QueryBudget budget;
    budget.max_samples = 5;
    ExampleOracle capped(LabeledDistribution::deterministic(Distribution::uniform(n), g), Rng(5),
                         budget);
    capped.draw(5);
    CHECK_THROWS_AS(capped.draw(), BudgetExhausted);
}

TEST_CASE("membership oracle counting and log") {
    Rng rng(6);
    MembershipOracle mq(BooleanFunction::random(6, rng));
    const bool b1 = mq.query_raw(9);
    const bool b2 = mq.query_raw(9);
    CHECK(b1 == b2);
    CHECK(mq.queries_made() == 2);
    for (int i = 0; i < 5; ++i) mq.query_raw(static_cast<std::uint32_t>(i));
    CHECK(mq.queries_made() == 7);
    CHECK(mq.log().size() == 7);
    CHECK(mq.log()[0] == 9u);

    MembershipOracle lazy(BooleanFunction::lazy_biased(20, 0.5, Rng(7)));
    const bool v = lazy.query_raw(12345);
    CHECK(lazy.query_raw(12345) == v);

    QueryBudget budget;
    budget.max_mq = 3;
    MembershipOracle capped(BooleanFunction::constant(4, true), budget);
    capped.query_raw(0);
    capped.query_raw(1);
    capped.query_raw(2);
    CHECK_THROWS_AS(capped.query_raw(3), BudgetExhausted);
}

TEST_CASE("mqsq trivial values") {
    const int n = 6;
    Rng rng(8);
    const BooleanFunction par = BooleanFunction::parity(n, 0b111u);
    MqsqOracle oracle(par, Distribution::uniform(n), ToleranceMode::exact(), Rng(9));

    CHECK(oracle.answer(MqsqQuery::type3(TestFunction::one())) == 1.0);
    CHECK(oracle.answer(MqsqQuery::type1(TestFunction::one(), Distribution::uniform(n))) ==
          doctest::Approx(0.5));

    // AND on n = 2: E[f(x) f(x xor e_0)] needs both 11 and 01 to map to 1.
    const BooleanFunction andf =
        BooleanFunction::from_bits(2, [](std::uint32_t x) { return x == 0b11u; });
    double expected = 0.0;
    for (std::uint32_t x = 0; x < 4; ++x)
        expected += 0.25 * (andf(x) ? 1.0 : 0.0) * (andf(x ^ 1u) ? 1.0 : 0.0);
    CHECK(expected == 0.0);
    MqsqOracle o2(andf, Distribution::uniform(2), ToleranceMode::exact(), Rng(10));
    CHECK(o2.answer(MqsqQuery::type2(TestFunction::one(), Distribution::uniform(2),
                                     Permutation::xor_shift(2, 1u))) == doctest::Approx(expected));
    (void)rng;
}

TEST_CASE("mqsq exact mode agrees with brute force, fast paths included") {
    for (int n : {6, 10, 12}) {
        Rng rng(stream_tag("brute") + n);
        const BooleanFunction f = BooleanFunction::random(n, rng);
        const Distribution marginal =
            n == 10 ? Distribution::subcube(n, Restriction{0b101u, 0b100u})
                    : Distribution::uniform(n);
        MqsqOracle oracle(f, marginal, ToleranceMode::exact(), Rng(11));
        for (int t = 0; t < 60; ++t) {
            const MqsqQuery q = random_query(n, rng);
            CHECK(std::abs(oracle.answer(q) - reference_value(f, marginal, q)) <= 1e-12);
        }
    }
}

TEST_CASE("tolerance modes stay within tau") {
    const int n = 8;
    Rng rng(12);
    const BooleanFunction f = BooleanFunction::random(n, rng);
    const Distribution u = Distribution::uniform(n);
    const double tau = 0.01;

    int flip = 0;
    ToleranceMode modes[] = {
        ToleranceMode::round_to_grid(tau),
        ToleranceMode::adversarial_sign(tau),
        ToleranceMode::adversarial_sign(tau, [&flip](double) { return (flip++ % 2) ? -1 : 1; })};
    for (ToleranceMode& mode : modes) {
        MqsqOracle exact(f, u, ToleranceMode::exact(), Rng(13));
        MqsqOracle noisy(f, u, mode, Rng(13));
        double worst = 0.0;
        for (int t = 0; t < 2500; ++t) {
            const MqsqQuery q = random_query(n, rng);
            worst = std::max(worst, std::abs(noisy.answer(q) - exact.answer(q)));
        }
        CHECK(worst <= tau + 1e-12);
    }
}

TEST_CASE("adversarial sign returns exactly truth plus or minus tau") {
    const int n = 6;
    Rng rng(14);
    const BooleanFunction f = BooleanFunction::random(n, rng);
    const Distribution u = Distribution::uniform(n);
    const double tau = 0.03;
    MqsqOracle plus(f, u, ToleranceMode::adversarial_sign(tau), Rng(15));
    MqsqOracle minus(f, u, ToleranceMode::adversarial_sign(tau, [](double) { return -1; }),
                     Rng(15));
    MqsqOracle exact(f, u, ToleranceMode::exact(), Rng(15));
    for (int t = 0; t < 200; ++t) {
        const MqsqQuery q = random_query(n, rng);
        const double truth = exact.answer(q);
        CHECK(plus.answer(q) == doctest::Approx(truth + tau).epsilon(1e-14));
        CHECK(minus.answer(q) == doctest::Approx(truth - tau).epsilon(1e-14));
    }
}

TEST_CASE("sampling mode violation rate below the declared bound") {
    const int n = 8;
    Rng rng(16);
    const BooleanFunction f = BooleanFunction::random(n, rng);
    const Distribution u = Distribution::uniform(n);
    const double tau = 0.05;
    const int m = 400;
    const ToleranceMode mode = ToleranceMode::sampling(m, tau);
    const double declared = mode.declared_failure_probability();
    CHECK(declared == doctest::Approx(2.0 * std::exp(-2.0 * m * tau * tau)));

    MqsqOracle noisy(f, u, mode, Rng(17));
    MqsqOracle exact(f, u, ToleranceMode::exact(), Rng(17));
    int violations = 0;
    const int sweeps = 10000;
    for (int t = 0; t < sweeps; ++t) {
        const MqsqQuery q = random_query(n, rng);
        if (std::abs(noisy.answer(q) - exact.answer(q)) > tau) ++violations;
    }
    CHECK(static_cast<double>(violations) / sweeps <= declared);
}

TEST_CASE("budget and norm accounting") {
    const int n = 6;
    Rng rng(18);
    const BooleanFunction f = BooleanFunction::random(n, rng);
    QueryBudget budget;
    budget.max_sq = 4;
    MqsqOracle oracle(f, Distribution::uniform(n), ToleranceMode::exact(), Rng(19), budget);
    const Distribution sub = Distribution::subcube(n, Restriction{0b11u, 0b01u});
    oracle.answer(MqsqQuery::type1(TestFunction::one(), Distribution::uniform(n)));
    oracle.answer(MqsqQuery::type1(TestFunction::one(), sub));
    CHECK(oracle.queries_made() == 2);
    CHECK(oracle.max_dstar_l2_sq() == doctest::Approx(std::ldexp(1.0, -4)));
    oracle.answer(MqsqQuery::type3(TestFunction::one()));
    oracle.answer(MqsqQuery::type4(TestFunction::one()));
    CHECK_THROWS_AS(oracle.answer(MqsqQuery::type3(TestFunction::one())), BudgetExhausted);
    CHECK(oracle.queries_made() == 4);
}

TEST_CASE("query validation") {
    const int n = 4;
    Rng rng(20);
    const BooleanFunction f = BooleanFunction::random(n, rng);
    MqsqOracle oracle(f, Distribution::uniform(n), ToleranceMode::exact(), Rng(21));

    // phi out of range is rejected on evaluation.
    const TestFunction bad = TestFunction::from_fn([](std::uint32_t) { return 1.5; });
    CHECK_THROWS_AS(oracle.answer(MqsqQuery::type3(bad)), QueryError);
    CHECK_THROWS_AS(TestFunction::from_dense({0.5, -0.2, 0.1, 0.9}), QueryError);

    // Dimension mismatches.
    CHECK_THROWS_AS(oracle.answer(MqsqQuery::type1(TestFunction::one(), Distribution::uniform(5))),
                    DimensionMismatch);
}

TEST_CASE("refutation sq oracle") {
    const int n = 6;
    const Distribution u = Distribution::uniform(n);
    RefutationSqOracle bern(LabeledDistribution::constant_bernoulli(u, 0.3),
                            ToleranceMode::exact(), Rng(22));
    CHECK(bern.answer(PairTestFunction::label_only()) == doctest::Approx(0.3));
    CHECK(bern.answer(PairTestFunction::of_x(TestFunction::one())) == doctest::Approx(1.0));

    // phi(x,y) = y 1{x_0 = 1} with labels y = x_0: direct summation gives 1/2.
    const BooleanFunction dict = BooleanFunction::dictator(n, 0);
    RefutationSqOracle det(LabeledDistribution::deterministic(u, dict), ToleranceMode::exact(),
                           Rng(23));
    double direct = 0.0;
    for (std::uint32_t x = 0; x < (1u << n); ++x)
        direct += std::ldexp(1.0, -n) * (dict(x) ? 1.0 : 0.0) * ((x & 1u) ? 1.0 : 0.0);
    CHECK(direct == doctest::Approx(0.5));
    CHECK(det.answer(PairTestFunction::x_times_label(TestFunction::coordinate(0))) ==
          doctest::Approx(direct));
    CHECK(det.queries_made() == 1);
}

TEST_CASE("weak sq oracle") {
    const int n = 6;
    const BooleanFunction target = BooleanFunction::dictator(n, 2);
    WeakSqOracle oracle(target, Distribution::uniform(n), ToleranceMode::exact(), Rng(24));
    CHECK(oracle.answer(TestFunction::one()) == doctest::Approx(0.5));
    CHECK(oracle.answer(TestFunction::coordinate(2)) == doctest::Approx(0.5));
    CHECK(oracle.answer(TestFunction::coordinate(3)) == doctest::Approx(0.25));
    CHECK(oracle.queries_made() == 3);
}
