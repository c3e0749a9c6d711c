#include <doctest.h>

#include <cmath>
#include <map>

#include "sqlab/distribution.hpp"
#include "sqlab/fourier.hpp"
#include "sqlab/labeled.hpp"
#include "sqlab/permutation.hpp"

using namespace sqlab;

namespace {

// Independent slow spectrum: apply the definition pointwise.
std::map<std::uint32_t, double> spectrum_by_definition(const std::vector<double>& table, int n) {
    std::map<std::uint32_t, double> out;
    const std::uint32_t size = 1u << n;
    for (std::uint32_t s = 0; s < size; ++s) {
        double acc = 0.0;
        for (std::uint32_t x = 0; x < size; ++x) acc += table[x] * chi(s, x);
        out[s] = acc / size;
    }
    return out;
}

}  // namespace

TEST_CASE("bitvector invariants") {
    CHECK_THROWS_AS(BitVector(3, 0b1000u), DimensionMismatch);
    CHECK_THROWS_AS(BitVector(0, 0u), DimensionMismatch);
    CHECK_THROWS_AS(BitVector(25, 0u), DimensionMismatch);
    const BitVector x(3, 0b101u);
    CHECK(x.bit(0));
    CHECK_FALSE(x.bit(1));
    CHECK(x.popcount() == 2);
}

TEST_CASE("eval basics") {
    const BooleanFunction zero = BooleanFunction::constant(4, false);
    for (std::uint32_t x = 0; x < 16; ++x) CHECK_FALSE(zero(x));

    // Parity of coordinates {0,1}; equal bits XOR to 0.
    const BooleanFunction par = BooleanFunction::parity(4, 0b11u);
    CHECK_FALSE(par(0b0011u));
    CHECK(par(0b0001u));
    CHECK_THROWS_AS(par.eval(BitVector(3, 0u)), DimensionMismatch);
}

TEST_CASE("lazy biased memo consistency") {
    BooleanFunction f = BooleanFunction::lazy_biased(8, 0.3, Rng(99));
    const bool first = f(0b0101u);
    for (int i = 0; i < 10; ++i) CHECK(f(0b0101u) == first);
    // Copies share the realized table.
    const BooleanFunction g = f;
    CHECK(g(0b0101u) == first);
}

TEST_CASE("lazy biased empirical mean tracks p") {
    BooleanFunction f = BooleanFunction::lazy_biased(20, 0.3, Rng(7));
    double ones = 0;
    for (std::uint32_t x = 0; x < 100000; ++x) ones += f(x) ? 1 : 0;
    CHECK(std::abs(ones / 100000.0 - 0.3) < 0.02);
}

TEST_CASE("mean over distributions") {
    const Distribution u2 = Distribution::uniform(2);
    CHECK(mean(BooleanFunction::parity(2, 0b11u), u2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mean(BooleanFunction::constant(2, true), Distribution::point_mass(2, 3)) == 1.0);

    // AND(x0, x1) on n = 2: enumerate all four inputs.
    const BooleanFunction f =
        BooleanFunction::from_bits(2, [](std::uint32_t x) { return x == 0b11u; });
    double expected = 0.0;
    for (std::uint32_t x = 0; x < 4; ++x) expected += (x == 0b11u) ? 0.25 : 0.0;
    CHECK(expected == 0.25);
    CHECK(mean(f, u2) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dist identities") {
    Rng rng(3);
    const BooleanFunction f = BooleanFunction::random(6, rng);
    const Distribution u = Distribution::uniform(6);
    CHECK(dist(f, f, u) == 0.0);
    const BooleanFunction nf =
        BooleanFunction::from_bits(6, [&](std::uint32_t x) { return !f(x); });
    CHECK(dist(f, nf, u) == 1.0);
    CHECK(dist(BooleanFunction::parity(6, 0b1u), BooleanFunction::parity(6, 0b110u), u) == 0.5);
}

TEST_CASE("err against labeled distributions") {
    const int n = 5;
    const Distribution u = Distribution::uniform(n);
    Rng rng(11);
    const BooleanFunction g = BooleanFunction::random(n, rng);
    CHECK(err(g, LabeledDistribution::deterministic(u, g)) == 0.0);

    // Constant Bernoulli labels: err = mu (1-p) + (1-mu) p, by direct expansion.
    for (double p : {0.2, 0.5, 0.9}) {
        const double mu = mean(g, u);
        const double expected = mu * (1.0 - p) + (1.0 - mu) * p;
        CHECK(err(g, LabeledDistribution::constant_bernoulli(u, p)) ==
              doctest::Approx(expected).epsilon(1e-12));
    }

    const BooleanFunction ng =
        BooleanFunction::from_bits(n, [&](std::uint32_t x) { return !g(x); });
    CHECK(err(ng, LabeledDistribution::deterministic(u, g)) == 1.0);
}

TEST_CASE("walsh-hadamard basis functions") {
    const int n = 5;
    // chi_S itself: coefficient 1 at S, 0 elsewhere.
    const std::uint32_t s = 0b10110u;
    std::vector<double> table(1u << n);
    for (std::uint32_t x = 0; x < table.size(); ++x) table[x] = chi(s, x);
    const FourierSpectrum spec = walsh_hadamard(table, n);
    for (std::uint32_t t = 0; t < (1u << n); ++t)
        CHECK(spec[t] == doctest::Approx(t == s ? 1.0 : 0.0).epsilon(1e-12));

    const FourierSpectrum ones = walsh_hadamard(std::vector<double>(1u << n, 1.0), n);
    CHECK(ones[0] == doctest::Approx(1.0));
    CHECK(ones.parseval_sum() == doctest::Approx(1.0));
}

TEST_CASE("walsh-hadamard of AND matches the pointwise definition") {
    // g = 1 - 2 AND(x0, x1) on n = 2.
    std::vector<double> table{1.0, 1.0, 1.0, -1.0};
    const auto expected = spectrum_by_definition(table, 2);
    CHECK(expected.at(0b00u) == doctest::Approx(0.5));
    CHECK(expected.at(0b01u) == doctest::Approx(0.5));
    CHECK(expected.at(0b10u) == doctest::Approx(0.5));
    CHECK(expected.at(0b11u) == doctest::Approx(-0.5));
    const FourierSpectrum spec = walsh_hadamard(table, 2);
    for (const auto& [s, v] : expected) CHECK(spec[s] == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("walsh-hadamard round trip and parseval across dimensions") {
    for (int n = 4; n <= 14; n += 5) {
        for (int t = 0; t < 20; ++t) {
            Rng rng(stream_tag("wht") + n * 100 + t);
            const BooleanFunction f = BooleanFunction::random(n, rng);
            const std::vector<double> table = pm1_table(f);
            const FourierSpectrum spec = walsh_hadamard(table, n);
            const std::vector<double> back = inverse_walsh_hadamard(spec);
            double worst = 0.0;
            for (std::size_t i = 0; i < table.size(); ++i)
                worst = std::max(worst, std::abs(back[i] - table[i]));
            CHECK(worst <= 1e-12);
            CHECK(std::abs(spec.parseval_sum() - 1.0) <= 1e-9);
        }
    }
    CHECK_THROWS_AS(walsh_hadamard(std::vector<double>(4, 0.0), 25), DimensionMismatch);
}

TEST_CASE("influence basics and spectral identity") {
    const int n = 8;
    const BooleanFunction par = BooleanFunction::parity(n, 0b1011u);
    CHECK(influence_exact(par, 0) == 1.0);
    CHECK(influence_exact(par, 2) == 0.0);

    // AND(x0, x1): flipping x0 changes the value iff x1 = 1.
    const BooleanFunction f =
        BooleanFunction::from_bits(2, [](std::uint32_t x) { return x == 0b11u; });
    CHECK(influence_exact(f, 0) == doctest::Approx(0.5));

    Rng rng(17);
    const BooleanFunction g = BooleanFunction::random(n, rng);
    const FourierSpectrum spec = walsh_hadamard(pm1_table(g), n);
    for (int i = 0; i < n; ++i) {
        double weight = 0.0;
        for (std::uint32_t s = 0; s < (1u << n); ++s)
            if ((s >> i) & 1u) weight += spec[s] * spec[s];
        CHECK(std::abs(influence_exact(g, i) - weight) <= 1e-9);
    }
    CHECK_THROWS_AS(influence_exact(g, n), DimensionMismatch);
}

TEST_CASE("restricted influence matches subcube enumeration") {
    Rng rng(23);
    const int n = 8;
    const BooleanFunction f = BooleanFunction::random(n, rng);
    const Restriction r{0b1100u, 0b0100u};
    const int i = 0;
    double diff = 0.0, total = 0.0;
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
        if (!r.contains(x)) continue;
        total += 1.0;
        if (f(x) != f(x ^ 1u)) diff += 1.0;
    }
    CHECK(influence_exact(f, i, r) == doctest::Approx(diff / total).epsilon(1e-12));
    CHECK_THROWS_AS(influence_exact(f, 2, r), QueryError);
}

TEST_CASE("prefix randomization") {
    Rng rng(31);
    const int n = 6;
    const BooleanFunction f = BooleanFunction::random(n, rng);
    for (std::uint32_t x = 0; x < (1u << n); ++x)
        CHECK(f.prefix_randomized_eval(0, x, rng) == f(x));

    const BooleanFunction par = BooleanFunction::parity(n, low_mask(n));
    double ones = 0;
    for (int t = 0; t < 20000; ++t) ones += par.prefix_randomized_eval(n, 0, rng) ? 1 : 0;
    CHECK(std::abs(ones / 20000.0 - 0.5) < 0.02);
}

TEST_CASE("prefix crossing an irrelevant coordinate leaves the output law unchanged") {
    // Junta on coordinates {0, 2}; coordinate 1 is irrelevant, so the exact
    // output distribution of f^{>2} equals that of f^{>1} at every input.
    const int n = 5;
    const BooleanFunction f = BooleanFunction::from_bits(
        n, [](std::uint32_t x) { return ((x & 1u) ^ ((x >> 2) & 1u)) != 0; });
    const int ell = 2;  // coordinate index 1 is the one being crossed
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
        // Exact law: enumerate all assignments of the rerandomized prefix.
        std::uint64_t ones_lo = 0, ones_hi = 0;
        for (std::uint32_t a = 0; a < (1u << (ell - 1)); ++a)
            if (f((x & ~low_mask(ell - 1)) | a)) ++ones_lo;
        for (std::uint32_t a = 0; a < (1u << ell); ++a)
            if (f((x & ~low_mask(ell)) | a)) ++ones_hi;
        CHECK(ones_lo * 2 == ones_hi);
    }
}

TEST_CASE("distribution invariants") {
    CHECK(Distribution::uniform(10).l2_norm_sq() == doctest::Approx(std::ldexp(1.0, -10)));
    const Restriction r{0b0111u, 0b0101u};
    const Distribution sub = Distribution::subcube(10, r);
    CHECK(sub.l2_norm_sq() == doctest::Approx(std::ldexp(1.0, -7)));
    CHECK(Distribution::point_mass(10, 5).l2_norm_sq() == 1.0);

    // Structured norms agree with the explicit-PMF recomputation.
    for (const Distribution& d :
         {Distribution::uniform(6), Distribution::subcube(6, Restriction{0b11u, 0b10u}),
          Distribution::point_mass(6, 9)}) {
        std::vector<double> w(1u << 6, 0.0);
        d.for_each_support([&](std::uint32_t x, double p) { w[x] = p; });
        const Distribution e = Distribution::explicit_pmf(6, std::move(w));
        CHECK(e.l2_norm_sq() == doctest::Approx(d.l2_norm_sq()).epsilon(1e-12));
        double mass = 0.0;
        d.for_each_support([&](std::uint32_t, double p) { mass += p; });
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }

    // Normalization tolerance: 1e-7 drift is repaired, 1e-3 is rejected.
    std::vector<double> near(1u << 3, 0.125);
    near[0] += 1e-7;
    CHECK_NOTHROW(Distribution::explicit_pmf(3, near));
    std::vector<double> off(1u << 3, 0.125);
    off[0] += 1e-3;
    CHECK_THROWS_AS(Distribution::explicit_pmf(3, off), QueryError);
}

TEST_CASE("subcube expectation iterates only the support") {
    Rng rng(41);
    const int n = 10;
    const BooleanFunction f = BooleanFunction::random(n, rng);
    const Restriction r{0b1001u, 0b1000u};
    const Distribution sub = Distribution::subcube(n, r);
    double direct = 0.0;
    int count = 0;
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
        if (!r.contains(x)) continue;
        direct += f(x);
        ++count;
    }
    CHECK(mean(f, sub) == doctest::Approx(direct / count).epsilon(1e-12));
}

TEST_CASE("xor-shift permutations are fixed-point free") {
    for (int n = 2; n <= 8; ++n)
        for (std::uint32_t d = 1; d < (1u << n); ++d)
            CHECK(Permutation::xor_shift(n, d).fixed_point_free_exhaustive());
    Rng rng(55);
    for (int t = 0; t < 50; ++t) {
        const std::uint32_t d = 1 + rng.below((1u << 14) - 1);
        CHECK(Permutation::xor_shift(14, d).fixed_point_free_exhaustive());
    }
    CHECK_THROWS_AS(Permutation::xor_shift(4, 0), QueryError);
}

TEST_CASE("explicit permutation validation") {
    CHECK_THROWS_AS(Permutation::table(2, {0, 1, 2, 3}), QueryError);  // fixed points
    CHECK_THROWS_AS(Permutation::table(2, {1, 0, 3, 3}), QueryError);  // not a bijection
    const Permutation pi = Permutation::table(2, {1, 2, 3, 0});
    CHECK(pi.fixed_point_free_exhaustive());
    Rng rng(66);
    for (int t = 0; t < 10; ++t)
        CHECK(Permutation::random_fixed_point_free(6, rng).fixed_point_free_exhaustive());
}

TEST_CASE("labeled distribution positive rate") {
    const Distribution u = Distribution::uniform(4);
    const BooleanFunction g = BooleanFunction::from_bits(
        4, [](std::uint32_t x) { return x == 0b11u || x == 0b1111u; });
    const LabeledDistribution d = LabeledDistribution::deterministic(u, g);
    CHECK(d.positive_rate() == doctest::Approx(2.0 / 16.0));
    CHECK(LabeledDistribution::constant_bernoulli(u, 0.37).positive_rate() ==
          doctest::Approx(0.37));
    std::vector<double> y(16, 0.25);
    CHECK(LabeledDistribution::general(u, y).positive_rate() == doctest::Approx(0.25));
}
