#include "sqlab/learners.hpp"

#include <algorithm>
#include <cmath>

#include "sqlab/fourier.hpp"

namespace sqlab {

Hypothesis Hypothesis::reject(std::string learner_name) {
    Hypothesis h;
    h.learner = std::move(learner_name);
    return h;
}

Hypothesis Hypothesis::of(BooleanFunction f, std::string learner_name) {
    Hypothesis h;
    h.fn = std::move(f);
    h.learner = std::move(learner_name);
    return h;
}

// ---------------------------------------------------------------------------
// Influence and junta learning via MQ-SQ

double influence_mqsq(MqsqOracleBase& oracle, int i, const std::optional<Restriction>& r) {
    const int n = oracle.dim();
    if (i < 0 || i >= n) throw DimensionMismatch("influence_mqsq: coordinate out of range");
    if (r && r->fixes(i)) throw QueryError("influence_mqsq: coordinate is fixed by the restriction");

    const Distribution dstar =
        r ? Distribution::subcube(n, *r) : Distribution::uniform(n);
    const double mean_f = oracle.answer(MqsqQuery::type1(TestFunction::one(), dstar));
    const double pair = oracle.answer(
        MqsqQuery::type2(TestFunction::one(), dstar, Permutation::xor_shift(n, 1u << i)));
    return 2.0 * mean_f - 2.0 * pair;
}

Hypothesis learn_junta_mqsq(MqsqOracleBase& oracle, const JuntaLearnOptions& opt) {
    const int n = oracle.dim();
    const double threshold =
        opt.influence_threshold > 0 ? opt.influence_threshold : std::ldexp(1.0, -opt.k);

    std::vector<int> relevant;
    for (int i = 0; i < n; ++i)
        if (influence_mqsq(oracle, i) >= threshold) relevant.push_back(i);
    if (static_cast<int>(relevant.size()) > opt.k)
        throw ContractViolation("learn_junta_mqsq: more than k coordinates passed the threshold");

    std::uint32_t mask = 0;
    for (int i : relevant) mask |= 1u << i;

    // One subcube mean per assignment of the relevant set, rounded to a bit.
    const std::uint32_t cells = 1u << relevant.size();
    std::vector<bool> cell_bit(cells);
    for (std::uint32_t a = 0; a < cells; ++a) {
        std::uint32_t value = 0;
        for (std::size_t j = 0; j < relevant.size(); ++j)
            if ((a >> j) & 1u) value |= 1u << relevant[j];
        const Distribution sub = Distribution::subcube(n, Restriction{mask, value});
        cell_bit[a] = oracle.answer(MqsqQuery::type1(TestFunction::one(), sub)) >= 0.5;
    }

    auto table = BooleanFunction::from_bits(n, [&](std::uint32_t x) {
        std::uint32_t a = 0;
        for (std::size_t j = 0; j < relevant.size(); ++j)
            if ((x >> relevant[j]) & 1u) a |= 1u << j;
        return static_cast<bool>(cell_bit[a]);
    });
    Hypothesis h = Hypothesis::of(std::move(table), "junta_mqsq");
    h.sq_used = oracle.queries_made();
    return h;
}

// ---------------------------------------------------------------------------
// Kushilevitz-Mansour via MQ-SQ

double km_coeff_mqsq(MqsqOracleBase& oracle, std::uint32_t s) {
    const int n = oracle.dim();
    const Distribution u = Distribution::uniform(n);
    const double a =
        oracle.answer(MqsqQuery::type1(TestFunction::half_plus_half_chi(s), u));
    const double b = oracle.answer(MqsqQuery::type1(TestFunction::one(), u));
    // E[f chi_S] = 2a - b; in the +-1 convention (b -> 1-2b):
    return (s == 0 ? 1.0 : 0.0) - 2.0 * (2.0 * a - b);
}

double km_weight_mqsq(MqsqOracleBase& oracle, std::uint32_t s, std::uint32_t j, int num_samples,
                      Rng& rng) {
    if ((s & ~j) != 0) throw QueryError("km_weight_mqsq: S must be a subset of J");
    if (num_samples <= 0) throw QueryError("km_weight_mqsq: need at least one sample");
    const int n = oracle.dim();
    const Distribution u = Distribution::uniform(n);
    const double mean_f = oracle.answer(MqsqQuery::type1(TestFunction::one(), u));

    double acc = 0.0;
    for (int t = 0; t < num_samples; ++t) {
        const std::uint32_t delta = rng.bits(n) & j;
        if (delta == 0) {
            acc += 1.0;  // chi_S(0) = 1 and E[f(x)^2] = 1 in the +-1 convention
            continue;
        }
        const double pair = oracle.answer(
            MqsqQuery::type2(TestFunction::one(), u, Permutation::xor_shift(n, delta)));
        // (1-2a)(1-2b) expansion; E_U[f(x xor delta)] = E_U[f].
        const double pm1_pair = 1.0 - 4.0 * mean_f + 4.0 * pair;
        acc += chi(s, delta) * pm1_pair;
    }
    return acc / num_samples;
}

Hypothesis km_learn(MqsqOracleBase& oracle, const KmOptions& opt, Rng& rng) {
    const int n = oracle.dim();
    const double theta = opt.bucket_threshold > 0
                             ? opt.bucket_threshold
                             : opt.eps * opt.eps / (4.0 * opt.sparsity);
    const std::size_t max_live =
        opt.max_live_buckets > 0
            ? opt.max_live_buckets
            : static_cast<std::size_t>(std::ceil(4.0 * opt.sparsity / (opt.eps * opt.eps)));
    int weight_samples = opt.weight_samples;
    if (weight_samples <= 0) {
        const double want =
            std::ceil(32.0 * std::log(40.0 * n * opt.sparsity / opt.eps) / (theta * theta));
        weight_samples = static_cast<int>(std::min(want, 1e5));
    }

    std::vector<std::uint32_t> live{0};
    for (int level = 0; level < n; ++level) {
        std::vector<std::uint32_t> next;
        const std::uint32_t j = low_mask(level + 1);
        for (std::uint32_t s : live) {
            for (const std::uint32_t child : {s, s | (1u << level)}) {
                if (km_weight_mqsq(oracle, child, j, weight_samples, rng) >= theta)
                    next.push_back(child);
            }
        }
        if (next.size() > max_live)
            throw ContractViolation("km_learn: surviving buckets exceed 4s/eps^2");
        live = std::move(next);
    }

    std::vector<std::pair<std::uint32_t, double>> coeffs;
    coeffs.reserve(live.size());
    for (std::uint32_t s : live) coeffs.emplace_back(s, km_coeff_mqsq(oracle, s));

    // Sign of the sparse +-1 approximation, mapped back to {0,1}.
    auto table = BooleanFunction::from_bits(n, [&](std::uint32_t x) {
        double g = 0.0;
        for (const auto& [s, c] : coeffs) g += c * chi(s, x);
        return g < 0.0;
    });
    Hypothesis h = Hypothesis::of(std::move(table), "km");
    h.sq_used = oracle.queries_made();
    return h;
}

// ---------------------------------------------------------------------------
// ERM

Hypothesis erm_agnostic(std::span<const Example> samples, const ConceptClass& cls) {
    const auto [idx, errors] = cls.erm(samples);
    (void)errors;
    Hypothesis h = Hypothesis::of(cls.member(idx), "erm");
    h.samples_used = samples.size();
    return h;
}

// ---------------------------------------------------------------------------
// Reference TL-Q learner

ReferenceTlqLearner::ReferenceTlqLearner(std::shared_ptr<const ConceptClass> cls,
                                         ReferenceTlqOptions opt)
    : cls_(std::move(cls)), opt_(opt) {
    if (!cls_ || cls_->size() == 0) throw QueryError("ReferenceTlqLearner: empty class");
    if (opt_.train_count + opt_.estimate_count > opt_.sample_need)
        throw ConfigError("ReferenceTlqLearner: train+estimate splits exceed declared samples");
}

TlqContract ReferenceTlqLearner::contract() const {
    TlqContract c;
    c.c = opt_.c;
    c.eps = opt_.eps;
    c.delta = opt_.delta;
    c.samples = opt_.sample_need;
    c.queries = opt_.train_count + opt_.estimate_count + opt_.fresh_queries;
    return c;
}

bool ReferenceTlqLearner::marginal_looks_uniform(std::span<const std::uint32_t> samples) const {
    const int n = cls_->dim();
    const double m = static_cast<double>(samples.size());
    const double stat_count = n + n * (n - 1) / 2.0 + 1.0;
    const double band =
        opt_.eps / 4.0 + std::sqrt(std::log(2.0 * stat_count / opt_.tester_delta) / (2.0 * m));

    for (int i = 0; i < n; ++i) {
        double mi = 0.0;
        for (std::uint32_t x : samples) mi += (x >> i) & 1u;
        if (std::abs(mi / m - 0.5) > band) return false;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double mij = 0.0;
            for (std::uint32_t x : samples) mij += ((x >> i) & 1u) & ((x >> j) & 1u);
            if (std::abs(mij / m - 0.25) > band) return false;
        }
    }

    // Birthday collisions against the uniform rate.
    std::vector<std::uint32_t> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double pairs = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t run = 1;
        while (i + run < sorted.size() && sorted[i + run] == sorted[i]) ++run;
        pairs += run * (run - 1) / 2.0;
        i += run;
    }
    const double total_pairs = m * (m - 1) / 2.0;
    const double rate = std::ldexp(1.0, -n) + opt_.eps / 4.0;
    const double allowed = total_pairs * rate + 3.0 * std::sqrt(total_pairs * rate) + 1.0;
    return pairs <= allowed;
}

Hypothesis ReferenceTlqLearner::run(std::span<const std::uint32_t> samples, MembershipOracle& mq,
                                    Rng& rng) {
    if (samples.size() < opt_.sample_need)
        throw ContractViolation("reference_tlq: insufficient samples for the declared (m, eps)");
    const auto pts = samples.first(opt_.sample_need);

    if (!marginal_looks_uniform(pts)) return Hypothesis::reject("reference_tlq");

    std::vector<Example> train, estimate;
    train.reserve(opt_.train_count);
    estimate.reserve(opt_.estimate_count);
    for (std::size_t i = 0; i < opt_.train_count; ++i)
        train.push_back({pts[i], mq.query_raw(pts[i])});
    for (std::size_t i = 0; i < opt_.estimate_count; ++i) {
        const std::uint32_t x = pts[opt_.train_count + i];
        estimate.push_back({x, mq.query_raw(x)});
    }

    const auto [best, train_errors] = cls_->erm(train);
    (void)train_errors;
    std::size_t est_errors = 0;
    for (const Example& e : estimate)
        if (cls_->member_eval(best, e.x) != e.y) ++est_errors;
    const double err_est = estimate.empty()
                               ? 0.0
                               : static_cast<double>(est_errors) / estimate.size();

    const int n = cls_->dim();
    std::size_t fresh_errors = 0;
    for (std::size_t i = 0; i < opt_.fresh_queries; ++i) {
        const std::uint32_t x = rng.bits(n);
        if (cls_->member_eval(best, x) != mq.query_raw(x)) ++fresh_errors;
    }
    const double d_hat = opt_.fresh_queries == 0
                             ? 0.0
                             : static_cast<double>(fresh_errors) / opt_.fresh_queries;

    const double slack =
        std::sqrt(std::log(2.0 / opt_.validation_delta) / (2.0 * std::max<std::size_t>(estimate.size(), 1))) +
        std::sqrt(std::log(2.0 / opt_.validation_delta) / (2.0 * std::max<std::size_t>(opt_.fresh_queries, 1)));
    if (d_hat > err_est + opt_.eps + slack) return Hypothesis::reject("reference_tlq");

    Hypothesis h = Hypothesis::of(cls_->member(best), "reference_tlq");
    h.mq_used = mq.queries_made();
    h.samples_used = pts.size();
    return h;
}

// ---------------------------------------------------------------------------
// MQ-SQ testable junta learner

MqsqJuntaTestableLearner::MqsqJuntaTestableLearner(MqsqJuntaTestableOptions opt) : opt_(opt) {
    if (opt_.k < 0 || opt_.k > opt_.n)
        throw ConfigError("MqsqJuntaTestableLearner: k out of range");
}

MqsqContract MqsqJuntaTestableLearner::contract() const {
    const std::size_t n = static_cast<std::size_t>(opt_.n);
    const std::size_t sweep = 2 * (n + n * (n - 1) / 2);
    MqsqContract c;
    c.c = opt_.c;
    c.eps = opt_.eps;
    c.delta = opt_.delta;
    c.queries = n + 1 + 2 * n + (std::size_t{1} << opt_.k) + 2 + sweep;
    c.tau = opt_.tau;
    c.max_dstar_l2_sq = std::ldexp(1.0, -(opt_.n - opt_.k));
    return c;
}

Hypothesis MqsqJuntaTestableLearner::run(MqsqOracleBase& oracle, Rng& rng) {
    (void)rng;
    const int n = opt_.n;
    if (oracle.dim() != n) throw DimensionMismatch("MqsqJuntaTestableLearner: dimension mismatch");

    for (int i = 0; i < n; ++i) {
        const double mi = oracle.answer(MqsqQuery::type3(TestFunction::coordinate(i)));
        if (std::abs(mi - 0.5) > opt_.moment_threshold)
            return Hypothesis::reject("mqsq_junta");
    }

    const double pf = oracle.answer(MqsqQuery::type4(TestFunction::one()));

    std::vector<int> relevant;
    for (int i = 0; i < n; ++i)
        if (influence_mqsq(oracle, i) >= std::ldexp(1.0, -opt_.k)) relevant.push_back(i);

    if (static_cast<int>(relevant.size()) <= opt_.k) {
        std::uint32_t mask = 0;
        for (int i : relevant) mask |= 1u << i;
        const std::uint32_t cells = 1u << relevant.size();
        std::vector<bool> cell_bit(cells);
        for (std::uint32_t a = 0; a < cells; ++a) {
            std::uint32_t value = 0;
            for (std::size_t j = 0; j < relevant.size(); ++j)
                if ((a >> j) & 1u) value |= 1u << relevant[j];
            const Distribution sub = Distribution::subcube(n, Restriction{mask, value});
            cell_bit[a] = oracle.answer(MqsqQuery::type1(TestFunction::one(), sub)) >= 0.5;
        }
        auto h = BooleanFunction::from_bits(n, [&](std::uint32_t x) {
            std::uint32_t a = 0;
            for (std::size_t j = 0; j < relevant.size(); ++j)
                if ((x >> relevant[j]) & 1u) a |= 1u << j;
            return static_cast<bool>(cell_bit[a]);
        });

        const double mu1 = oracle.answer(MqsqQuery::type3(TestFunction::from_bool(h)));
        const double mu3 = oracle.answer(MqsqQuery::type4(TestFunction::from_bool(h)));
        const double err_hat = mu1 + pf - 2.0 * mu3;
        const double gate =
            opt_.validation_slack > 0 ? opt_.validation_slack : opt_.eps + 5.0 * opt_.tau;
        if (err_hat > gate) return Hypothesis::reject("mqsq_junta");
        Hypothesis out = Hypothesis::of(std::move(h), "mqsq_junta");
        out.sq_used = oracle.queries_made();
        return out;
    }

    // Influence profile rules out a k-junta. A k-junta target would show up
    // in the level-<=2 label correlations; a deviation from the product form
    // therefore indicts the marginal, while a clean sweep means the target is
    // far from every junta and the constant fit is competitive.
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const std::uint32_t s = (1u << i) | (1u << j);
            const TestFunction phi = TestFunction::half_plus_half_chi(s);
            const double a = oracle.answer(MqsqQuery::type4(phi));
            const double b = oracle.answer(MqsqQuery::type3(phi));
            if (std::abs(a - pf * b) > opt_.correlation_threshold)
                return Hypothesis::reject("mqsq_junta");
        }
    }
    Hypothesis out =
        Hypothesis::of(BooleanFunction::constant(n, pf >= 0.5), "mqsq_junta");
    out.sq_used = oracle.queries_made();
    return out;
}

}  // namespace sqlab
