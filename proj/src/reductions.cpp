#include "sqlab/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "sqlab/parallel.hpp"

namespace sqlab {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Noise: return "noise";
        case Verdict::Structure: return "structure";
        case Verdict::Error: return "error";
    }
    return "?";
}

std::string to_string(ErrorReason r) {
    switch (r) {
        case ErrorReason::None: return "none";
        case ErrorReason::InsufficientSamples: return "insufficient_samples";
        case ErrorReason::DuplicateInTest: return "duplicate_in_test";
        case ErrorReason::TestQueryOverlap: return "test_query_overlap";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Filtered sample distribution

std::pair<Distribution, double> filtered_distribution(const LabeledDistribution& dref,
                                                      const BooleanFunction& f) {
    if (dref.dim() != f.dim()) throw DimensionMismatch("filtered_distribution: dimension mismatch");
    const int n = dref.dim();
    const double p = dref.positive_rate();
    std::vector<double> weights(std::size_t{1} << n, 0.0);
    double z = 0.0;
    dref.marginal().for_each_support([&](std::uint32_t x, double px) {
        const double y = dref.label_mean(x);
        const double fx = f(x) ? 1.0 : 0.0;
        const double bracket = p * (1.0 - y) * (1.0 - fx) + (1.0 - p) * y * fx;
        weights[x] = px * bracket;
        z += px * bracket;
    });
    if (z <= 0.0)
        throw QueryError("filtered_distribution: Z = 0 (f disagrees with all labels on the support)");
    for (double& w : weights) w /= z;
    return {Distribution::explicit_pmf(n, std::move(weights)), z};
}

// ---------------------------------------------------------------------------
// RefutationParams

std::size_t RefutationParams::phat_count() const {
    return static_cast<std::size_t>(std::ceil(C1 / (eps * eps)));
}

std::size_t RefutationParams::pool_count() const {
    const double m = static_cast<double>(learner_m);
    const double q = static_cast<double>(learner_q);
    return static_cast<std::size_t>(std::ceil(C2 * ((m + 1.0 / (eps * eps)) / eps + q)));
}

std::size_t RefutationParams::test_count() const {
    return static_cast<std::size_t>(std::ceil(C3 / (eps * eps)));
}

std::size_t RefutationParams::feed_count() const {
    const double a = alpha();
    const double accept = a * (1.0 - a);
    return static_cast<std::size_t>(
        std::ceil(feed_factor * static_cast<double>(learner_m + test_count()) / accept));
}

std::size_t RefutationParams::m_prime() const {
    return phat_count() + pool_count() + feed_count();
}

std::vector<std::string> RefutationParams::validate(double sup_dx_l2, bool strict) const {
    if (eps <= 0.0 || eps >= 0.125)
        throw ConfigError("refutation predicate violated: eps must lie in (0, 1/8)");
    if (c < 1.0) throw ConfigError("refutation predicate violated: c must be >= 1");
    if (eta < 0.0 || eta >= (0.5 - 4.0 * eps) / c)
        throw ConfigError("refutation predicate violated: eta >= (1/2 - 4 eps)/c");

    std::vector<std::string> warnings;
    if (eps * eps < c * k_const * sup_dx_l2) {
        const std::string msg =
            "regime check failed: eps^2 < c * k * sup||D_x||_2 (k = " + std::to_string(k_const) + ")";
        if (strict) throw ConfigError("refutation predicate violated: " + msg);
        warnings.push_back(msg);
    }
    const double lhs = (static_cast<double>(learner_m) +
                        static_cast<double>(learner_q) / (eps * eps)) *
                       much_less_ratio;
    if (lhs > 1.0 / sup_dx_l2) {
        const std::string msg =
            "regime check failed: (m + q/eps^2) * ratio > 1/sup||D_x||_2 (ratio = " +
            std::to_string(much_less_ratio) + ")";
        if (strict) throw ConfigError("refutation predicate violated: " + msg);
        warnings.push_back(msg);
    }
    return warnings;
}

RefutationParams RefutationParams::for_learner(int n, const TlqLearner& learner, double eta) {
    RefutationParams p;
    const TlqContract c = learner.contract();
    p.n = n;
    p.eta = eta;
    p.eps = c.eps;
    p.c = c.c;
    p.learner_m = c.samples;
    p.learner_q = c.queries;
    return p;
}

nlohmann::json RefutationRecord::to_json() const {
    return nlohmann::json{{"verdict", to_string(verdict)},
                          {"reason", to_string(reason)},
                          {"p_hat", p_hat},
                          {"phat_exit", phat_exit},
                          {"learner_rejected", learner_rejected},
                          {"test_err", test_err},
                          {"accepted", accepted},
                          {"pool_used", pool_used},
                          {"mq_count", mq_count},
                          {"samples_consumed", samples_consumed}};
}

// ---------------------------------------------------------------------------
// BiasedRefutation

namespace {

struct PoolDry {};

}  // namespace

RefutationRecord biased_refutation(std::span<const Example> examples,
                                   const RefutationParams& params, TlqLearner& learner,
                                   Rng& rng) {
    if (params.n < 1 || params.n > kMaxDenseDim)
        throw ConfigError("biased_refutation: params.n out of [1,24]");
    RefutationRecord rec;
    const std::size_t n1 = params.phat_count();
    const std::size_t n2 = params.pool_count();
    if (examples.size() < n1 + n2) {
        rec.reason = ErrorReason::InsufficientSamples;
        return rec;
    }

    std::size_t pos = 0;
    double label_sum = 0.0;
    for (std::size_t i = 0; i < n1; ++i) label_sum += examples[pos++].y ? 1.0 : 0.0;
    rec.p_hat = label_sum / static_cast<double>(n1);
    if (rec.p_hat < 2.0 * params.eps || rec.p_hat > 1.0 - 2.0 * params.eps) {
        rec.verdict = Verdict::Structure;
        rec.phat_exit = true;
        rec.samples_consumed = pos;
        return rec;
    }

    // Reserved pool: every Bern(p) draw below reads one fresh label.
    std::size_t pool_cursor = pos;
    const std::size_t pool_end = pos + n2;
    pos = pool_end;
    auto coin = [&]() -> bool {
        if (pool_cursor >= pool_end) throw PoolDry{};
        return examples[pool_cursor++].y;
    };

    std::unordered_map<std::uint32_t, bool> table;
    auto f_value = [&](std::uint32_t x) -> bool {
        auto it = table.find(x);
        if (it != table.end()) return it->second;
        const bool b = coin();
        table.emplace(x, b);
        return b;
    };

    std::vector<std::uint32_t> filtered;
    const std::size_t target = params.learner_m + params.test_count();
    filtered.reserve(target);
    try {
        while (pos < examples.size() && filtered.size() < target) {
            const Example e = examples[pos++];
            const bool fx = f_value(e.x);
            if (e.y != fx) continue;
            // Accept with probability p when y = f = 0, and 1-p when y = f = 1.
            const bool accept = fx ? !coin() : coin();
            if (accept) filtered.push_back(e.x);
        }
    } catch (const PoolDry&) {
        rec.reason = ErrorReason::InsufficientSamples;
        rec.samples_consumed = pos;
        rec.pool_used = pool_cursor - n1;
        return rec;
    }
    rec.accepted = filtered.size();
    rec.samples_consumed = pos;
    if (filtered.size() < target) {
        rec.reason = ErrorReason::InsufficientSamples;
        rec.pool_used = pool_cursor - n1;
        return rec;
    }

    const std::span<const std::uint32_t> train(filtered.data(), params.learner_m);
    const std::span<const std::uint32_t> test(filtered.data() + params.learner_m,
                                              params.test_count());

    QueryBudget mq_budget;
    mq_budget.max_mq = learner.contract().queries;
    MembershipOracle mq(params.n, [&](std::uint32_t x) { return f_value(x); }, mq_budget);

    Hypothesis h;
    try {
        h = learner.run(train, mq, rng);
    } catch (const PoolDry&) {
        rec.reason = ErrorReason::InsufficientSamples;
        rec.pool_used = pool_cursor - n1;
        return rec;
    }
    rec.mq_count = mq.queries_made();
    rec.pool_used = pool_cursor - n1;

    if (h.rejected()) {
        rec.verdict = Verdict::Structure;
        rec.learner_rejected = true;
        return rec;
    }

    std::unordered_set<std::uint32_t> train_set(train.begin(), train.end());
    std::unordered_set<std::uint32_t> query_set(mq.log().begin(), mq.log().end());
    std::unordered_set<std::uint32_t> seen;
    for (std::uint32_t x : test) {
        if (!seen.insert(x).second || train_set.count(x)) {
            rec.reason = ErrorReason::DuplicateInTest;
            return rec;
        }
        if (query_set.count(x)) {
            rec.reason = ErrorReason::TestQueryOverlap;
            return rec;
        }
    }

    std::size_t errors = 0;
    const BooleanFunction& hf = *h.fn;
    for (std::uint32_t x : test)
        if (hf(x) != table.at(x)) ++errors;
    rec.test_err = static_cast<double>(errors) / static_cast<double>(test.size());
    rec.verdict = rec.test_err > params.noise_threshold() ? Verdict::Noise : Verdict::Structure;
    return rec;
}

RefutationRecord run_refutation(ExampleOracle& oracle, const RefutationParams& params,
                                TlqLearner& learner, Rng& rng) {
    const std::vector<Example> examples = oracle.draw(params.m_prime());
    return biased_refutation(examples, params, learner, rng);
}

// ---------------------------------------------------------------------------
// TL-Q -> agnostic parameter accounting

nlohmann::json AgnosticParamsReport::to_json() const {
    return nlohmann::json{{"m_prime", m_prime},         {"sample_bound", sample_bound},
                          {"time_bound", time_bound},   {"excess_error", excess_error},
                          {"vacuous", vacuous},         {"regime_warnings", regime_warnings}};
}

AgnosticParamsReport tlq_to_agnostic_params(const TlqContract& contract, double time_t,
                                            double sup_dx_l2, double k_const, double ratio,
                                            bool strict) {
    const double eps = contract.eps;
    const double m = static_cast<double>(contract.samples);
    const double q = static_cast<double>(contract.queries);

    AgnosticParamsReport rep;
    if (eps * eps < contract.c * k_const * sup_dx_l2) {
        const std::string msg = "regime check failed: eps^2 < c * k * sup||D_x||_2";
        if (strict) throw ConfigError("agnostic-corollary hypothesis violated: " + msg);
        rep.regime_warnings.push_back(msg);
    }
    if ((m + q / (eps * eps)) * ratio > 1.0 / sup_dx_l2) {
        const std::string msg = "regime check failed: (m + q/eps^2) * ratio > 1/sup||D_x||_2";
        if (strict) throw ConfigError("agnostic-corollary hypothesis violated: " + msg);
        rep.regime_warnings.push_back(msg);
    }

    rep.m_prime = (m + 1.0 / (eps * eps)) / eps + q;
    rep.sample_bound = rep.m_prime * rep.m_prime * rep.m_prime / (eps * eps);
    rep.time_bound = rep.m_prime * rep.m_prime * (rep.m_prime + time_t) / (eps * eps);
    rep.excess_error = 1.0 - 1.0 / contract.c + 8.0 * eps / contract.c + eps;
    rep.vacuous = rep.excess_error >= 1.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Feature selection via prefix randomization

int feature_select(const RefuterFn& refuter, const PairSampler& sampler, int n,
                   const FeatureSelectOptions& opt, Rng& rng) {
    if (opt.samples_per_run == 0)
        throw ConfigError("feature_select: samples_per_run must be set");
    const double accuracy = opt.accuracy > 0 ? opt.accuracy : 1.0 / (6.0 * opt.k);
    const double threshold =
        opt.gap_threshold > 0 ? opt.gap_threshold : 1.0 / (3.0 * opt.k) - accuracy;
    std::size_t runs = opt.runs_per_estimate;
    if (runs == 0)
        runs = static_cast<std::size_t>(
            std::ceil(std::log(2.0 * (n + 1) / opt.delta) / (2.0 * accuracy * accuracy)));

    const std::uint64_t base = rng.u64();
    std::vector<double> structure_rate(n + 1, 0.0);
    parallel_for(opt.threads, static_cast<std::size_t>(n + 1), [&](std::size_t prefix) {
        std::size_t structure = 0;
        for (std::size_t r = 0; r < runs; ++r) {
            Rng run_rng = Rng::derive(base, prefix, r);
            std::vector<Example> batch;
            batch.reserve(opt.samples_per_run);
            const std::uint32_t m = low_mask(static_cast<int>(prefix));
            for (std::size_t i = 0; i < opt.samples_per_run; ++i) {
                Example e = sampler(run_rng);
                e.x = (e.x & ~m) | (run_rng.bits(static_cast<int>(prefix)) & m);
                batch.push_back(e);
            }
            if (refuter(batch, run_rng).verdict == Verdict::Structure) ++structure;
        }
        structure_rate[prefix] = static_cast<double>(structure) / static_cast<double>(runs);
    });

    for (int i = 1; i <= n; ++i)
        if (structure_rate[i - 1] - structure_rate[i] >= threshold) return i - 1;
    throw ContractViolation("feature_select: no qualifying structure-probability gap");
}

// ---------------------------------------------------------------------------
// Junta learning via refutation

namespace {

struct TreeNode {
    int split = -1;  // original coordinate; -1 for leaves
    bool leaf_label = false;
    std::unique_ptr<TreeNode> zero, one;

    bool eval(std::uint32_t x) const {
        if (split < 0) return leaf_label;
        return ((x >> split) & 1u) ? one->eval(x) : zero->eval(x);
    }
};

std::uint32_t compress_free(std::uint32_t x, const std::vector<int>& free_pos) {
    std::uint32_t out = 0;
    for (std::size_t j = 0; j < free_pos.size(); ++j)
        out |= ((x >> free_pos[j]) & 1u) << j;
    return out;
}

}  // namespace

Hypothesis learn_junta_via_refutation(const RefuterFactory& factory, const PairSampler& sampler,
                                      int n, const JuntaPipelineOptions& opt, Rng& rng) {
    const double close = 4.0 * opt.eps;
    std::size_t mean_samples = opt.mean_check_samples;
    if (mean_samples == 0) {
        const double nonconstant_floor = std::ldexp(1.0, -opt.k);
        const double margin = std::max((nonconstant_floor - close) / 2.0, opt.eps);
        const double calls = std::ldexp(1.0, opt.k + 2);
        mean_samples = static_cast<std::size_t>(
            std::ceil(std::log(2.0 * calls / opt.delta) / (2.0 * margin * margin)));
    }
    const double node_delta = opt.delta * std::ldexp(1.0, -(opt.k + 2));

    std::function<std::unique_ptr<TreeNode>(Restriction, int)> build =
        [&](Restriction restriction, int depth) -> std::unique_ptr<TreeNode> {
        const std::size_t cap_per_draw = opt.starvation_factor << depth;
        auto draw_conditioned = [&](Rng& r) -> Example {
            for (std::size_t attempt = 0; attempt < cap_per_draw; ++attempt) {
                const Example e = sampler(r);
                if (restriction.contains(e.x)) return e;
            }
            throw ContractViolation("learn_junta_via_refutation: restriction-consistent samples starved");
        };

        std::size_t ones = 0;
        for (std::size_t i = 0; i < mean_samples; ++i)
            if (draw_conditioned(rng).y) ++ones;
        const double mu = static_cast<double>(ones) / static_cast<double>(mean_samples);
        if (mu <= close || mu >= 1.0 - close) {
            auto leaf = std::make_unique<TreeNode>();
            leaf->leaf_label = mu >= 0.5;
            return leaf;
        }
        if (depth >= opt.k)
            throw ContractViolation("learn_junta_via_refutation: tree depth exceeds k");

        std::vector<int> free_pos;
        for (int i = 0; i < n; ++i)
            if (!restriction.fixes(i)) free_pos.push_back(i);
        const int sub_dim = static_cast<int>(free_pos.size());

        const PairSampler projected = [&](Rng& r) {
            const Example e = draw_conditioned(r);
            return Example{compress_free(e.x, free_pos), e.y};
        };
        FeatureSelectOptions fs = opt.select;
        fs.k = opt.k;
        fs.delta = node_delta;
        fs.samples_per_run = factory.samples_per_run(sub_dim);
        const RefuterFn refuter = factory.make(sub_dim);
        const int picked = feature_select(refuter, projected, sub_dim, fs, rng);
        const int coord = free_pos[picked];

        auto node = std::make_unique<TreeNode>();
        node->split = coord;
        node->zero = build(Restriction{restriction.fixed_mask | (1u << coord),
                                       restriction.fixed_value},
                           depth + 1);
        node->one = build(Restriction{restriction.fixed_mask | (1u << coord),
                                      restriction.fixed_value | (1u << coord)},
                          depth + 1);
        return node;
    };

    const std::unique_ptr<TreeNode> root = build(Restriction{}, 0);
    Hypothesis h = Hypothesis::of(
        BooleanFunction::from_bits(n, [&](std::uint32_t x) { return root->eval(x); }),
        "junta_via_refutation");
    return h;
}

// ---------------------------------------------------------------------------
// MQ-SQ testable learning -> SQ refutation

namespace {

/// Answers the five MQ-SQ types from one SQ oracle and a label-bias estimate.
class SimulatedMqsqOracle final : public MqsqOracleBase {
  public:
    SimulatedMqsqOracle(int n, double p_hat, RefutationSqOracleBase& sq, double declared_dstar)
        : MqsqOracleBase(n), p_hat_(p_hat), sq_(sq), declared_dstar_(declared_dstar) {}

  protected:
    double answer_impl(const MqsqQuery& q) override {
        switch (q.type) {
            case MqsqQuery::Type::I:
            case MqsqQuery::Type::II: {
                if (q.dstar->l2_norm_sq() > declared_dstar_ * (1.0 + 1e-12))
                    throw ContractViolation(
                        "MQ-SQ learner issued a D* above its declared norm bound");
                const double e_phi = q.dstar->expect([&](std::uint32_t x) { return q.phi(x); });
                return q.type == MqsqQuery::Type::I ? p_hat_ * e_phi : p_hat_ * p_hat_ * e_phi;
            }
            case MqsqQuery::Type::III:
                return sq_.answer(PairTestFunction::of_x(q.phi));
            case MqsqQuery::Type::IV:
                return sq_.answer(PairTestFunction::x_times_label(q.phi));
            case MqsqQuery::Type::V:
                return p_hat_ * sq_.answer(PairTestFunction::x_times_label(q.phi));
        }
        return 0.0;
    }

  private:
    double p_hat_;
    RefutationSqOracleBase& sq_;
    double declared_dstar_;
};

}  // namespace

MqsqToSqRefuter::MqsqToSqRefuter(std::shared_ptr<MqsqLearner> learner, MqsqToSqParams params)
    : learner_(std::move(learner)), params_(params) {
    const MqsqContract c = learner_->contract();
    const double taup = c.tau / 4.0;
    const double rhs = params_.eta * c.c + c.eps + (c.c + 4.0) * c.tau + 6.0 * taup;
    if (!(params_.alpha > rhs))
        throw ConfigError(
            "mqsq_to_sq_refuter condition 1 violated: alpha <= c eta + eps + (c+4) tau + 6 tau'");
    const double p = params_.p_min > 0 ? params_.p_min : params_.alpha;
    const double b2 = p * p * (1.0 - p) * (1.0 - p) / params_.sup_dx_l2_sq;
    const double b3 = 1.0 / c.max_dstar_l2_sq;
    if (params_.B <= 0) params_.B = std::min(b2, b3);
    if (params_.B > b2)
        throw ConfigError("mqsq_to_sq_refuter condition 2 violated: B > p^2(1-p)^2/||D_x||_2^2");
    if (params_.B > b3)
        throw ConfigError("mqsq_to_sq_refuter condition 3 violated: B > 1/||D*||_2^2");
}

double MqsqToSqRefuter::tau_prime() const {
    return learner_->contract().tau / 4.0;
}

SqRefuter::Declared MqsqToSqRefuter::declared() const {
    Declared d;
    d.queries = learner_->contract().queries + 4;
    d.tau = tau_prime();
    d.alpha = params_.alpha;
    d.eta = params_.eta;
    return d;
}

Verdict MqsqToSqRefuter::run(RefutationSqOracleBase& oracle, Rng& rng) {
    const std::uint64_t start = oracle.queries_made();
    const double p_hat = oracle.answer(PairTestFunction::label_only());
    SimulatedMqsqOracle sim(learner_->dim(), p_hat, oracle, learner_->contract().max_dstar_l2_sq);
    const Hypothesis h = learner_->run(sim, rng);
    if (h.rejected()) {
        last_sq_count_ = oracle.queries_made() - start;
        return Verdict::Structure;
    }
    const double mu1 = sim.answer(MqsqQuery::type3(TestFunction::from_bool(*h.fn)));
    const double mu2 = sim.answer(MqsqQuery::type4(TestFunction::one()));
    const double mu3 = sim.answer(MqsqQuery::type4(TestFunction::from_bool(*h.fn)));
    const double mu = mu1 + mu2 - 2.0 * mu3;
    last_sq_count_ = oracle.queries_made() - start;
    const double threshold = std::min(p_hat, 1.0 - p_hat) - 5.0 * tau_prime();
    return mu >= threshold ? Verdict::Noise : Verdict::Structure;
}

// ---------------------------------------------------------------------------
// SQ refutation -> SQ weak learning

void WeakLearnParams::validate(double alpha, double tau) const {
    if (!(alpha <= 0.5 - (eps + 2.0 * tau_prime)))
        throw ConfigError("weak-learning condition 1 violated: alpha > 1/2 - (eps + 2 tau')");
    if (!(tau >= 4.0 * eps + 22.0 * tau_prime))
        throw ConfigError("weak-learning condition 2 violated: tau < 4 eps + 22 tau'");
}

BooleanFunction round_classifier(const TestFunction& phi, int n, bool complement, Rng& rng) {
    return BooleanFunction::from_bits(n, [&](std::uint32_t x) {
        const bool b = rng.bernoulli(phi(x));
        return complement ? !b : b;
    });
}

namespace {

struct HighCorrelation {
    TestFunction delta_prime;
    bool negative;
};

class WeakLearnInterceptor final : public RefutationSqOracleBase {
  public:
    WeakLearnInterceptor(WeakSqOracle& weak, const Distribution& d, double p_hat, double tau,
                         double tau_prime, std::vector<WeakLearnResult::LowCorrAnswer>& log)
        : weak_(weak), d_(d), p_hat_(p_hat), tau_(tau), tau_prime_(tau_prime), log_(log) {}

  protected:
    double answer_impl(const PairTestFunction& phi) override {
        const TestFunction delta_prime = TestFunction::from_fn([phi](std::uint32_t x) {
            return 0.5 * (phi.phi1(x) - phi.phi0(x) + 1.0);
        });
        const double mu_hat = weak_.answer(delta_prime);
        const double e_dp = d_.expect([&](std::uint32_t x) { return delta_prime(x); });
        const double corr = mu_hat - p_hat_ * e_dp;
        if (std::abs(corr) <= tau_ / 2.0 - 2.0 * tau_prime_) {
            // E[phi(x,0) + p Delta(x)] with p-hat standing in for p.
            const double e_phi0 = d_.expect([&](std::uint32_t x) { return phi.phi0(x); });
            const double answer = e_phi0 + p_hat_ * (2.0 * e_dp - 1.0);
            log_.push_back({phi, answer});
            return answer;
        }
        throw HighCorrelation{delta_prime, corr < 0.0};
    }

  private:
    WeakSqOracle& weak_;
    const Distribution& d_;
    double p_hat_;
    double tau_;
    double tau_prime_;
    std::vector<WeakLearnResult::LowCorrAnswer>& log_;
};

}  // namespace

WeakLearnResult sq_refuter_to_weak_learner(SqRefuter& refuter, WeakSqOracle& oracle,
                                           const WeakLearnParams& params, Rng& rng) {
    const SqRefuter::Declared decl = refuter.declared();
    params.validate(decl.alpha, decl.tau);
    const double tau = decl.tau;
    const double taup = params.tau_prime;
    const double eps = params.eps;
    const Distribution& d = oracle.distribution();
    const int n = d.dim();
    const int max_rounding = params.max_rounding_attempts > 0
                                 ? params.max_rounding_attempts
                                 : static_cast<int>(std::ceil(16.0 / tau));

    WeakLearnResult res;
    const double p_hat = oracle.answer(TestFunction::one());
    if (p_hat + taup <= 0.5 - eps) {
        res.hypothesis = Hypothesis::of(BooleanFunction::constant(n, false), "sq_weak_learner");
        res.constant_shortcut = true;
        res.sq_count = oracle.queries_made();
        return res;
    }
    if (p_hat - taup >= 0.5 + eps) {
        res.hypothesis = Hypothesis::of(BooleanFunction::constant(n, true), "sq_weak_learner");
        res.constant_shortcut = true;
        res.sq_count = oracle.queries_made();
        return res;
    }

    for (int round = 0; round < params.amplification_rounds; ++round) {
        ++res.rounds_used;
        WeakLearnInterceptor interceptor(oracle, d, p_hat, tau, taup, res.low_corr_log);
        try {
            const Verdict v = refuter.run(interceptor, rng);
            if (v == Verdict::Structure)
                throw ContractViolation(
                    "sq_refuter_to_weak_learner: refuter output structure on a "
                    "noise-coupled transcript");
            continue;  // noise verdict without divergence; try a fresh round
        } catch (const HighCorrelation& hc) {
            for (int attempt = 0; attempt < max_rounding; ++attempt) {
                BooleanFunction phi_tilde = round_classifier(hc.delta_prime, n, hc.negative, rng);
                const double e_phi =
                    d.expect([&](std::uint32_t x) { return phi_tilde(x) ? 1.0 : 0.0; });
                const double m3 = oracle.answer(TestFunction::from_bool(phi_tilde));
                const double eps_hat = e_phi + p_hat - 2.0 * m3;
                if (eps_hat <= 0.5 - eps - 3.0 * taup) {
                    res.hypothesis = Hypothesis::of(std::move(phi_tilde), "sq_weak_learner");
                    res.sq_count = oracle.queries_made();
                    return res;
                }
            }
            throw ContractViolation("sq_refuter_to_weak_learner: rounding attempts exhausted");
        }
    }
    throw ContractViolation(
        "sq_refuter_to_weak_learner: refuter never diverged from the noise-coupled transcript");
}

// ---------------------------------------------------------------------------
// Coordinate-correlation refuter for dictators

CoordinateCorrelationRefuter::CoordinateCorrelationRefuter(int n, double tau, double alpha,
                                                           double margin)
    : n_(n), tau_(tau), alpha_(alpha), margin_(margin > 0 ? margin : 0.25) {}

SqRefuter::Declared CoordinateCorrelationRefuter::declared() const {
    Declared d;
    d.queries = static_cast<std::size_t>(n_) + 1;
    d.tau = tau_;
    d.alpha = alpha_;
    d.eta = 0.0;
    return d;
}

Verdict CoordinateCorrelationRefuter::run(RefutationSqOracleBase& oracle, Rng& rng) {
    (void)rng;
    oracle.answer(PairTestFunction::label_only());
    for (int i = 0; i < n_; ++i) {
        // phi_i(x, y) = 1{x_i = y}.
        const TestFunction xi = TestFunction::coordinate(i);
        const TestFunction not_xi =
            TestFunction::from_fn([i](std::uint32_t x) { return 1.0 - ((x >> i) & 1u); });
        const double agree =
            oracle.answer(PairTestFunction::from_slices(not_xi, xi));
        if (std::abs(agree - 0.5) >= margin_) return Verdict::Structure;
    }
    return Verdict::Noise;
}

}  // namespace sqlab
