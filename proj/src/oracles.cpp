#include "sqlab/oracles.hpp"

#include <cmath>
#include <ostream>

#include "sqlab/fourier.hpp"

namespace sqlab {

namespace {

constexpr double kPhiRangeSlack = 1e-12;

void check_phi_value(double v) {
    if (v < -kPhiRangeSlack || v > 1.0 + kPhiRangeSlack || !std::isfinite(v))
        throw QueryError("test function value outside [0,1]");
}

}  // namespace

// ---------------------------------------------------------------------------
// ToleranceMode

ToleranceMode ToleranceMode::exact() {
    return {};
}

ToleranceMode ToleranceMode::round_to_grid(double tau) {
    if (tau <= 0) throw QueryError("round_to_grid: tau must be positive");
    ToleranceMode m;
    m.kind_ = Kind::RoundToGrid;
    m.tau_ = tau;
    return m;
}

ToleranceMode ToleranceMode::adversarial_sign(double tau, SignPolicy policy) {
    if (tau <= 0) throw QueryError("adversarial_sign: tau must be positive");
    ToleranceMode m;
    m.kind_ = Kind::AdversarialSign;
    m.tau_ = tau;
    m.policy_ = std::move(policy);
    return m;
}

ToleranceMode ToleranceMode::sampling(int num_samples, double tau) {
    if (num_samples <= 0) throw QueryError("sampling: need at least one sample");
    if (tau <= 0) throw QueryError("sampling: tau must be positive");
    ToleranceMode m;
    m.kind_ = Kind::Sampling;
    m.tau_ = tau;
    m.num_samples_ = num_samples;
    return m;
}

double ToleranceMode::declared_failure_probability() const {
    if (kind_ != Kind::Sampling) return 0.0;
    return 2.0 * std::exp(-2.0 * num_samples_ * tau_ * tau_);
}

double ToleranceMode::apply(double exact_value) const {
    switch (kind_) {
        case Kind::Exact:
            return exact_value;
        case Kind::RoundToGrid:
            return std::round(exact_value / tau_) * tau_;
        case Kind::AdversarialSign: {
            const int sign = policy_ ? (policy_(exact_value) < 0 ? -1 : 1) : 1;
            return exact_value + sign * tau_;
        }
        case Kind::Sampling:
            throw QueryError("ToleranceMode::apply: sampling mode estimates, not transforms");
    }
    return exact_value;
}

// ---------------------------------------------------------------------------
// TestFunction

TestFunction TestFunction::one() {
    TestFunction t;
    t.tag_ = Tag::One;
    return t;
}

TestFunction TestFunction::half_plus_half_chi(std::uint32_t s) {
    TestFunction t;
    t.tag_ = Tag::HalfPlusHalfChi;
    t.chi_mask_ = s;
    return t;
}

TestFunction TestFunction::from_fn(std::function<double(std::uint32_t)> fn) {
    TestFunction t;
    t.tag_ = Tag::Generic;
    t.fn_ = std::move(fn);
    return t;
}

TestFunction TestFunction::from_dense(std::vector<double> values) {
    for (double v : values) check_phi_value(v);
    auto shared = std::make_shared<std::vector<double>>(std::move(values));
    return from_fn([shared](std::uint32_t x) { return (*shared)[x]; });
}

TestFunction TestFunction::from_bool(const BooleanFunction& h) {
    return from_fn([h](std::uint32_t x) { return h(x) ? 1.0 : 0.0; });
}

TestFunction TestFunction::coordinate(int i) {
    return from_fn([i](std::uint32_t x) { return static_cast<double>((x >> i) & 1u); });
}

double TestFunction::operator()(std::uint32_t x) const {
    switch (tag_) {
        case Tag::One:
            return 1.0;
        case Tag::HalfPlusHalfChi:
            return (std::popcount(x & chi_mask_) & 1) ? 0.0 : 1.0;
        case Tag::Generic: {
            const double v = fn_(x);
            check_phi_value(v);
            return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// MqsqQuery

MqsqQuery MqsqQuery::type1(TestFunction phi, Distribution dstar) {
    return MqsqQuery{Type::I, std::move(phi), std::move(dstar), std::nullopt};
}
MqsqQuery MqsqQuery::type2(TestFunction phi, Distribution dstar, Permutation pi) {
    return MqsqQuery{Type::II, std::move(phi), std::move(dstar), std::move(pi)};
}
MqsqQuery MqsqQuery::type3(TestFunction phi) {
    return MqsqQuery{Type::III, std::move(phi), std::nullopt, std::nullopt};
}
MqsqQuery MqsqQuery::type4(TestFunction phi) {
    return MqsqQuery{Type::IV, std::move(phi), std::nullopt, std::nullopt};
}
MqsqQuery MqsqQuery::type5(TestFunction phi, Permutation pi) {
    return MqsqQuery{Type::V, std::move(phi), std::nullopt, std::move(pi)};
}

// ---------------------------------------------------------------------------
// ExampleOracle

Example ExampleOracle::draw() {
    if (budget_.max_samples && drawn_ >= *budget_.max_samples)
        throw BudgetExhausted("ExampleOracle: sample budget exhausted");
    ++drawn_;
    return source_.sample(rng_);
}

std::vector<Example> ExampleOracle::draw(std::size_t m) {
    std::vector<Example> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.push_back(draw());
    return out;
}

// ---------------------------------------------------------------------------
// MembershipOracle

MembershipOracle::MembershipOracle(BooleanFunction target, QueryBudget budget)
    : n_(target.dim()), budget_(budget) {
    target_ = [f = std::move(target)](std::uint32_t x) { return f(x); };
}

MembershipOracle::MembershipOracle(int n, std::function<bool(std::uint32_t)> target,
                                   QueryBudget budget)
    : n_(n), target_(std::move(target)), budget_(budget) {}

bool MembershipOracle::query(const BitVector& x) {
    if (x.dim() != n_) throw DimensionMismatch("MembershipOracle: dimension mismatch");
    return query_raw(x.value());
}

bool MembershipOracle::query_raw(std::uint32_t x) {
    if (budget_.max_mq && count_ >= *budget_.max_mq)
        throw BudgetExhausted("MembershipOracle: query budget exhausted");
    ++count_;
    if (log_.size() < kLogCap) log_.push_back(x);
    return target_(x);
}

void MembershipOracle::write_log_jsonl(std::ostream& os) const {
    for (std::size_t i = 0; i < log_.size(); ++i)
        os << "{\"i\":" << i << ",\"x\":" << log_[i] << "}\n";
}

// ---------------------------------------------------------------------------
// MqsqOracleBase

double MqsqOracleBase::answer(const MqsqQuery& q) {
    if (q.is_customized()) {
        if (!q.dstar) throw QueryError("customized query without D*");
        if (q.dstar->dim() != n_) throw DimensionMismatch("D* dimension mismatch");
    }
    if (q.type == MqsqQuery::Type::II || q.type == MqsqQuery::Type::V) {
        if (!q.pi) throw QueryError("pair query without permutation");
        if (q.pi->dim() != n_) throw DimensionMismatch("permutation dimension mismatch");
        if (!q.pi->is_xor_shift() && !q.pi->fixed_point_free_exhaustive())
            throw QueryError("pair query permutation has a fixed point");
    }
    check_budget();
    ++count_;
    if (q.is_customized()) {
        const double norm = q.dstar->l2_norm_sq();
        if (norm > max_dstar_l2_sq_) max_dstar_l2_sq_ = norm;
    }
    return answer_impl(q);
}

// ---------------------------------------------------------------------------
// MqsqOracle

MqsqOracle::MqsqOracle(BooleanFunction f, Distribution marginal, ToleranceMode mode, Rng rng,
                       QueryBudget budget)
    : MqsqOracleBase(f.dim()),
      f_(std::move(f)),
      marginal_(std::move(marginal)),
      mode_(std::move(mode)),
      rng_(std::move(rng)),
      budget_(budget) {
    if (f_.dim() != marginal_.dim())
        throw DimensionMismatch("MqsqOracle: target and marginal dimensions differ");
}

void MqsqOracle::check_budget() {
    if (budget_.max_sq && count_ >= *budget_.max_sq)
        throw BudgetExhausted("MqsqOracle: query budget exhausted");
}

double MqsqOracle::exact_value(const MqsqQuery& q) const {
    const auto f = [&](std::uint32_t x) { return f_(x) ? 1.0 : 0.0; };
    switch (q.type) {
        case MqsqQuery::Type::I:
            return q.dstar->expect([&](std::uint32_t x) { return q.phi(x) * f(x); });
        case MqsqQuery::Type::II:
            return q.dstar->expect(
                [&](std::uint32_t x) { return q.phi(x) * f(x) * f(q.pi->apply(x)); });
        case MqsqQuery::Type::III:
            return marginal_.expect([&](std::uint32_t x) { return q.phi(x); });
        case MqsqQuery::Type::IV:
            return marginal_.expect([&](std::uint32_t x) { return q.phi(x) * f(x); });
        case MqsqQuery::Type::V:
            return marginal_.expect(
                [&](std::uint32_t x) { return q.phi(x) * f(x) * f(q.pi->apply(x)); });
    }
    return 0.0;
}

void MqsqOracle::build_caches() {
    const std::uint32_t size = 1u << n_;
    std::vector<double> table(size);
    for (std::uint32_t x = 0; x < size; ++x) table[x] = f_(x) ? 1.0 : 0.0;
    f_mean_uniform_ = 0.0;
    for (double v : table) f_mean_uniform_ += v;
    f_mean_uniform_ /= static_cast<double>(size);

    wht01_ = table;
    wht_inplace(wht01_);

    // E_U[f(x) f(x xor d)] for all d at once: WHT of the squared spectrum.
    autocorr_.assign(wht01_.begin(), wht01_.end());
    for (double& v : autocorr_) v *= v;
    wht_inplace(autocorr_);
    const double scale = 1.0 / (static_cast<double>(size) * static_cast<double>(size));
    for (double& v : autocorr_) v *= scale;
    caches_built_ = true;
}

double MqsqOracle::fast_exact(const MqsqQuery& q) {
    // Closed-form paths for tagged phi over a uniform D*; everything else
    // falls back to the support sum.
    if (q.is_customized() && q.dstar->is_uniform() && f_.is_dense()) {
        if (!caches_built_) build_caches();
        const std::uint32_t size = 1u << n_;
        if (q.type == MqsqQuery::Type::I) {
            if (q.phi.tag() == TestFunction::Tag::One) return f_mean_uniform_;
            if (q.phi.tag() == TestFunction::Tag::HalfPlusHalfChi) {
                const double corr = wht01_[q.phi.chi_mask()] / static_cast<double>(size);
                return 0.5 * (corr + f_mean_uniform_);
            }
        }
        if (q.type == MqsqQuery::Type::II && q.phi.tag() == TestFunction::Tag::One &&
            q.pi->is_xor_shift())
            return autocorr_[q.pi->xor_delta()];
    }
    return exact_value(q);
}

double MqsqOracle::sampled_estimate(const MqsqQuery& q) {
    const auto f = [&](std::uint32_t x) { return f_(x) ? 1.0 : 0.0; };
    const Distribution& src = q.is_customized() ? *q.dstar : marginal_;
    double acc = 0.0;
    const int m = mode_.sample_count();
    for (int i = 0; i < m; ++i) {
        const std::uint32_t x = src.sample(rng_);
        switch (q.type) {
            case MqsqQuery::Type::I:
            case MqsqQuery::Type::IV:
                acc += q.phi(x) * f(x);
                break;
            case MqsqQuery::Type::II:
            case MqsqQuery::Type::V:
                acc += q.phi(x) * f(x) * f(q.pi->apply(x));
                break;
            case MqsqQuery::Type::III:
                acc += q.phi(x);
                break;
        }
    }
    return acc / m;
}

double MqsqOracle::answer_impl(const MqsqQuery& q) {
    if (mode_.is_sampling()) return sampled_estimate(q);
    return mode_.apply(fast_exact(q));
}

// ---------------------------------------------------------------------------
// PairTestFunction

PairTestFunction PairTestFunction::label_only() {
    return {TestFunction::from_fn([](std::uint32_t) { return 0.0; }),
            TestFunction::one()};
}

PairTestFunction PairTestFunction::of_x(TestFunction phi) {
    return {phi, phi};
}

PairTestFunction PairTestFunction::x_times_label(TestFunction phi) {
    return {TestFunction::from_fn([](std::uint32_t) { return 0.0; }), std::move(phi)};
}

PairTestFunction PairTestFunction::from_slices(TestFunction phi0, TestFunction phi1) {
    return {std::move(phi0), std::move(phi1)};
}

// ---------------------------------------------------------------------------
// RefutationSqOracle

double RefutationSqOracleBase::answer(const PairTestFunction& phi) {
    ++count_;
    return answer_impl(phi);
}

RefutationSqOracle::RefutationSqOracle(LabeledDistribution dref, ToleranceMode mode, Rng rng,
                                       QueryBudget budget)
    : dref_(std::move(dref)), mode_(std::move(mode)), rng_(std::move(rng)), budget_(budget) {}

double RefutationSqOracle::exact_value(const PairTestFunction& phi) const {
    return dref_.expect_pair([&](std::uint32_t x) { return phi.phi0(x); },
                             [&](std::uint32_t x) { return phi.phi1(x); });
}

double RefutationSqOracle::answer_impl(const PairTestFunction& phi) {
    if (budget_.max_sq && count_ > *budget_.max_sq)
        throw BudgetExhausted("RefutationSqOracle: query budget exhausted");
    if (mode_.is_sampling()) {
        double acc = 0.0;
        const int m = mode_.sample_count();
        for (int i = 0; i < m; ++i) {
            const Example e = dref_.sample(rng_);
            acc += phi(e.x, e.y);
        }
        return acc / m;
    }
    return mode_.apply(exact_value(phi));
}

// ---------------------------------------------------------------------------
// WeakSqOracle

WeakSqOracle::WeakSqOracle(BooleanFunction target, Distribution d, ToleranceMode mode, Rng rng)
    : f_(std::move(target)), d_(std::move(d)), mode_(std::move(mode)), rng_(std::move(rng)) {
    if (f_.dim() != d_.dim()) throw DimensionMismatch("WeakSqOracle: dimension mismatch");
}

double WeakSqOracle::exact_value(const TestFunction& phi) const {
    return d_.expect([&](std::uint32_t x) { return phi(x) * (f_(x) ? 1.0 : 0.0); });
}

double WeakSqOracle::answer(const TestFunction& phi) {
    ++count_;
    if (mode_.is_sampling()) {
        double acc = 0.0;
        const int m = mode_.sample_count();
        for (int i = 0; i < m; ++i) {
            const std::uint32_t x = d_.sample(rng_);
            acc += phi(x) * (f_(x) ? 1.0 : 0.0);
        }
        return acc / m;
    }
    return mode_.apply(exact_value(phi));
}

}  // namespace sqlab
