#include "sqlab/distribution.hpp"

#include <algorithm>
#include <cmath>

namespace sqlab {

namespace {

constexpr double kMassSlack = 1e-6;

void check_dim(int n) {
    if (n < 1 || n > kMaxDenseDim)
        throw DimensionMismatch("Distribution: dimension out of [1,24]");
}

}  // namespace

Distribution::Distribution(int n, std::variant<Uniform, Subcube, PointMass, Explicit> f)
    : n_(n), form_(std::move(f)) {
    if (const auto* s = std::get_if<Subcube>(&form_)) {
        for (int i = 0; i < n_; ++i)
            if (!s->r.fixes(i)) free_positions_.push_back(i);
        free_count_ = static_cast<int>(free_positions_.size());
    }
}

Distribution Distribution::uniform(int n) {
    check_dim(n);
    return Distribution(n, Uniform{});
}

Distribution Distribution::subcube(int n, const Restriction& r) {
    check_dim(n);
    r.check_dim(n);
    return Distribution(n, Subcube{r});
}

Distribution Distribution::point_mass(int n, std::uint32_t x0) {
    check_dim(n);
    if ((x0 & ~low_mask(n)) != 0) throw DimensionMismatch("point_mass: x0 outside {0,1}^n");
    return Distribution(n, PointMass{x0});
}

Distribution Distribution::explicit_pmf(int n, std::vector<double> weights) {
    check_dim(n);
    if (weights.size() != (std::size_t{1} << n))
        throw DimensionMismatch("explicit_pmf: weight vector length is not 2^n");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w))
            throw QueryError("explicit_pmf: weights must be finite and nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > kMassSlack)
        throw QueryError("explicit_pmf: total mass deviates from 1 by more than 1e-6");
    for (double& w : weights) w /= total;

    Explicit e;
    e.cumulative.resize(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        e.cumulative[i] = acc;
    }
    e.weights = std::move(weights);
    return Distribution(n, std::move(e));
}

double Distribution::pmf(std::uint32_t x) const {
    if (const auto* u = std::get_if<Uniform>(&form_)) {
        (void)u;
        return 1.0 / static_cast<double>(std::uint64_t{1} << n_);
    }
    if (const auto* s = std::get_if<Subcube>(&form_)) {
        if (!s->r.contains(x)) return 0.0;
        return 1.0 / static_cast<double>(std::uint64_t{1} << free_count_);
    }
    if (const auto* pm = std::get_if<PointMass>(&form_)) return x == pm->x0 ? 1.0 : 0.0;
    const auto& w = std::get<Explicit>(form_).weights;
    return x < w.size() ? w[x] : 0.0;
}

double Distribution::l2_norm_sq() const {
    if (std::holds_alternative<Uniform>(form_))
        return 1.0 / static_cast<double>(std::uint64_t{1} << n_);
    if (std::holds_alternative<Subcube>(form_))
        return 1.0 / static_cast<double>(std::uint64_t{1} << free_count_);
    if (std::holds_alternative<PointMass>(form_)) return 1.0;
    const auto& w = std::get<Explicit>(form_).weights;
    double acc = 0.0;
    for (double v : w) acc += v * v;
    return acc;
}

std::uint32_t Distribution::scatter(std::uint32_t free_bits) const {
    std::uint32_t x = 0;
    for (int j = 0; j < free_count_; ++j)
        if ((free_bits >> j) & 1u) x |= 1u << free_positions_[j];
    return x;
}

std::uint32_t Distribution::sample(Rng& rng) const {
    if (std::holds_alternative<Uniform>(form_)) return rng.bits(n_);
    if (const auto* s = std::get_if<Subcube>(&form_))
        return s->r.fixed_value | scatter(rng.bits(free_count_));
    if (const auto* pm = std::get_if<PointMass>(&form_)) return pm->x0;
    const auto& cum = std::get<Explicit>(form_).cumulative;
    const double r = rng.real();
    auto it = std::upper_bound(cum.begin(), cum.end(), r);
    if (it == cum.end()) --it;
    return static_cast<std::uint32_t>(it - cum.begin());
}

const Restriction* Distribution::subcube_restriction() const {
    const auto* s = std::get_if<Subcube>(&form_);
    return s ? &s->r : nullptr;
}

bool operator==(const Distribution& a, const Distribution& b) {
    return a.n_ == b.n_ && a.form_ == b.form_;
}

double mean(const BooleanFunction& f, const Distribution& d) {
    if (f.dim() != d.dim()) throw DimensionMismatch("mean: dimension mismatch");
    return d.expect([&](std::uint32_t x) { return f(x) ? 1.0 : 0.0; });
}

double dist(const BooleanFunction& f, const BooleanFunction& g, const Distribution& d) {
    if (f.dim() != g.dim() || f.dim() != d.dim())
        throw DimensionMismatch("dist: dimension mismatch");
    return d.expect([&](std::uint32_t x) { return f(x) != g(x) ? 1.0 : 0.0; });
}

}  // namespace sqlab
