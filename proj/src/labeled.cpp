#include "sqlab/labeled.hpp"

#include <cmath>

namespace sqlab {

LabeledDistribution LabeledDistribution::deterministic(Distribution marginal, BooleanFunction g) {
    if (marginal.dim() != g.dim())
        throw DimensionMismatch("LabeledDistribution: marginal and rule dimensions differ");
    return LabeledDistribution(std::move(marginal), Deterministic{std::move(g)});
}

LabeledDistribution LabeledDistribution::constant_bernoulli(Distribution marginal, double p) {
    if (p < 0.0 || p > 1.0 || !std::isfinite(p))
        throw QueryError("LabeledDistribution: p outside [0,1]");
    return LabeledDistribution(std::move(marginal), Bernoulli{p});
}

LabeledDistribution LabeledDistribution::general(Distribution marginal, std::vector<double> y) {
    if (y.size() != (std::size_t{1} << marginal.dim()))
        throw DimensionMismatch("LabeledDistribution: label table length is not 2^n");
    for (double v : y)
        if (v < 0.0 || v > 1.0 || !std::isfinite(v))
            throw QueryError("LabeledDistribution: label mean outside [0,1]");
    return LabeledDistribution(std::move(marginal), General{std::move(y)});
}

double LabeledDistribution::label_mean(std::uint32_t x) const {
    if (const auto* d = std::get_if<Deterministic>(&labels_)) return d->g(x) ? 1.0 : 0.0;
    if (const auto* b = std::get_if<Bernoulli>(&labels_)) return b->p;
    return std::get<General>(labels_).y[x];
}

double LabeledDistribution::positive_rate() const {
    if (const auto* b = std::get_if<Bernoulli>(&labels_)) return b->p;
    return marginal_.expect([&](std::uint32_t x) { return label_mean(x); });
}

Example LabeledDistribution::sample(Rng& rng) const {
    const std::uint32_t x = marginal_.sample(rng);
    const double y = label_mean(x);
    bool label;
    if (y <= 0.0) label = false;
    else if (y >= 1.0) label = true;
    else label = rng.bernoulli(y);
    return Example{x, label};
}

const BooleanFunction* LabeledDistribution::deterministic_rule() const {
    const auto* d = std::get_if<Deterministic>(&labels_);
    return d ? &d->g : nullptr;
}

double err(const BooleanFunction& f, const LabeledDistribution& dref) {
    if (f.dim() != dref.dim()) throw DimensionMismatch("err: dimension mismatch");
    return dref.marginal().expect([&](std::uint32_t x) {
        const double y = dref.label_mean(x);
        return f(x) ? (1.0 - y) : y;
    });
}

}  // namespace sqlab
