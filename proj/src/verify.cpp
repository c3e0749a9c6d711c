#include "sqlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "sqlab/parallel.hpp"

namespace sqlab {

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double nd = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nd;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nd;
    const double center = p + z2 / (2.0 * nd);
    const double spread = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd));
    return {std::max(0.0, (center - spread) / denom), std::min(1.0, (center + spread) / denom)};
}

nlohmann::json TrialReport::to_json() const {
    nlohmann::json out{{"suite", suite},
                       {"seed", master_seed},
                       {"trials", trials},
                       {"point_key", point_key},
                       {"point_estimate", point_estimate},
                       {"wilson_lo", interval.lo},
                       {"wilson_hi", interval.hi}};
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [k, v] : outcomes) counts[k] = v;
    out["outcomes"] = counts;
    return out;
}

TrialReport estimate_verdict_prob(const std::function<std::string(std::size_t, Rng&)>& run,
                                  std::size_t trials, std::uint64_t seed, const std::string& suite,
                                  const std::string& point_key, int threads) {
    if (trials < 30) throw ConfigError("estimate_verdict_prob: need at least 30 trials");
    TrialReport rep;
    rep.suite = suite;
    rep.master_seed = seed;
    rep.trials = trials;
    rep.point_key = point_key;

    const std::uint64_t tag = stream_tag(suite);
    std::mutex mu;
    parallel_for(threads, trials, [&](std::size_t i) {
        Rng rng = Rng::derive(seed, tag, i);
        const std::string label = run(i, rng);
        std::lock_guard<std::mutex> lock(mu);
        ++rep.outcomes[label];
    });

    const auto it = rep.outcomes.find(point_key);
    const std::size_t hits = it == rep.outcomes.end() ? 0 : it->second;
    rep.point_estimate = static_cast<double>(hits) / static_cast<double>(trials);
    rep.interval = wilson_interval(hits, trials);
    return rep;
}

// ---------------------------------------------------------------------------
// Concentration suites

nlohmann::json ConcentrationReport::to_json() const {
    return nlohmann::json{{"suite", suite},
                          {"regime", regime},
                          {"trials", trials},
                          {"violations", violations},
                          {"violation_rate", violation_rate()},
                          {"bound_expr", bound_expr}};
}

namespace {

ConcentrationReport run_violation_suite(std::string suite, nlohmann::json regime,
                                        std::size_t trials, std::uint64_t seed, int threads,
                                        std::string bound_expr,
                                        const std::function<bool(std::size_t, Rng&)>& violates) {
    ConcentrationReport rep;
    rep.suite = std::move(suite);
    rep.regime = std::move(regime);
    rep.trials = trials;
    rep.bound_expr = std::move(bound_expr);
    const std::uint64_t tag = stream_tag(rep.suite);
    std::mutex mu;
    parallel_for(threads, trials, [&](std::size_t i) {
        Rng rng = Rng::derive(seed, tag, i);
        if (violates(i, rng)) {
            std::lock_guard<std::mutex> lock(mu);
            ++rep.violations;
        }
    });
    return rep;
}

double compute_z(const LabeledDistribution& dref, const BooleanFunction& f, double p) {
    return dref.marginal().expect([&](std::uint32_t x) {
        const double y = dref.label_mean(x);
        const double fx = f(x) ? 1.0 : 0.0;
        return (1.0 - p) * y * fx + p * (1.0 - y) * (1.0 - fx);
    });
}

}  // namespace

ConcentrationReport check_z_concentration(const LabeledDistribution& dref, double p,
                                          double delta_rel, std::size_t trials,
                                          std::uint64_t seed, int threads) {
    const int n = dref.dim();
    return run_violation_suite(
        "z_concentration",
        {{"n", n}, {"p", p}, {"delta_rel", delta_rel}},
        trials, seed, threads,
        "Pr[|Z - p(1-p)| > delta p(1-p)] <= 2 exp(-Omega(delta^2 p^2 (1-p)^2 / ||D_x||_2^2))",
        [&](std::size_t, Rng& rng) {
            const BooleanFunction f = BooleanFunction::random_biased(n, p, rng);
            const double z = compute_z(dref, f, p);
            return std::abs(z - p * (1.0 - p)) > delta_rel * p * (1.0 - p);
        });
}

ConcentrationReport check_error_blowup(const LabeledDistribution& dref, double p, double delta,
                                       std::size_t trials, std::uint64_t seed, int threads) {
    const int n = dref.dim();
    return run_violation_suite(
        "error_blowup",
        {{"n", n}, {"p", p}, {"delta", delta}},
        trials, seed, threads,
        "Pr[Pr_D[g != f] > Pr_Dref[g != y] + delta] <= exp(-Omega((delta p)^2 (1-p)^2 / ||D_x||_2^2))",
        [&](std::size_t, Rng& rng) {
            const BooleanFunction f = BooleanFunction::random_biased(n, p, rng);
            const BooleanFunction g = BooleanFunction::random(n, rng);
            const auto [d, z] = filtered_distribution(dref, f);
            (void)z;
            const double lhs = dist(g, f, d);
            const double rhs = err(g, dref) + delta;
            return lhs > rhs;
        });
}

std::vector<int> three_color_permutation(const Permutation& pi) {
    const std::uint32_t size = 1u << pi.dim();
    std::vector<int> color(size, -1);
    std::vector<bool> visited(size, false);
    for (std::uint32_t start = 0; start < size; ++start) {
        if (visited[start]) continue;
        // Walk the cycle; edges alternate colors 0/1, odd cycles close with 2.
        std::vector<std::uint32_t> cycle;
        std::uint32_t x = start;
        do {
            visited[x] = true;
            cycle.push_back(x);
            x = pi.apply(x);
        } while (x != start);
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            if (i + 1 == cycle.size() && (cycle.size() & 1))
                color[cycle[i]] = 2;
            else
                color[cycle[i]] = static_cast<int>(i & 1);
        }
    }
    // Validate: within each class no vertex appears in two edges.
    for (int cls = 0; cls < 3; ++cls) {
        std::vector<int> degree(size, 0);
        for (std::uint32_t x = 0; x < size; ++x) {
            if (color[x] != cls) continue;
            if (++degree[x] > 1 || ++degree[pi.apply(x)] > 1)
                throw ContractViolation("three_color_permutation: vertex repeated in a color class");
        }
    }
    return color;
}

ConcentrationReport check_type12(const Distribution& dstar, double p, const Permutation& pi,
                                 const TestFunction& phi, std::size_t trials, double eps,
                                 std::uint64_t seed, int threads) {
    if (pi.dim() != dstar.dim()) throw DimensionMismatch("check_type12: dimension mismatch");
    three_color_permutation(pi);  // structural check from the pair-query analysis
    const int n = dstar.dim();
    const double e_phi = dstar.expect([&](std::uint32_t x) { return phi(x); });
    return run_violation_suite(
        "type12",
        {{"n", n}, {"p", p}, {"eps", eps}, {"dstar_l2_sq", dstar.l2_norm_sq()}},
        trials, seed, threads,
        "Pr[dev > eps] <= 8 exp(-Omega(eps^2 / ||D*||_2^2))",
        [&](std::size_t, Rng& rng) {
            const BooleanFunction f = BooleanFunction::random_biased(n, p, rng);
            const double t1 = dstar.expect(
                [&](std::uint32_t x) { return phi(x) * (f(x) ? 1.0 : 0.0); });
            const double t2 = dstar.expect([&](std::uint32_t x) {
                return phi(x) * (f(x) ? 1.0 : 0.0) * (f(pi.apply(x)) ? 1.0 : 0.0);
            });
            return std::abs(t1 - p * e_phi) > eps || std::abs(t2 - p * p * e_phi) > eps;
        });
}

ConcentrationReport check_type345(const LabeledDistribution& dref, const TestFunction& phi,
                                  const Permutation& pi, std::size_t trials, double eps,
                                  std::uint64_t seed, int threads) {
    if (pi.dim() != dref.dim()) throw DimensionMismatch("check_type345: dimension mismatch");
    const int n = dref.dim();
    const double p = dref.positive_rate();
    const double ref_phi =
        dref.expect_pair([&](std::uint32_t x) { return phi(x); },
                         [&](std::uint32_t x) { return phi(x); });
    const double ref_phi_y = dref.expect_pair([](std::uint32_t) { return 0.0; },
                                              [&](std::uint32_t x) { return phi(x); });
    return run_violation_suite(
        "type345",
        {{"n", n}, {"p", p}, {"eps", eps}},
        trials, seed, threads,
        "Pr[dev > eps] <= 8 exp(-Omega(eps^2 p^2 (1-p)^2 / ||D_x||_2^2))",
        [&](std::size_t, Rng& rng) {
            const BooleanFunction f = BooleanFunction::random_biased(n, p, rng);
            const auto [d, z] = filtered_distribution(dref, f);
            (void)z;
            const double t3 = d.expect([&](std::uint32_t x) { return phi(x); });
            const double t4 =
                d.expect([&](std::uint32_t x) { return phi(x) * (f(x) ? 1.0 : 0.0); });
            const double t5 = d.expect([&](std::uint32_t x) {
                return phi(x) * (f(x) ? 1.0 : 0.0) * (f(pi.apply(x)) ? 1.0 : 0.0);
            });
            return std::abs(t3 - ref_phi) > eps || std::abs(t4 - ref_phi_y) > eps ||
                   std::abs(t5 - p * ref_phi_y) > eps;
        });
}

// ---------------------------------------------------------------------------
// SQ dimension

namespace {

std::vector<std::vector<double>> pairwise_distances(const ConceptClass& cls,
                                                    const Distribution& d) {
    const std::size_t m = cls.size();
    std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double v = d.expect([&](std::uint32_t x) {
                return cls.member_eval(i, x) != cls.member_eval(j, x) ? 1.0 : 0.0;
            });
            dist[i][j] = dist[j][i] = v;
        }
    }
    return dist;
}

bool in_band(double v, std::size_t d) {
    const double dd = static_cast<double>(d);
    const double w = 1.0 / (dd * dd * dd);
    constexpr double slop = 1e-12;
    return v >= (1.0 - w) / 2.0 - slop && v <= (1.0 + w) / 2.0 + slop;
}

/// Word-array vertex sets for clique search over up to a few thousand members.
struct BitRows {
    std::size_t m = 0;
    std::size_t words = 0;
    std::vector<std::uint64_t> rows;  // m rows of `words` words

    explicit BitRows(std::size_t m_) : m(m_), words((m_ + 63) / 64), rows(m_ * words, 0) {}
    std::uint64_t* row(std::size_t i) { return rows.data() + i * words; }
    const std::uint64_t* row(std::size_t i) const { return rows.data() + i * words; }
    void set(std::size_t i, std::size_t j) { row(i)[j >> 6] |= std::uint64_t{1} << (j & 63); }
};

std::size_t count_bits(const std::uint64_t* a, std::size_t words) {
    std::size_t total = 0;
    for (std::size_t w = 0; w < words; ++w) total += std::popcount(a[w]);
    return total;
}

int first_bit(const std::uint64_t* a, std::size_t words) {
    for (std::size_t w = 0; w < words; ++w)
        if (a[w]) return static_cast<int>(w * 64 + std::countr_zero(a[w]));
    return -1;
}

bool has_clique(const BitRows& adj, std::vector<std::uint64_t> candidates, std::size_t chosen,
                std::size_t want) {
    if (chosen >= want) return true;
    const std::size_t words = adj.words;
    for (;;) {
        if (chosen + count_bits(candidates.data(), words) < want) return false;
        const int v = first_bit(candidates.data(), words);
        if (v < 0) return false;
        candidates[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
        std::vector<std::uint64_t> next(words);
        for (std::size_t w = 0; w < words; ++w) next[w] = candidates[w] & adj.row(v)[w];
        if (has_clique(adj, std::move(next), chosen + 1, want)) return true;
    }
}

BitRows band_graph(const std::vector<std::vector<double>>& dist, std::size_t cand) {
    const std::size_t m = dist.size();
    BitRows adj(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j && in_band(dist[i][j], cand)) adj.set(i, j);
    return adj;
}

}  // namespace

SqDimResult sq_dimension(const ConceptClass& cls, const Distribution& d, SqDimMode mode) {
    const std::size_t m = cls.size();
    if (m == 0) return {0, true};
    if (mode == SqDimMode::Exact && m > 24)
        throw ConfigError("sq_dimension: exact mode supports |C| <= 24");
    if (m > 4096) throw ConfigError("sq_dimension: class too large for the distance matrix");
    const auto dist = pairwise_distances(cls, d);

    for (std::size_t cand = m; cand >= 2; --cand) {
        const BitRows adj = band_graph(dist, cand);
        if (mode == SqDimMode::Exact) {
            std::vector<std::uint64_t> all(adj.words, 0);
            for (std::size_t i = 0; i < m; ++i) all[i >> 6] |= std::uint64_t{1} << (i & 63);
            if (has_clique(adj, std::move(all), 0, cand)) return {cand, true};
        } else {
            for (std::size_t seed = 0; seed < m; ++seed) {
                std::vector<std::uint64_t> cand_set(adj.row(seed), adj.row(seed) + adj.words);
                std::size_t size = 1;
                for (;;) {
                    const int v = first_bit(cand_set.data(), adj.words);
                    if (v < 0) break;
                    ++size;
                    for (std::size_t w = 0; w < adj.words; ++w)
                        cand_set[w] &= adj.row(v)[w];
                }
                if (size >= cand) return {cand, false};
            }
        }
    }
    return {1, mode == SqDimMode::Exact};
}

std::size_t sq_dimension_bruteforce(const ConceptClass& cls, const Distribution& d) {
    const std::size_t m = cls.size();
    if (m == 0) return 0;
    if (m > 20) throw ConfigError("sq_dimension_bruteforce: |C| <= 20");
    const auto dist = pairwise_distances(cls, d);
    std::size_t best = 1;
    const std::uint32_t total = 1u << m;
    for (std::uint32_t subset = 1; subset < total; ++subset) {
        const std::size_t k = static_cast<std::size_t>(std::popcount(subset));
        if (k <= best) continue;
        bool ok = true;
        for (std::uint32_t ai = subset; ok && ai; ai &= ai - 1) {
            const int i = std::countr_zero(ai);
            for (std::uint32_t aj = ai & (ai - 1); ok && aj; aj &= aj - 1) {
                const int j = std::countr_zero(aj);
                if (!in_band(dist[i][j], k)) ok = false;
            }
        }
        if (ok) best = k;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Lower-bound compatibility

nlohmann::json LowerBoundReport::to_json() const {
    return nlohmann::json{{"d", d},
                          {"q_threshold", q_threshold},
                          {"tau_threshold", tau_threshold},
                          {"norm_threshold", norm_threshold},
                          {"q_small", q_small},
                          {"tau_large", tau_large},
                          {"marginal_norm_small", marginal_norm_small},
                          {"dstar_norm_small", dstar_norm_small},
                          {"inside_forbidden", inside_forbidden}};
}

LowerBoundReport lower_bound_check(std::size_t q, double tau, double max_dstar_l2_sq,
                                   double marginal_l2_sq, std::size_t d) {
    LowerBoundReport rep;
    rep.d = d;
    const double droot = std::cbrt(static_cast<double>(d));
    rep.q_threshold = 10.0 * droot;
    rep.tau_threshold = 0.1 / droot;
    rep.norm_threshold = 0.1 / droot;
    rep.q_small = static_cast<double>(q) <= rep.q_threshold;
    rep.tau_large = tau >= rep.tau_threshold;
    rep.marginal_norm_small = marginal_l2_sq <= rep.norm_threshold;
    rep.dstar_norm_small = max_dstar_l2_sq <= rep.norm_threshold;
    rep.inside_forbidden = d >= 2 && rep.q_small && rep.tau_large && rep.marginal_norm_small &&
                           rep.dstar_norm_small;
    return rep;
}

}  // namespace sqlab
