#include "sqlab/concept_class.hpp"

#include <bit>

namespace sqlab {

std::pair<std::size_t, std::size_t> ConceptClass::erm(std::span<const Example> samples) const {
    const std::size_t count = size();
    if (count == 0) throw QueryError("erm: empty concept class");
    std::size_t best_idx = 0;
    std::size_t best_errors = samples.size() + 1;
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t errors = 0;
        for (const Example& e : samples)
            if (member_eval(idx, e.x) != e.y) ++errors;
        if (errors < best_errors) {
            best_errors = errors;
            best_idx = idx;
        }
    }
    return {best_idx, best_errors};
}

// ---------------------------------------------------------------------------
// ParityClass

ParityClass::ParityClass(int n, int max_arity, bool include_empty)
    : n_(n), max_arity_(max_arity) {
    if (max_arity < 0 || max_arity > n) throw DimensionMismatch("ParityClass: arity out of range");
    const std::uint32_t top = low_mask(n);
    for (std::uint32_t m = 0; ; ++m) {
        const int pc = std::popcount(m);
        if ((pc > 0 || include_empty) && pc <= max_arity) masks_.push_back(m);
        if (m == top) break;
    }
}

BooleanFunction ParityClass::member(std::size_t idx) const {
    return BooleanFunction::parity(n_, masks_[idx]);
}

bool ParityClass::member_eval(std::size_t idx, std::uint32_t x) const {
    return std::popcount(masks_[idx] & x) & 1;
}

std::string ParityClass::name() const {
    return "parities(arity<=" + std::to_string(max_arity_) + ")";
}

std::pair<std::size_t, std::size_t> ParityClass::erm(std::span<const Example> samples) const {
    if (masks_.empty()) throw QueryError("erm: empty concept class");
    std::size_t best_idx = 0;
    std::size_t best_errors = samples.size() + 1;
    for (std::size_t idx = 0; idx < masks_.size(); ++idx) {
        const std::uint32_t m = masks_[idx];
        std::size_t errors = 0;
        for (const Example& e : samples)
            if (static_cast<bool>(std::popcount(m & e.x) & 1) != e.y) ++errors;
        if (errors < best_errors) {
            best_errors = errors;
            best_idx = idx;
        }
    }
    return {best_idx, best_errors};
}

// ---------------------------------------------------------------------------
// JuntaClass

JuntaClass::JuntaClass(int n, int k) : n_(n), k_(k) {
    if (k < 0 || k > n) throw DimensionMismatch("JuntaClass: k out of range");
    if ((std::size_t{1} << k) > 20) throw DimensionMismatch("JuntaClass: 2^k table too large");
    // All size-k subsets of [n], lexicographic by mask value.
    const std::uint32_t top = low_mask(n);
    for (std::uint32_t m = 0; ; ++m) {
        if (std::popcount(m) == k) supports_.push_back(m);
        if (m == top) break;
    }
}

std::size_t JuntaClass::size() const {
    return supports_.size() << (std::size_t{1} << k_);
}

std::uint32_t JuntaClass::support_mask(std::size_t support_idx) const {
    return supports_[support_idx];
}

std::uint32_t JuntaClass::cell_of(std::uint32_t support, std::uint32_t x) const {
    std::uint32_t cell = 0;
    int out = 0;
    for (int i = 0; i < n_; ++i) {
        if ((support >> i) & 1u) {
            cell |= ((x >> i) & 1u) << out;
            ++out;
        }
    }
    return cell;
}

BooleanFunction JuntaClass::member(std::size_t idx) const {
    const std::size_t tables = std::size_t{1} << (std::size_t{1} << k_);
    const std::uint32_t support = supports_[idx / tables];
    const std::uint64_t table = idx % tables;
    return BooleanFunction::from_bits(
        n_, [&](std::uint32_t x) { return (table >> cell_of(support, x)) & 1u; });
}

bool JuntaClass::member_eval(std::size_t idx, std::uint32_t x) const {
    const std::size_t tables = std::size_t{1} << (std::size_t{1} << k_);
    const std::uint32_t support = supports_[idx / tables];
    const std::uint64_t table = idx % tables;
    return (table >> cell_of(support, x)) & 1u;
}

std::string JuntaClass::name() const {
    return std::to_string(k_) + "-juntas";
}

std::pair<std::size_t, std::size_t> JuntaClass::erm(std::span<const Example> samples) const {
    const std::size_t tables = std::size_t{1} << (std::size_t{1} << k_);
    std::size_t best_idx = 0;
    std::size_t best_errors = samples.size() + 1;
    const std::uint32_t cells = 1u << k_;
    std::vector<std::uint32_t> zeros(cells), ones(cells);
    for (std::size_t s = 0; s < supports_.size(); ++s) {
        const std::uint32_t support = supports_[s];
        std::fill(zeros.begin(), zeros.end(), 0u);
        std::fill(ones.begin(), ones.end(), 0u);
        for (const Example& e : samples) {
            const std::uint32_t cell = cell_of(support, e.x);
            if (e.y) ++ones[cell];
            else ++zeros[cell];
        }
        std::uint64_t table = 0;
        std::size_t errors = 0;
        for (std::uint32_t cell = 0; cell < cells; ++cell) {
            if (ones[cell] > zeros[cell]) {
                table |= std::uint64_t{1} << cell;
                errors += zeros[cell];
            } else {
                errors += ones[cell];  // tie keeps bit 0: smallest table integer
            }
        }
        if (errors < best_errors) {
            best_errors = errors;
            best_idx = s * tables + table;
        }
    }
    return {best_idx, best_errors};
}

// ---------------------------------------------------------------------------
// DictatorClass / ExplicitClass

BooleanFunction DictatorClass::member(std::size_t idx) const {
    return BooleanFunction::dictator(n_, static_cast<int>(idx));
}

ExplicitClass::ExplicitClass(std::vector<BooleanFunction> members, std::string label)
    : members_(std::move(members)), label_(std::move(label)) {
    if (members_.empty()) throw QueryError("ExplicitClass: empty member list");
    for (const auto& f : members_)
        if (f.dim() != members_.front().dim())
            throw DimensionMismatch("ExplicitClass: mixed dimensions");
}

int ExplicitClass::dim() const {
    return members_.front().dim();
}

}  // namespace sqlab
