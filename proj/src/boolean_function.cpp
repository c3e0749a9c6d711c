#include "sqlab/boolean_function.hpp"

#include <bit>

namespace sqlab {

namespace {

void check_dim(int n) {
    if (n < 1 || n > kMaxDenseDim)
        throw DimensionMismatch("BooleanFunction: dimension out of [1,24]");
}

std::size_t word_count(int n) {
    return (std::size_t{1} << n) <= 64 ? 1 : ((std::size_t{1} << n) >> 6);
}

}  // namespace

BooleanFunction BooleanFunction::dense(int n, std::vector<std::uint64_t> words) {
    check_dim(n);
    if (words.size() != word_count(n))
        throw DimensionMismatch("BooleanFunction::dense: table length is not 2^n");
    if ((std::size_t{1} << n) < 64) words[0] &= (std::uint64_t{1} << (std::size_t{1} << n)) - 1;
    return BooleanFunction(n, std::move(words));
}

BooleanFunction BooleanFunction::from_bits(int n, const std::function<bool(std::uint32_t)>& fn) {
    check_dim(n);
    std::vector<std::uint64_t> w(word_count(n), 0);
    const std::uint32_t size = 1u << n;
    for (std::uint32_t x = 0; x < size; ++x)
        if (fn(x)) w[x >> 6] |= std::uint64_t{1} << (x & 63u);
    return BooleanFunction(n, std::move(w));
}

BooleanFunction BooleanFunction::constant(int n, bool value) {
    check_dim(n);
    std::vector<std::uint64_t> w(word_count(n), value ? ~std::uint64_t{0} : 0);
    return dense(n, std::move(w));
}

BooleanFunction BooleanFunction::parity(int n, std::uint32_t mask) {
    check_dim(n);
    if ((mask & ~low_mask(n)) != 0) throw DimensionMismatch("parity: mask outside [n]");
    return from_bits(n, [mask](std::uint32_t x) { return std::popcount(x & mask) & 1; });
}

BooleanFunction BooleanFunction::dictator(int n, int i) {
    check_dim(n);
    if (i < 0 || i >= n) throw DimensionMismatch("dictator: coordinate out of range");
    return parity(n, 1u << i);
}

BooleanFunction BooleanFunction::random(int n, Rng& rng) {
    check_dim(n);
    std::vector<std::uint64_t> w(word_count(n));
    for (auto& word : w) word = rng.u64();
    return dense(n, std::move(w));
}

BooleanFunction BooleanFunction::random_biased(int n, double p, Rng& rng) {
    check_dim(n);
    return from_bits(n, [&](std::uint32_t) { return rng.bernoulli(p); });
}

BooleanFunction BooleanFunction::lazy_biased(int n, double p, Rng rng) {
    check_dim(n);
    if (p < 0.0 || p > 1.0) throw QueryError("lazy_biased: p outside [0,1]");
    return BooleanFunction(n, std::make_shared<LazyState>(p, std::move(rng)));
}

double BooleanFunction::bias() const {
    if (!lazy_) throw QueryError("bias: not a lazy biased function");
    return lazy_->p;
}

bool BooleanFunction::lazy_eval(std::uint32_t x) const {
    std::lock_guard<std::mutex> lock(lazy_->mu);
    auto it = lazy_->memo.find(x);
    if (it != lazy_->memo.end()) return it->second;
    bool b = lazy_->rng.bernoulli(lazy_->p);
    lazy_->memo.emplace(x, b);
    return b;
}

bool BooleanFunction::eval(const BitVector& x) const {
    if (x.dim() != n_) throw DimensionMismatch("eval: dimension mismatch");
    return (*this)(x.value());
}

bool BooleanFunction::prefix_randomized_eval(int prefix_len, std::uint32_t x, Rng& rng) const {
    if (prefix_len < 0 || prefix_len > n_)
        throw DimensionMismatch("prefix_randomized_eval: prefix length out of [0,n]");
    const std::uint32_t m = low_mask(prefix_len);
    const std::uint32_t rerolled = (x & ~m) | (rng.bits(prefix_len) & m);
    return (*this)(rerolled);
}

std::uint64_t BooleanFunction::ones_count() const {
    std::uint64_t total = 0;
    for (std::uint64_t w : words()) total += std::popcount(w);
    return total;
}

const std::vector<std::uint64_t>& BooleanFunction::words() const {
    if (lazy_) throw QueryError("words: lazy function has no dense table");
    return words_;
}

bool operator==(const BooleanFunction& a, const BooleanFunction& b) {
    if (a.n_ != b.n_ || a.is_dense() != b.is_dense()) return false;
    if (a.is_dense()) return a.words_ == b.words_;
    return a.lazy_ == b.lazy_;
}

}  // namespace sqlab
