#include "sqlab/fourier.hpp"

namespace sqlab {

double FourierSpectrum::parseval_sum() const {
    double acc = 0.0;
    for (double c : coeff) acc += c * c;
    return acc;
}

void wht_inplace(std::vector<double>& a) {
    const std::size_t size = a.size();
    for (std::size_t half = 1; half < size; half <<= 1) {
        for (std::size_t block = 0; block < size; block += half << 1) {
            for (std::size_t i = block; i < block + half; ++i) {
                const double u = a[i];
                const double v = a[i + half];
                a[i] = u + v;
                a[i + half] = u - v;
            }
        }
    }
}

FourierSpectrum walsh_hadamard(std::vector<double> table, int n) {
    if (n < 1 || n > kMaxDenseDim)
        throw DimensionMismatch("walsh_hadamard: dimension too large for dense representation");
    if (table.size() != (std::size_t{1} << n))
        throw DimensionMismatch("walsh_hadamard: table length is not 2^n");
    wht_inplace(table);
    const double scale = 1.0 / static_cast<double>(std::size_t{1} << n);
    for (double& c : table) c *= scale;
    return FourierSpectrum{n, std::move(table)};
}

std::vector<double> inverse_walsh_hadamard(const FourierSpectrum& spec) {
    std::vector<double> table = spec.coeff;
    wht_inplace(table);
    return table;
}

std::vector<double> pm1_table(const BooleanFunction& f) {
    const std::uint32_t size = 1u << f.dim();
    std::vector<double> t(size);
    for (std::uint32_t x = 0; x < size; ++x) t[x] = f(x) ? -1.0 : 1.0;
    return t;
}

double influence_exact(const BooleanFunction& f, int i) {
    if (i < 0 || i >= f.dim()) throw DimensionMismatch("influence_exact: coordinate out of range");
    const std::uint32_t size = 1u << f.dim();
    const std::uint32_t flip = 1u << i;
    std::uint64_t diff = 0;
    for (std::uint32_t x = 0; x < size; ++x)
        if (f(x) != f(x ^ flip)) ++diff;
    return static_cast<double>(diff) / static_cast<double>(size);
}

double influence_exact(const BooleanFunction& f, int i, const Restriction& r) {
    if (i < 0 || i >= f.dim()) throw DimensionMismatch("influence_exact: coordinate out of range");
    r.check_dim(f.dim());
    if (r.fixes(i)) throw QueryError("influence_exact: coordinate is fixed by the restriction");
    const std::uint32_t flip = 1u << i;
    const Distribution sub = Distribution::subcube(f.dim(), r);
    return sub.expect([&](std::uint32_t x) { return f(x) != f(x ^ flip) ? 1.0 : 0.0; });
}

}  // namespace sqlab
