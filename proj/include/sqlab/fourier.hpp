#pragma once

#include <cstdint>
#include <vector>

#include "sqlab/boolean_function.hpp"
#include "sqlab/distribution.hpp"

namespace sqlab {

/// Fourier coefficients of a real-valued function on {0,1}^n over the basis
/// chi_S(x) = (-1)^{|S & x|}, indexed by the subset mask S.
struct FourierSpectrum {
    int n = 0;
    std::vector<double> coeff;  // coeff[S] = f_hat(S)

    double operator[](std::uint32_t s) const { return coeff[s]; }
    /// Sum of squared coefficients; equals E_U[g^2] (Parseval).
    double parseval_sum() const;
};

/// chi_S(x) as +-1.
inline int chi(std::uint32_t s, std::uint32_t x) {
    return (std::popcount(s & x) & 1) ? -1 : 1;
}

/// In-place unnormalized butterfly: a[S] <- sum_x a[x] * chi_S(x).
/// Self-inverse up to a factor of 2^n. O(n 2^n).
void wht_inplace(std::vector<double>& a);

/// Forward transform of a dense table (already in the +-1 convention for
/// boolean inputs): returns f_hat(S) = E_{x~U}[g(x) chi_S(x)].
FourierSpectrum walsh_hadamard(std::vector<double> table, int n);

/// Inverse transform: reconstructs the dense table from the spectrum.
std::vector<double> inverse_walsh_hadamard(const FourierSpectrum& spec);

/// Dense table of f under b -> 1 - 2b.
std::vector<double> pm1_table(const BooleanFunction& f);

/// Pr_{x~U}[f(x) != f(x xor e_i)], exact.
double influence_exact(const BooleanFunction& f, int i);

/// Influence within the subcube selected by r; i must not be fixed by r.
double influence_exact(const BooleanFunction& f, int i, const Restriction& r);

}  // namespace sqlab
