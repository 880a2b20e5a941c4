#pragma once

#include <cstdint>
#include <vector>

#include "hord/int_types.hpp"

namespace hord::series {

// Coefficients of eta^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2}, truncated below `len`.
// Pairs are (exponent, coefficient), exponents increasing.
std::vector<std::pair<uint32_t, int64_t>> eta_cubed_sparse(size_t len);

// Exact truncated self-convolution r[n] = sum_{i+j=n} a[i]*a[j], n < out_len.
// int128 fast path with exact spill into mpz; result is independent of the
// worker count.
std::vector<Int> self_convolve(const std::vector<int64_t>& a, size_t out_len, unsigned workers);
std::vector<Int> self_convolve(const std::vector<Int>& a, size_t out_len, unsigned workers);

// Truncated product of two mpz series.
std::vector<Int> multiply(const std::vector<Int>& a, const std::vector<Int>& b,
                          size_t out_len, unsigned workers);

// tau(1..n_max) by the sparse eta^3 + three self-convolution path.
std::vector<Int> delta_coefficients(size_t n_max, unsigned workers);

// sigma_k(1..n_max) divisor sums.
std::vector<Int> sigma_series(size_t n_max, unsigned k);

// Eisenstein q-expansions E4, E6 as length-(n_max+1) series starting at q^0.
std::vector<Int> eisenstein4(size_t n_max, unsigned workers);
std::vector<Int> eisenstein6(size_t n_max, unsigned workers);

// a_f(1..n_max) for the unique normalized cusp form of the given weight
// (one of 12, 16, 18, 20, 22, 26), level 1.
std::vector<Int> eigenform_coefficients(unsigned weight, size_t n_max, unsigned workers);

}  // namespace hord::series
