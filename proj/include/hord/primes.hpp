#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hord/int_types.hpp"

namespace hord {

// Primes below `limit` (exclusive), plain sieve of Eratosthenes.
std::vector<uint32_t> prime_sieve(uint64_t limit);

// Shared process-wide prime list covering at least `limit`; thread-safe.
const std::vector<uint32_t>& cached_primes(uint64_t limit);

// lpf[n] = least prime factor of n for 0 <= n <= limit (lpf[0]=lpf[1]=0).
std::vector<uint32_t> least_prime_factor_table(uint32_t limit);

// Deterministic Miller-Rabin, valid for all n < 2^64.
bool is_prime_u64(uint64_t n);

// BPSW-backed primality for arbitrary size (mpz_probab_prime_p wrapper).
bool is_prime(const Int& n);

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m);
uint64_t powmod_u64(uint64_t a, uint64_t e, uint64_t m);

struct Factorization {
    std::map<Int, unsigned> factors;  // prime -> multiplicity
    bool complete = true;             // false when the rho budget ran out
    Int undecided = 1;                // cofactor left unfactored when !complete

    Int value() const {
        Int v = 1;
        for (auto& [p, e] : factors) v *= pow_int(p, e);
        if (!complete) v *= undecided;
        return v;
    }
    bool squarefree() const {
        for (auto& [p, e] : factors)
            if (e > 1) return false;
        return true;
    }
};

// Pollard rho with Brent cycle detection. Parameters are derived
// deterministically from (seed, n, restart index); restart budget per spec.
inline constexpr unsigned kRhoRestartBudget = 64;

// Full factorization of |n|. Values < 2^64 always complete (deterministic
// primality + rho); larger values may come back incomplete when the budget
// runs out.
Factorization factorize(const Int& n, uint64_t seed = 1);
Factorization factorize_u64(uint64_t n, uint64_t seed = 1);

// CRT for pairwise-coprime moduli: x = r[i] mod m[i], 0 <= x < prod m.
// Throws std::invalid_argument when moduli are not coprime.
Int crt(const std::vector<Int>& residues, const std::vector<Int>& moduli);

// Logarithmic integral li(x) = pv int_0^x dt/log t, double precision.
double log_integral(double x);

}  // namespace hord
