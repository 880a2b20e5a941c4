#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hord/errors.hpp"
#include "hord/int_types.hpp"

namespace hord::sieve {

struct LinearForm {
    Int a, b;  // L(n) = a n + b
};

struct LinearSystem {
    std::vector<LinearForm> forms;
    std::vector<uint64_t> sigma;  // excluded primes, sorted ascending

    size_t k() const { return forms.size(); }
    bool sigma_contains(uint64_t p) const;
    Int coefficient_bound() const;  // M = max |a_i|, |b_i|
};

LinearSystem make_system(std::vector<std::pair<long, long>> forms, std::vector<uint64_t> sigma);

struct ValidationReport {
    bool nondegenerate = true;              // a_i != 0, gcd(a_i,b_i)=1, cross-differences != 0
    bool coefficient_primes_in_sigma = true;     // prime factors of each a_i lie in Sigma
    bool cross_difference_primes_in_sigma = true;
    bool small_primes_in_sigma = true;      // primes <= 2k lie in Sigma
    bool sigma_divides_coefficients = true; // every Sigma prime divides every a_i
    std::vector<std::string> failures;
    std::vector<std::string> warnings;

    // minimum needed to compute sieve roots: distinct, well-defined residues
    bool sieveable() const {
        return nondegenerate && coefficient_primes_in_sigma && cross_difference_primes_in_sigma;
    }
    bool ok(bool require_divisibility) const {
        return sieveable() && small_primes_in_sigma &&
               (!require_divisibility || sigma_divides_coefficients);
    }
};

ValidationReport validate_system(const LinearSystem& sys, bool require_divisibility);

struct FormFactorization {
    Int value;
    Int sigma_part = 1;                 // Sigma-unit part, with full multiplicity
    std::vector<Int> rough_factors;     // non-Sigma primes, repeated per multiplicity
    bool sigma_squarefree = true;
    bool composite = false;
    bool undecided = false;             // factorization budget exhausted
};

struct Survivor {
    uint64_t n;
    std::vector<FormFactorization> forms;
};

struct SieveOutcome {
    LinearSystem system;
    uint64_t x = 0;
    uint64_t z = 0;
    std::vector<uint64_t> sifted;   // Omega(x, z)
    std::vector<Survivor> omega1;   // filled by refine_omega1
    uint64_t count_omega = 0;
    uint64_t count_omega1 = 0;
    uint64_t count_prime = 0;       // some L_i(n) prime
    uint64_t count_square = 0;      // some L_i(n) not Sigma-squarefree
    uint64_t count_unit = 0;        // some |L_i(n)| <= 1
    uint64_t count_undecided = 0;
    double predicted = 0;           // x * W_k(z)
    double u = 0;                   // log x / log z
    bool refined = false;
};

inline constexpr uint64_t kDefaultSegment = 1ull << 20;

// Omega(x, z): n in [1, x] such that no prime p < z outside Sigma divides
// any L_i(n). Segmented; survivor order is ascending regardless of the
// segment size or worker count.
SieveOutcome sift_omega(const LinearSystem& sys, uint64_t x, uint64_t z, unsigned workers = 1,
                        uint64_t segment = kDefaultSegment);

// Keeps n whose forms are all composite and Sigma-squarefree, recording the
// factorization evidence. Factorization failures go to the undecided bucket.
void refine_omega1(SieveOutcome& outcome, unsigned workers = 1, uint64_t seed = 1);

// n <= x with the other k-1 forms sifted and |L_which(n)| prime.
uint64_t count_omega_star(const LinearSystem& sys, uint64_t x, uint64_t z, size_t which,
                          unsigned workers = 1);

struct MertensProducts {
    Flt w_k;        // W_k(z)
    Flt w_star;     // W*_{k-1}(z)
};

MertensProducts mertens_products(const LinearSystem& sys, uint64_t z,
                                 unsigned precision_bits = kDefaultPrecisionBits);

// Evaluates W_ell(z) = prod_{p<z, p not in Sigma} (1 - ell/p) and the
// (1 - ell/(p-1)) variant for arbitrary ell.
Flt mertens_w(const LinearSystem& sys, uint64_t z, unsigned ell, bool star,
              unsigned precision_bits = kDefaultPrecisionBits);

// Explicit bound k M (x+1)/(z-1) + k sqrt(M x + M) on the count of n in
// Omega(x,z) with some L_i(n) not Sigma-squarefree.
double nonsquarefree_bound(const LinearSystem& sys, double x, double z);

struct AvoidResult {
    std::vector<Survivor> retained;
    uint64_t dropped = 0;
    double retained_fraction = 1.0;  // of the omega1 input
};

// Drops survivors whose forms have any prime factor (Sigma or rough)
// satisfying `bad`.
AvoidResult avoid_prime_set(const SieveOutcome& outcome,
                            const std::function<bool(const Int&)>& bad);

// JSON-lines survivor dump: {n, forms:[{i, value, sigma_part, rough_factors}]}
void dump_survivors(const SieveOutcome& outcome, std::ostream& out);

}  // namespace hord::sieve
