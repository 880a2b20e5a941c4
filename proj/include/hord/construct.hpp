#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hord/forms.hpp"
#include "hord/sieve.hpp"

namespace hord::construct {

enum class CompareMode { NormalizedLambda, RawCoefficient };

struct TargetSpec {
    std::vector<const forms::CoefficientTable*> tables;  // one per form, k entries
    std::vector<uint64_t> shifts;                        // distinct positive nu_i
    CompareMode mode = CompareMode::NormalizedLambda;

    size_t k() const { return tables.size(); }
    uint64_t K() const;
    bool same_weight() const;
    void validate() const;  // throws on zero a(nu_i), repeated shifts, ...
};

// c_0 = min_i min(|lambda_i(nu_i)|, 2^{-(k_i-1)/2} / |lambda_i(nu_i)|)
Flt compute_c0(const TargetSpec& spec, unsigned precision_bits = kDefaultPrecisionBits);
Rat compute_c0_squared(const TargetSpec& spec);  // exact value of c_0^2

// Smallest admissible primes p_1 < ... < p_k, each > 2K, with a(p) != 0 and
// an irrational Satake angle. Throws SearchExhausted past the table bound.
std::vector<uint64_t> choose_primes(const TargetSpec& spec);

inline constexpr uint64_t kDefaultExponentCap = 100000;

// l_k = 1; downward, the smallest l_i with
// |lambda_i(p_i^{l_i})| < delta |lambda_{i+1}(p_{i+1}^{l_{i+1}})|,
// decided by exact integer cross-comparison (trig only prefilters).
std::vector<uint64_t> choose_exponents(const TargetSpec& spec,
                                       const std::vector<uint64_t>& primes, const Rat& delta,
                                       uint64_t ell_cap = kDefaultExponentCap);

struct ProgressionSpec {
    std::vector<uint64_t> primes;
    std::vector<uint64_t> exponents;
    Int A, B;                    // m = A n + B
    sieve::LinearSystem system;  // derived forms L_i with Sigma
    Rat delta;
    Rat c0_squared;
    // exact verdict on |lambda_1(p_1^{l_1})| < delta |lambda_2(p_2^{l_2})| < ...;
    // always true for choose_exponents output, checked here so hand-built
    // progressions (e.g. table-sized test cases) are diagnosable
    bool chain_ok = true;
};

ProgressionSpec build_progression(const TargetSpec& spec, const std::vector<uint64_t>& primes,
                                  const std::vector<uint64_t>& exponents, const Rat& delta);

struct ChainEntry {
    uint64_t shift;
    Int abs_a;      // |a_f(m + shift)|, exact
    double lambda;  // |lambda_f(m + shift)|, for reporting
};

struct Hit {
    Int m;
    uint64_t n;
    std::vector<ChainEntry> chain;
    bool verified = false;
};

struct SearchReport {
    uint64_t x = 0;
    uint64_t z = 0;
    double eta = 0;
    uint64_t sifted = 0;            // #Omega
    uint64_t omega1 = 0;            // survivors with full split + Omega_1 shape
    uint64_t coverage_skipped = 0;  // factor beyond the table bound
    uint64_t not_omega1 = 0;        // prime / non-squarefree / unit values
    uint64_t avoid_dropped = 0;
    uint64_t chain_failed = 0;
    uint64_t near_ties = 0;
    std::vector<Hit> hits;
    double hits_per_expected = 0;   // hits * (log x)^k / x
};

// The full section-5 pipeline over n in [1, x]: sift, refine by complete
// factorization over the table primes, drop small-lambda prime factors,
// then verify the ordering chain exactly. Hits are re-verified from the raw
// tables by independent trial-division factorization.
SearchReport run_ordered_search(const TargetSpec& spec, const ProgressionSpec& pspec, uint64_t x,
                                double eta, const Rat& eps, unsigned workers = 1,
                                uint64_t max_hits = 1000);

// Independent check: factor m + nu_i by trial division over the table
// primes, reassemble a_f multiplicatively, re-test the strict chain.
bool verify_hit_from_tables(const TargetSpec& spec, const Int& m);

struct ScanReport {
    uint64_t m_max = 0;
    uint64_t hit_count = 0;
    std::optional<uint64_t> first_hit;
    std::vector<uint64_t> hits;                             // capped
    std::vector<std::pair<uint64_t, uint64_t>> checkpoints; // (x, cumulative hits)
};

// Exhaustive scan of m <= m_max with exact comparisons.
ScanReport scan_bruteforce(const TargetSpec& spec, uint64_t m_max, uint64_t max_hits = 1000);

enum class Cond2 { FoundWitness, False, Inconclusive };

struct OrderConditions {
    bool cond1 = false;               // a(n) != 0 for n <= k/2
    bool cond_prime_powers = false;   // a(p^l) != 0 for p^l <= k/2
    Cond2 cond2 = Cond2::Inconclusive;
    uint64_t cond2_witness = 0;       // nu with a(nu+1..nu+k) all nonzero
};

OrderConditions check_order_conditions(const forms::CoefficientTable& table, uint64_t k,
                                       std::optional<uint64_t> cond2_bound = {});

struct PairwiseNonzeroReport {
    bool ok = true;
    uint64_t first_violation = 0;  // l with a(p^l) = a(p^{l+1}) = 0
};

// Among consecutive exponents (l, l+1), at least one power is nonzero.
PairwiseNonzeroReport consecutive_nonzero_prime_powers(const forms::FormDescriptor& form,
                                                       uint64_t p, const Int& a_p,
                                                       uint64_t ell_max);

struct RModulus {
    std::vector<std::pair<uint64_t, uint64_t>> sigma_exponents;  // (p, ell_p)
    Int D, r;
    uint64_t h = 0;              // forms are L_j, -h <= j <= h
    sieve::LinearSystem system;  // the 2h+1 derived forms
};

// The section-6 residue construction for a window of k consecutive nonzero
// coefficients. k is treated as 2h+1 (an even k shares its condition with
// k+1).
RModulus build_r_modulus(const forms::CoefficientTable& table, uint64_t k);

}  // namespace hord::construct
