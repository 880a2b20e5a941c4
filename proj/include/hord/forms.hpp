#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hord/errors.hpp"
#include "hord/int_types.hpp"

namespace hord::forms {

enum class Source { BuiltinEtaEisenstein, ExternalTable };

inline constexpr unsigned kBuiltinWeights[] = {12, 16, 18, 20, 22, 26};

bool is_builtin_weight(unsigned weight);

struct FormDescriptor {
    unsigned weight = 12;
    unsigned level = 1;
    Source source = Source::BuiltinEtaEisenstein;
    std::string label = "delta";
};

// Immutable once constructed; safe to share across workers.
class CoefficientTable {
  public:
    CoefficientTable(FormDescriptor form, std::vector<Int> coeffs);

    const FormDescriptor& form() const { return form_; }
    uint64_t n_max() const { return coeffs_.size(); }

    // a_f(n), 1-based; throws std::out_of_range outside [1, n_max]
    const Int& at(uint64_t n) const;

    const std::vector<Int>& raw() const { return coeffs_; }

  private:
    FormDescriptor form_;
    std::vector<Int> coeffs_;
};

inline constexpr uint64_t kDefaultMemoryBudget = 4ull << 30;

CoefficientTable build_delta_table(uint64_t n_max, unsigned workers = 1,
                                   uint64_t memory_budget_bytes = kDefaultMemoryBudget);

CoefficientTable build_eigenform_table(unsigned weight, uint64_t n_max, unsigned workers = 1,
                                       uint64_t memory_budget_bytes = kDefaultMemoryBudget);

struct EigenvalueView {
    Flt lambda;
    Int exact_numerator;
    Int n;
};

// a_f(p^ell) from a_f(p) alone: Hecke recurrence away from the level,
// a_f(p)^ell at ramified primes.
Int prime_power_eigenvalue(const FormDescriptor& form, uint64_t p, uint64_t ell, const Int& a_p);

EigenvalueView normalized_lambda(const FormDescriptor& form, const Int& n, const Int& a_n,
                                 unsigned precision_bits = kDefaultPrecisionBits);

// Satake angle theta_p = arccos(lambda/2), clamped to [0, pi].
// Throws DeligneViolation when a_p^2 > 4 p^{k-1}.
double theta_angle(const FormDescriptor& form, uint64_t p, const Int& a_p);

// sin((ell+1)theta)/sin(theta) with the limit values at theta = 0, pi.
double lambda_via_angle(double theta, uint64_t ell);

// True iff theta_p/pi is rational. Exact: lambda^2 is rational, so the
// rational-angle cases are exactly a_p^2 in {0,1,2,3,4} * p^{k-1}.
bool is_rational_angle(const FormDescriptor& form, uint64_t p, const Int& a_p);

// Exact |lambda(x)| vs |lambda(y)| for one weight: sign of
// a_x^2 y^{k-1} - a_y^2 x^{k-1}; returns -1/0/+1.
int cmp_abs_lambda_same_weight(const Int& a_x, const Int& x, const Int& a_y, const Int& y,
                               unsigned weight);

struct MixedCmp {
    int cmp;        // -1/0/+1 on |lambda_x| vs |lambda_y|
    bool near_tie;  // relative gap below 1e-20
};

MixedCmp cmp_abs_lambda_mixed(const Int& a_x, const Int& x, unsigned weight_x,
                              const Int& a_y, const Int& y, unsigned weight_y,
                              unsigned precision_bits = kDefaultPrecisionBits);

// lambda_f(n)^2 = a^2 / n^{k-1} as an exact rational.
Rat lambda_squared(const Int& a, const Int& n, unsigned weight);

struct InvariantReport {
    bool ok = true;
    uint64_t multiplicativity_checked = 0;
    uint64_t recurrence_checked = 0;
    uint64_t deligne_checked = 0;
    std::vector<std::string> violations;  // capped; first few witnesses
};

// Checks a(1)=1, multiplicativity over every coprime factorization,
// the prime-power recurrence, and the Deligne bound, all exactly.
InvariantReport verify_invariants(const CoefficientTable& table, size_t max_violations = 16);

}  // namespace hord::forms
