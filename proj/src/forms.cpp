#include "hord/forms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hord/primes.hpp"
#include "hord/series.hpp"

namespace hord::forms {

bool is_builtin_weight(unsigned weight) {
    for (unsigned w : kBuiltinWeights)
        if (w == weight) return true;
    return false;
}

CoefficientTable::CoefficientTable(FormDescriptor form, std::vector<Int> coeffs)
    : form_(std::move(form)), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("CoefficientTable: empty coefficient list");
    if (coeffs_[0] != 1) throw InvariantViolation("CoefficientTable: a(1) != 1");
}

const Int& CoefficientTable::at(uint64_t n) const {
    if (n < 1 || n > coeffs_.size())
        throw std::out_of_range("coefficient index " + std::to_string(n) + " outside [1, " +
                                std::to_string(coeffs_.size()) + "]");
    return coeffs_[n - 1];
}

namespace {

void check_budget(uint64_t n_max, uint64_t budget) {
    // two int64 scratch series plus the mpz result, ~96 bytes per index
    const uint64_t estimate = n_max * 96ull;
    if (estimate > budget)
        throw CapacityError("table of size " + std::to_string(n_max) +
                            " exceeds the memory budget (" + std::to_string(budget) + " bytes)");
}

}  // namespace

CoefficientTable build_delta_table(uint64_t n_max, unsigned workers, uint64_t memory_budget_bytes) {
    if (n_max < 1) throw std::invalid_argument("build_delta_table: n_max must be >= 1");
    check_budget(n_max, memory_budget_bytes);
    FormDescriptor d{12, 1, Source::BuiltinEtaEisenstein, "delta"};
    return CoefficientTable(d, series::delta_coefficients(n_max, workers));
}

CoefficientTable build_eigenform_table(unsigned weight, uint64_t n_max, unsigned workers,
                                       uint64_t memory_budget_bytes) {
    if (n_max < 1) throw std::invalid_argument("build_eigenform_table: n_max must be >= 1");
    if (!is_builtin_weight(weight))
        throw std::invalid_argument("weight " + std::to_string(weight) +
                                    ": cusp space is not one-dimensional");
    check_budget(n_max, memory_budget_bytes);
    FormDescriptor d{weight, 1, Source::BuiltinEtaEisenstein,
                     weight == 12 ? "delta" : "delta" + std::to_string(weight)};
    return CoefficientTable(d, series::eigenform_coefficients(weight, n_max, workers));
}

Int prime_power_eigenvalue(const FormDescriptor& form, uint64_t p, uint64_t ell, const Int& a_p) {
    if (ell == 0) return 1;
    if (form.level % p == 0) {
        Int r;
        mpz_pow_ui(r.get_mpz_t(), a_p.get_mpz_t(), ell);
        return r;
    }
    Int pk = pow_ui(p, form.weight - 1);
    Int prev = 1, cur = a_p, next;
    for (uint64_t l = 1; l < ell; ++l) {
        next = a_p * cur - pk * prev;
        prev.swap(cur);
        cur.swap(next);
    }
    return cur;
}

EigenvalueView normalized_lambda(const FormDescriptor& form, const Int& n, const Int& a_n,
                                 unsigned precision_bits) {
    unsigned prec = std::max(precision_bits, 64u);
    Flt num(a_n, prec);
    Flt den(pow_int(n, form.weight - 1), prec);
    mpf_sqrt(den.get_mpf_t(), den.get_mpf_t());
    EigenvalueView v{Flt(num / den, prec), a_n, n};
    return v;
}

double theta_angle(const FormDescriptor& form, uint64_t p, const Int& a_p) {
    Int pk = pow_ui(p, form.weight - 1);
    if (a_p * a_p > 4 * pk)
        throw DeligneViolation("Deligne bound violated at p=" + std::to_string(p));
    Flt num(a_p, 128);
    Flt den(pk, 128);
    mpf_sqrt(den.get_mpf_t(), den.get_mpf_t());
    double half = mpf_get_d(Flt(num / (2 * den)).get_mpf_t());
    half = std::clamp(half, -1.0, 1.0);
    return std::acos(half);
}

double lambda_via_angle(double theta, uint64_t ell) {
    if (theta == 0.0) return (double)(ell + 1);
    if (theta == std::numbers::pi_v<double> || std::sin(theta) == 0.0)
        return (ell % 2 == 0 ? 1.0 : -1.0) * (double)(ell + 1);
    return std::sin((double)(ell + 1) * theta) / std::sin(theta);
}

bool is_rational_angle(const FormDescriptor& form, uint64_t p, const Int& a_p) {
    Int pk = pow_ui(p, form.weight - 1);
    Int sq = a_p * a_p;
    if (sq > 4 * pk) throw DeligneViolation("Deligne bound violated at p=" + std::to_string(p));
    for (int j = 0; j <= 4; ++j)
        if (sq == j * pk) return true;
    return false;
}

int cmp_abs_lambda_same_weight(const Int& a_x, const Int& x, const Int& a_y, const Int& y,
                               unsigned weight) {
    Int lhs = a_x * a_x * pow_int(y, weight - 1);
    Int rhs = a_y * a_y * pow_int(x, weight - 1);
    return cmp(lhs, rhs);
}

MixedCmp cmp_abs_lambda_mixed(const Int& a_x, const Int& x, unsigned weight_x,
                              const Int& a_y, const Int& y, unsigned weight_y,
                              unsigned precision_bits) {
    unsigned prec = std::max(precision_bits, 64u);
    Flt lx2 = Flt(a_x * a_x, prec) / Flt(pow_int(x, weight_x - 1), prec);
    Flt ly2 = Flt(a_y * a_y, prec) / Flt(pow_int(y, weight_y - 1), prec);
    Flt diff = lx2 - ly2;
    Flt scale = lx2 > ly2 ? lx2 : ly2;
    MixedCmp out{0, false};
    if (sgn(diff) != 0 && sgn(scale) != 0) {
        Flt rel = abs(diff) / scale;
        // near-tie threshold 1e-20 relative, on the squared values
        out.near_tie = rel < Flt(1e-20, prec);
    }
    out.cmp = sgn(diff);
    return out;
}

Rat lambda_squared(const Int& a, const Int& n, unsigned weight) {
    Rat r(a * a, pow_int(n, weight - 1));
    r.canonicalize();
    return r;
}

InvariantReport verify_invariants(const CoefficientTable& table, size_t max_violations) {
    InvariantReport rep;
    const uint64_t N = table.n_max();
    const unsigned weight = table.form().weight;
    const unsigned level = table.form().level;
    auto record = [&](std::string msg) {
        rep.ok = false;
        if (rep.violations.size() < max_violations) rep.violations.push_back(std::move(msg));
    };

    if (table.at(1) != 1) record("normalization violated: a(1) != 1");

    // multiplicativity over every coprime pair (m, n), m <= n, mn <= N
    for (uint64_t m = 2; m * m <= N; ++m) {
        for (uint64_t n = m + 1; m * n <= N; ++n) {
            if (std::gcd(m, n) != 1) continue;
            ++rep.multiplicativity_checked;
            if (table.at(m * n) != table.at(m) * table.at(n))
                record("multiplicativity violated at (m=" + std::to_string(m) +
                       ", n=" + std::to_string(n) + ")");
        }
    }

    auto primes = prime_sieve(N + 1);
    for (uint32_t p : primes) {
        // Deligne bound, exact integer comparison
        Int pk = pow_ui(p, weight - 1);
        ++rep.deligne_checked;
        const Int& ap = table.at(p);
        if (ap * ap > 4 * pk)
            record("Deligne bound violated at p=" + std::to_string(p));
        // recurrence at every prime power p^{ell+1} <= N
        if (level % p == 0) {
            Int expect = ap;
            uint64_t q = (uint64_t)p * p;
            for (uint64_t ell = 1; q <= N; ++ell, q *= p) {
                expect *= ap;
                ++rep.recurrence_checked;
                if (table.at(q) != expect)
                    record("ramified recurrence violated at (p=" + std::to_string(p) +
                           ", ell=" + std::to_string(ell) + ")");
                if (q > N / p) break;
            }
        } else {
            uint64_t q = (uint64_t)p * p;  // q = p^{ell+1}
            Int prev = 1, cur = ap;
            for (uint64_t ell = 1; q <= N; ++ell) {
                Int next = ap * cur - pk * prev;
                ++rep.recurrence_checked;
                if (table.at(q) != next)
                    record("recurrence violated at (p=" + std::to_string(p) +
                           ", ell=" + std::to_string(ell) + ")");
                prev = cur;
                cur = next;
                if (q > N / p) break;
                q *= p;
            }
        }
    }
    return rep;
}

}  // namespace hord::forms
