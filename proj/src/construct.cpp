#include "hord/construct.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hord/parallel.hpp"
#include "hord/primes.hpp"

namespace hord::construct {

uint64_t TargetSpec::K() const {
    uint64_t m = 0;
    for (uint64_t s : shifts) m = std::max(m, s);
    return m;
}

bool TargetSpec::same_weight() const {
    for (auto* t : tables)
        if (t->form().weight != tables[0]->form().weight) return false;
    return true;
}

void TargetSpec::validate() const {
    if (tables.empty() || tables.size() != shifts.size())
        throw std::invalid_argument("TargetSpec: need one table per shift");
    std::set<uint64_t> seen;
    for (size_t i = 0; i < shifts.size(); ++i) {
        if (shifts[i] == 0) throw std::invalid_argument("TargetSpec: shifts must be positive");
        if (!seen.insert(shifts[i]).second)
            throw std::invalid_argument("TargetSpec: repeated shift " + std::to_string(shifts[i]));
        if (shifts[i] > tables[i]->n_max())
            throw std::out_of_range("TargetSpec: table does not cover shift " +
                                    std::to_string(shifts[i]));
        if (tables[i]->at(shifts[i]) == 0)
            throw std::domain_error("TargetSpec: a(" + std::to_string(shifts[i]) +
                                    ") = 0 for form " + tables[i]->form().label);
    }
    if (mode == CompareMode::RawCoefficient && !same_weight())
        throw std::invalid_argument("TargetSpec: raw-coefficient mode needs equal weights");
}

Rat compute_c0_squared(const TargetSpec& spec) {
    spec.validate();
    Rat best;
    bool first = true;
    for (size_t i = 0; i < spec.k(); ++i) {
        const unsigned w = spec.tables[i]->form().weight;
        const Int& a = spec.tables[i]->at(spec.shifts[i]);
        Rat lam2 = forms::lambda_squared(a, Int((unsigned long)spec.shifts[i]), w);
        Rat inv2 = Rat(1, pow_ui(2, w - 1)) / lam2;
        Rat m = std::min(lam2, inv2);
        if (first || m < best) { best = m; first = false; }
    }
    return best;
}

Flt compute_c0(const TargetSpec& spec, unsigned precision_bits) {
    unsigned prec = std::max(precision_bits, 64u);
    Rat c2 = compute_c0_squared(spec);
    Flt num(c2.get_num(), prec), den(c2.get_den(), prec);
    Flt v = num / den;
    mpf_sqrt(v.get_mpf_t(), v.get_mpf_t());
    return v;
}

std::vector<uint64_t> choose_primes(const TargetSpec& spec) {
    spec.validate();
    std::vector<uint64_t> out;
    uint64_t prev = 2 * spec.K();
    for (size_t i = 0; i < spec.k(); ++i) {
        const auto& table = *spec.tables[i];
        uint64_t found = 0;
        for (uint64_t p = prev + 1; p <= table.n_max(); ++p) {
            if (!is_prime_u64(p)) continue;
            const Int& ap = table.at(p);
            if (sgn(ap) == 0) continue;
            if (forms::is_rational_angle(table.form(), p, ap)) continue;
            found = p;
            break;
        }
        if (!found)
            throw SearchExhausted("choose_primes: no admissible prime > " + std::to_string(prev) +
                                  " below the table bound for form " + table.form().label);
        out.push_back(found);
        prev = found;
    }
    return out;
}

std::vector<uint64_t> choose_exponents(const TargetSpec& spec,
                                       const std::vector<uint64_t>& primes, const Rat& delta,
                                       uint64_t ell_cap) {
    spec.validate();
    if (primes.size() != spec.k())
        throw std::invalid_argument("choose_exponents: need one prime per form");
    if (delta <= 0 || delta >= 1)
        throw std::invalid_argument("choose_exponents: delta must lie in (0, 1)");
    const size_t k = spec.k();
    std::vector<uint64_t> exps(k, 1);
    if (k == 1) return exps;  // chain is empty

    const Int dn = delta.get_num(), dd = delta.get_den();
    for (size_t ii = k - 1; ii-- > 0;) {
        const auto& table = *spec.tables[ii];
        const auto& next_table = *spec.tables[ii + 1];
        const uint64_t p = primes[ii], q = primes[ii + 1];
        const unsigned wp = table.form().weight, wq = next_table.form().weight;

        Int a_next = forms::prime_power_eigenvalue(next_table.form(), q, exps[ii + 1],
                                                   next_table.at(q));
        Int q_pow = pow_ui(q, (unsigned long)(exps[ii + 1] * (wq - 1)));
        // |lambda_p(p^l)| < delta |lambda_q(q^e)|  <=>
        //   a_l^2 dd^2 q_pow < dn^2 a_next^2 p^{l (wp-1)}
        const Int lhs_scale = dd * dd * q_pow;
        const Int rhs_scale = dn * dn * a_next * a_next;

        const double theta = forms::theta_angle(table.form(), p, table.at(p));
        Flt lam_next_f(a_next, 128);
        Flt qden(q_pow, 128);
        mpf_sqrt(qden.get_mpf_t(), qden.get_mpf_t());
        const double threshold =
            mpz_get_d(dn.get_mpz_t()) / mpz_get_d(dd.get_mpz_t()) *
            std::abs(mpf_get_d(Flt(lam_next_f / qden).get_mpf_t()));

        const Int pk = pow_ui(p, wp - 1);
        Int prev = 1, cur = table.at(p), pw = pk;
        uint64_t found = 0;
        double best_ratio = 1e300;
        for (uint64_t ell = 1; ell <= ell_cap; ++ell) {
            double approx = std::abs(forms::lambda_via_angle(theta, ell));
            best_ratio = std::min(best_ratio, approx / threshold);
            // trig prefilter with a 10% slack; the exact comparison decides
            if (approx < threshold * 1.10) {
                if (cur * cur * lhs_scale < rhs_scale * pw) { found = ell; break; }
            }
            Int next = table.at(p) * cur - pk * prev;
            prev.swap(cur);
            cur.swap(next);
            pw *= pk;
        }
        if (!found)
            throw SearchExhausted(
                "choose_exponents: cap " + std::to_string(ell_cap) + " exhausted at p=" +
                std::to_string(p) + " (best |lambda|/target ratio " +
                std::to_string(best_ratio) + ")");
        exps[ii] = found;
    }
    return exps;
}

ProgressionSpec build_progression(const TargetSpec& spec, const std::vector<uint64_t>& primes,
                                  const std::vector<uint64_t>& exponents, const Rat& delta) {
    spec.validate();
    const size_t k = spec.k();
    if (primes.size() != k || exponents.size() != k)
        throw std::invalid_argument("build_progression: size mismatch");
    const uint64_t K = spec.K();
    for (size_t i = 0; i < k; ++i) {
        if (primes[i] <= 2 * K)
            throw std::invalid_argument("build_progression: prime " + std::to_string(primes[i]) +
                                        " is not > 2K");
        if (i && primes[i] <= primes[i - 1])
            throw std::invalid_argument("build_progression: primes must increase");
        if (exponents[i] == 0)
            throw std::invalid_argument("build_progression: exponents must be positive");
    }

    ProgressionSpec out;
    out.primes = primes;
    out.exponents = exponents;
    out.delta = delta;
    out.c0_squared = compute_c0_squared(spec);

    const Int fact2K = factorial(2 * K);
    std::vector<Int> residues{Int(0)}, moduli{fact2K};
    for (size_t i = 0; i < k; ++i) {
        Int mod = pow_ui(primes[i], (unsigned long)(exponents[i] + 1));
        Int res = pow_ui(primes[i], (unsigned long)exponents[i]) - spec.shifts[i];
        res %= mod;
        if (sgn(res) < 0) res += mod;
        residues.push_back(res);
        moduli.push_back(mod);
    }
    out.B = crt(residues, moduli);
    out.A = 1;
    for (auto& m : moduli) out.A *= m;
    // CRT residue 0 would mean m = 0, excluded; cannot happen since
    // p^l - nu is a unit mod p
    if (sgn(out.B) == 0)
        throw std::logic_error("build_progression: CRT produced B = 0");

    sieve::LinearSystem sys;
    for (size_t i = 0; i < k; ++i) {
        Int d = spec.shifts[i] * pow_ui(primes[i], (unsigned long)exponents[i]);
        Int a = out.A / d, b = (out.B + spec.shifts[i]) / d;
        if (a * d != out.A || b * d != out.B + spec.shifts[i])
            throw std::logic_error("build_progression: a_i or b_i is not integral");
        sys.forms.push_back({a, b});
        // gcd(A, B + nu_i) = nu_i p_i^{l_i}
        if (gcd(out.A, out.B + spec.shifts[i]) != d)
            throw std::logic_error("build_progression: gcd(A, B + nu) != nu p^l");
    }
    for (uint64_t p = 2; p <= 2 * K; ++p)
        if (is_prime_u64(p)) sys.sigma.push_back(p);
    for (uint64_t p : primes) sys.sigma.push_back(p);
    std::sort(sys.sigma.begin(), sys.sigma.end());
    sys.sigma.erase(std::unique(sys.sigma.begin(), sys.sigma.end()), sys.sigma.end());
    out.system = std::move(sys);

    auto rep = sieve::validate_system(out.system, true);
    if (!rep.ok(true)) {
        std::string msg = "build_progression: derived system fails validation:";
        for (auto& f : rep.failures) msg += " " + f + ";";
        throw std::logic_error(msg);
    }

    // exact exponent-chain verdict: lambda_i(p_i^{l_i})^2 dd^2 q^{e(w'-1)}
    // < dn^2 lambda_{i+1}(...)^2-style cross comparison, i = 1..k-1
    out.chain_ok = true;
    const Int dn = delta.get_num(), dd = delta.get_den();
    for (size_t i = 0; i + 1 < k; ++i) {
        const unsigned w1 = spec.tables[i]->form().weight;
        const unsigned w2 = spec.tables[i + 1]->form().weight;
        Int a1 = forms::prime_power_eigenvalue(spec.tables[i]->form(), primes[i], exponents[i],
                                               spec.tables[i]->at(primes[i]));
        Int a2 = forms::prime_power_eigenvalue(spec.tables[i + 1]->form(), primes[i + 1],
                                               exponents[i + 1],
                                               spec.tables[i + 1]->at(primes[i + 1]));
        Int p1e = pow_ui(primes[i], (unsigned long)(exponents[i] * (w1 - 1)));
        Int p2e = pow_ui(primes[i + 1], (unsigned long)(exponents[i + 1] * (w2 - 1)));
        if (!(a1 * a1 * dd * dd * p2e < dn * dn * a2 * a2 * p1e)) {
            out.chain_ok = false;
            break;
        }
    }
    return out;
}

namespace {

struct FactorSieve {
    // full factorization of L_i(n) over the table primes, for n in [1, x]
    std::vector<std::vector<Int>> residual;            // [form][n]
    std::vector<std::vector<std::vector<uint32_t>>> factors;
    std::vector<std::vector<uint8_t>> squarefree;
};

FactorSieve factor_window(const TargetSpec& spec, const sieve::LinearSystem& sys, uint64_t x) {
    const size_t k = spec.k();
    if (x * k > 40'000'000ull)
        throw CapacityError("run_ordered_search: window of " + std::to_string(x) +
                            " exceeds the in-memory factor sieve budget");
    FactorSieve fs;
    fs.residual.resize(k);
    fs.factors.resize(k);
    fs.squarefree.resize(k);
    for (size_t i = 0; i < k; ++i) {
        fs.residual[i].resize(x + 1);
        fs.factors[i].resize(x + 1);
        fs.squarefree[i].assign(x + 1, 1);
        Int v = sys.forms[i].b;
        for (uint64_t n = 1; n <= x; ++n) {
            v += sys.forms[i].a;
            fs.residual[i][n] = v;
        }
        const auto& primes = cached_primes(spec.tables[i]->n_max() + 1);
        for (uint32_t q : primes) {
            uint64_t am = mpz_fdiv_ui(sys.forms[i].a.get_mpz_t(), q);
            if (am == 0) continue;  // Sigma primes never divide L_i(n)
            uint64_t bm = mpz_fdiv_ui(sys.forms[i].b.get_mpz_t(), q);
            uint64_t root = (q - mulmod_u64(bm, powmod_u64(am, q - 2, q), q)) % q;
            uint64_t n0 = root == 0 ? q : root;
            for (uint64_t n = n0; n <= x; n += q) {
                unsigned e = 0;
                while (mpz_divisible_ui_p(fs.residual[i][n].get_mpz_t(), q)) {
                    mpz_divexact_ui(fs.residual[i][n].get_mpz_t(), fs.residual[i][n].get_mpz_t(),
                                    q);
                    ++e;
                }
                for (unsigned r = 0; r < e; ++r) fs.factors[i][n].push_back(q);
                if (e >= 2) fs.squarefree[i][n] = 0;
            }
        }
    }
    return fs;
}

// |lambda_{f_j}(q)| <= eps/k for some j, exact
bool bad_prime(const TargetSpec& spec, uint64_t q, const Rat& eps, bool& coverage_ok) {
    const Int en = eps.get_num();
    const Int ed = eps.get_den() * (unsigned long)spec.k();
    for (size_t j = 0; j < spec.k(); ++j) {
        if (q > spec.tables[j]->n_max()) { coverage_ok = false; return false; }
        const Int& aq = spec.tables[j]->at(q);
        if (aq * aq * ed * ed <= en * en * pow_ui(q, spec.tables[j]->form().weight - 1))
            return true;
    }
    return false;
}

// strict |lambda_i(v_i)| < |lambda_{i+1}(v_{i+1})| chain over exact values
int chain_compare(const TargetSpec& spec, size_t i, const Int& a_lo, const Int& v_lo,
                  const Int& a_hi, const Int& v_hi, uint64_t& near_ties) {
    const unsigned w_lo = spec.tables[i]->form().weight;
    const unsigned w_hi = spec.tables[i + 1]->form().weight;
    if (spec.mode == CompareMode::RawCoefficient)
        return mpz_cmpabs(a_lo.get_mpz_t(), a_hi.get_mpz_t());
    if (w_lo == w_hi)
        return forms::cmp_abs_lambda_same_weight(a_lo, v_lo, a_hi, v_hi, w_lo);
    auto r = forms::cmp_abs_lambda_mixed(a_lo, v_lo, w_lo, a_hi, v_hi, w_hi, 192);
    if (r.near_tie) ++near_ties;
    return r.cmp;
}

}  // namespace

SearchReport run_ordered_search(const TargetSpec& spec, const ProgressionSpec& pspec, uint64_t x,
                                double eta, const Rat& eps, unsigned workers,
                                uint64_t max_hits) {
    spec.validate();
    if (spec.k() != pspec.system.k())
        throw std::invalid_argument("run_ordered_search: spec/progression size mismatch");
    SearchReport rep;
    rep.x = x;
    rep.eta = eta;
    rep.z = std::max<uint64_t>(2, (uint64_t)std::floor(std::pow((double)x, eta)));
    if (rep.z > x) rep.z = x < 2 ? 2 : x;

    auto outcome = sieve::sift_omega(pspec.system, x, rep.z, workers);
    rep.sifted = outcome.count_omega;

    auto fs = factor_window(spec, pspec.system, x);
    const size_t k = spec.k();

    // exact a(nu_i) and a(p_i^{l_i}) shared by every candidate
    std::vector<Int> a_shift(k), a_ppow(k), shift_ppow(k);
    for (size_t i = 0; i < k; ++i) {
        a_shift[i] = spec.tables[i]->at(spec.shifts[i]);
        a_ppow[i] = forms::prime_power_eigenvalue(spec.tables[i]->form(), pspec.primes[i],
                                                  pspec.exponents[i],
                                                  spec.tables[i]->at(pspec.primes[i]));
        shift_ppow[i] =
            spec.shifts[i] * pow_ui(pspec.primes[i], (unsigned long)pspec.exponents[i]);
    }

    enum class Fate : uint8_t { Hit, Coverage, NotOmega1, Avoided, ChainFailed };
    std::vector<Fate> fate(outcome.sifted.size());
    std::vector<Hit> hit_slot(outcome.sifted.size());
    std::vector<uint64_t> tie_count(outcome.sifted.size(), 0);

    const uint64_t block = 512;
    const uint64_t n_blocks = (outcome.sifted.size() + block - 1) / block;
    parallel_blocks(n_blocks, workers, [&](uint64_t blk) {
        const size_t lo = blk * block;
        const size_t hi = std::min(outcome.sifted.size(), (size_t)(lo + block));
        for (size_t t = lo; t < hi; ++t) {
            const uint64_t n = outcome.sifted[t];
            bool coverage = false, omega1 = true;
            for (size_t i = 0; i < k && !coverage; ++i) {
                if (fs.residual[i][n] != 1) { coverage = true; break; }
                if (!fs.squarefree[i][n] || fs.factors[i][n].size() < 2) omega1 = false;
            }
            if (coverage) { fate[t] = Fate::Coverage; continue; }
            if (!omega1) { fate[t] = Fate::NotOmega1; continue; }

            bool avoided = false, undecidable = false;
            for (size_t i = 0; i < k && !avoided && !undecidable; ++i)
                for (uint32_t q : fs.factors[i][n]) {
                    bool cov = true;
                    bool bad = bad_prime(spec, q, eps, cov);
                    if (!cov) { undecidable = true; break; }
                    if (bad) { avoided = true; break; }
                }
            if (undecidable) { fate[t] = Fate::Coverage; continue; }
            if (avoided) { fate[t] = Fate::Avoided; continue; }

            // assemble exact |a(m + nu_i)| multiplicatively
            Int m = pspec.A * n + pspec.B;
            std::vector<Int> a_val(k), v_val(k);
            bool zero = false;
            for (size_t i = 0; i < k; ++i) {
                v_val[i] = m + spec.shifts[i];
                Int a = a_shift[i] * a_ppow[i];
                for (uint32_t q : fs.factors[i][n]) {
                    const Int& aq = spec.tables[i]->at(q);
                    if (sgn(aq) == 0) { zero = true; break; }
                    a *= aq;
                }
                if (zero) break;
                a_val[i] = a;
            }
            bool ok = !zero;
            for (size_t i = 0; ok && i + 1 < k; ++i)
                ok = chain_compare(spec, i, a_val[i], v_val[i], a_val[i + 1], v_val[i + 1],
                                   tie_count[t]) < 0;
            if (!ok) { fate[t] = Fate::ChainFailed; continue; }

            Hit h;
            h.m = m;
            h.n = n;
            for (size_t i = 0; i < k; ++i) {
                ChainEntry e;
                e.shift = spec.shifts[i];
                e.abs_a = abs(a_val[i]);
                e.lambda = std::abs(mpf_get_d(
                    forms::normalized_lambda(spec.tables[i]->form(), v_val[i], a_val[i])
                        .lambda.get_mpf_t()));
                h.chain.push_back(std::move(e));
            }
            hit_slot[t] = std::move(h);
            fate[t] = Fate::Hit;
        }
    });

    uint64_t total_hits = 0;
    for (size_t t = 0; t < fate.size(); ++t) {
        rep.near_ties += tie_count[t];
        switch (fate[t]) {
            case Fate::Coverage: ++rep.coverage_skipped; break;
            case Fate::NotOmega1: ++rep.not_omega1; break;
            case Fate::Avoided: ++rep.avoid_dropped; break;
            case Fate::ChainFailed: ++rep.chain_failed; break;
            case Fate::Hit:
                ++total_hits;
                if (rep.hits.size() < max_hits) {
                    hit_slot[t].verified = verify_hit_from_tables(spec, hit_slot[t].m);
                    rep.hits.push_back(std::move(hit_slot[t]));
                }
                break;
        }
    }
    rep.omega1 = total_hits + rep.avoid_dropped + rep.chain_failed;
    double logx = std::log((double)std::max<uint64_t>(x, 3));
    rep.hits_per_expected = (double)total_hits * std::pow(logx, (double)k) / (double)x;
    return rep;
}

bool verify_hit_from_tables(const TargetSpec& spec, const Int& m) {
    const size_t k = spec.k();
    std::vector<Int> a_val(k), v_val(k);
    for (size_t i = 0; i < k; ++i) {
        const auto& table = *spec.tables[i];
        Int v = m + spec.shifts[i];
        v_val[i] = v;
        // independent route: plain trial division over every table prime
        const auto& primes = cached_primes(table.n_max() + 1);
        Int a(1), rest(v);
        for (uint32_t p : primes) {
            if (!mpz_divisible_ui_p(rest.get_mpz_t(), p)) continue;
            unsigned e = 0;
            while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
                mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
                ++e;
            }
            a *= forms::prime_power_eigenvalue(table.form(), p, e, table.at(p));
            if (rest == 1) break;
        }
        if (rest != 1) return false;  // coverage: a factor beyond the table
        if (sgn(a) == 0) return false;
        a_val[i] = a;
    }
    uint64_t ties = 0;
    for (size_t i = 0; i + 1 < k; ++i)
        if (chain_compare(spec, i, a_val[i], v_val[i], a_val[i + 1], v_val[i + 1], ties) >= 0)
            return false;
    return true;
}

ScanReport scan_bruteforce(const TargetSpec& spec, uint64_t m_max, uint64_t max_hits) {
    spec.validate();
    const size_t k = spec.k();
    for (size_t i = 0; i < k; ++i)
        if (spec.tables[i]->n_max() < m_max + spec.shifts[i])
            throw CoverageError("scan_bruteforce: table for form " +
                                spec.tables[i]->form().label + " covers " +
                                std::to_string(spec.tables[i]->n_max()) + " < " +
                                std::to_string(m_max + spec.shifts[i]));
    ScanReport rep;
    rep.m_max = m_max;
    uint64_t next_checkpoint = 10;
    uint64_t ties = 0;
    for (uint64_t m = 1; m <= m_max; ++m) {
        bool ok = true;
        for (size_t i = 0; ok && i < k; ++i)
            ok = sgn(spec.tables[i]->at(m + spec.shifts[i])) != 0;
        for (size_t i = 0; ok && i + 1 < k; ++i)
            ok = chain_compare(spec, i, spec.tables[i]->at(m + spec.shifts[i]),
                               Int(m + spec.shifts[i]),
                               spec.tables[i + 1]->at(m + spec.shifts[i + 1]),
                               Int(m + spec.shifts[i + 1]), ties) < 0;
        if (ok) {
            if (!rep.first_hit) rep.first_hit = m;
            if (rep.hits.size() < max_hits) rep.hits.push_back(m);
            ++rep.hit_count;
        }
        if (m == next_checkpoint) {
            rep.checkpoints.emplace_back(m, rep.hit_count);
            next_checkpoint *= 10;
        }
    }
    if (rep.checkpoints.empty() || rep.checkpoints.back().first != m_max)
        rep.checkpoints.emplace_back(m_max, rep.hit_count);
    return rep;
}

OrderConditions check_order_conditions(const forms::CoefficientTable& table, uint64_t k,
                                       std::optional<uint64_t> cond2_bound) {
    OrderConditions out;
    const uint64_t half = k / 2;
    if (half > table.n_max())
        throw std::out_of_range("check_order_conditions: table does not cover k/2");
    out.cond1 = true;
    for (uint64_t n = 1; n <= half; ++n)
        if (sgn(table.at(n)) == 0) { out.cond1 = false; break; }

    out.cond_prime_powers = true;
    for (uint64_t p = 2; p <= half; ++p) {
        if (!is_prime_u64(p)) continue;
        for (Int q((unsigned long)p); q <= half; q *= (unsigned long)p)
            if (sgn(table.at(to_u64(q))) == 0) { out.cond_prime_powers = false; break; }
        if (!out.cond_prime_powers) break;
    }

    const uint64_t bound = cond2_bound.value_or(table.n_max());
    if (bound > table.n_max())
        throw std::out_of_range("check_order_conditions: cond2 bound exceeds the table");
    uint64_t run = 0;
    out.cond2 = Cond2::Inconclusive;
    for (uint64_t n = 1; n <= bound; ++n) {
        run = sgn(table.at(n)) != 0 ? run + 1 : 0;
        if (run >= k) {
            out.cond2 = Cond2::FoundWitness;
            out.cond2_witness = n - k;  // window nu+1 .. nu+k
            break;
        }
    }
    if (out.cond2 == Cond2::Inconclusive && !out.cond1) out.cond2 = Cond2::False;
    return out;
}

PairwiseNonzeroReport consecutive_nonzero_prime_powers(const forms::FormDescriptor& form,
                                                       uint64_t p, const Int& a_p,
                                                       uint64_t ell_max) {
    PairwiseNonzeroReport rep;
    if (form.level % p == 0) {
        // a(p^l) = a_p^l: every power nonzero iff a_p != 0
        if (sgn(a_p) == 0) { rep.ok = false; rep.first_violation = 1; }
        return rep;
    }
    Int pk = pow_ui(p, form.weight - 1);
    Int prev = 1, cur = a_p;
    for (uint64_t ell = 0; ell < ell_max; ++ell) {
        if (sgn(prev) == 0 && sgn(cur) == 0) {
            rep.ok = false;
            rep.first_violation = ell;
            return rep;
        }
        Int next = a_p * cur - pk * prev;
        prev.swap(cur);
        cur.swap(next);
    }
    return rep;
}

RModulus build_r_modulus(const forms::CoefficientTable& table, uint64_t k) {
    if (k == 0) throw std::invalid_argument("build_r_modulus: k must be positive");
    const uint64_t h = k / 2;
    const uint64_t kk = 2 * h + 1;  // the condition for even k matches k+1

    auto cond = check_order_conditions(table, kk, std::min<uint64_t>(kk, table.n_max()));
    if (!cond.cond1)
        throw std::domain_error("build_r_modulus: a(n) = 0 for some n <= k/2");

    RModulus out;
    out.h = h;
    const auto& form = table.form();
    std::vector<uint64_t> sigma;
    for (uint64_t p = 2; p <= table.n_max(); ++p) {
        if (!is_prime_u64(p)) continue;
        bool member = p <= 2 * kk;
        if (!member && form.level % p != 0) {
            const Int& ap = table.at(p);
            // a(p) != 0 with a vanishing higher power <=> rational angle
            // short of the theta = 0, pi boundary
            if (sgn(ap) != 0 && forms::is_rational_angle(form, p, ap) &&
                ap * ap != 4 * pow_ui(p, form.weight - 1))
                member = true;
        }
        if (member) sigma.push_back(p);
    }

    std::vector<Int> residues, moduli;
    for (uint64_t p : sigma) {
        uint64_t ell = 0;
        Int q = 1;
        while (q <= kk) { q *= (unsigned long)p; ++ell; }  // smallest p^l > k
        uint64_t found = 0;
        for (uint64_t tries = 0; tries < 64; ++tries, ++ell, q *= (unsigned long)p) {
            Int a = forms::prime_power_eigenvalue(form, p, ell, table.at(p));
            if (sgn(a) != 0) { found = ell; break; }
        }
        if (!found)
            throw SearchExhausted("build_r_modulus: no nonvanishing power of " +
                                  std::to_string(p) + " found");
        out.sigma_exponents.emplace_back(p, found);
        Int mod = pow_ui(p, (unsigned long)(found + 1));
        residues.push_back(pow_ui(p, (unsigned long)found));
        moduli.push_back(mod);
    }
    out.r = crt(residues, moduli);
    out.D = 1;
    for (auto& m : moduli) out.D *= m;

    sieve::LinearSystem sys;
    sys.sigma = sigma;
    for (int64_t j = -(int64_t)h; j <= (int64_t)h; ++j) {
        Int rj = out.r + j;
        Int g = gcd(out.D, rj);
        sys.forms.push_back({out.D / g, rj / g});
    }
    out.system = std::move(sys);
    auto rep = sieve::validate_system(out.system, true);
    if (!rep.ok(true)) {
        std::string msg = "build_r_modulus: derived system fails validation:";
        for (auto& f : rep.failures) msg += " " + f + ";";
        throw std::logic_error(msg);
    }
    return out;
}

}  // namespace hord::construct
