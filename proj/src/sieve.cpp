#include "hord/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <json.hpp>

#include "hord/parallel.hpp"
#include "hord/primes.hpp"

namespace hord::sieve {

bool LinearSystem::sigma_contains(uint64_t p) const {
    return std::binary_search(sigma.begin(), sigma.end(), p);
}

Int LinearSystem::coefficient_bound() const {
    Int m = 0;
    for (auto& f : forms) {
        Int aa = abs(f.a), ab = abs(f.b);
        if (aa > m) m = aa;
        if (ab > m) m = ab;
    }
    return m;
}

LinearSystem make_system(std::vector<std::pair<long, long>> forms, std::vector<uint64_t> sigma) {
    LinearSystem sys;
    for (auto [a, b] : forms) sys.forms.push_back({Int(a), Int(b)});
    std::sort(sigma.begin(), sigma.end());
    sys.sigma = std::move(sigma);
    return sys;
}

namespace {

// true iff v becomes a unit after removing all Sigma primes
bool sigma_unit(const LinearSystem& sys, Int v, std::string* leftover = nullptr) {
    v = abs(v);
    if (sgn(v) == 0) return false;
    for (uint64_t p : sys.sigma)
        while (mpz_divisible_ui_p(v.get_mpz_t(), p))
            mpz_divexact_ui(v.get_mpz_t(), v.get_mpz_t(), p);
    if (v == 1) return true;
    if (leftover) *leftover = v.get_str();
    return false;
}

}  // namespace

ValidationReport validate_system(const LinearSystem& sys, bool require_divisibility) {
    ValidationReport rep;
    const size_t k = sys.k();
    auto fail = [&](bool& flag, std::string msg) {
        flag = false;
        rep.failures.push_back(std::move(msg));
    };

    if (k == 0) fail(rep.nondegenerate, "system has no forms");
    for (size_t i = 0; i < k; ++i) {
        const auto& f = sys.forms[i];
        if (sgn(f.a) == 0)
            fail(rep.nondegenerate, "a_" + std::to_string(i + 1) + " = 0");
        else if (gcd(f.a, f.b) != 1)
            fail(rep.nondegenerate, "gcd(a_" + std::to_string(i + 1) + ", b_" +
                                        std::to_string(i + 1) + ") != 1");
    }
    for (size_t i = 0; i < k; ++i)
        for (size_t j = i + 1; j < k; ++j) {
            Int d = sys.forms[i].a * sys.forms[j].b - sys.forms[j].a * sys.forms[i].b;
            if (sgn(d) == 0)
                fail(rep.nondegenerate, "degenerate pair (" + std::to_string(i + 1) + ", " +
                                            std::to_string(j + 1) +
                                            "): a_i b_j - a_j b_i = 0");
        }

    std::string leftover;
    for (size_t i = 0; i < k; ++i)
        if (rep.nondegenerate && !sigma_unit(sys, sys.forms[i].a, &leftover))
            fail(rep.coefficient_primes_in_sigma,
                 "a_" + std::to_string(i + 1) + " has a prime factor outside Sigma (cofactor " +
                     leftover + ")");
    for (size_t i = 0; i < k && rep.nondegenerate; ++i)
        for (size_t j = i + 1; j < k; ++j) {
            Int d = sys.forms[i].a * sys.forms[j].b - sys.forms[j].a * sys.forms[i].b;
            if (sgn(d) != 0 && !sigma_unit(sys, d, &leftover))
                fail(rep.cross_difference_primes_in_sigma,
                     "a_" + std::to_string(i + 1) + " b_" + std::to_string(j + 1) + " - a_" +
                         std::to_string(j + 1) + " b_" + std::to_string(i + 1) +
                         " has a prime factor outside Sigma (cofactor " + leftover + ")");
        }
    for (uint64_t p = 2; p <= 2 * k; ++p) {
        if (!is_prime_u64(p)) continue;
        if (!sys.sigma_contains(p)) {
            rep.small_primes_in_sigma = false;
            rep.warnings.push_back("prime " + std::to_string(p) +
                                   " <= 2k is missing from Sigma");
        }
    }
    if (require_divisibility) {
        for (uint64_t p : sys.sigma)
            for (size_t i = 0; i < k; ++i)
                if (!mpz_divisible_ui_p(sys.forms[i].a.get_mpz_t(), p))
                    fail(rep.sigma_divides_coefficients,
                         "Sigma prime " + std::to_string(p) + " does not divide a_" +
                             std::to_string(i + 1));
    }
    return rep;
}

SieveOutcome sift_omega(const LinearSystem& sys, uint64_t x, uint64_t z, unsigned workers,
                        uint64_t segment) {
    if (z < 2) throw std::invalid_argument("sift_omega: z must be >= 2");
    if (x < z) throw std::invalid_argument("sift_omega: x must be >= z");
    auto rep = validate_system(sys, false);
    if (!rep.sieveable()) {
        std::string msg = "sift_omega: invalid system:";
        for (auto& f : rep.failures) msg += " " + f + ";";
        throw std::invalid_argument(msg);
    }

    SieveOutcome out;
    out.system = sys;
    out.x = x;
    out.z = z;
    out.u = std::log((double)x) / std::log((double)z);

    // residue classes to strike, per sieving prime
    auto primes = prime_sieve(z);
    struct PrimeRoots {
        uint32_t p;
        std::vector<uint32_t> roots;
    };
    std::vector<PrimeRoots> spec;
    spec.reserve(primes.size());
    for (uint32_t p : primes) {
        if (sys.sigma_contains(p)) continue;
        PrimeRoots pr;
        pr.p = p;
        std::set<uint32_t> distinct;
        for (auto& f : sys.forms) {
            uint64_t am = mpz_fdiv_ui(f.a.get_mpz_t(), p);
            uint64_t bm = mpz_fdiv_ui(f.b.get_mpz_t(), p);
            if (am == 0)
                throw std::logic_error("sift_omega: sieving prime divides a coefficient");
            uint64_t inv = powmod_u64(am, p - 2, p);  // p prime, a invertible
            uint64_t root = (p - mulmod_u64(bm, inv, p)) % p;
            distinct.insert((uint32_t)root);
            pr.roots.push_back((uint32_t)root);
        }
        if (distinct.size() != sys.k())
            throw std::logic_error("sift_omega: collided roots mod " + std::to_string(p) +
                                   " (validator bug)");
        spec.push_back(std::move(pr));
    }

    const uint64_t n_segments = (x + segment - 1) / segment;
    std::vector<std::vector<uint64_t>> per_segment(n_segments);
    parallel_blocks(n_segments, workers, [&](uint64_t s) {
        const uint64_t lo = 1 + s * segment;
        const uint64_t hi = std::min(x, lo + segment - 1);
        std::vector<bool> struck(hi - lo + 1, false);
        for (auto& pr : spec) {
            for (uint32_t r : pr.roots) {
                uint64_t first = lo + ((r + pr.p - lo % pr.p) % pr.p);
                for (uint64_t n = first; n <= hi; n += pr.p) struck[n - lo] = true;
            }
        }
        auto& keep = per_segment[s];
        for (uint64_t n = lo; n <= hi; ++n)
            if (!struck[n - lo]) keep.push_back(n);
    });
    for (auto& seg : per_segment)
        out.sifted.insert(out.sifted.end(), seg.begin(), seg.end());
    out.count_omega = out.sifted.size();
    return out;
}

namespace {

FormFactorization classify_value(const LinearSystem& sys, const Int& value, uint64_t seed,
                                 const std::vector<uint32_t>* lpf) {
    FormFactorization out;
    out.value = value;
    Int v = abs(value);
    if (v <= 1) {
        out.composite = false;  // 0 and units are not composite
        return out;
    }
    unsigned total_multiplicity = 0;
    for (uint64_t p : sys.sigma) {
        while (mpz_divisible_ui_p(v.get_mpz_t(), p)) {
            mpz_divexact_ui(v.get_mpz_t(), v.get_mpz_t(), p);
            out.sigma_part *= Int((unsigned long)p);
            ++total_multiplicity;
        }
    }
    if (v > 1) {
        bool done = false;
        if (lpf && mpz_fits_ulong_p(v.get_mpz_t())) {
            uint64_t u = mpz_get_ui(v.get_mpz_t());
            if (u < lpf->size()) {
                while (u > 1) {
                    uint64_t p = (*lpf)[u];
                    unsigned e = 0;
                    while (u % p == 0) { u /= p; ++e; }
                    for (unsigned r = 0; r < e; ++r) out.rough_factors.push_back(Int((unsigned long)p));
                    if (e > 1) out.sigma_squarefree = false;
                    total_multiplicity += e;
                }
                done = true;
            }
        }
        if (!done) {
            auto f = factorize(v, seed);
            if (!f.complete) {
                out.undecided = true;
                return out;
            }
            for (auto& [p, e] : f.factors) {
                for (unsigned r = 0; r < e; ++r) out.rough_factors.push_back(p);
                if (e > 1) out.sigma_squarefree = false;
                total_multiplicity += e;
            }
        }
    }
    out.composite = total_multiplicity >= 2;
    return out;
}

}  // namespace

void refine_omega1(SieveOutcome& outcome, unsigned workers, uint64_t seed) {
    const auto& sys = outcome.system;
    // least-prime-factor table when form values stay in 32-bit range
    Int vmax = 0;
    for (auto& f : sys.forms) {
        Int v = abs(f.a) * outcome.x + abs(f.b);
        if (v > vmax) vmax = v;
    }
    std::vector<uint32_t> lpf;
    const std::vector<uint32_t>* lpf_ptr = nullptr;
    if (vmax <= Int(1u << 31)) {
        lpf = least_prime_factor_table((uint32_t)to_u64(vmax));
        lpf_ptr = &lpf;
    }

    std::vector<Survivor> result(outcome.sifted.size());
    std::vector<uint8_t> in_omega1(outcome.sifted.size(), 0);
    std::vector<uint8_t> any_prime(outcome.sifted.size(), 0);
    std::vector<uint8_t> any_square(outcome.sifted.size(), 0);
    std::vector<uint8_t> any_unit(outcome.sifted.size(), 0);
    std::vector<uint8_t> any_undecided(outcome.sifted.size(), 0);

    const uint64_t block = 1024;
    const uint64_t n_blocks = (outcome.sifted.size() + block - 1) / block;
    parallel_blocks(n_blocks, workers, [&](uint64_t blk) {
        const size_t lo = blk * block;
        const size_t hi = std::min(outcome.sifted.size(), (size_t)(lo + block));
        for (size_t t = lo; t < hi; ++t) {
            uint64_t n = outcome.sifted[t];
            Survivor s;
            s.n = n;
            bool keep = true, prime_seen = false, square_seen = false, unit_seen = false,
                 undecided = false;
            for (auto& f : sys.forms) {
                Int value = f.a * n + f.b;
                auto cls = classify_value(sys, value, seed, lpf_ptr);
                if (cls.undecided) undecided = true;
                if (!cls.undecided) {
                    Int v = abs(value);
                    if (v <= 1) unit_seen = true;
                    if (v > 1 && !cls.composite) prime_seen = true;
                    if (!cls.sigma_squarefree) square_seen = true;
                    if (!cls.composite || !cls.sigma_squarefree) keep = false;
                } else {
                    keep = false;
                }
                s.forms.push_back(std::move(cls));
            }
            result[t] = std::move(s);
            in_omega1[t] = keep && !undecided;
            any_prime[t] = prime_seen;
            any_square[t] = square_seen;
            any_unit[t] = unit_seen;
            any_undecided[t] = undecided;
        }
    });

    outcome.omega1.clear();
    outcome.count_prime = outcome.count_square = outcome.count_unit = 0;
    outcome.count_undecided = 0;
    for (size_t t = 0; t < result.size(); ++t) {
        if (any_prime[t]) ++outcome.count_prime;
        if (any_square[t]) ++outcome.count_square;
        if (any_unit[t]) ++outcome.count_unit;
        if (any_undecided[t]) ++outcome.count_undecided;
        if (in_omega1[t]) outcome.omega1.push_back(std::move(result[t]));
    }
    outcome.count_omega1 = outcome.omega1.size();
    outcome.refined = true;
}

uint64_t count_omega_star(const LinearSystem& sys, uint64_t x, uint64_t z, size_t which,
                          unsigned workers) {
    if (which >= sys.k()) throw std::invalid_argument("count_omega_star: bad form index");
    LinearSystem reduced;
    reduced.sigma = sys.sigma;
    for (size_t i = 0; i < sys.k(); ++i)
        if (i != which) reduced.forms.push_back(sys.forms[i]);

    std::vector<uint64_t> candidates;
    if (reduced.forms.empty()) {
        candidates.resize(x);
        for (uint64_t n = 1; n <= x; ++n) candidates[n - 1] = n;
    } else {
        candidates = sift_omega(reduced, x, z, workers).sifted;
    }
    uint64_t count = 0;
    const auto& f = sys.forms[which];
    for (uint64_t n : candidates) {
        Int v = abs(f.a * n + f.b);
        if (is_prime(v)) ++count;
    }
    return count;
}

Flt mertens_w(const LinearSystem& sys, uint64_t z, unsigned ell, bool star,
              unsigned precision_bits) {
    unsigned prec = std::max(precision_bits, 64u);
    Flt w(1, prec);
    for (uint32_t p : prime_sieve(z)) {
        if (sys.sigma_contains(p)) continue;
        Flt term(1, prec);
        term -= Flt(ell, prec) / Flt(star ? p - 1 : p, prec);
        w *= term;
    }
    return w;
}

MertensProducts mertens_products(const LinearSystem& sys, uint64_t z, unsigned precision_bits) {
    MertensProducts out{mertens_w(sys, z, (unsigned)sys.k(), false, precision_bits),
                        mertens_w(sys, z, (unsigned)sys.k() - 1, true, precision_bits)};
    return out;
}

double nonsquarefree_bound(const LinearSystem& sys, double x, double z) {
    if (z <= 1) throw std::invalid_argument("nonsquarefree_bound: z must be >= 2");
    const double k = (double)sys.k();
    const double m = mpz_get_d(sys.coefficient_bound().get_mpz_t());
    return k * m * (x + 1) / (z - 1) + k * std::sqrt(m * x + m);
}

AvoidResult avoid_prime_set(const SieveOutcome& outcome,
                            const std::function<bool(const Int&)>& bad) {
    AvoidResult res;
    for (const auto& s : outcome.omega1) {
        bool keep = true;
        for (const auto& ff : s.forms) {
            for (const auto& q : ff.rough_factors)
                if (bad(q)) { keep = false; break; }
            if (keep && ff.sigma_part != 1) {
                Int sp = ff.sigma_part;
                for (uint64_t p : outcome.system.sigma)
                    if (mpz_divisible_ui_p(sp.get_mpz_t(), p) && bad(Int((unsigned long)p))) {
                        keep = false;
                        break;
                    }
            }
            if (!keep) break;
        }
        if (keep) res.retained.push_back(s);
        else ++res.dropped;
    }
    res.retained_fraction = outcome.omega1.empty()
                                ? 1.0
                                : (double)res.retained.size() / (double)outcome.omega1.size();
    return res;
}

void dump_survivors(const SieveOutcome& outcome, std::ostream& out) {
    for (const auto& s : outcome.omega1) {
        nlohmann::json j;
        j["n"] = s.n;
        auto& forms = j["forms"] = nlohmann::json::array();
        for (size_t i = 0; i < s.forms.size(); ++i) {
            const auto& ff = s.forms[i];
            nlohmann::json e;
            e["i"] = i + 1;
            e["value"] = ff.value.get_str();
            e["sigma_part"] = ff.sigma_part.get_str();
            auto& rf = e["rough_factors"] = nlohmann::json::array();
            for (const auto& q : ff.rough_factors) rf.push_back(q.get_str());
            forms.push_back(std::move(e));
        }
        out << j.dump() << '\n';
    }
}

}  // namespace hord::sieve
