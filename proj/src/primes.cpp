#include "hord/primes.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace hord {

std::vector<uint32_t> prime_sieve(uint64_t limit) {
    std::vector<uint32_t> primes;
    if (limit <= 2) return primes;
    std::vector<bool> comp(limit, false);
    for (uint64_t i = 2; i * i < limit; ++i)
        if (!comp[i])
            for (uint64_t j = i * i; j < limit; j += i) comp[j] = true;
    for (uint64_t i = 2; i < limit; ++i)
        if (!comp[i]) primes.push_back((uint32_t)i);
    return primes;
}

const std::vector<uint32_t>& cached_primes(uint64_t limit) {
    static std::mutex mu;
    static std::map<uint64_t, std::vector<uint32_t>>* cache =
        new std::map<uint64_t, std::vector<uint32_t>>();  // entries are never erased
    std::lock_guard<std::mutex> lk(mu);
    auto [it, inserted] = cache->try_emplace(limit);
    if (inserted) it->second = prime_sieve(limit);
    return it->second;
}

std::vector<uint32_t> least_prime_factor_table(uint32_t limit) {
    std::vector<uint32_t> lpf(limit + 1, 0);
    for (uint64_t i = 2; i <= limit; ++i) {
        if (lpf[i] == 0) {
            for (uint64_t j = i; j <= limit; j += i)
                if (lpf[j] == 0) lpf[j] = (uint32_t)i;
        }
    }
    return lpf;
}

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return (uint64_t)((uint128)a * b % m);
}

uint64_t powmod_u64(uint64_t a, uint64_t e, uint64_t m) {
    uint64_t r = m == 1 ? 0 : 1;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, m);
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    return r;
}

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // Sinclair's 7-base set, deterministic below 2^64.
    for (uint64_t a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
        uint64_t x = powmod_u64(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

bool is_prime(const Int& n) {
    if (sgn(n) <= 0) return false;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) <= 64) {
        uint64_t v = to_u64(n);
        return is_prime_u64(v);
    }
    return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

namespace {

uint64_t gcd_u64(uint64_t a, uint64_t b) {
    while (b) { uint64_t t = a % b; a = b; b = t; }
    return a;
}

// Brent-cycle rho; returns a nontrivial factor of composite odd n, or 0.
uint64_t rho_brent_u64(uint64_t n, uint64_t c, uint64_t x0) {
    if (n % 2 == 0) return 2;
    uint64_t y = x0, r = 1, q = 1, g = 1, x = 0, ys = 0;
    const uint64_t m = 128;
    while (g == 1) {
        x = y;
        for (uint64_t i = 0; i < r; ++i) y = (mulmod_u64(y, y, n) + c) % n;
        uint64_t k = 0;
        while (k < r && g == 1) {
            ys = y;
            uint64_t lim = std::min(m, r - k);
            for (uint64_t i = 0; i < lim; ++i) {
                y = (mulmod_u64(y, y, n) + c) % n;
                uint64_t d = x > y ? x - y : y - x;
                q = mulmod_u64(q, d == 0 ? 1 : d, n);
            }
            g = gcd_u64(q, n);
            k += lim;
        }
        r <<= 1;
    }
    if (g == n) {
        g = 1;
        while (g == 1) {
            ys = (mulmod_u64(ys, ys, n) + c) % n;
            uint64_t d = x > ys ? x - ys : ys - x;
            g = gcd_u64(d == 0 ? 1 : d, n);
        }
    }
    return g == n ? 0 : g;
}

void factor_rec_u64(uint64_t n, uint64_t seed, std::map<Int, unsigned>& out,
                    bool& complete, Int& undecided) {
    if (n == 1) return;
    if (is_prime_u64(n)) { out[Int((unsigned long)n)]++; return; }
    uint64_t f = 0;
    for (unsigned attempt = 0; attempt < kRhoRestartBudget && f == 0; ++attempt) {
        uint64_t c = 1 + (seed * 0x9e3779b97f4a7c15ull + attempt * 0xbf58476d1ce4e5b9ull + n) % (n - 1);
        uint64_t x0 = (seed + 2 * attempt + 2) % n;
        f = rho_brent_u64(n, c, x0);
        if (f == n) f = 0;
    }
    if (f == 0) {  // cannot happen below 2^64 in practice
        complete = false;
        undecided *= Int((unsigned long)n);
        return;
    }
    factor_rec_u64(f, seed, out, complete, undecided);
    factor_rec_u64(n / f, seed, out, complete, undecided);
}

// mpz rho for values beyond 64 bits.
Int rho_brent_mpz(const Int& n, unsigned long c, unsigned long x0) {
    Int y(x0), x, ys, q(1), g(1), d;
    uint64_t r = 1;
    const uint64_t m = 128;
    auto step = [&](Int& v) {
        v = (v * v + c) % n;
    };
    while (g == 1) {
        x = y;
        for (uint64_t i = 0; i < r; ++i) step(y);
        uint64_t k = 0;
        while (k < r && g == 1) {
            ys = y;
            uint64_t lim = std::min(m, r - k);
            for (uint64_t i = 0; i < lim; ++i) {
                step(y);
                d = x - y;
                if (sgn(d) == 0) d = 1;
                q = q * d % n;
            }
            g = gcd(q, n);
            k += lim;
        }
        r <<= 1;
        if (r > (1ull << 24)) return 0;  // give up, caller restarts
    }
    if (g == n) {
        g = 1;
        while (g == 1) {
            step(ys);
            d = x - ys;
            if (sgn(d) == 0) d = 1;
            g = gcd(d, n);
        }
    }
    return g == n ? Int(0) : g;
}

void factor_rec_mpz(const Int& n, uint64_t seed, std::map<Int, unsigned>& out,
                    bool& complete, Int& undecided) {
    if (n == 1) return;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) <= 64) {
        factor_rec_u64(to_u64(n), seed, out, complete, undecided);
        return;
    }
    if (is_prime(n)) { out[n]++; return; }
    // perfect power shortcut keeps squarefull values tractable
    if (mpz_perfect_power_p(n.get_mpz_t())) {
        for (unsigned long k = 2; k <= mpz_sizeinbase(n.get_mpz_t(), 2); ++k) {
            Int root;
            if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0) {
                std::map<Int, unsigned> sub;
                factor_rec_mpz(root, seed, sub, complete, undecided);
                for (auto& [p, e] : sub) out[p] += e * (unsigned)k;
                return;
            }
        }
    }
    Int f = 0;
    for (unsigned attempt = 0; attempt < kRhoRestartBudget && f == 0; ++attempt) {
        unsigned long c = (unsigned long)(1 + (seed * 0x9e3779b97f4a7c15ull + attempt) % 1000003ull);
        unsigned long x0 = (unsigned long)(2 + seed % 97 + 3 * attempt);
        f = rho_brent_mpz(n, c, x0);
        if (f == n) f = 0;
    }
    if (f == 0) {
        complete = false;
        undecided *= n;
        return;
    }
    factor_rec_mpz(f, seed, out, complete, undecided);
    factor_rec_mpz(n / f, seed, out, complete, undecided);
}

}  // namespace

Factorization factorize_u64(uint64_t n, uint64_t seed) {
    Factorization f;
    if (n == 0) throw std::invalid_argument("factorize: zero");
    factor_rec_u64(n, seed, f.factors, f.complete, f.undecided);
    return f;
}

Factorization factorize(const Int& n, uint64_t seed) {
    Factorization f;
    Int v = abs(n);
    if (sgn(v) == 0) throw std::invalid_argument("factorize: zero");
    // strip small primes first; rho then only sees hard cofactors
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull}) {
        while (mpz_divisible_ui_p(v.get_mpz_t(), p)) {
            mpz_divexact_ui(v.get_mpz_t(), v.get_mpz_t(), p);
            f.factors[Int((unsigned long)p)]++;
        }
    }
    factor_rec_mpz(v, seed, f.factors, f.complete, f.undecided);
    return f;
}

Int crt(const std::vector<Int>& residues, const std::vector<Int>& moduli) {
    if (residues.size() != moduli.size() || residues.empty())
        throw std::invalid_argument("crt: bad input sizes");
    Int x = residues[0] % moduli[0];
    if (sgn(x) < 0) x += moduli[0];
    Int m = moduli[0];
    for (size_t i = 1; i < residues.size(); ++i) {
        Int g = gcd(m, moduli[i]);
        if (g != 1) throw std::invalid_argument("crt: moduli not coprime");
        Int inv;
        if (mpz_invert(inv.get_mpz_t(), m.get_mpz_t(), moduli[i].get_mpz_t()) == 0)
            throw std::invalid_argument("crt: no inverse");
        Int t = ((residues[i] - x) % moduli[i]) * inv % moduli[i];
        if (sgn(t) < 0) t += moduli[i];
        x += m * t;
        m *= moduli[i];
    }
    x %= m;
    if (sgn(x) < 0) x += m;
    return x;
}

double log_integral(double x) {
    if (x < 2.0) throw std::domain_error("log_integral: x < 2 unsupported");
    // li(2) + composite Simpson on 1/log t; integrand is smooth on [2, x]
    static const double li2 = 1.045163780117492784845;
    const int panels = 1 << 14;
    const double h = (x - 2.0) / panels;
    auto f = [](double t) { return 1.0 / std::log(t); };
    double s = f(2.0) + f(x);
    for (int i = 1; i < panels; ++i) s += f(2.0 + h * i) * (i % 2 ? 4.0 : 2.0);
    return li2 + s * h / 3.0;
}

}  // namespace hord
