#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace hord {

using Int = mpz_class;
using Rat = mpq_class;
using Flt = mpf_class;

using int128 = __int128;
using uint128 = unsigned __int128;

// Default working precision for normalized eigenvalues and Mertens products.
inline constexpr unsigned kDefaultPrecisionBits = 128;

inline Int to_mpz(int128 v) {
    const bool neg = v < 0;
    uint128 u = neg ? -(uint128)v : (uint128)v;
    const uint64_t limbs[2] = {(uint64_t)u, (uint64_t)(u >> 64)};
    Int out;
    mpz_import(out.get_mpz_t(), 2, -1, sizeof(uint64_t), 0, 0, limbs);
    if (neg) out = -out;
    return out;
}

inline void add_int128(Int& acc, int128 v) {
    if (v == 0) return;
    const bool neg = v < 0;
    uint128 u = neg ? -(uint128)v : (uint128)v;
    const uint64_t lo = (uint64_t)u;
    const uint64_t hi = (uint64_t)(u >> 64);
    if (hi == 0) {
        if (neg) mpz_sub_ui(acc.get_mpz_t(), acc.get_mpz_t(), lo);
        else     mpz_add_ui(acc.get_mpz_t(), acc.get_mpz_t(), lo);
        return;
    }
    Int tmp = to_mpz(v);
    acc += tmp;
}

inline bool fits_int64(const Int& v) {
    return mpz_fits_slong_p(v.get_mpz_t()) != 0;
}

inline uint64_t to_u64(const Int& v) {
    if (sgn(v) < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 64)
        throw std::overflow_error("to_u64: value out of range");
    uint64_t lo = mpz_get_ui(v.get_mpz_t());
    if (mpz_sizeinbase(v.get_mpz_t(), 2) > 32) {
        Int hi = v >> 32;
        lo = (mpz_get_ui(hi.get_mpz_t()) << 32) | (lo & 0xffffffffu);
    }
    return lo;
}

inline Int pow_int(const Int& base, unsigned long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Int pow_ui(unsigned long base, unsigned long e) {
    Int r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, e);
    return r;
}

inline Int factorial(unsigned long n) {
    Int r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

// Exact rational from a decimal string like "0.25" or "-1.5e-2".
inline Rat rat_from_decimal(const std::string& s) {
    std::string digits;
    long exp10 = 0;
    bool neg = false;
    size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            if (seen_dot) throw std::invalid_argument("rat_from_decimal: bad literal '" + s + "'");
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            if (seen_dot) --exp10;
            seen_digit = true;
        } else if (c == 'e' || c == 'E') {
            exp10 += std::stol(s.substr(i + 1));
            i = s.size() - 1;
        } else {
            throw std::invalid_argument("rat_from_decimal: bad literal '" + s + "'");
        }
    }
    if (!seen_digit) throw std::invalid_argument("rat_from_decimal: bad literal '" + s + "'");
    Int num(digits.empty() ? "0" : digits);
    if (neg) num = -num;
    Rat r(num);
    Int scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, (unsigned long)(exp10 < 0 ? -exp10 : exp10));
    if (exp10 < 0) r /= Rat(scale);
    else r *= Rat(scale);
    r.canonicalize();
    return r;
}

// Accepts "1000000", "1e6", "2.5e4" and the like; rejects non-integral values.
inline uint64_t parse_count(const std::string& s) {
    if (s.find_first_of("eE.") == std::string::npos) {
        size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("parse_count: trailing characters in '" + s + "'");
        return v;
    }
    size_t pos = 0;
    long double v = std::stold(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("parse_count: trailing characters in '" + s + "'");
    if (v < 0 || v > 1.8e19L) throw std::out_of_range("parse_count: out of range");
    uint64_t u = (uint64_t)(v + 0.5L);
    if ((long double)u != v && v - (long double)u > 1e-6L * v)
        throw std::invalid_argument("parse_count: not an integer: '" + s + "'");
    return u;
}

}  // namespace hord
