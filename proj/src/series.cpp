#include "hord/series.hpp"

#include <algorithm>
#include <stdexcept>

#include "hord/parallel.hpp"

namespace hord::series {

namespace {

constexpr size_t kBlock = 1u << 12;  // outputs per parallel work unit

size_t block_count(size_t n) { return (n + kBlock - 1) / kBlock; }

}  // namespace

std::vector<std::pair<uint32_t, int64_t>> eta_cubed_sparse(size_t len) {
    std::vector<std::pair<uint32_t, int64_t>> out;
    for (uint64_t k = 0;; ++k) {
        uint64_t t = k * (k + 1) / 2;
        if (t >= len) break;
        int64_t c = (int64_t)(2 * k + 1);
        out.emplace_back((uint32_t)t, (k & 1) ? -c : c);
    }
    return out;
}

namespace {

// Fallback for coefficient sizes where an output row could overflow an
// int128 accumulator: per-output accumulation with periodic exact spills.
std::vector<Int> self_convolve_spilled(const std::vector<int64_t>& a, size_t out_len,
                                       unsigned workers, uint64_t chunk) {
    std::vector<Int> result(out_len);
    parallel_blocks(block_count(out_len), workers, [&](uint64_t blk) {
        const size_t n_lo = blk * kBlock;
        const size_t n_hi = std::min(out_len, n_lo + kBlock);
        for (size_t n = n_lo; n < n_hi; ++n) {
            const size_t pairs = (n + 1) / 2;  // #{i : i < n - i}
            Int& out = result[n];
            int128 acc = 0;
            uint64_t in_chunk = 0;
            const int64_t* lo = a.data();
            const int64_t* hi = a.data() + n;
            for (size_t i = 0; i < pairs; ++i) {
                acc += (int128)lo[i] * hi[-(ptrdiff_t)i];
                if (++in_chunk == chunk) {
                    add_int128(out, acc);
                    acc = 0;
                    in_chunk = 0;
                }
            }
            acc *= 2;
            if ((n & 1) == 0) acc += (int128)a[n / 2] * a[n / 2];
            if (sgn(out) != 0) out *= 2;  // spilled part covers off-diagonal terms only
            add_int128(out, acc);
        }
    });
    return result;
}

}  // namespace

std::vector<Int> self_convolve(const std::vector<int64_t>& a, size_t out_len, unsigned workers) {
    const size_t n_in = a.size();
    std::vector<Int> result(out_len);
    if (n_in == 0 || out_len == 0) return result;
    if (out_len > n_in)
        throw std::invalid_argument("self_convolve(int64): out_len exceeds input length");

    // compressed nonzero view; the cache-tiled pass skips zero inputs
    std::vector<uint32_t> idx;
    std::vector<int64_t> val;
    uint64_t max_abs = 1;
    for (size_t i = 0; i < n_in; ++i) {
        if (a[i] != 0) {
            idx.push_back((uint32_t)i);
            val.push_back(a[i]);
            uint64_t m = a[i] < 0 ? (uint64_t)(-a[i]) : (uint64_t)a[i];
            if (m > max_abs) max_abs = m;
        }
    }
    // a full output row must fit an int128 accumulator (doubled afterwards)
    const uint128 prod_bound = (uint128)max_abs * max_abs;
    const uint128 budget = ((uint128)1) << 124;
    const uint64_t chunk = (uint64_t)std::min<uint128>(budget / prod_bound, ~(uint64_t)0);
    if (chunk < (out_len + 1) / 2)
        return self_convolve_spilled(a, out_len, workers, chunk);

    parallel_blocks(block_count(out_len), workers, [&](uint64_t blk) {
        const size_t n_lo = blk * kBlock;
        const size_t n_hi = std::min(out_len, n_lo + kBlock);
        const size_t width = n_hi - n_lo;
        int128 acc[kBlock];
        std::fill(acc, acc + width, (int128)0);
        // off-diagonal pairs (i, n-i), i < n-i: for each nonzero i stream
        // the contiguous output window it touches
        const int64_t* base = a.data();
        for (size_t t = 0; t < idx.size(); ++t) {
            const size_t i = idx[t];
            if (2 * i + 1 >= n_hi) break;
            const int64_t v = val[t];
            const size_t n_start = std::max(n_lo, 2 * i + 1);
            const int64_t* src = base + (n_start - i);
            int128* dst = acc + (n_start - n_lo);
            const size_t cnt = n_hi - n_start;
            for (size_t s = 0; s < cnt; ++s) dst[s] += (int128)v * src[s];
        }
        for (size_t n = n_lo; n < n_hi; ++n) {
            int128 r = 2 * acc[n - n_lo];
            if ((n & 1) == 0) r += (int128)a[n / 2] * a[n / 2];
            add_int128(result[n], r);
        }
    });
    return result;
}

std::vector<Int> self_convolve(const std::vector<Int>& a, size_t out_len, unsigned workers) {
    const size_t n_in = a.size();
    std::vector<Int> result(out_len);
    parallel_blocks(block_count(out_len), workers, [&](uint64_t blk) {
        const size_t n_lo = blk * kBlock;
        const size_t n_hi = std::min(out_len, n_lo + kBlock);
        Int acc;
        for (size_t n = n_lo; n < n_hi; ++n) {
            acc = 0;
            const size_t i_max = std::min(n_in - 1, n);
            for (size_t i = n > n_in - 1 ? n - (n_in - 1) : 0; 2 * i < n; ++i) {
                if (i <= i_max && n - i <= n_in - 1)
                    mpz_addmul(acc.get_mpz_t(), a[i].get_mpz_t(), a[n - i].get_mpz_t());
            }
            acc *= 2;
            if ((n & 1) == 0 && n / 2 < n_in)
                mpz_addmul(acc.get_mpz_t(), a[n / 2].get_mpz_t(), a[n / 2].get_mpz_t());
            result[n] = acc;
        }
    });
    return result;
}

std::vector<Int> multiply(const std::vector<Int>& a, const std::vector<Int>& b,
                          size_t out_len, unsigned workers) {
    std::vector<Int> result(out_len);
    parallel_blocks(block_count(out_len), workers, [&](uint64_t blk) {
        const size_t n_lo = blk * kBlock;
        const size_t n_hi = std::min(out_len, n_lo + kBlock);
        Int acc;
        for (size_t n = n_lo; n < n_hi; ++n) {
            acc = 0;
            const size_t i_lo = b.size() <= n ? n - (b.size() - 1) : 0;
            const size_t i_hi = std::min(a.size() - 1, n);
            for (size_t i = i_lo; i <= i_hi && i < a.size(); ++i)
                mpz_addmul(acc.get_mpz_t(), a[i].get_mpz_t(), b[n - i].get_mpz_t());
            result[n] = acc;
        }
    });
    return result;
}

namespace {

// Narrow an exact mpz series to int64, or fail.
bool narrow(const std::vector<Int>& v, std::vector<int64_t>& out) {
    out.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (!fits_int64(v[i])) return false;
        out[i] = mpz_get_si(v[i].get_mpz_t());
    }
    return true;
}

}  // namespace

std::vector<Int> delta_coefficients(size_t n_max, unsigned workers) {
    if (n_max == 0) throw std::invalid_argument("delta_coefficients: n_max must be >= 1");
    const size_t len = n_max;  // tau(n) = [q^{n-1}] (eta^3)^8

    auto sparse = eta_cubed_sparse(len);
    // eta^3 -> eta^6, small values, direct sparse x sparse
    std::vector<int64_t> e2(len, 0);
    for (size_t i = 0; i < sparse.size(); ++i) {
        auto [ti, vi] = sparse[i];
        if ((uint64_t)ti * 2 < len) e2[2 * ti] += vi * vi;
        for (size_t j = i + 1; j < sparse.size(); ++j) {
            uint64_t t = (uint64_t)ti + sparse[j].first;
            if (t >= len) break;
            e2[t] += 2 * vi * sparse[j].second;
        }
    }
    // eta^6 -> eta^12 -> eta^24
    auto e4_exact = self_convolve(e2, len, workers);
    std::vector<int64_t> e4;
    std::vector<Int> e8;
    if (narrow(e4_exact, e4)) {
        e4_exact.clear();
        e4_exact.shrink_to_fit();
        e8 = self_convolve(e4, len, workers);
    } else {
        e8 = self_convolve(e4_exact, len, workers);  // promotion path, exact but slow
    }
    return e8;  // e8[n-1] = tau(n)
}

std::vector<Int> sigma_series(size_t n_max, unsigned k) {
    std::vector<Int> s(n_max + 1, Int(0));
    Int dk;
    for (size_t d = 1; d <= n_max; ++d) {
        mpz_ui_pow_ui(dk.get_mpz_t(), d, k);
        for (size_t m = d; m <= n_max; m += d) s[m] += dk;
    }
    return s;
}

std::vector<Int> eisenstein4(size_t n_max, unsigned) {
    auto s = sigma_series(n_max, 3);
    std::vector<Int> e(n_max + 1);
    e[0] = 1;
    for (size_t n = 1; n <= n_max; ++n) e[n] = 240 * s[n];
    return e;
}

std::vector<Int> eisenstein6(size_t n_max, unsigned) {
    auto s = sigma_series(n_max, 5);
    std::vector<Int> e(n_max + 1);
    e[0] = 1;
    for (size_t n = 1; n <= n_max; ++n) e[n] = -504 * s[n];
    return e;
}

std::vector<Int> eigenform_coefficients(unsigned weight, size_t n_max, unsigned workers) {
    struct Combo { unsigned w, e4, e6; };
    static constexpr Combo combos[] = {
        {12, 0, 0}, {16, 1, 0}, {18, 0, 1}, {20, 2, 0}, {22, 1, 1}, {26, 2, 1}};
    const Combo* combo = nullptr;
    for (auto& c : combos)
        if (c.w == weight) combo = &c;
    if (!combo)
        throw std::invalid_argument(
            "eigenform_coefficients: weight " + std::to_string(weight) +
            " does not have a one-dimensional cusp space");
    auto tau = delta_coefficients(n_max, workers);
    if (combo->e4 == 0 && combo->e6 == 0) return tau;

    // series indexed from q^1 for Delta, q^0 for Eisenstein factors
    std::vector<Int> acc(n_max);  // acc[i] = coefficient of q^{i+1}
    acc.swap(tau);
    auto apply = [&](const std::vector<Int>& f) {
        std::vector<Int> shifted(n_max + 1);
        shifted[0] = 0;
        for (size_t i = 0; i < n_max; ++i) shifted[i + 1] = acc[i];
        auto prod = multiply(shifted, f, n_max + 1, workers);
        for (size_t i = 0; i < n_max; ++i) acc[i] = prod[i + 1];
    };
    if (combo->e4 > 0) {
        auto e4 = eisenstein4(n_max, workers);
        for (unsigned r = 0; r < combo->e4; ++r) apply(e4);
    }
    if (combo->e6 > 0) {
        auto e6 = eisenstein6(n_max, workers);
        for (unsigned r = 0; r < combo->e6; ++r) apply(e6);
    }
    return acc;
}

}  // namespace hord::series
