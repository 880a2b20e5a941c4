#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hord/forms.hpp"
#include "hord/primes.hpp"
#include "hord/series.hpp"
#include "oracles.hpp"

using namespace hord;
using forms::CoefficientTable;
using forms::FormDescriptor;

namespace {

const FormDescriptor kDelta{12, 1, forms::Source::BuiltinEtaEisenstein, "delta"};

// Synthetic multiplicative table from prescribed a_p values (test-only).
CoefficientTable synthetic_table(unsigned weight, uint64_t n_max,
                                 const std::function<Int(uint64_t)>& a_p) {
    auto lpf = least_prime_factor_table((uint32_t)n_max);
    std::vector<Int> a(n_max);
    a[0] = 1;
    for (uint64_t n = 2; n <= n_max; ++n) {
        uint64_t p = lpf[n], q = 1, m = n;
        while (m % p == 0) { m /= p; q *= p; }
        if (m > 1) {
            a[n - 1] = a[q - 1] * a[m - 1];
        } else {
            uint64_t ell = 0;
            for (uint64_t t = q; t > 1; t /= p) ++ell;
            FormDescriptor f{weight, 1, forms::Source::ExternalTable, "synthetic"};
            a[n - 1] = forms::prime_power_eigenvalue(f, p, ell, a_p(p));
        }
    }
    FormDescriptor f{weight, 1, forms::Source::ExternalTable, "synthetic"};
    return CoefficientTable(f, std::move(a));
}

}  // namespace

TEST_CASE("delta table matches the naive eta-product expansion") {
    auto table = forms::build_delta_table(64);
    auto oracle = oracles::naive_delta_expansion(64);
    for (uint64_t n = 1; n <= 64; ++n)
        CHECK(table.at(n) == Int(oracle[n - 1]));
    // frozen classical values
    CHECK(table.at(1) == 1);
    CHECK(table.at(2) == -24);
    CHECK(table.at(3) == 252);
    CHECK(table.at(4) == -1472);
    CHECK(table.at(5) == 4830);
    CHECK(table.at(6) == -6048);
    CHECK(table.at(7) == -16744);
}

TEST_CASE("delta table matches the Niebur formula oracle") {
    auto table = forms::build_delta_table(200);
    auto oracle = oracles::niebur_tau(200);
    for (uint64_t n = 1; n <= 200; ++n)
        CHECK(table.at(n) == Int(oracle[n - 1]));
}

TEST_CASE("n_max = 1 gives the leading coefficient only") {
    auto table = forms::build_delta_table(1);
    CHECK(table.n_max() == 1);
    CHECK(table.at(1) == 1);
}

TEST_CASE("multiplicativity at 6 = 2*3") {
    auto table = forms::build_delta_table(6);
    CHECK(table.at(6) == table.at(2) * table.at(3));
}

TEST_CASE("series engine output is independent of worker count") {
    auto one = series::delta_coefficients(3000, 1);
    auto three = series::delta_coefficients(3000, 3);
    CHECK(one == three);
}

TEST_CASE("capacity error on absurd table size") {
    CHECK_THROWS_AS(forms::build_delta_table(1ull << 40, 1, 1ull << 20), CapacityError);
}

TEST_CASE("eigenform tables: construction and examples") {
    auto t16 = forms::build_eigenform_table(16, 64);
    CHECK(t16.at(1) == 1);
    CHECK(t16.at(2) == 216);
    // a(4) = a(2)^2 - 2^15 by the recurrence
    CHECK(t16.at(4) == Int(216) * 216 - 32768);
    CHECK_THROWS_AS(forms::build_eigenform_table(24, 16), std::invalid_argument);
    CHECK_THROWS_AS(forms::build_eigenform_table(14, 16), std::invalid_argument);

    auto rep = forms::verify_invariants(t16);
    CHECK(rep.ok);
    for (unsigned w : {18u, 20u, 22u, 26u}) {
        auto t = forms::build_eigenform_table(w, 48);
        auto r = forms::verify_invariants(t);
        CHECK(r.ok);
    }
}

TEST_CASE("coefficient access and range errors") {
    auto table = forms::build_delta_table(16);
    CHECK(table.at(1) == 1);
    CHECK(table.at(4) == Int(-24) * (-24) - 2048);
    CHECK_THROWS_AS((void)table.at(17), std::out_of_range);
    CHECK_THROWS_AS((void)table.at(0), std::out_of_range);
}

TEST_CASE("prime power eigenvalue recurrence") {
    CHECK(forms::prime_power_eigenvalue(kDelta, 2, 0, Int(-24)) == 1);
    CHECK(forms::prime_power_eigenvalue(kDelta, 2, 1, Int(-24)) == -24);
    CHECK(forms::prime_power_eigenvalue(kDelta, 2, 3, Int(-24)) == 84480);
    // a_p = 0 collapses the middle term
    CHECK(forms::prime_power_eigenvalue(kDelta, 5, 2, Int(0)) == -pow_ui(5, 11));
    // ramified prime: plain power of a_p
    FormDescriptor lvl6{12, 6, forms::Source::ExternalTable, "x"};
    CHECK(forms::prime_power_eigenvalue(lvl6, 2, 3, Int(-7)) == -343);
    // agreement with the table at every prime power in range
    auto table = forms::build_delta_table(2048);
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull}) {
        uint64_t q = p;
        for (uint64_t ell = 1; q <= 2048; ++ell, q *= p) {
            CHECK(forms::prime_power_eigenvalue(kDelta, p, ell, table.at(p)) == table.at(q));
            if (q > 2048 / p) break;
        }
    }
}

TEST_CASE("normalized lambda values") {
    auto v1 = forms::normalized_lambda(kDelta, 1, Int(1));
    CHECK(mpf_get_d(v1.lambda.get_mpf_t()) == doctest::Approx(1.0).epsilon(1e-15));
    auto v2 = forms::normalized_lambda(kDelta, 2, Int(-24));
    CHECK(mpf_get_d(v2.lambda.get_mpf_t()) ==
          doctest::Approx(-0.530330085889910643).epsilon(1e-12));
    CHECK(v2.exact_numerator == -24);
    // lambda(4) = lambda(2)^2 - 1
    auto v4 = forms::normalized_lambda(kDelta, 4, Int(-1472));
    double l2 = mpf_get_d(v2.lambda.get_mpf_t());
    CHECK(mpf_get_d(v4.lambda.get_mpf_t()) == doctest::Approx(l2 * l2 - 1).epsilon(1e-12));
}

TEST_CASE("Satake angle") {
    CHECK(forms::theta_angle(kDelta, 7919, Int(0)) ==
          doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
    double theta2 = forms::theta_angle(kDelta, 2, Int(-24));
    CHECK(theta2 == doctest::Approx(1.83917141540925226).epsilon(1e-12));
    // Eq.(5) reproduces lambda(4) from theta_2 to 1e-12
    double l4 = std::sin(3 * theta2) / std::sin(theta2);
    CHECK(l4 == doctest::Approx(-0.71875).epsilon(1e-12));
    // Deligne violation rejected
    CHECK_THROWS_AS(forms::theta_angle(kDelta, 2, Int(100)), DeligneViolation);
}

TEST_CASE("lambda via angle: interior and boundary") {
    CHECK(forms::lambda_via_angle(std::numbers::pi / 2, 2) == doctest::Approx(-1.0));
    CHECK(forms::lambda_via_angle(0.0, 5) == 6.0);
    CHECK(forms::lambda_via_angle(std::numbers::pi, 5) == -6.0);
    CHECK(forms::lambda_via_angle(std::numbers::pi, 4) == 5.0);
    double theta2 = forms::theta_angle(kDelta, 2, Int(-24));
    CHECK(forms::lambda_via_angle(theta2, 3) ==
          doctest::Approx(0.911504835123283918).epsilon(1e-10));
}

TEST_CASE("lambda via angle agrees with the exact recurrence below 1e9") {
    auto table = forms::build_delta_table(100);
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 31ull, 97ull}) {
        double theta = forms::theta_angle(kDelta, p, table.at(p));
        for (uint64_t ell = 0; std::pow((double)p, (double)ell) <= 1e9; ++ell) {
            double approx = forms::lambda_via_angle(theta, ell);
            Int a = forms::prime_power_eigenvalue(kDelta, p, ell, table.at(p));
            Int q = pow_ui(p, (unsigned long)ell);
            double exact = mpf_get_d(forms::normalized_lambda(kDelta, q, a).lambda.get_mpf_t());
            CHECK(approx == doctest::Approx(exact).epsilon(1e-9));
        }
    }
}

TEST_CASE("rational angle rule") {
    CHECK(forms::is_rational_angle(kDelta, 7919, Int(0)));
    // lambda^2 = 2 at p = 2 is the only boundary family realizable with
    // integer coefficients: a = 2^{weight/2}
    CHECK(forms::is_rational_angle(kDelta, 2, Int(64)));
    CHECK_FALSE(forms::is_rational_angle(kDelta, 2, Int(-24)));
    CHECK_FALSE(forms::is_rational_angle(kDelta, 3, Int(252)));

    // rule <=> some prime power vanishes (scan bound 2000) or |lambda| = 2
    auto table = forms::build_delta_table(64);
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull}) {
        bool rational = forms::is_rational_angle(kDelta, p, table.at(p));
        bool vanishes = false;
        Int pk = pow_ui(p, 11), prev = 1, cur = table.at(p);
        for (int ell = 1; ell <= 2000 && !vanishes; ++ell) {
            if (cur == 0) vanishes = true;
            Int next = table.at(p) * cur - pk * prev;
            prev = cur;
            cur = next;
        }
        CHECK(rational == vanishes);
    }
    // synthetic a_p = 0: scan finds the vanishing immediately
    CHECK(forms::is_rational_angle(kDelta, 5, Int(0)));
}

TEST_CASE("exact same-weight comparison") {
    auto table = forms::build_delta_table(100);
    // |lambda(2)| = 0.5303 > |lambda(3)| = ... compare exactly
    int c = forms::cmp_abs_lambda_same_weight(table.at(2), Int(2), table.at(3), Int(3), 12);
    double l2 = std::abs(mpf_get_d(forms::normalized_lambda(kDelta, 2, table.at(2)).lambda.get_mpf_t()));
    double l3 = std::abs(mpf_get_d(forms::normalized_lambda(kDelta, 3, table.at(3)).lambda.get_mpf_t()));
    CHECK(c == (l2 < l3 ? -1 : 1));
    CHECK(forms::cmp_abs_lambda_same_weight(table.at(5), Int(5), table.at(5), Int(5), 12) == 0);
}

TEST_CASE("mixed-weight comparison with near-tie flag") {
    auto d = forms::build_delta_table(10);
    auto t16 = forms::build_eigenform_table(16, 10);
    auto r = forms::cmp_abs_lambda_mixed(d.at(2), Int(2), 12, t16.at(2), Int(2), 16);
    // |lambda_12(2)| = 0.5303, |lambda_16(2)| = 216/2^7.5 = 1.1932
    CHECK(r.cmp == -1);
    CHECK_FALSE(r.near_tie);
    auto same = forms::cmp_abs_lambda_mixed(d.at(2), Int(2), 12, d.at(2), Int(2), 12);
    CHECK(same.cmp == 0);
}

TEST_CASE("invariant verification flags corrupted tables") {
    auto good = forms::build_delta_table(300);
    auto rep = forms::verify_invariants(good);
    CHECK(rep.ok);
    CHECK(rep.multiplicativity_checked > 0);
    CHECK(rep.recurrence_checked > 0);

    // a(6) != a(2)a(3)
    std::vector<Int> bad(good.raw().begin(), good.raw().begin() + 20);
    bad[5] += 1;
    auto t = CoefficientTable(kDelta, bad);
    auto r2 = forms::verify_invariants(t);
    CHECK_FALSE(r2.ok);
    bool found = false;
    for (auto& v : r2.violations)
        if (v.find("(m=2, n=3)") != std::string::npos) found = true;
    CHECK(found);

    // Deligne violation at p = 2
    std::vector<Int> bad2(good.raw().begin(), good.raw().begin() + 4);
    bad2[1] = 91;  // 91^2 = 8281 > 4 * 2^11
    bool deligne = false;
    auto r3 = forms::verify_invariants(CoefficientTable(kDelta, bad2));
    for (auto& v : r3.violations)
        if (v.find("Deligne") != std::string::npos && v.find("p=2") != std::string::npos)
            deligne = true;
    CHECK(deligne);
}

TEST_CASE("synthetic table with a(2) = 0 stays multiplicative") {
    auto table = synthetic_table(12, 256, [](uint64_t p) {
        return p == 2 ? Int(0) : Int(1);
    });
    auto rep = forms::verify_invariants(table);
    CHECK(rep.ok);
    CHECK(table.at(2) == 0);
    CHECK(table.at(4) == -pow_ui(2, 11));
    CHECK(table.at(8) == 0);
}
