#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hord/forms.hpp"
#include "hord/primes.hpp"
#include "hord/sieve.hpp"
#include "oracles.hpp"

using namespace hord;
using sieve::make_system;

TEST_CASE("validate: k=1, L(n)=n+1, Sigma={2} is fully valid") {
    auto sys = make_system({{1, 1}}, {2});
    auto rep = sieve::validate_system(sys, false);
    CHECK(rep.ok(false));
    CHECK(rep.failures.empty());
}

TEST_CASE("validate: degenerate pair L1=n, L2=2n") {
    auto sys = make_system({{1, 0}, {2, 0}}, {2});
    auto rep = sieve::validate_system(sys, false);
    CHECK_FALSE(rep.nondegenerate);
    CHECK_FALSE(rep.ok(false));
}

TEST_CASE("validate: missing small prime is a warning, not a sieving failure") {
    // (2k)! = 24 contains 3, but Sigma = {2}: sieveable, flagged
    auto sys = make_system({{1, 0}, {1, 2}}, {2});
    auto rep = sieve::validate_system(sys, false);
    CHECK(rep.sieveable());
    CHECK_FALSE(rep.small_primes_in_sigma);
    CHECK_FALSE(rep.ok(false));
    CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("validate: divisibility condition") {
    auto sys = make_system({{6, 1}}, {2, 3});
    CHECK(sieve::validate_system(sys, true).ok(true));
    auto sys2 = make_system({{2, 1}}, {2, 3});  // 3 does not divide a_1
    CHECK_FALSE(sieve::validate_system(sys2, true).ok(true));
    CHECK(sieve::validate_system(sys2, false).ok(false));
}

TEST_CASE("sift: z=2 keeps everything") {
    auto sys = make_system({{1, 0}}, {});
    auto out = sieve::sift_omega(sys, 50, 2);
    CHECK(out.count_omega == 50);
}

TEST_CASE("sift: all small primes excluded keeps everything") {
    auto sys = make_system({{1, 0}}, {2, 3, 5, 7});
    auto out = sieve::sift_omega(sys, 100, 11);
    CHECK(out.count_omega == 100);
}

TEST_CASE("sift: n with Sigma={2}, z=6 leaves 16 of 30") {
    auto sys = make_system({{1, 0}}, {2});
    auto out = sieve::sift_omega(sys, 30, 6);
    CHECK(out.count_omega == 16);
}

TEST_CASE("sift agrees with brute force on small systems") {
    std::vector<oracles::TinySystem> tiny = {
        {{{1, 0}}, {2}},
        {{{1, 0}, {1, 2}}, {2}},
        {{{1, 1}}, {}},
        {{{3, 1}, {1, 0}}, {2, 3}},
        {{{1, 0}, {1, 2}, {1, 6}}, {2, 3}},
    };
    for (auto& t : tiny) {
        sieve::LinearSystem sys;
        for (auto [a, b] : t.forms) sys.forms.push_back({Int(a), Int(b)});
        sys.sigma = t.sigma;
        for (uint64_t x : {100ull, 1000ull, 5000ull}) {
            for (uint64_t z : {2ull, 5ull, 30ull, 97ull}) {
                if (z > x) continue;
                auto mine = sieve::sift_omega(sys, x, z);
                auto ref = oracles::brute_force_omega(t, x, z);
                REQUIRE(mine.sifted == ref);
            }
        }
    }
}

TEST_CASE("sift is independent of segment size and worker count") {
    auto sys = make_system({{1, 0}, {1, 2}}, {2});
    auto a = sieve::sift_omega(sys, 20000, 50, 1, 1 << 20);
    auto b = sieve::sift_omega(sys, 20000, 50, 4, 256);
    auto c = sieve::sift_omega(sys, 20000, 50, 3, 1024);
    CHECK(a.sifted == b.sifted);
    CHECK(a.sifted == c.sifted);
}

TEST_CASE("refine: prime and square exclusions") {
    auto sys = make_system({{1, 0}}, {});
    auto out = sieve::sift_omega(sys, 100, 2);
    sieve::refine_omega1(out);
    // 25 = 5^2 not squarefree; 97 prime: both excluded
    for (auto& s : out.omega1) {
        CHECK(s.n != 25);
        CHECK(s.n != 97);
    }
    CHECK(out.count_undecided == 0);
    // composite squarefree values survive
    bool has6 = false;
    for (auto& s : out.omega1) has6 |= s.n == 6;
    CHECK(has6);
}

TEST_CASE("refine matches the brute-force Omega_1 filter") {
    oracles::TinySystem t{{{1, 0}}, {2, 3, 5, 7}};
    sieve::LinearSystem sys = make_system({{1, 0}}, {2, 3, 5, 7});
    auto out = sieve::sift_omega(sys, 1000, 11);
    sieve::refine_omega1(out);
    std::vector<uint64_t> mine;
    for (auto& s : out.omega1) mine.push_back(s.n);
    std::vector<uint64_t> ref;
    for (uint64_t n : out.sifted)
        if (oracles::omega1_member(t, n)) ref.push_back(n);
    CHECK(mine == ref);
}

TEST_CASE("refine factorization evidence is exact") {
    auto sys = make_system({{1, 0}, {1, 2}}, {2});
    auto out = sieve::sift_omega(sys, 5000, 10);
    sieve::refine_omega1(out);
    REQUIRE(!out.omega1.empty());
    for (auto& s : out.omega1) {
        for (size_t i = 0; i < sys.forms.size(); ++i) {
            const auto& ff = s.forms[i];
            Int prod = ff.sigma_part;
            for (auto& q : ff.rough_factors) {
                prod *= q;
                CHECK(q >= 10);  // every rough factor is at least z
                CHECK(is_prime(q));
            }
            CHECK(prod == abs(ff.value));
            CHECK(ff.sigma_squarefree);
            CHECK(ff.composite);
            // multiplicity 1 for rough factors
            for (size_t a = 0; a + 1 < ff.rough_factors.size(); ++a)
                CHECK(ff.rough_factors[a] != ff.rough_factors[a + 1]);
        }
    }
}

TEST_CASE("count buckets: inequality #Omega1 >= #Omega - #prime - #square") {
    auto sys = make_system({{1, 0}, {1, 2}}, {2});
    auto out = sieve::sift_omega(sys, 20000, 40);
    sieve::refine_omega1(out);
    CHECK(out.count_omega1 <= out.count_omega);
    // unit values are excluded from Omega_1 without being prime or square;
    // they are tallied separately (none survive this system: 3 | L_2(1))
    CHECK(out.count_omega1 + out.count_prime + out.count_square + out.count_unit >=
          out.count_omega);
    CHECK(out.count_unit == 0);
    CHECK(out.count_undecided == 0);

    // a system where the unit value n = 1 does survive sifting
    auto sys1 = make_system({{1, 0}}, {2});
    auto out1 = sieve::sift_omega(sys1, 16, 3);
    sieve::refine_omega1(out1);
    CHECK(out1.count_unit == 1);
    for (auto& s : out1.omega1) CHECK(s.n != 1);
}

TEST_CASE("count_omega_star: pi(100) for the trivial system") {
    auto sys = make_system({{1, 0}}, {});
    CHECK(sieve::count_omega_star(sys, 100, 2, 0) == 25);
}

TEST_CASE("count_omega_star: twin-style system vs brute force") {
    auto sys = make_system({{1, 0}, {1, 2}}, {2});
    uint64_t mine = sieve::count_omega_star(sys, 10000, 10, 1);
    // brute force: n odd-sieved for {3,5,7} on L1=n, and n+2 prime
    uint64_t ref = 0;
    for (uint64_t n = 1; n <= 10000; ++n) {
        bool rough = n % 3 != 0 && n % 5 != 0 && n % 7 != 0;
        if (rough && is_prime_u64(n + 2)) ++ref;
    }
    CHECK(mine == ref);
}

TEST_CASE("mertens products") {
    auto sys = make_system({{1, 0}}, {});
    // W_1(10) = (1/2)(2/3)(4/5)(6/7) = 8/35
    auto w = sieve::mertens_w(sys, 10, 1, false);
    Flt expect = Flt(8.0) / Flt(35.0);
    CHECK(std::abs(mpf_get_d(Flt(w - expect).get_mpf_t())) < 1e-30);
    // empty product when Sigma swallows everything
    auto sys2 = make_system({{1, 0}}, {2, 3, 5, 7});
    CHECK(mpf_get_d(sieve::mertens_w(sys2, 10, 1, false).get_mpf_t()) == 1.0);
    // monotone in z
    auto wa = sieve::mertens_w(sys, 50, 2, false);
    auto wb = sieve::mertens_w(sys, 100, 2, false);
    CHECK(mpf_get_d(Flt(wb - wa).get_mpf_t()) <= 0.0);
}

TEST_CASE("nonsquarefree bound: plug-in value and monotonicity") {
    auto sys = make_system({{1, 0}}, {});
    double b = sieve::nonsquarefree_bound(sys, 100, 10);
    CHECK(b == doctest::Approx(101.0 / 9.0 + std::sqrt(101.0)).epsilon(1e-12));
    CHECK(sieve::nonsquarefree_bound(sys, 100, 20) < b);
    // actual count below the bound at x = 1e4, z = 50
    auto out = sieve::sift_omega(sys, 10000, 50);
    sieve::refine_omega1(out);
    CHECK((double)out.count_square <= sieve::nonsquarefree_bound(sys, 10000, 50));
    // brute-force count of n <= 1e4 divisible by p^2 for some p >= 50
    uint64_t ref = 0;
    for (uint64_t n : out.sifted) {
        auto f = oracles::trial_factor(n);
        bool bad = false;
        for (auto& [p, e] : f) bad |= p >= 50 && e >= 2;
        if (bad) ++ref;
    }
    CHECK(out.count_square == ref);
}

TEST_CASE("avoid filter: identity and total predicates") {
    auto sys = make_system({{1, 0}}, {2});
    auto out = sieve::sift_omega(sys, 2000, 10);
    sieve::refine_omega1(out);
    auto none = sieve::avoid_prime_set(out, [](const Int&) { return false; });
    CHECK(none.retained.size() == out.omega1.size());
    CHECK(none.retained_fraction == 1.0);
    auto all = sieve::avoid_prime_set(out, [](const Int&) { return true; });
    CHECK(all.retained.empty());
}

TEST_CASE("avoid filter keeps at least half at desk scale") {
    // Delta, k=1, L(n) = n, eps = 0.2: drop primes with |lambda(p)| <= 0.2
    auto table = forms::build_delta_table(100000);
    auto sys = make_system({{1, 0}}, {2});
    uint64_t x = 100000;
    uint64_t z = (uint64_t)std::pow((double)x, 0.1);
    auto out = sieve::sift_omega(sys, x, std::max<uint64_t>(z, 2));
    sieve::refine_omega1(out);
    auto res = sieve::avoid_prime_set(out, [&](const Int& p) {
        uint64_t pu = to_u64(p);
        if (pu > table.n_max()) return false;
        const Int& ap = table.at(pu);
        // |lambda(p)| <= 1/5  <=>  25 a_p^2 <= p^11
        return 25 * ap * ap <= pow_ui(pu, 11);
    });
    CHECK(res.retained_fraction >= 0.5);
}

TEST_CASE("survivor dump is one JSON object per line") {
    auto sys = make_system({{1, 0}}, {2});
    auto out = sieve::sift_omega(sys, 100, 5);
    sieve::refine_omega1(out);
    std::ostringstream ss;
    sieve::dump_survivors(out, ss);
    std::string line;
    size_t lines = 0;
    std::istringstream in(ss.str());
    while (std::getline(in, line)) {
        ++lines;
        CHECK(line.front() == '{');
        CHECK(line.find("\"n\"") != std::string::npos);
        CHECK(line.find("rough_factors") != std::string::npos);
    }
    CHECK(lines == out.omega1.size());
}

TEST_CASE("sift rejects invalid systems") {
    auto sys = make_system({{2, 4}}, {2});  // gcd(a,b) = 2
    CHECK_THROWS_AS(sieve::sift_omega(sys, 100, 5), std::invalid_argument);
    auto sys2 = make_system({{3, 1}}, {2});  // 3 outside Sigma divides a_1
    CHECK_THROWS_AS(sieve::sift_omega(sys2, 100, 5), std::invalid_argument);
}
