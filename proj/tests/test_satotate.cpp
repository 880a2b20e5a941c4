#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hord/forms.hpp"
#include "hord/satotate.hpp"
#include "oracles.hpp"

using namespace hord;

TEST_CASE("CDF endpoints and symmetry") {
    CHECK(satotate::sato_tate_cdf(-2.0) == 0.0);
    CHECK(satotate::sato_tate_cdf(2.0) == 1.0);
    CHECK(satotate::sato_tate_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    for (double t : {0.3, 0.9, 1.5, 1.99})
        CHECK(satotate::sato_tate_cdf(t) + satotate::sato_tate_cdf(-t) ==
              doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(satotate::sato_tate_cdf(2.5), std::domain_error);
}

TEST_CASE("CDF matches adaptive quadrature of the density") {
    for (double t : {-1.7, -1.0, -0.25, 0.0, 0.2, 1.0, 1.9}) {
        double quad = oracles::st_measure_quadrature(-2.0, t);
        CHECK(satotate::sato_tate_cdf(t) == doctest::Approx(quad).epsilon(1e-10));
    }
    // F(1) - F(-1) against quadrature over [-1, 1]
    double mid = oracles::st_measure_quadrature(-1.0, 1.0);
    CHECK(satotate::sato_tate_cdf(1.0) - satotate::sato_tate_cdf(-1.0) ==
          doctest::Approx(mid).epsilon(1e-10));
}

TEST_CASE("KS of a single sample at lambda = 0 is 1/2") {
    satotate::AngleSample s;
    s.thetas = {std::acos(0.0)};
    CHECK(satotate::empirical_discrepancy(s) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("KS of exact quantile samples is at most 1/(2n) + ulp") {
    // thetas chosen so lambda_i is the ST quantile at (i - 1/2) / n
    const size_t n = 200;
    std::vector<double> lambdas(n);
    for (size_t i = 0; i < n; ++i) {
        double target = ((double)i + 0.5) / (double)n;
        double lo = -2, hi = 2;
        for (int it = 0; it < 80; ++it) {
            double mid = (lo + hi) / 2;
            (satotate::sato_tate_cdf(mid) < target ? lo : hi) = mid;
        }
        lambdas[i] = (lo + hi) / 2;
    }
    satotate::AngleSample s;
    for (double l : lambdas) s.thetas.push_back(std::acos(l / 2.0));
    std::sort(s.thetas.begin(), s.thetas.end());
    CHECK(satotate::empirical_discrepancy(s) <= 0.5 / n + 1e-9);
}

TEST_CASE("empirical CDF matches a histogram construction on the same data") {
    auto table = forms::build_delta_table(10000);
    auto sample = satotate::sample_angles(table, 10000);
    auto hist = satotate::histogram(sample, 16);
    CHECK(hist.total == sample.thetas.size());
    // cumulative histogram equals the empirical CDF at bin edges
    uint64_t cum = 0;
    std::vector<double> lambdas;
    for (double th : sample.thetas) lambdas.push_back(2.0 * std::cos(th));
    std::sort(lambdas.begin(), lambdas.end());
    for (unsigned b = 0; b < 16; ++b) {
        cum += hist.bins[b];
        double edge = -2.0 + 4.0 * (b + 1) / 16.0;
        auto below = std::upper_bound(lambdas.begin(), lambdas.end(),
                                      std::nextafter(edge, -3.0)) -
                     lambdas.begin();
        // bins are [lo, hi): everything strictly below the edge is cumulated
        CHECK((uint64_t)below <= cum + 1);
        CHECK(cum <= (uint64_t)below + 1);
    }
}

TEST_CASE("angle sample: count and range") {
    auto table = forms::build_delta_table(1000);
    auto s = satotate::sample_angles(table, 1000);
    CHECK(s.thetas.size() == 168);  // pi(1000), no ramified primes at level 1
    for (double th : s.thetas) {
        CHECK(th >= 0.0);
        CHECK(th <= 3.14159265358979324);
    }
    CHECK(std::is_sorted(s.thetas.begin(), s.thetas.end()));
    CHECK(s.zero_pm2_count == 0);
}

TEST_CASE("discrepancy decreases from 1e4 to 1e5 for Delta") {
    auto table = forms::build_delta_table(100000);
    auto small = satotate::sample_angles(table, 10000);
    auto large = satotate::sample_angles(table, 100000);
    double ks_small = satotate::empirical_discrepancy(small);
    double ks_large = satotate::empirical_discrepancy(large);
    CHECK(ks_large < ks_small);
}

TEST_CASE("small lambda density: trivial and calibrated cases") {
    auto table = forms::build_delta_table(20000);
    // eps = 2 covers [-2, 2] entirely
    CHECK(satotate::small_lambda_density(table, 20000, Rat(2)) == 1.0);
    // exact counting matches a double-precision recount at eps = 0.2
    double d = satotate::small_lambda_density(table, 20000, Rat(1, 5));
    auto sample = satotate::sample_angles(table, 20000);
    uint64_t ref = 0;
    for (double th : sample.thetas)
        if (std::abs(2.0 * std::cos(th)) <= 0.2 + 1e-9) ++ref;
    CHECK(d == doctest::Approx((double)ref / sample.thetas.size()).epsilon(1e-3));
}

TEST_CASE("ST prediction F(eps) - F(-eps) <= eps on a grid") {
    for (double eps = 0.01; eps <= 0.5; eps += 0.01) {
        double pred = satotate::sato_tate_cdf(eps) - satotate::sato_tate_cdf(-eps);
        CHECK(pred <= eps);
    }
}

TEST_CASE("sampling is deterministic across worker counts") {
    auto table = forms::build_delta_table(30000);
    auto a = satotate::sample_angles(table, 30000, 1);
    auto b = satotate::sample_angles(table, 30000, 4);
    CHECK(a.thetas == b.thetas);
    CHECK(a.zero_pm2_count == b.zero_pm2_count);
}
