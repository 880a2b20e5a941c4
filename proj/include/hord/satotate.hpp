#pragma once

#include <cstdint>
#include <vector>

#include "hord/forms.hpp"

namespace hord::satotate {

struct AngleSample {
    forms::FormDescriptor form;
    uint64_t x_max = 0;
    std::vector<double> thetas;   // sorted ascending, one per unramified prime <= x_max
    uint64_t zero_pm2_count = 0;  // primes with lambda in {0, +-2}, exact test
};

AngleSample sample_angles(const forms::CoefficientTable& table, uint64_t x_max,
                          unsigned workers = 1);

// Sato-Tate CDF F(t) = 1/2 + (t/2 sqrt(1-t^2/4) + arcsin(t/2)) / pi on [-2,2].
double sato_tate_cdf(double t);

// Kolmogorov-Smirnov distance between the empirical distribution of
// lambda(p) = 2 cos(theta_p) and the Sato-Tate CDF.
double empirical_discrepancy(const AngleSample& sample);

// Fraction of sampled primes with |lambda_f(p)| <= eps (exact integer test).
double small_lambda_density(const forms::CoefficientTable& table, uint64_t x_max,
                            const Rat& eps);

struct Histogram {
    std::vector<uint64_t> bins;  // lambda in [-2, 2], uniform bins
    uint64_t total = 0;
};

Histogram histogram(const AngleSample& sample, unsigned bins);

}  // namespace hord::satotate
