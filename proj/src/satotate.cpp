#include "hord/satotate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hord/parallel.hpp"
#include "hord/primes.hpp"

namespace hord::satotate {

AngleSample sample_angles(const forms::CoefficientTable& table, uint64_t x_max,
                          unsigned workers) {
    if (x_max > table.n_max())
        throw std::out_of_range("sample_angles: x_max exceeds the table bound");
    AngleSample s;
    s.form = table.form();
    s.x_max = x_max;
    const auto& primes = cached_primes(x_max + 1);
    const unsigned weight = table.form().weight;
    const unsigned level = table.form().level;

    std::vector<double> thetas(primes.size(), -1.0);
    std::vector<uint8_t> boundary(primes.size(), 0);
    const uint64_t block = 4096;
    const uint64_t n_blocks = (primes.size() + block - 1) / block;
    parallel_blocks(n_blocks, workers, [&](uint64_t blk) {
        const size_t lo = blk * block;
        const size_t hi = std::min(primes.size(), (size_t)(lo + block));
        for (size_t t = lo; t < hi; ++t) {
            uint32_t p = primes[t];
            if (level % p == 0) continue;  // ramified primes are skipped
            const Int& ap = table.at(p);
            thetas[t] = forms::theta_angle(s.form, p, ap);
            // exact boundary test: a_p = 0 or a_p^2 = 4 p^{k-1}
            if (sgn(ap) == 0 || ap * ap == 4 * pow_ui(p, weight - 1)) boundary[t] = 1;
        }
    });
    s.thetas.reserve(primes.size());
    for (size_t t = 0; t < primes.size(); ++t) {
        if (thetas[t] >= 0.0) s.thetas.push_back(thetas[t]);
        if (boundary[t]) ++s.zero_pm2_count;
    }
    std::sort(s.thetas.begin(), s.thetas.end());
    return s;
}

double sato_tate_cdf(double t) {
    if (t < -2.0 || t > 2.0) throw std::domain_error("sato_tate_cdf: t outside [-2, 2]");
    const double pi = std::numbers::pi;
    double inner = 1.0 - t * t / 4.0;
    if (inner < 0) inner = 0;
    double f = 0.5 + ((t / 2.0) * std::sqrt(inner) + std::asin(t / 2.0)) / pi;
    return std::clamp(f, 0.0, 1.0);
}

double empirical_discrepancy(const AngleSample& sample) {
    if (sample.thetas.empty())
        throw std::invalid_argument("empirical_discrepancy: empty sample");
    // lambda = 2 cos theta is decreasing in theta; traverse thetas in reverse
    // to get lambdas ascending
    const size_t n = sample.thetas.size();
    double sup = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double lambda = 2.0 * std::cos(sample.thetas[n - 1 - i]);
        double f = sato_tate_cdf(std::clamp(lambda, -2.0, 2.0));
        sup = std::max(sup, std::abs(f - (double)i / (double)n));
        sup = std::max(sup, std::abs((double)(i + 1) / (double)n - f));
    }
    return sup;
}

double small_lambda_density(const forms::CoefficientTable& table, uint64_t x_max,
                            const Rat& eps) {
    if (x_max > table.n_max())
        throw std::out_of_range("small_lambda_density: x_max exceeds the table bound");
    const auto& primes = cached_primes(x_max + 1);
    const unsigned weight = table.form().weight;
    const unsigned level = table.form().level;
    uint64_t total = 0, small = 0;
    const Int num = eps.get_num(), den = eps.get_den();
    for (uint32_t p : primes) {
        if (level % p == 0) continue;
        ++total;
        const Int& ap = table.at(p);
        // |a_p| / p^{(k-1)/2} <= eps  <=>  a_p^2 den^2 <= num^2 p^{k-1}
        if (ap * ap * den * den <= num * num * pow_ui(p, weight - 1)) ++small;
    }
    if (total == 0) throw std::invalid_argument("small_lambda_density: no primes sampled");
    return (double)small / (double)total;
}

Histogram histogram(const AngleSample& sample, unsigned bins) {
    if (bins == 0) throw std::invalid_argument("histogram: bins must be positive");
    Histogram h;
    h.bins.assign(bins, 0);
    for (double theta : sample.thetas) {
        double lambda = 2.0 * std::cos(theta);
        double u = (lambda + 2.0) / 4.0;
        auto idx = (size_t)std::min((double)bins - 1.0, std::max(0.0, u * bins));
        ++h.bins[idx];
        ++h.total;
    }
    return h;
}

}  // namespace hord::satotate
