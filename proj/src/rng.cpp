#include "levyshe/rng.hpp"

#include <cmath>

#include "levyshe/errors.hpp"

namespace levyshe {

namespace {

// Hörmann's transformed rejection (PTRD); exact for mean >= 10.
std::uint64_t poisson_ptrd(Rng& rng, double mu) {
    const double smu = std::sqrt(mu);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);
    for (;;) {
        double u = rng.uniform01() - 0.5;
        double v = rng.uniform_pos();
        double us = 0.5 - std::fabs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        double k = kf;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = k * log_mu - mu - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
    }
}

}  // namespace

std::uint64_t Rng::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw Error(ErrorCode::InfiniteIntensity, "poisson: mean must be finite and nonnegative");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Knuth product method
        const double limit = std::exp(-mean);
        double prod = uniform_pos();
        std::uint64_t k = 0;
        while (prod > limit) {
            prod *= uniform_pos();
            ++k;
        }
        return k;
    }
    return poisson_ptrd(*this, mean);
}

}  // namespace levyshe
