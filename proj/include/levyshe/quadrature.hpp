#pragma once

#include <functional>
#include <vector>

namespace levyshe {

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;       // interpreted relative to the running total when 0
    int max_segments = 4000;
    // interior points where the integrand has kinks/jumps; used as initial cuts
    std::vector<double> breakpoints;
};

// Adaptive Gauss-Kronrod (7-15) on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadOptions& opt = {});

// ∫_a^∞ f, by doubling slabs [a + 2^k, a + 2^{k+1}] until the slab mass is
// negligible against the running total twice in a row. Handles exponential
// and algebraic (integrable) tail decay alike.
double integrate_upper(const std::function<double(double)>& f, double a,
                       const QuadOptions& opt = {});

// ∫_0^b f with possible integrable blow-up or vanishing mass density at 0;
// geometric slabs [b 2^{-k-1}, b 2^{-k}] shrinking toward 0.
double integrate_to_zero(const std::function<double(double)>& f, double b,
                         const QuadOptions& opt = {});

}  // namespace levyshe
