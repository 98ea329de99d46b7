#pragma once

namespace levyshe {

// Regularized incomplete gamma functions, P(s,x) + Q(s,x) = 1.
double gamma_p(double s, double x);
double gamma_q(double s, double x);

// Unregularized upper incomplete gamma Γ(s,x) = ∫_x^∞ t^{s-1} e^{-t} dt.
double gamma_upper(double s, double x);

// Exponentially scaled upper gamma  e^x Γ(s,x).  Stable for large x where
// Γ(s,x) underflows; used for tail integrands of the form e^{γv} Γ(s, γv).
double gamma_upper_scaled(double s, double x);

// Euler beta function B(a,b).
double beta_function(double a, double b);

// Survival function of the chi-square distribution with k dof.
double chi_square_sf(double k, double x);

}  // namespace levyshe
