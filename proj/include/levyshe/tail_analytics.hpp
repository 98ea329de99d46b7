#pragma once

#include <functional>
#include <string>
#include <vector>

#include "levyshe/levy_measure.hpp"

namespace levyshe {

enum class CurveKind { ExactQuadrature, ExactAlternate, Asymptotic, Empirical };

const char* curve_kind_name(CurveKind k);

struct TailCurve {
    std::vector<double> levels;                // strictly increasing, > 0
    std::vector<double> values;
    CurveKind kind = CurveKind::ExactQuadrature;
    std::vector<double> ci_halfwidth;          // per level; empty unless empirical
    std::string meta;                          // measure/params fingerprint etc.
};

// log-spaced level grid, `per_decade` points per decade (inclusive endpoints)
std::vector<double> log_levels(double lo, double hi, int per_decade = 40);

// ---------------------------------------------------------------------------
// Measure-form integrals shared by the evaluators.

// ∫_(lo,hi] F(z) λ(dz) on a finite range; atoms handled exactly, densities by
// adaptive panels with geometric refinement toward 0.
double integrate_measure(const LevyMeasureSpec& spec, const std::function<double(double)>& F,
                         double lo, double hi, double rel_tol = 1e-10,
                         const std::vector<double>& extra_breaks = {});

// ∫_0^x u^{p-1} λ̄(u) du, computed from the tail function only (independent of
// the closed-form truncated moments; the two are tied by integration by parts).
double tail_power_integral(const LevyMeasureSpec& spec, double p, double x,
                           double rel_tol = 1e-10);

// f(w) = ∫_(w,∞) (log(z/w))^{d/2} λ(dz); the log-moment kernel of the
// time-slice representation.
double log_tail_moment(const LevyMeasureSpec& spec, int d, double w);

// ---------------------------------------------------------------------------
// Tail of the measure of single-atom contributions at a fixed spatial point:
// the intensity of atoms (s,y,ζ) with g(s,y)ζ > r. Governs P(Y(t,x) > r).

double contribution_tail(const LevyMeasureSpec& spec, const ModelParams& params, double r);
// same, restricted to marks ζ ≤ z_max (used for truncation-error bounds)
double contribution_tail_below(const LevyMeasureSpec& spec, const ModelParams& params, double r,
                               double z_max);
// independent evaluation through the time-slice double integral
double contribution_tail_alternate(const LevyMeasureSpec& spec, const ModelParams& params,
                                   double r);
// regime-classified asymptotic prediction
double contribution_tail_asymptotic(const LevyMeasureSpec& spec, const ModelParams& params,
                                    double r);

// ---------------------------------------------------------------------------
// Kernel-peak intensity: atoms whose spatial maximum (2πκ(t-τ))^{-d/2} ζ
// exceeds r. Governs the local functionals over bounded regions.

// (Leb×λ) mass of the peak region, defined for every r > 0 (single fast form)
double kernel_peak_mass(const LevyMeasureSpec& spec, const ModelParams& params, double r);
// the tail itself; evaluates three equivalent expressions and cross-checks
// them to 1e-8 relative (d = 1 requires r >= 1)
double kernel_peak_tail(const LevyMeasureSpec& spec, const ModelParams& params, double r);
double kernel_peak_tail_asymptotic(const LevyMeasureSpec& spec, const ModelParams& params,
                                   double r);

// ---------------------------------------------------------------------------
// Exact supremum laws (void probabilities of the atom measure).

// P(max single-atom contribution at a point <= r) = exp(-contribution_tail(r))
double max_contribution_cdf(const LevyMeasureSpec& spec, const ModelParams& params, double r);
// P(max kernel peak over a region of closure volume vol_A > r)
double region_peak_tailprob(const LevyMeasureSpec& spec, const ModelParams& params, double vol_A,
                            double r);

// ---------------------------------------------------------------------------
// Tail for the supremum over a hyperrectangle A: intensity of atoms whose
// peak contribution anywhere in A exceeds r (kernel evaluated at dist(y,A)).

double region_sup_tail(const LevyMeasureSpec& spec, const ModelParams& params, const Box& A,
                       double r, double rel_tol = 1e-6);
// the heavy-tail regime limit constant lim η̄_A(r)/λ̄(r) via separate quadrature
double region_sup_heavy_constant(const LevyMeasureSpec& spec, const ModelParams& params,
                                 const Box& A);

// ---------------------------------------------------------------------------
// Tail of contributions by atoms within spatial distance 1/2 of the point
// (one lattice cell); governs maxima over the integer lattice.

struct UnitCellTail {
    double value;        // exact quadrature
    double lower_bound;  // c_M r^{-1-2/d} M(c2_M r) + c_L λ̄(c2_L r)
    double upper_bound;  // C_M r^{-1-2/d} M(C2_M r) + C_L λ̄(C2_L r)
};

UnitCellTail unit_cell_tail(const LevyMeasureSpec& spec, const ModelParams& params, double r);

// ---------------------------------------------------------------------------
// Extended-regular-variation diagnostic: samples of the logarithmic slope
// ξ(v) = d log tail / d log v offset lie in a theorem-backed bracket.

enum class TailFamily { Contribution, KernelPeak };

struct ErvBracket {
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    std::vector<double> v_grid;
    std::vector<double> xi_samples;
    double xi_limit = 0.0;  // value at the largest grid point (RV index estimate)
};

ErvBracket erv_diagnostic(TailFamily which, const LevyMeasureSpec& spec,
                          const ModelParams& params, const std::vector<double>& v_grid);

// ---------------------------------------------------------------------------
// Karamata integrals of the slowly varying part (quadrature; closed form for
// the built-in logarithmic family).

double karamata_L(const LevyMeasureSpec& spec, double r);             // ∫_1^r ℓ(u)/u du
double karamata_L0(const LevyMeasureSpec& spec, int d, double r);     // ∫_1^∞ ℓ(ry)/y (log y)^{d/2-1} dy

// exclusion-bound helper: intensity of atoms with |y| > R contributing > r
// at the origin (ball complement of the contribution measure)
double contribution_tail_outside(const LevyMeasureSpec& spec, const ModelParams& params, double r,
                                 double R, double rel_tol = 1e-6);

}  // namespace levyshe
