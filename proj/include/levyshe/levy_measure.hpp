#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "levyshe/rng.hpp"

namespace levyshe {

// Jump-measure families on (0,∞). Tails λ̄(r) = λ((r,∞)) are right-continuous
// and nonincreasing with λ̄(∞) = 0.
enum class FamilyKind { PointMass, ParetoTail, StableLike, LogTail, TruncatedExp, Custom };

struct CustomMeasure {
    std::function<double(double)> tail;     // λ̄(r), r > 0
    std::function<double(double)> density;  // dλ/dz; empty if purely atomic
    std::function<double(Rng&, double)> sample_above;  // draw ζ | ζ > eps
    double support_lo = 0.0;
    // Declared indices; divergence decisions cannot be certified by quadrature,
    // so the caller states them and the library records them as assumptions.
    double tail_index = 0.0;   // λ̄(r) ≍ ℓ(r) r^{-tail_index} at ∞ (0 = slowly varying)
    double small_index = 0.0;  // λ̄(ε) ≍ ε^{-small_index} at 0 (0 = finite activity)
};

class LevyMeasureSpec {
  public:
    static LevyMeasureSpec point_mass(double z0, double mass);
    static LevyMeasureSpec pareto(double alpha, double scale = 1.0);
    static LevyMeasureSpec stable_like(double alpha, double c = 1.0);
    static LevyMeasureSpec log_tail(double beta);
    static LevyMeasureSpec truncated_exp(double rate);
    static LevyMeasureSpec custom(CustomMeasure m);

    FamilyKind kind() const { return kind_; }
    double param(const std::string& name) const;  // family parameters by name
    const CustomMeasure& custom_measure() const { return custom_; }

    // λ̄(r) for r > 0
    double tail(double r) const;
    // density dλ/dz where absolutely continuous (0 elsewhere)
    double density(double z) const;
    bool has_density() const;
    // atomic part as (location, mass) pairs
    const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }

    double support_lo() const { return support_lo_; }
    // z-values where tails/densities have kinks; quadrature cut points
    std::vector<double> breakpoints() const;

    // M_γ(x) = ∫_(0,x] z^γ λ(dz); throws Divergent when infinite
    double truncated_moment(double gamma, double x) const;
    // m_γ(λ) ∈ [0,∞]; +∞ returned as a value
    double total_moment(double gamma) const;
    // ∫_(a,b] z^γ λ(dz); finite for 0 < a <= b even when M_γ diverges at 0
    double partial_moment(double gamma, double a, double b) const;

    // λ̄(max(eps,0)) with +∞ for infinite-activity families at eps = 0
    double activity(double eps) const;
    // one jump conditioned on ζ > eps (inverse CDF per family)
    double sample_one(Rng& rng, double eps) const;

    // RV index of λ̄ at ∞ (+∞ for super-polynomial decay)
    double tail_index() const;
    // small-jump activity index (λ̄(ε) ≍ ε^{-idx})
    double small_index() const;

    std::string describe() const;

    // optional cache of total moments for a requested exponent set
    void cache_moments(const std::vector<double>& gammas);
    const std::map<double, double>& cached_moments() const { return cached_moments_; }

  private:
    LevyMeasureSpec() = default;
    FamilyKind kind_ = FamilyKind::PointMass;
    double p1_ = 0.0, p2_ = 0.0;  // family parameters (documented per factory)
    double support_lo_ = 0.0;
    std::vector<std::pair<double, double>> atoms_;
    CustomMeasure custom_;
    std::map<double, double> cached_moments_;
};

struct ModelParams {
    int d = 1;          // spatial dimension
    double kappa = 1.0; // diffusivity
    double t = 1.0;     // fixed time horizon
    // Drift. When the small jumps are summable the convention is
    // m = ∫_(0,1] z λ(dz) and the field is the plain Poisson sum; otherwise m
    // is free (default 0) and enters as an additive m·t.
    std::optional<double> drift;

    double D() const;                       // (2πκt)^{d/2}
    double heat_kernel(double s, double r2) const;  // g(s,y) with r2 = |y|²
    void validate() const;
};

struct Box {
    int d = 1;
    std::array<double, 3> lo{{0.0, 0.0, 0.0}};
    std::array<double, 3> hi{{1.0, 1.0, 1.0}};
    double volume() const;
    static Box centered(int d, double half_width);
};

struct ConditionReport {
    bool log_moment_finite = false;          // ∫_(1,∞) (log z)^{d/2} λ(dz) < ∞
    bool mild_solution_exists = false;       // log-moment + dimension-specific small-jump branch
    bool uncompensated_integral_exists = false;
    bool local_sup_finite = false;           // ∫_(0,1) z^{2/d} |log z|^{1{d=2}} λ(dz) < ∞
    bool q_condition = false;                // ∃ q ∈ (0,2): M_q(1) < ∞
    std::optional<double> q_witness;
    bool sup_infinite = false;               // ∫_(0,1] z^{2/d} λ(dz) = ∞
    bool estimated = false;                  // decisions rest on declared indices / quadrature
    std::vector<std::string> failures;       // human-readable description per failed flag
};

ConditionReport check_conditions(const LevyMeasureSpec& spec, const ModelParams& params);

struct Atom {
    double tau;                   // birth time in [0,t]
    std::array<double, 3> pos{};  // spatial location in the box
    double mark;                  // jump size ζ > eps
};

struct PointCloud {
    std::vector<Atom> atoms;
    double eps = 0.0;
    Box box;
    double t = 0.0;
    std::uint64_t seed = 0;
};

// Poisson cloud on [0,t] × box × (eps,∞) with intensity dt dx λ(dz);
// deterministic given the seed.
PointCloud sample_jumps(const LevyMeasureSpec& spec, const ModelParams& params, const Box& box,
                        double eps, std::uint64_t seed);

}  // namespace levyshe
