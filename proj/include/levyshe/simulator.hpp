#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levyshe/levy_measure.hpp"
#include "levyshe/tail_analytics.hpp"

namespace levyshe {

// Regular lattice of evaluation points over a box (d <= 3).
struct GridSpec {
    int d = 1;
    std::array<double, 3> lo{{0.0, 0.0, 0.0}};
    std::array<double, 3> hi{{0.0, 0.0, 0.0}};
    std::array<int, 3> n{{1, 1, 1}};  // points per dimension (1 = single point)

    static GridSpec single_point(int d, std::array<double, 3> x = {{0, 0, 0}});
    std::size_t size() const;
    std::array<double, 3> point(std::size_t flat_index) const;
};

struct FieldSample {
    GridSpec grid;
    std::vector<double> values;     // row-major over the lattice
    double bias_bound = 0.0;        // omitted small jumps + spatial truncation
    double padding = 0.0;
    double eps = 0.0;
    std::size_t n_atoms = 0;
    bool sup_queries_valid = true;  // false when local suprema are a.s. infinite
    std::uint64_t seed = 0;
};

// Mild-solution field on a grid from the Poisson-atom representation. For
// summable jumps this is the plain atom sum; for d = 1 with non-summable small
// jumps the simulated atoms are compensated and the omitted compensated part
// contributes only to bias_bound. eps/padding < 0 request automatic choices.
FieldSample simulate_field(const LevyMeasureSpec& spec, const ModelParams& params,
                           const GridSpec& grid, double eps, double padding, std::uint64_t seed);

// Largest single-atom contribution at the origin. The sampler fixes a box and
// cutoff once so that the probability that the argmax atom was excluded is
// below `exclusion_prob` uniformly over levels >= r_min.
class MaxContributionSampler {
  public:
    MaxContributionSampler(const LevyMeasureSpec& spec, const ModelParams& params, double r_min,
                           double exclusion_prob = 1e-6, double eps = -1.0, double padding = -1.0);
    double sample(std::uint64_t seed) const;
    double padding() const { return padding_; }
    double eps() const { return eps_; }
    double exclusion_bound() const { return exclusion_bound_; }

  private:
    const LevyMeasureSpec& spec_;
    ModelParams params_;
    double eps_;
    double padding_;
    double exclusion_bound_;
};

double simulate_max_contribution(const LevyMeasureSpec& spec, const ModelParams& params,
                                 double eps, double padding, std::uint64_t seed,
                                 double r_min = 1e-3);

// Local functionals over a region A: thresholded kernel-peak sum (d = 1), the
// plain sum (d >= 2), and the maximal kernel peak. Atom-exact: no padding.
struct RegionFunctionals {
    double sum = 0.0;   // X_A
    double peak = 0.0;  // max kernel peak over atoms in the closure of A
    std::size_t n_atoms = 0;
    double bias_bound = 0.0;  // only nonzero with an activity cutoff (d = 1)
};

RegionFunctionals simulate_region_functionals(const LevyMeasureSpec& spec,
                                              const ModelParams& params, const Box& A,
                                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Monte Carlo tail estimation.

enum class Estimand { PointValue, MaxContribution, RegionSum, RegionPeak, RegionSupGrid };

Estimand estimand_from_name(const std::string& name);
const char* estimand_name(Estimand e);

struct McOptions {
    std::size_t n_replicates = 1000;
    std::uint64_t seed = 1;
    Box region;                 // for the region estimands
    int grid_n = 33;            // per-dimension resolution for the grid supremum
    double eps = -1.0;          // small-jump cutoff (<0: automatic)
    double padding = -1.0;      // spatial padding (<0: automatic)
    int threads = 0;            // 0: hardware concurrency
    bool keep_values = false;   // retain per-replicate values (streamable output)
};

struct McResult {
    TailCurve curve;                  // empirical exceedance frequencies + Wilson CIs
    std::size_t n_replicates = 0;
    double refinement_gap_mean = 0.0; // grid-sup estimand: mean coarse->fine gap
    std::vector<double> values;       // per-replicate values if requested
};

McResult mc_tail(Estimand estimand, const LevyMeasureSpec& spec, const ModelParams& params,
                 const std::vector<double>& levels, const McOptions& opt);

// Wilson 95% interval half-width for k successes out of n.
double wilson_halfwidth(std::uint64_t k, std::uint64_t n);
double wilson_center(std::uint64_t k, std::uint64_t n);

}  // namespace levyshe
