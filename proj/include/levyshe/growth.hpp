#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "levyshe/levy_measure.hpp"

namespace levyshe {

// Nondecreasing rate function. The built-in form is f(r) = r^a (log r)^b for
// r >= 2; analytic verdicts are available for it whenever the tail regime of
// the measure is classified.
struct RateFunction {
    double a = 0.0;
    double b = 0.0;
    std::function<double(double)> custom;  // overrides (a,b) when set

    static RateFunction power_log(double a, double b);
    static RateFunction from_callable(std::function<double(double)> f);
    bool is_power_log() const { return !custom; }
    double operator()(double r) const;
    std::string describe() const;
};

enum class Verdict { Converges, Diverges, Indeterminate };
const char* verdict_name(Verdict v);

enum class GrowthTail { KernelPeak, Contribution, UnitCell };
GrowthTail growth_tail_from_name(const std::string& name);
const char* growth_tail_name(GrowthTail w);

struct IntegralTestResult {
    Verdict verdict = Verdict::Indeterminate;
    bool analytic = false;               // exponent comparison vs slope heuristic
    std::vector<double> partial_R;       // 1e2, 1e4, 1e6
    std::vector<double> partial_values;  // ∫_2^R r^{d-1} tail(f(r)) dr
    double loglog_slope = 0.0;           // integrand slope estimate at large r
    std::string note;
};

// Convergence/divergence of ∫ r^{d-1} tail(f(r)) dr, deciding the a.s.
// normalized-supremum dichotomy for the matching functional.
IntegralTestResult integral_test(GrowthTail which, const LevyMeasureSpec& spec,
                                 const ModelParams& params, const RateFunction& f);

enum class EventKind { VEvent, LargeJump, LatticePeak };
EventKind event_kind_from_name(const std::string& name);
const char* event_kind_name(EventKind k);

struct AnnulusRow {
    std::uint64_t n;
    double mean;          // Poisson/Binomial event intensity for the annulus
    std::uint64_t count;  // draws in the first run
};

struct PeakEventReport {
    EventKind kind = EventKind::VEvent;
    double K = 1.0;
    double delta = 0.0;
    std::uint64_t n_start = 2, n_max = 10;
    std::vector<AnnulusRow> trajectory;        // first run, one row per annulus
    std::vector<std::uint64_t> run_totals;     // annuli with >= 1 event, per run
    std::vector<std::uint64_t> run_last_n;     // largest annulus index with an event
    double expected_total = 0.0;               // Σ_n (1 - e^{-mean_n})
    double expected_total_var = 0.0;           // Σ_n p_n (1 - p_n)
    std::vector<std::pair<std::uint64_t, double>> cum_expected;  // Borel-Cantelli diagnostic
};

// Exact Poisson/Bernoulli thinning of the peak events over annuli
// B(n, n+1); distributionally exact, no field simulation involved.
PeakEventReport peak_events(EventKind kind, const LevyMeasureSpec& spec,
                            const ModelParams& params, const RateFunction& f, double K,
                            std::uint64_t n_max, double delta, std::uint64_t seed,
                            std::uint64_t runs = 1);

struct GrowthReport {
    IntegralTestResult integral;
    // for the lattice question both one-sided tests are reported; they can
    // genuinely disagree when the cell tail is lighter than the full tail
    std::optional<IntegralTestResult> integral_upper;  // contribution-tail test
    std::optional<IntegralTestResult> integral_lower;  // unit-cell-tail test
    std::optional<PeakEventReport> events;
};

}  // namespace levyshe
