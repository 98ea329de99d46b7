#include "levyshe/growth.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "levyshe/errors.hpp"
#include "levyshe/quadrature.hpp"
#include "levyshe/rng.hpp"
#include "levyshe/tail_analytics.hpp"

namespace levyshe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct TailClass {
    bool ok = false;
    double theta = 0.0;    // tail(x) ≍ x^{-theta} (log x)^{-logexp}
    double logexp = 0.0;
};

// asymptotic order of the chosen tail, for analytic exponent comparison
TailClass classify_tail(GrowthTail which, const LevyMeasureSpec& spec, const ModelParams& params) {
    TailClass tc;
    const double d = params.d;
    const double p = which == GrowthTail::KernelPeak ? 2.0 / d : 1.0 + 2.0 / d;
    double m = spec.total_moment(p);
    if (std::isfinite(m)) {
        tc.ok = true;
        tc.theta = p;
        tc.logexp = 0.0;
        return tc;
    }
    double alpha = spec.tail_index();
    if (spec.kind() == FamilyKind::LogTail) {
        double beta = spec.param("beta");
        tc.ok = true;
        tc.theta = 0.0;
        // kernel-peak and unit-cell tails track the mark tail itself; the
        // point-contribution tail gains d/2 powers of log through its Karamata
        // transform
        tc.logexp = which == GrowthTail::Contribution ? beta - 0.5 * d : beta;
        return tc;
    }
    if (std::isfinite(alpha) && alpha > 0.0) {
        tc.ok = true;
        if (alpha < p - 1e-12) {
            tc.theta = alpha;
            tc.logexp = 0.0;
        } else if (std::fabs(alpha - p) <= 1e-12) {
            tc.theta = p;
            tc.logexp = -1.0;  // Karamata integral contributes one log factor
        } else {
            tc.ok = false;  // heavier moment regime should have caught this
        }
        return tc;
    }
    return tc;
}

double tail_value(GrowthTail which, const LevyMeasureSpec& spec, const ModelParams& params,
                  double level) {
    switch (which) {
        case GrowthTail::KernelPeak: return kernel_peak_mass(spec, params, level);
        case GrowthTail::Contribution: return contribution_tail(spec, params, level);
        case GrowthTail::UnitCell: {
            double lv = params.d == 1 ? std::max(level, 1.0 + 1e-9) : level;
            return unit_cell_tail(spec, params, lv).value;
        }
    }
    return 0.0;
}

void require_growth_conditions(GrowthTail which, const LevyMeasureSpec& spec,
                               const ModelParams& params, std::string* note) {
    ConditionReport rep = check_conditions(spec, params);
    if (which == GrowthTail::KernelPeak) {
        if (!rep.local_sup_finite)
            throw Error(ErrorCode::ConditionViolated,
                        "growth test: int_(0,1) z^{2/d} |log z|^{1{d=2}} lambda(dz) < inf required");
    } else {
        if (!rep.mild_solution_exists)
            throw Error(ErrorCode::ConditionViolated, "growth test: existence conditions required");
    }
    if (params.d == 1 && note) {
        std::ostringstream os;
        os << "d=1 small-jump moment condition (exists q in (0,2) with M_q(1) < inf): "
           << (rep.q_condition ? "holds" : "FAILS");
        if (rep.q_condition && rep.q_witness) os << ", witness q=" << *rep.q_witness;
        *note += os.str();
        if (!rep.q_condition)
            throw Error(ErrorCode::ConditionViolated,
                        "growth test: d=1 requires a q in (0,2) with M_q(1) < inf");
    }
}

}  // namespace

RateFunction RateFunction::power_log(double a, double b) {
    if (a < 0.0 || (a == 0.0 && b < 0.0))
        throw Error(ErrorCode::ConfigInvalid, "rate function must be nondecreasing");
    RateFunction f;
    f.a = a;
    f.b = b;
    return f;
}

RateFunction RateFunction::from_callable(std::function<double(double)> fn) {
    RateFunction f;
    f.custom = std::move(fn);
    return f;
}

double RateFunction::operator()(double r) const {
    if (custom) return custom(r);
    double rr = std::max(r, 2.0);
    return std::pow(rr, a) * std::pow(std::log(rr), b);
}

std::string RateFunction::describe() const {
    if (custom) return "custom";
    std::ostringstream os;
    os << "r^" << a << " (log r)^" << b;
    return os.str();
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Converges: return "CONVERGES";
        case Verdict::Diverges: return "DIVERGES";
        case Verdict::Indeterminate: return "INDETERMINATE";
    }
    return "?";
}

GrowthTail growth_tail_from_name(const std::string& name) {
    if (name == "tau" || name == "kernel_peak") return GrowthTail::KernelPeak;
    if (name == "eta" || name == "contribution") return GrowthTail::Contribution;
    if (name == "eta0" || name == "unit_cell") return GrowthTail::UnitCell;
    throw Error(ErrorCode::ConfigInvalid, "unknown growth tail '" + name + "'");
}

const char* growth_tail_name(GrowthTail w) {
    switch (w) {
        case GrowthTail::KernelPeak: return "kernel_peak";
        case GrowthTail::Contribution: return "contribution";
        case GrowthTail::UnitCell: return "unit_cell";
    }
    return "?";
}

IntegralTestResult integral_test(GrowthTail which, const LevyMeasureSpec& spec,
                                 const ModelParams& params, const RateFunction& f) {
    IntegralTestResult out;
    require_growth_conditions(which, spec, params, &out.note);
    const double d = params.d;

    if (f.is_power_log()) {
        TailClass tc = classify_tail(which, spec, params);
        if (tc.ok) {
            out.analytic = true;
            // integrand ~ r^{d-1-a·theta} (log r)^{-b·theta - logexp(+...)}
            double power = f.a * tc.theta;
            double logpow = f.b * tc.theta + tc.logexp;
            if (tc.theta == 0.0) {
                // slowly varying tail against a power-log rate: tail(f(r)) is a
                // negative power of log r, which never makes ∫ r^{d-1} ... dr converge
                out.verdict = Verdict::Diverges;
            } else if (power > d + 1e-12) {
                out.verdict = Verdict::Converges;
            } else if (power < d - 1e-12) {
                out.verdict = Verdict::Diverges;
            } else {
                out.verdict = logpow > 1.0 + 1e-12 ? Verdict::Converges : Verdict::Diverges;
            }
        }
    }

    // numeric partial integrals ∫_2^R r^{d-1} tail(f(r)) dr in log r
    QuadOptions qopt;
    qopt.rel_tol = 1e-7;
    auto integrand = [&](double x) {
        double r = std::exp(x);
        return std::pow(r, d) * tail_value(which, spec, params, f(r));
    };
    double running = 0.0;
    double last_x = std::log(2.0);
    for (double R : {1e2, 1e4, 1e6}) {
        double x = std::log(R);
        running += integrate(integrand, last_x, x, qopt);
        last_x = x;
        out.partial_R.push_back(R);
        out.partial_values.push_back(running);
    }
    // integrand log-log slope over the last decade
    double g1 = std::pow(1e5, d) * tail_value(which, spec, params, f(1e5)) / 1e5;
    double g2 = std::pow(1e6, d) * tail_value(which, spec, params, f(1e6)) / 1e6;
    out.loglog_slope = std::log(g2 / g1) / std::log(10.0);

    if (!out.analytic) {
        if (out.loglog_slope < -1.1)
            out.verdict = Verdict::Converges;
        else if (out.loglog_slope > -0.9)
            out.verdict = Verdict::Diverges;
        else
            out.verdict = Verdict::Indeterminate;
    }
    return out;
}

EventKind event_kind_from_name(const std::string& name) {
    if (name == "v" || name == "v_event") return EventKind::VEvent;
    if (name == "largejump" || name == "large_jump") return EventKind::LargeJump;
    if (name == "lattice" || name == "lattice_peak") return EventKind::LatticePeak;
    throw Error(ErrorCode::ConfigInvalid, "unknown event kind '" + name + "'");
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::VEvent: return "v_event";
        case EventKind::LargeJump: return "large_jump";
        case EventKind::LatticePeak: return "lattice_peak";
    }
    return "?";
}

namespace {

// number of integer lattice points y with n < |y| <= n+1
std::uint64_t lattice_annulus_count(int d, std::uint64_t n) {
    if (d == 1) return 2;  // y = ±(n+1)
    double lo2 = static_cast<double>(n) * n;
    double hi2 = (static_cast<double>(n) + 1.0) * (n + 1.0);
    std::uint64_t count = 0;
    long nmax = static_cast<long>(n) + 1;
    if (d == 2) {
        for (long x = -nmax; x <= nmax; ++x) {
            double rem_hi = hi2 - static_cast<double>(x) * x;
            if (rem_hi < 0.0) continue;
            long ymax = static_cast<long>(std::floor(std::sqrt(rem_hi)));
            for (long y = -ymax; y <= ymax; ++y) {
                double r2 = static_cast<double>(x) * x + static_cast<double>(y) * y;
                if (r2 > lo2 && r2 <= hi2) ++count;
            }
        }
        return count;
    }
    for (long x = -nmax; x <= nmax; ++x)
        for (long y = -nmax; y <= nmax; ++y) {
            double part = static_cast<double>(x) * x + static_cast<double>(y) * y;
            if (part > hi2) continue;
            for (long z = -nmax; z <= nmax; ++z) {
                double r2 = part + static_cast<double>(z) * z;
                if (r2 > lo2 && r2 <= hi2) ++count;
            }
        }
    return count;
}

}  // namespace

PeakEventReport peak_events(EventKind kind, const LevyMeasureSpec& spec,
                            const ModelParams& params, const RateFunction& f, double K,
                            std::uint64_t n_max, double delta, std::uint64_t seed,
                            std::uint64_t runs) {
    if (n_max < 10) throw Error(ErrorCode::ConfigInvalid, "peak_events: n_max >= 10 required");
    if (!(K > 0.0)) throw Error(ErrorCode::ConfigInvalid, "peak_events: K > 0 required");
    if (kind == EventKind::LargeJump && !(delta > 0.0 && delta < params.t))
        throw Error(ErrorCode::ConfigInvalid, "peak_events: delta must be in (0, t)");
    {
        std::string note;
        require_growth_conditions(kind == EventKind::LatticePeak ? GrowthTail::UnitCell
                                                                 : GrowthTail::KernelPeak,
                                  spec, params, &note);
    }
    if (kind == EventKind::LatticePeak && params.d >= 2 && n_max > 20000)
        throw Error(ErrorCode::ConfigInvalid,
                    "peak_events: lattice counting for d >= 2 is limited to n_max <= 2e4");

    PeakEventReport rep;
    rep.kind = kind;
    rep.K = K;
    rep.delta = delta;
    rep.n_start = 2;
    rep.n_max = n_max;

    const double d = params.d;
    const double vd = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);

    // event means are deterministic functionals of the tails; compute once
    std::vector<double> means(n_max + 1, 0.0);
    std::vector<std::uint64_t> lattice_counts;
    if (kind == EventKind::LatticePeak) lattice_counts.assign(n_max + 1, 0);
    for (std::uint64_t n = rep.n_start; n <= n_max; ++n) {
        double shell = vd * (std::pow(n + 1.0, d) - std::pow(static_cast<double>(n), d));
        switch (kind) {
            case EventKind::VEvent:
                means[n] = shell * kernel_peak_mass(spec, params, K * f(n + 1.0));
                break;
            case EventKind::LargeJump:
                means[n] = shell * (params.t - delta) * spec.tail(K * f(static_cast<double>(n)));
                break;
            case EventKind::LatticePeak: {
                std::uint64_t cnt = lattice_annulus_count(params.d, n);
                lattice_counts[n] = cnt;
                double level = K * f(static_cast<double>(n));
                if (params.d == 1) level = std::max(level, 1.0 + 1e-9);
                double p = -std::expm1(-unit_cell_tail(spec, params, level).value);
                means[n] = static_cast<double>(cnt) * p;  // Binomial(cnt, p) intensity
                break;
            }
        }
        double p_event = -std::expm1(-means[n]);
        rep.expected_total += p_event;
        rep.expected_total_var += p_event * (1.0 - p_event);
    }
    // coarse cumulative expectation curve for the Borel-Cantelli diagnostic
    {
        double cum = 0.0;
        std::uint64_t next_mark = rep.n_start;
        for (std::uint64_t n = rep.n_start; n <= n_max; ++n) {
            cum += -std::expm1(-means[n]);
            if (n == next_mark || n == n_max) {
                rep.cum_expected.emplace_back(n, cum);
                next_mark = next_mark < 4 ? next_mark + 1 : next_mark * 2;
            }
        }
    }

    for (std::uint64_t run = 0; run < runs; ++run) {
        Rng rng(seed, run);
        std::uint64_t total = 0, last_n = 0;
        for (std::uint64_t n = rep.n_start; n <= n_max; ++n) {
            std::uint64_t count = 0;
            if (kind == EventKind::LatticePeak) {
                std::uint64_t cnt = lattice_counts[n];
                double p = cnt > 0 ? means[n] / static_cast<double>(cnt) : 0.0;
                for (std::uint64_t i = 0; i < cnt; ++i)
                    if (rng.uniform01() < p) ++count;
            } else {
                count = rng.poisson(means[n]);
            }
            if (count > 0) {
                ++total;
                last_n = n;
            }
            if (run == 0) rep.trajectory.push_back({n, means[n], count});
        }
        rep.run_totals.push_back(total);
        rep.run_last_n.push_back(last_n);
    }
    return rep;
}

}  // namespace levyshe
