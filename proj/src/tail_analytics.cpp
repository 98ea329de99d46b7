#include "levyshe/tail_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "levyshe/errors.hpp"
#include "levyshe/quadrature.hpp"
#include "levyshe/special_functions.hpp"

namespace levyshe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Derived {
    int d;
    double gamma;    // 1 + 2/d, the point-contribution tail exponent
    double shape;    // d/2 + 1
    double D;        // (2πκt)^{d/2}
    double c_eta;    // d^{d/2} / (πκ (d+2)^{d/2+1} Γ(d/2+1))
    double vd;       // unit-ball volume
    double c_alt;    // (2t)^{1+d/2} κ^{d/2} v_d / d
};

Derived derive(const ModelParams& p) {
    p.validate();
    Derived v;
    v.d = p.d;
    double d = p.d;
    v.gamma = 1.0 + 2.0 / d;
    v.shape = 0.5 * d + 1.0;
    v.D = p.D();
    v.vd = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    v.c_eta = std::pow(d, 0.5 * d) /
              (M_PI * p.kappa * std::pow(d + 2.0, 0.5 * d + 1.0) * std::tgamma(0.5 * d + 1.0));
    v.c_alt = std::pow(2.0 * p.t, 1.0 + 0.5 * d) * std::pow(p.kappa, 0.5 * d) * v.vd / d;
    return v;
}

void require_existence(const LevyMeasureSpec& spec, const ModelParams& params) {
    ConditionReport rep = check_conditions(spec, params);
    if (!rep.mild_solution_exists) {
        std::string msg = "contribution-tail evaluation requires the existence conditions";
        for (const auto& f : rep.failures) msg += "; " + f;
        throw Error(ErrorCode::ConditionViolated, msg);
    }
}

void require_local_sup(const LevyMeasureSpec& spec, const ModelParams& params) {
    ConditionReport rep = check_conditions(spec, params);
    if (!rep.local_sup_finite)
        throw Error(ErrorCode::ConditionViolated,
                    "kernel-peak tail requires int_(0,1) z^{2/d} |log z|^{1{d=2}} lambda(dz) < inf");
}

// z·density(z) as a function of v = log z, stable for v far beyond the double
// range of z itself.
double log_density(const LevyMeasureSpec& spec, double v) {
    switch (spec.kind()) {
        case FamilyKind::PointMass: return 0.0;
        case FamilyKind::ParetoTail: {
            double a = spec.param("alpha"), s0 = spec.param("scale");
            if (v < std::log(s0)) return 0.0;
            return a * std::exp(a * (std::log(s0) - v));
        }
        case FamilyKind::StableLike: {
            double a = spec.param("alpha"), c = spec.param("c");
            return c * std::exp(-a * v);
        }
        case FamilyKind::LogTail: {
            double beta = spec.param("beta");
            return v <= 1.0 ? 0.0 : beta * std::pow(v, -beta - 1.0);
        }
        case FamilyKind::TruncatedExp: {
            double rate = spec.param("rate");
            if (v > 700.0) return 0.0;  // e^{-rate z} has long underflowed
            double z = std::exp(v);
            double e = rate * z;
            return e > 745.0 ? 0.0 : rate * z * std::exp(-e);
        }
        case FamilyKind::Custom: {
            if (v > 700.0) return 0.0;  // custom densities unresolved beyond double range
            double z = std::exp(v);
            return z * spec.density(z);
        }
    }
    return 0.0;
}

// ∫ F(u) dλ over marks z = e^{a+u}, u ∈ [u0, ∞); atoms included.
double integrate_measure_log_upper(const LevyMeasureSpec& spec,
                                   const std::function<double(double)>& F, double a, double u0,
                                   double rel_tol, std::vector<double> breaks_u = {}) {
    double total = 0.0;
    for (const auto& [z, c] : spec.atoms()) {
        double u = std::log(z) - a;
        if (u > u0) total += c * F(u);  // region is (e^{a+u0}, ∞); the boundary belongs below
    }
    if (spec.has_density()) {
        double lo = u0;
        double slo = spec.support_lo();
        if (slo > 0.0) lo = std::max(lo, std::log(slo) - a);
        for (double b : spec.breakpoints()) breaks_u.push_back(std::log(b) - a);
        QuadOptions opt;
        opt.rel_tol = rel_tol;
        opt.breakpoints = std::move(breaks_u);
        auto g = [&](double u) { return F(u) * log_density(spec, a + u); };
        total += integrate_upper(g, lo, opt);
    }
    return total;
}

// shared by the alternate representation and the ERV diagnostic:
// I_f(v) = ∫_0^∞ e^{-γ w} f(D v e^{-w}) dw  ( = v^{-γ} ∫_0^v u^{2/d} f(Du) du )
double alt_inner_integral(const LevyMeasureSpec& spec, const Derived& dv, double v) {
    const double gamma = dv.gamma;
    const double arg0 = dv.D * v;
    std::vector<double> breaks;
    for (double b : spec.breakpoints()) {
        double w = std::log(arg0 / b);
        if (w > 0.0) breaks.push_back(w);
    }
    auto g = [&](double w) {
        if (gamma * w > 700.0) return 0.0;
        return std::exp(-gamma * w) * log_tail_moment(spec, dv.d, arg0 * std::exp(-w));
    };
    QuadOptions opt;
    opt.rel_tol = 1e-10;
    opt.breakpoints = std::move(breaks);
    return integrate_upper(g, 0.0, opt);
}

double steiner_volume(const Box& A, double rho) {
    // volume of {y : dist(y, A) <= rho} for a hyperrectangle
    double L[3] = {0, 0, 0};
    for (int i = 0; i < A.d; ++i) L[i] = A.hi[i] - A.lo[i];
    switch (A.d) {
        case 1: return L[0] + 2.0 * rho;
        case 2: return L[0] * L[1] + 2.0 * (L[0] + L[1]) * rho + M_PI * rho * rho;
        case 3:
            return L[0] * L[1] * L[2] +
                   2.0 * (L[0] * L[1] + L[0] * L[2] + L[1] * L[2]) * rho +
                   M_PI * (L[0] + L[1] + L[2]) * rho * rho +
                   (4.0 / 3.0) * M_PI * rho * rho * rho;
        default:
            throw Error(ErrorCode::ConfigInvalid, "hyperrectangle regions support d <= 3");
    }
}

// generic atom-exceedance measure: ∫_0^t ∫ vol(s, ρ*(s,z)) 1{z > K(s)} λ(dz) ds
// with ρ*(s,z) = sqrt(2κs log(z / K(s))), K(s) = r (2πκs)^{d/2}.
double atom_exceedance_measure(const LevyMeasureSpec& spec, const ModelParams& params, double r,
                               const std::function<double(double, double)>& vol, double rel_tol) {
    const double t = params.t, kappa = params.kappa;
    const double d = params.d;
    auto inner = [&](double s) {
        double a = std::log(r) + 0.5 * d * std::log(2.0 * M_PI * kappa * s);  // log K(s)
        auto F = [&](double u) { return vol(s, std::sqrt(2.0 * kappa * s * u)); };
        return integrate_measure_log_upper(spec, F, a, 0.0, 0.1 * rel_tol);
    };
    auto outer = [&](double x) {
        if (x > 700.0) return 0.0;  // s underflow guard
        double s = t * std::exp(-x);
        return s > 0.0 ? std::exp(-x) * inner(s) : 0.0;
    };
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    return t * integrate_upper(outer, 0.0, opt);
}

bool float_eq_tol(double a, double b) {
    return std::fabs(a - b) <= 1e-12 * (1.0 + std::fabs(a) + std::fabs(b));
}

}  // namespace

const char* curve_kind_name(CurveKind k) {
    switch (k) {
        case CurveKind::ExactQuadrature: return "exact_quadrature";
        case CurveKind::ExactAlternate: return "exact_alternate";
        case CurveKind::Asymptotic: return "asymptotic";
        case CurveKind::Empirical: return "empirical";
    }
    return "unknown";
}

std::vector<double> log_levels(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1)
        throw Error(ErrorCode::ConfigInvalid, "log_levels: need 0 < lo < hi and per_decade >= 1");
    int n = static_cast<int>(std::floor(std::log10(hi / lo) * per_decade)) + 1;
    std::vector<double> out;
    out.reserve(n + 1);
    for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
    if (out.back() < hi * (1.0 - 1e-12)) out.push_back(hi);
    return out;
}

double integrate_measure(const LevyMeasureSpec& spec, const std::function<double(double)>& F,
                         double lo, double hi, double rel_tol,
                         const std::vector<double>& extra_breaks) {
    if (!std::isfinite(hi))
        throw Error(ErrorCode::ConfigInvalid,
                    "integrate_measure: finite upper bound required (tails of measures are "
                    "integrated in log z by the evaluators)");
    double total = 0.0;
    for (const auto& [z, c] : spec.atoms())
        if (z > lo && z <= hi) total += c * F(z);
    if (!spec.has_density()) return total;

    double zlo = std::max(lo, spec.support_lo());
    auto g = [&](double z) { return F(z) * spec.density(z); };
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    for (double b : spec.breakpoints()) opt.breakpoints.push_back(b);
    for (double b : extra_breaks) opt.breakpoints.push_back(b);

    if (zlo <= 0.0) {
        double anchor = std::min(hi, 1.0);
        total += integrate_to_zero(g, anchor, opt);
        zlo = anchor;
    }
    if (hi > zlo) total += integrate(g, zlo, hi, opt);
    return total;
}

double tail_power_integral(const LevyMeasureSpec& spec, double p, double x, double rel_tol) {
    if (!(p > 0.0) || !(x > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "tail_power_integral: p > 0, x > 0 required");
    auto g = [&](double u) { return std::pow(u, p - 1.0) * spec.tail(u); };
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    for (double b : spec.breakpoints()) opt.breakpoints.push_back(b);
    double anchor = std::min(x, 1.0);
    double total = integrate_to_zero(g, anchor, opt);
    if (x > anchor) total += integrate(g, anchor, x, opt);
    return total;
}

double log_tail_moment(const LevyMeasureSpec& spec, int d, double w) {
    if (!(w > 0.0)) throw Error(ErrorCode::ConfigInvalid, "log_tail_moment: w > 0 required");
    const double h = 0.5 * d;
    switch (spec.kind()) {
        case FamilyKind::PointMass: {
            double z0 = spec.param("z0"), c = spec.param("mass");
            return w < z0 ? c * std::pow(std::log(z0 / w), h) : 0.0;
        }
        case FamilyKind::ParetoTail: {
            double a = spec.param("alpha"), s0 = spec.param("scale");
            if (w >= s0)
                return std::pow(s0 / w, a) * std::tgamma(h + 1.0) * std::pow(a, -h);
            double b = std::log(s0 / w);
            auto g = [&](double u) { return std::pow(u + b, h) * std::exp(-a * u); };
            QuadOptions opt;
            opt.rel_tol = 1e-11;
            return a * integrate_upper(g, 0.0, opt);
        }
        case FamilyKind::StableLike: {
            double a = spec.param("alpha"), c = spec.param("c");
            return (c / a) * std::pow(w, -a) * std::tgamma(h + 1.0) * std::pow(a, -h);
        }
        case FamilyKind::LogTail: {
            double beta = spec.param("beta");
            if (beta <= h)
                throw Error(ErrorCode::Divergent, "log_tail_moment diverges: beta <= d/2");
            double lw = std::log(w);
            if (lw >= 1.0)
                return beta * std::pow(lw, h - beta) * beta_function(h + 1.0, beta - h);
            auto g = [&](double s) {
                double es = std::exp(std::min(s, 700.0));
                return std::pow(es - lw, h) * std::exp(-beta * s);
            };
            QuadOptions opt;
            opt.rel_tol = 1e-11;
            return beta * integrate_upper(g, 0.0, opt);
        }
        case FamilyKind::TruncatedExp: {
            double rate = spec.param("rate");
            auto g = [&](double u) {
                if (u > 700.0) return 0.0;
                double e = rate * w * std::exp(u);
                if (e > 745.0) return 0.0;
                return std::pow(u, h) * rate * w * std::exp(u - e);
            };
            QuadOptions opt;
            opt.rel_tol = 1e-11;
            return integrate_upper(g, 0.0, opt);
        }
        case FamilyKind::Custom: {
            double a = std::log(w);
            auto F = [&](double u) { return std::pow(u, h); };
            return integrate_measure_log_upper(spec, F, a, 0.0, 1e-10);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

double contribution_tail_below(const LevyMeasureSpec& spec, const ModelParams& params, double r,
                               double z_max) {
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "contribution_tail: r > 0 required");
    require_existence(spec, params);
    Derived dv = derive(params);
    const double split = r * dv.D;
    const double gamma = dv.gamma;

    double head_cut = std::min(split, z_max);
    double head = 0.0;
    if (head_cut > 0.0) {
        double m = 0.0;
        if (head_cut >= spec.support_lo() || !spec.atoms().empty())
            m = spec.truncated_moment(gamma, head_cut);
        head = std::tgamma(dv.shape) * std::pow(r, -gamma) * m;
    }
    double tail = 0.0;
    if (z_max > split) {
        double a = std::log(split);
        double u_hi = std::isfinite(z_max) ? std::log(z_max) - a : kInf;
        auto F = [&](double u) { return gamma_upper_scaled(dv.shape, gamma * u); };
        if (std::isfinite(u_hi)) {
            double part = 0.0;
            for (const auto& [z, c] : spec.atoms()) {
                double u = std::log(z) - a;
                if (u > 0.0 && u <= u_hi) part += c * F(u);
            }
            if (spec.has_density()) {
                double lo = 0.0;
                double slo = spec.support_lo();
                if (slo > 0.0) lo = std::max(lo, std::log(slo) - a);
                QuadOptions opt;
                opt.rel_tol = 1e-10;
                for (double b : spec.breakpoints()) opt.breakpoints.push_back(std::log(b) - a);
                auto g = [&](double u) { return F(u) * log_density(spec, a + u); };
                if (u_hi > lo) part += integrate(g, lo, u_hi, opt);
            }
            tail = part;
        } else {
            tail = integrate_measure_log_upper(spec, F, a, 0.0, 1e-10);
        }
        tail *= std::pow(dv.D, gamma);
    }
    return dv.c_eta * (head + tail);
}

double contribution_tail(const LevyMeasureSpec& spec, const ModelParams& params, double r) {
    return contribution_tail_below(spec, params, r, kInf);
}

double contribution_tail_alternate(const LevyMeasureSpec& spec, const ModelParams& params,
                                   double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "contribution_tail: r > 0 required");
    require_existence(spec, params);
    Derived dv = derive(params);
    return dv.c_alt * alt_inner_integral(spec, dv, r);
}

double contribution_tail_asymptotic(const LevyMeasureSpec& spec, const ModelParams& params,
                                    double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "contribution_tail: r > 0 required");
    require_existence(spec, params);
    Derived dv = derive(params);
    const double d = params.d, gamma = dv.gamma;
    const double m = spec.total_moment(gamma);
    if (std::isfinite(m))
        return std::pow(r, -gamma) * std::pow(d, 0.5 * d) * m /
               (M_PI * params.kappa * std::pow(d + 2.0, 0.5 * d + 1.0));
    const double alpha = spec.tail_index();
    if (alpha == 0.0) {
        double L0 = karamata_L0(spec, params.d, r);
        return L0 * std::pow(dv.D, gamma) /
               (2.0 * M_PI * params.kappa * std::tgamma(0.5 * d + 1.0) * gamma);
    }
    if (float_eq_tol(alpha, gamma)) {
        double L = karamata_L(spec, r);
        return L * std::pow(r, -gamma) /
               (d * M_PI * params.kappa * std::pow(gamma, 0.5 * d));
    }
    if (alpha > 0.0 && alpha < gamma && std::isfinite(alpha)) {
        return spec.tail(r) * std::pow(dv.D, gamma - alpha) /
               (d * M_PI * params.kappa * std::pow(alpha, 0.5 * d) * (gamma - alpha));
    }
    throw Error(ErrorCode::Unclassified,
                "contribution_tail_asymptotic: measure fits no asymptotic regime (declared tail index " +
                    std::to_string(alpha) + ")");
}

// ---------------------------------------------------------------------------

double kernel_peak_mass(const LevyMeasureSpec& spec, const ModelParams& params, double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "kernel_peak_mass: r > 0 required");
    require_local_sup(spec, params);
    Derived dv = derive(params);
    const double p = 2.0 / params.d;
    double m = spec.truncated_moment(p, r * dv.D);
    return std::pow(r, -p) / (2.0 * M_PI * params.kappa) * m + params.t * spec.tail(r * dv.D);
}

double kernel_peak_tail(const LevyMeasureSpec& spec, const ModelParams& params, double r) {
    require_local_sup(spec, params);
    if (params.d == 1 && !(r >= 1.0))
        throw Error(ErrorCode::ConditionViolated,
                    "kernel_peak_tail: levels below 1 are outside the d=1 peak measure support");
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "kernel_peak_tail: r > 0 required");
    Derived dv = derive(params);
    const double p = 2.0 / params.d;
    const double split = r * dv.D;
    const double t = params.t;

    // route 1: direct measure integral of the capped peak duration
    double form1;
    {
        double c1 = std::pow(r, -p) / (2.0 * M_PI * params.kappa);
        auto below = [&](double z) { return c1 * std::pow(z, p); };
        double part = integrate_measure(spec, below, 0.0, split, 1e-11);
        // above the cap the duration is the full horizon
        double a = std::log(split);
        auto one = [&](double) { return t; };
        part += integrate_measure_log_upper(spec, one, a, 0.0, 1e-11);
        form1 = part;
    }
    // route 2: closed-form truncated moment + tail
    double form2 = kernel_peak_mass(spec, params, r);
    // route 3: quadrature of the tail function
    double form3 = std::pow(r, -p) / (M_PI * params.kappa * params.d) *
                   tail_power_integral(spec, p, split, 1e-11);

    double scale = std::max({std::fabs(form1), std::fabs(form2), std::fabs(form3), 1e-300});
    double dev = std::max(std::fabs(form1 - form2), std::fabs(form1 - form3)) / scale;
    if (dev > 1e-8) {
        std::ostringstream os;
        os << "kernel_peak_tail: route disagreement " << dev << " at r=" << r << " for "
           << spec.describe();
        throw Error(ErrorCode::NumericFailure, os.str());
    }
    return form1;
}

double kernel_peak_tail_asymptotic(const LevyMeasureSpec& spec, const ModelParams& params,
                                   double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "kernel_peak_tail: r > 0 required");
    require_local_sup(spec, params);
    Derived dv = derive(params);
    const double p = 2.0 / params.d;
    const double m = spec.total_moment(p);
    if (std::isfinite(m)) return m * std::pow(r, -p) / (2.0 * M_PI * params.kappa);
    const double alpha = spec.tail_index();
    if (float_eq_tol(alpha, p)) {
        double L = karamata_L(spec, r);
        return p * L * std::pow(r, -p) / (2.0 * M_PI * params.kappa);
    }
    if (alpha >= 0.0 && alpha < p && std::isfinite(alpha)) {
        return 2.0 * params.t * std::pow(dv.D, -alpha) * spec.tail(r) / (2.0 - params.d * alpha);
    }
    throw Error(ErrorCode::Unclassified,
                "kernel_peak_tail_asymptotic: measure fits no asymptotic regime");
}

// ---------------------------------------------------------------------------

double max_contribution_cdf(const LevyMeasureSpec& spec, const ModelParams& params, double r) {
    return std::exp(-contribution_tail(spec, params, r));
}

double region_peak_tailprob(const LevyMeasureSpec& spec, const ModelParams& params, double vol_A,
                            double r) {
    if (!(vol_A > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "region_peak_tailprob: region volume must be > 0");
    return -std::expm1(-vol_A * kernel_peak_tail(spec, params, r));
}

// ---------------------------------------------------------------------------

double region_sup_tail(const LevyMeasureSpec& spec, const ModelParams& params, const Box& A,
                       double r, double rel_tol) {
    require_local_sup(spec, params);
    if (!check_conditions(spec, params).log_moment_finite)
        throw Error(ErrorCode::ConditionViolated,
                    "region_sup_tail requires int_(1,inf) (log z)^{d/2} lambda(dz) < inf");
    if (params.d == 1 && !(r > 1.0))
        throw Error(ErrorCode::ConditionViolated, "region_sup_tail: d=1 requires levels r > 1");
    if (A.d != params.d) throw Error(ErrorCode::ConfigInvalid, "region_sup_tail: box dimension mismatch");
    auto vol = [&](double, double rho) { return steiner_volume(A, rho); };
    return atom_exceedance_measure(spec, params, r, vol, rel_tol);
}

double region_sup_heavy_constant(const LevyMeasureSpec& spec, const ModelParams& params,
                                 const Box& A) {
    require_local_sup(spec, params);
    const double alpha = spec.tail_index();
    const double d = params.d;
    if (!(alpha > 0.0) || !(alpha < 2.0 / d))
        throw Error(ErrorCode::Unclassified,
                    "region_sup_heavy_constant applies to regularly varying tails with index in (0, 2/d)");
    double L[3] = {0, 0, 0};
    for (int i = 0; i < A.d; ++i) L[i] = A.hi[i] - A.lo[i];
    double volA = A.volume();
    double sigma[4] = {1.0, 0.0, 0.0, 0.0};  // elementary symmetric polynomials in sides
    sigma[1] = L[0] + L[1] + L[2];
    sigma[2] = L[0] * L[1] + L[0] * L[2] + L[1] * L[2];
    sigma[3] = L[0] * L[1] * L[2];
    double vk[4] = {1.0, 2.0, M_PI, 4.0 * M_PI / 3.0};
    auto integrand = [&](double s) {
        double pref = std::pow(2.0 * M_PI * params.kappa * s, -alpha * d / 2.0);
        double inner = volA;
        for (int k = 1; k <= params.d; ++k) {
            double sig = sigma[params.d - k];
            inner += k * vk[k] * sig * 0.5 * std::tgamma(0.5 * k) *
                     std::pow(2.0 * params.kappa * s / alpha, 0.5 * k);
        }
        return pref * inner;
    };
    QuadOptions opt;
    opt.rel_tol = 1e-10;
    return integrate_to_zero(integrand, params.t, opt);
}

// ---------------------------------------------------------------------------

namespace {

// closed pieces for the unit-cell tail. All in terms of log H1 to stay finite
// when the first-crossing time overflows.
struct CellGeometry {
    double kappa, t;
    int d;
    double shape;  // d/2 + 1
    // ∫_0^R H2(s)^d ds for R <= min(H1, ...), H2(s) = sqrt(κ d s log(H1/s))
    double G(double R, double logH1) const {
        if (!(R > 0.0)) return 0.0;
        double s = shape;
        double x = s * (logH1 - std::log(R));
        return std::pow(kappa * d, 0.5 * d) * std::pow(2.0 / (d + 2.0), s) * std::pow(R, s) *
               gamma_upper_scaled(s, x);
    }
    // ψ(s) = H2(s)^2 - 1/4
    double psi(double s, double logH1) const {
        return kappa * d * s * (logH1 - std::log(s)) - 0.25;
    }
    double bisect(double lo, double hi, double logH1, bool increasing) const {
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            double v = psi(mid, logH1);
            if ((v < 0.0) == increasing)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }
    // ∫_0^{min(H1,t)} (1/2 ∧ H2(s))^d ds (without the unit-ball volume factor)
    double capped_profile(double log_u) const {
        double logH1 = -std::log(2.0 * M_PI * kappa) - (2.0 / d) * log_u;
        double S = logH1 >= std::log(t) ? t : std::exp(logH1);
        if (!(S > 0.0)) return 0.0;
        // max of H2^2 is κ d H1 / e; no cap when it stays below 1/4
        double log_max = std::log(kappa * d) + logH1 - 1.0;
        if (log_max <= std::log(0.25)) return G(S, logH1);
        bool peak_inside = logH1 - 1.0 < 700.0 && std::exp(logH1 - 1.0) < S;
        double rise_end = peak_inside ? std::exp(logH1 - 1.0) : S;
        if (psi(rise_end, logH1) <= 0.0) return G(S, logH1);  // never reaches 1/2 before S
        double s1 = bisect(rise_end * 1e-300, rise_end, logH1, true);
        double result = G(s1, logH1);
        if (!peak_inside) {
            // capped from s1 to S
            return result + std::pow(0.5, d) * (S - s1);
        }
        if (psi(S, logH1) >= 0.0) return result + std::pow(0.5, d) * (S - s1);
        double s2 = bisect(rise_end, S, logH1, false);
        return result + std::pow(0.5, d) * (s2 - s1) + (G(S, logH1) - G(s2, logH1));
    }
};

}  // namespace

UnitCellTail unit_cell_tail(const LevyMeasureSpec& spec, const ModelParams& params, double r) {
    require_existence(spec, params);
    if (params.d == 1 && !(r > 1.0))
        throw Error(ErrorCode::ConditionViolated, "unit_cell_tail: d=1 requires levels r > 1");
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "unit_cell_tail: r > 0 required");
    Derived dv = derive(params);
    CellGeometry geom{params.kappa, params.t, params.d, dv.shape};

    const double log_r = std::log(r);
    // outer integral over marks: plain panels for z <= r, log-space above so
    // that heavy and logarithmic mark tails both converge geometrically
    double total = 0.0;
    for (const auto& [z, c] : spec.atoms()) total += c * dv.vd * geom.capped_profile(log_r - std::log(z));
    if (spec.has_density()) {
        auto g = [&](double z) { return dv.vd * geom.capped_profile(log_r - std::log(z)) * spec.density(z); };
        QuadOptions opt;
        opt.rel_tol = 1e-10;
        for (double b : spec.breakpoints()) opt.breakpoints.push_back(b);
        double zlo = spec.support_lo();
        double cursor;
        if (zlo <= 0.0) {
            cursor = std::min(1.0, r);
            total += integrate_to_zero(g, cursor, opt);
        } else {
            cursor = std::min(zlo, r);
        }
        if (r > cursor) total += integrate(g, cursor, r, opt);
        QuadOptions optu;
        optu.rel_tol = 1e-10;
        for (double b : spec.breakpoints()) {
            double ub = std::log(b) - log_r;
            if (ub > 0.0) optu.breakpoints.push_back(ub);
        }
        auto gu = [&](double u) { return dv.vd * geom.capped_profile(-u) * log_density(spec, log_r + u); };
        total += integrate_upper(gu, 0.0, optu);
    }

    UnitCellTail out;
    out.value = total;

    // sandwich constants. M-part: below min((πe/2d)^{d/2}, D)·r the half-width
    // cap never binds and the first-crossing time stays inside the horizon, so
    // the integrand is exactly the uncapped one.
    const double gamma = dv.gamma;
    const double cM1 = std::pow(static_cast<double>(params.d), 0.5 * params.d) /
                       (M_PI * params.kappa * std::pow(params.d + 2.0, 0.5 * params.d + 1.0));
    const double c2M = std::min(std::pow(M_PI * M_E / (2.0 * params.d), 0.5 * params.d), dv.D);
    // λ̄-part: find the mark ratio above which the capped profile keeps at
    // least half of its small-u limit t 2^{-d}.
    const double target = 0.5 * params.t * std::pow(0.5, params.d);
    double u_lo = 1e-12, u_hi = 1.0;
    while (geom.capped_profile(std::log(u_hi)) > target && u_hi < 1e12) u_hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = std::sqrt(u_lo * u_hi);
        if (geom.capped_profile(std::log(mid)) > target)
            u_lo = mid;
        else
            u_hi = mid;
    }
    const double u_star = u_lo;
    const double cL1 = dv.vd * target;
    const double c2L = std::max(1.0 / u_star, c2M);

    double mlow = 0.0, mhigh = 0.0;
    if (c2M * r >= spec.support_lo() || !spec.atoms().empty()) {
        try {
            mlow = spec.truncated_moment(gamma, c2M * r);
            mhigh = spec.truncated_moment(gamma, r);
        } catch (const Error&) {
            mlow = mhigh = kInf;  // divergent truncated moment: bounds are vacuous
        }
    }
    out.lower_bound = cM1 * std::pow(r, -gamma) * mlow + cL1 * spec.tail(c2L * r);
    out.upper_bound = cM1 * std::pow(r, -gamma) * mhigh +
                      dv.vd * params.t * std::pow(0.5, params.d) * spec.tail(r);
    return out;
}

// ---------------------------------------------------------------------------

ErvBracket erv_diagnostic(TailFamily which, const LevyMeasureSpec& spec,
                          const ModelParams& params, const std::vector<double>& v_grid) {
    if (v_grid.empty()) throw Error(ErrorCode::ConfigInvalid, "erv_diagnostic: empty grid");
    Derived dv = derive(params);
    ErvBracket out;
    out.v_grid = v_grid;
    const double tol = 1e-6;
    if (which == TailFamily::Contribution) {
        require_existence(spec, params);
        out.theta_lo = -dv.gamma;
        out.theta_hi = 0.0;
        for (double v : v_grid) {
            double num = log_tail_moment(spec, params.d, dv.D * v);
            double den = alt_inner_integral(spec, dv, v);
            double xi = num / den - dv.gamma;
            out.xi_samples.push_back(xi);
        }
    } else {
        require_local_sup(spec, params);
        out.theta_lo = -2.0 / params.d;
        out.theta_hi = 0.0;
        const double p = 2.0 / params.d;
        for (double v : v_grid) {
            double arg = dv.D * v;
            double num = std::pow(arg, p) * spec.tail(arg);
            double den = tail_power_integral(spec, p, arg);
            double xi = num / den - p;
            out.xi_samples.push_back(xi);
        }
    }
    for (std::size_t i = 0; i < out.xi_samples.size(); ++i) {
        double xi = out.xi_samples[i];
        if (xi < out.theta_lo - tol || xi > out.theta_hi + tol) {
            std::ostringstream os;
            os << "erv_diagnostic: xi(" << v_grid[i] << ") = " << xi << " outside ["
               << out.theta_lo << ", " << out.theta_hi << "]";
            throw Error(ErrorCode::BracketViolation, os.str());
        }
    }
    out.xi_limit = out.xi_samples.back();
    return out;
}

// ---------------------------------------------------------------------------

double karamata_L(const LevyMeasureSpec& spec, double r) {
    double alpha = spec.tail_index();
    if (!std::isfinite(alpha))
        throw Error(ErrorCode::Unclassified, "karamata_L: tail is not regularly varying");
    if (r <= 1.0) return 0.0;
    auto g = [&](double u) { return spec.tail(u) * std::pow(u, alpha - 1.0); };
    QuadOptions opt;
    opt.rel_tol = 1e-11;
    for (double b : spec.breakpoints()) opt.breakpoints.push_back(b);
    return integrate(g, 1.0, r, opt);
}

double karamata_L0(const LevyMeasureSpec& spec, int d, double r) {
    if (spec.kind() == FamilyKind::LogTail) {
        double beta = spec.param("beta");
        if (beta <= 0.5 * d)
            throw Error(ErrorCode::Divergent, "karamata_L0 diverges: beta <= d/2");
        // closed form on the tail's own domain; below it fall through to quadrature
        if (r > M_E)
            return std::pow(std::log(r), 0.5 * d - beta) * beta_function(0.5 * d, beta - 0.5 * d);
    }
    // generic slowly varying tail: ∫_0^∞ λ̄(r e^w) w^{d/2-1} dw, with w = x² when
    // d = 1 to absorb the endpoint singularity
    QuadOptions opt;
    opt.rel_tol = 1e-9;
    if (d == 1) {
        auto g = [&](double x) {
            double w = x * x;
            return w > 700.0 ? 0.0 : 2.0 * spec.tail(r * std::exp(w));
        };
        return integrate_upper(g, 0.0, opt);
    }
    auto g = [&](double w) {
        return w > 700.0 ? 0.0 : spec.tail(r * std::exp(w)) * std::pow(w, 0.5 * d - 1.0);
    };
    return integrate_upper(g, 0.0, opt);
}

double contribution_tail_outside(const LevyMeasureSpec& spec, const ModelParams& params, double r,
                                 double R, double rel_tol) {
    if (!(R >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "contribution_tail_outside: R >= 0");
    Derived dv = derive(params);
    auto vol = [&](double, double rho) {
        if (rho <= R) return 0.0;
        return dv.vd * (std::pow(rho, params.d) - std::pow(R, params.d));
    };
    return atom_exceedance_measure(spec, params, r, vol, rel_tol);
}

}  // namespace levyshe
