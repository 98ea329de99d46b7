#include "levyshe/levy_measure.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "levyshe/errors.hpp"
#include "levyshe/quadrature.hpp"
#include "levyshe/special_functions.hpp"

namespace levyshe {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kE = std::exp(1.0);

void require(bool ok, ErrorCode code, const std::string& msg) {
    if (!ok) throw Error(code, msg);
}
}  // namespace

LevyMeasureSpec LevyMeasureSpec::point_mass(double z0, double mass) {
    require(z0 > 0.0 && mass > 0.0, ErrorCode::ConfigInvalid, "point_mass: z0 > 0 and mass > 0 required");
    LevyMeasureSpec s;
    s.kind_ = FamilyKind::PointMass;
    s.p1_ = z0;
    s.p2_ = mass;
    s.support_lo_ = z0;
    s.atoms_ = {{z0, mass}};
    return s;
}

LevyMeasureSpec LevyMeasureSpec::pareto(double alpha, double scale) {
    require(alpha > 0.0 && scale > 0.0, ErrorCode::ConfigInvalid, "pareto: alpha > 0 and scale > 0 required");
    LevyMeasureSpec s;
    s.kind_ = FamilyKind::ParetoTail;
    s.p1_ = alpha;
    s.p2_ = scale;
    s.support_lo_ = scale;
    return s;
}

LevyMeasureSpec LevyMeasureSpec::stable_like(double alpha, double c) {
    require(alpha > 0.0 && alpha < 2.0 && c > 0.0, ErrorCode::ConfigInvalid,
            "stable_like: alpha in (0,2) and c > 0 required");
    LevyMeasureSpec s;
    s.kind_ = FamilyKind::StableLike;
    s.p1_ = alpha;
    s.p2_ = c;
    s.support_lo_ = 0.0;
    return s;
}

LevyMeasureSpec LevyMeasureSpec::log_tail(double beta) {
    require(beta > 0.0, ErrorCode::ConfigInvalid, "log_tail: beta > 0 required");
    LevyMeasureSpec s;
    s.kind_ = FamilyKind::LogTail;
    s.p1_ = beta;
    s.support_lo_ = kE;
    return s;
}

LevyMeasureSpec LevyMeasureSpec::truncated_exp(double rate) {
    require(rate > 0.0, ErrorCode::ConfigInvalid, "truncated_exp: rate > 0 required");
    LevyMeasureSpec s;
    s.kind_ = FamilyKind::TruncatedExp;
    s.p1_ = rate;
    s.support_lo_ = 0.0;
    return s;
}

LevyMeasureSpec LevyMeasureSpec::custom(CustomMeasure m) {
    require(static_cast<bool>(m.tail), ErrorCode::ConfigInvalid, "custom: tail function required");
    LevyMeasureSpec s;
    s.kind_ = FamilyKind::Custom;
    s.support_lo_ = m.support_lo;
    s.custom_ = std::move(m);
    return s;
}

double LevyMeasureSpec::param(const std::string& name) const {
    switch (kind_) {
        case FamilyKind::PointMass:
            if (name == "z0") return p1_;
            if (name == "mass") return p2_;
            break;
        case FamilyKind::ParetoTail:
            if (name == "alpha") return p1_;
            if (name == "scale") return p2_;
            break;
        case FamilyKind::StableLike:
            if (name == "alpha") return p1_;
            if (name == "c") return p2_;
            break;
        case FamilyKind::LogTail:
            if (name == "beta") return p1_;
            break;
        case FamilyKind::TruncatedExp:
            if (name == "rate") return p1_;
            break;
        case FamilyKind::Custom:
            break;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown parameter '" + name + "' for this family");
}

double LevyMeasureSpec::tail(double r) const {
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "tail: level r must be > 0");
    switch (kind_) {
        case FamilyKind::PointMass: return r < p1_ ? p2_ : 0.0;
        case FamilyKind::ParetoTail: return r <= p2_ ? 1.0 : std::pow(r / p2_, -p1_);
        case FamilyKind::StableLike: return (p2_ / p1_) * std::pow(r, -p1_);
        case FamilyKind::LogTail: return r <= kE ? 1.0 : std::pow(std::log(r), -p1_);
        case FamilyKind::TruncatedExp: return std::exp(-p1_ * r);
        case FamilyKind::Custom: return custom_.tail(r);
    }
    return 0.0;
}

double LevyMeasureSpec::density(double z) const {
    if (!(z > 0.0)) return 0.0;
    switch (kind_) {
        case FamilyKind::PointMass: return 0.0;
        case FamilyKind::ParetoTail:
            return z <= p2_ ? 0.0 : p1_ * std::pow(p2_, p1_) * std::pow(z, -p1_ - 1.0);
        case FamilyKind::StableLike: return p2_ * std::pow(z, -p1_ - 1.0);
        case FamilyKind::LogTail: {
            if (z <= kE) return 0.0;
            double lz = std::log(z);
            return p1_ * std::pow(lz, -p1_ - 1.0) / z;
        }
        case FamilyKind::TruncatedExp: return p1_ * std::exp(-p1_ * z);
        case FamilyKind::Custom: return custom_.density ? custom_.density(z) : 0.0;
    }
    return 0.0;
}

bool LevyMeasureSpec::has_density() const {
    if (kind_ == FamilyKind::PointMass) return false;
    if (kind_ == FamilyKind::Custom) return static_cast<bool>(custom_.density);
    return true;
}

std::vector<double> LevyMeasureSpec::breakpoints() const {
    switch (kind_) {
        case FamilyKind::PointMass: return {p1_};
        case FamilyKind::ParetoTail: return {p2_};
        case FamilyKind::LogTail: return {kE};
        case FamilyKind::Custom:
            return custom_.support_lo > 0.0 ? std::vector<double>{custom_.support_lo}
                                            : std::vector<double>{};
        default: return {};
    }
}

double LevyMeasureSpec::truncated_moment(double gamma, double x) const {
    require(gamma > 0.0 && x > 0.0, ErrorCode::ConfigInvalid, "truncated_moment: gamma > 0, x > 0");
    switch (kind_) {
        case FamilyKind::PointMass: return x >= p1_ ? p2_ * std::pow(p1_, gamma) : 0.0;
        case FamilyKind::ParetoTail: {
            const double a = p1_, s0 = p2_;
            if (x <= s0) return 0.0;
            if (std::fabs(gamma - a) < 1e-14) return a * std::pow(s0, a) * std::log(x / s0);
            return a * std::pow(s0, a) * (std::pow(x, gamma - a) - std::pow(s0, gamma - a)) /
                   (gamma - a);
        }
        case FamilyKind::StableLike: {
            const double a = p1_, c = p2_;
            if (gamma <= a)
                throw Error(ErrorCode::Divergent,
                            "truncated_moment: M_gamma(x) diverges at 0 for stable_like when gamma <= alpha");
            return c * std::pow(x, gamma - a) / (gamma - a);
        }
        case FamilyKind::LogTail: {
            // β ∫_1^{log x} e^{γw} w^{-β-1} dw, written as a decaying integral
            // from the upper endpoint for stability at large x.
            if (x <= kE) return 0.0;
            const double beta = p1_, a = std::log(x);
            const double span = gamma * (a - 1.0);
            auto g = [&](double v) {
                return std::exp(-v) * std::pow(a - v / gamma, -beta - 1.0);
            };
            QuadOptions opt;
            opt.rel_tol = 1e-12;
            double iv = integrate(g, 0.0, std::min(span, 120.0), opt);
            return beta / gamma * std::exp(gamma * a) * iv;
        }
        case FamilyKind::TruncatedExp: {
            const double rate = p1_;
            return std::pow(rate, -gamma) * std::tgamma(gamma + 1.0) * gamma_p(gamma + 1.0, rate * x);
        }
        case FamilyKind::Custom: {
            if (gamma <= custom_.small_index)
                throw Error(ErrorCode::Divergent,
                            "truncated_moment: declared small-jump index implies divergence at 0");
            if (!custom_.density)
                throw Error(ErrorCode::ConfigInvalid, "truncated_moment: custom measure needs a density");
            auto f = [&](double z) { return std::pow(z, gamma) * custom_.density(z); };
            QuadOptions opt;
            opt.rel_tol = 1e-11;
            double lo = std::max(custom_.support_lo, 0.0);
            if (lo <= 0.0) return integrate_to_zero(f, x, opt);
            if (lo >= x) return 0.0;
            return integrate(f, lo, x, opt);
        }
    }
    return 0.0;
}

double LevyMeasureSpec::total_moment(double gamma) const {
    require(gamma > 0.0, ErrorCode::ConfigInvalid, "total_moment: gamma > 0");
    switch (kind_) {
        case FamilyKind::PointMass: return p2_ * std::pow(p1_, gamma);
        case FamilyKind::ParetoTail:
            return gamma < p1_ ? p1_ * std::pow(p2_, gamma) / (p1_ - gamma) : kInf;
        case FamilyKind::StableLike: return kInf;
        case FamilyKind::LogTail: return kInf;
        case FamilyKind::TruncatedExp: return std::pow(p1_, -gamma) * std::tgamma(gamma + 1.0);
        case FamilyKind::Custom: {
            if (gamma <= custom_.small_index || gamma >= custom_.tail_index) {
                // declared indices decide off the boundary; at a boundary the
                // integral may still be finite but we cannot certify it
                if (gamma != custom_.tail_index && gamma != custom_.small_index) return kInf;
            }
            if (!custom_.density) return kInf;
            auto f = [&](double z) { return std::pow(z, gamma) * custom_.density(z); };
            QuadOptions opt;
            opt.rel_tol = 1e-9;
            double lo = std::max(custom_.support_lo, 1e-12);
            return integrate_to_zero(f, std::max(lo, 1.0), opt) +
                   integrate_upper(f, std::max(lo, 1.0), opt);
        }
    }
    return kInf;
}

double LevyMeasureSpec::partial_moment(double gamma, double a, double b) const {
    require(gamma > 0.0 && a >= 0.0 && b >= a, ErrorCode::ConfigInvalid,
            "partial_moment: need gamma > 0 and 0 <= a <= b");
    if (a == b) return 0.0;
    switch (kind_) {
        case FamilyKind::PointMass: return (a < p1_ && p1_ <= b) ? p2_ * std::pow(p1_, gamma) : 0.0;
        case FamilyKind::ParetoTail: {
            const double al = p1_, s0 = p2_;
            double lo = std::max(a, s0);
            if (b <= lo) return 0.0;
            if (std::fabs(gamma - al) < 1e-14) return al * std::pow(s0, al) * std::log(b / lo);
            return al * std::pow(s0, al) * (std::pow(b, gamma - al) - std::pow(lo, gamma - al)) /
                   (gamma - al);
        }
        case FamilyKind::StableLike: {
            const double al = p1_, c = p2_;
            if (a <= 0.0 && gamma <= al)
                throw Error(ErrorCode::Divergent, "partial_moment: diverges at 0");
            if (std::fabs(gamma - al) < 1e-14) return c * std::log(b / std::max(a, 1e-300));
            return c * (std::pow(b, gamma - al) - std::pow(a, gamma - al)) / (gamma - al);
        }
        case FamilyKind::LogTail: {
            double hi = truncated_moment(gamma, b);
            double lo = a > 0.0 ? truncated_moment(gamma, a) : 0.0;
            return std::max(hi - lo, 0.0);
        }
        case FamilyKind::TruncatedExp: {
            const double rate = p1_;
            return std::pow(rate, -gamma) * std::tgamma(gamma + 1.0) *
                   (gamma_p(gamma + 1.0, rate * b) - gamma_p(gamma + 1.0, rate * a));
        }
        case FamilyKind::Custom: {
            if (!custom_.density)
                throw Error(ErrorCode::ConfigInvalid, "partial_moment: custom measure needs a density");
            auto f = [&](double z) { return std::pow(z, gamma) * custom_.density(z); };
            QuadOptions opt;
            opt.rel_tol = 1e-11;
            double lo = std::max(a, custom_.support_lo);
            if (b <= lo) return 0.0;
            if (lo <= 0.0) {
                if (gamma <= custom_.small_index)
                    throw Error(ErrorCode::Divergent, "partial_moment: diverges at 0");
                return integrate_to_zero(f, b, opt);
            }
            return integrate(f, lo, b, opt);
        }
    }
    return 0.0;
}

double LevyMeasureSpec::activity(double eps) const {
    double e = std::max(eps, 0.0);
    if (e == 0.0) {
        switch (kind_) {
            case FamilyKind::PointMass: return p2_;
            case FamilyKind::ParetoTail: return 1.0;
            case FamilyKind::LogTail: return 1.0;
            case FamilyKind::TruncatedExp: return 1.0;
            case FamilyKind::StableLike: return kInf;
            case FamilyKind::Custom:
                return custom_.small_index > 0.0 ? kInf : custom_.tail(1e-300);
        }
    }
    return tail(e);
}

double LevyMeasureSpec::sample_one(Rng& rng, double eps) const {
    switch (kind_) {
        case FamilyKind::PointMass:
            if (eps >= p1_)
                throw Error(ErrorCode::InfiniteIntensity, "sample_one: no mass above cutoff");
            return p1_;
        case FamilyKind::ParetoTail: {
            double a = std::max(eps, p2_);
            return a * std::pow(rng.uniform_pos(), -1.0 / p1_);
        }
        case FamilyKind::StableLike: {
            if (!(eps > 0.0))
                throw Error(ErrorCode::InfiniteIntensity,
                            "sample_one: stable_like requires a positive cutoff");
            return eps * std::pow(rng.uniform_pos(), -1.0 / p1_);
        }
        case FamilyKind::LogTail: {
            double a = std::max(eps, kE);
            return std::exp(std::log(a) * std::pow(rng.uniform_pos(), -1.0 / p1_));
        }
        case FamilyKind::TruncatedExp: return std::max(eps, 0.0) + rng.exponential(p1_);
        case FamilyKind::Custom:
            if (!custom_.sample_above)
                throw Error(ErrorCode::ConfigInvalid, "sample_one: custom measure has no sampler");
            return custom_.sample_above(rng, eps);
    }
    return 0.0;
}

double LevyMeasureSpec::tail_index() const {
    switch (kind_) {
        case FamilyKind::PointMass: return kInf;
        case FamilyKind::ParetoTail: return p1_;
        case FamilyKind::StableLike: return p1_;
        case FamilyKind::LogTail: return 0.0;
        case FamilyKind::TruncatedExp: return kInf;
        case FamilyKind::Custom: return custom_.tail_index;
    }
    return kInf;
}

double LevyMeasureSpec::small_index() const {
    switch (kind_) {
        case FamilyKind::StableLike: return p1_;
        case FamilyKind::Custom: return custom_.small_index;
        default: return 0.0;
    }
}

std::string LevyMeasureSpec::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case FamilyKind::PointMass: os << "pointmass(z0=" << p1_ << ",mass=" << p2_ << ")"; break;
        case FamilyKind::ParetoTail: os << "pareto(alpha=" << p1_ << ",scale=" << p2_ << ")"; break;
        case FamilyKind::StableLike: os << "stable(alpha=" << p1_ << ",c=" << p2_ << ")"; break;
        case FamilyKind::LogTail: os << "logtail(beta=" << p1_ << ")"; break;
        case FamilyKind::TruncatedExp: os << "truncexp(rate=" << p1_ << ")"; break;
        case FamilyKind::Custom:
            os << "custom(tail_index=" << custom_.tail_index
               << ",small_index=" << custom_.small_index << ")";
            break;
    }
    return os.str();
}

void LevyMeasureSpec::cache_moments(const std::vector<double>& gammas) {
    for (double g : gammas) cached_moments_[g] = total_moment(g);
}

double ModelParams::D() const { return std::pow(2.0 * M_PI * kappa * t, 0.5 * d); }

double ModelParams::heat_kernel(double s, double r2) const {
    if (!(s > 0.0)) return 0.0;
    double lg = -0.5 * d * std::log(2.0 * M_PI * kappa * s) - r2 / (2.0 * kappa * s);
    return lg < -745.0 ? 0.0 : std::exp(lg);
}

void ModelParams::validate() const {
    if (d < 1) throw Error(ErrorCode::ConfigInvalid, "model: dimension d must be >= 1");
    if (!(kappa > 0.0)) throw Error(ErrorCode::ConfigInvalid, "model: kappa must be > 0");
    if (!(t > 0.0)) throw Error(ErrorCode::ConfigInvalid, "model: t must be > 0");
}

double Box::volume() const {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= hi[i] - lo[i];
    return v;
}

Box Box::centered(int d_, double half_width) {
    Box b;
    b.d = d_;
    for (int i = 0; i < d_; ++i) {
        b.lo[i] = -half_width;
        b.hi[i] = half_width;
    }
    return b;
}

namespace {

// Small-jump integral classifications are analytic per family: quadrature
// cannot certify divergence, so decisions rest on indices.
struct SmallJumpInfo {
    bool z2_finite;         // ∫_(0,1] z² λ(dz) < ∞
    bool z2log_finite;      // ∫_(0,1] z² |log z| λ(dz) < ∞
    bool z1p2d_finite;      // ∫_(0,1] z^{1+2/d} λ(dz) < ∞ (at the given d)
    bool z1_finite;         // ∫_(0,1] z λ(dz) < ∞
    bool z2d_local_finite;  // ∫_(0,1) z^{2/d} |log z|^{1{d=2}} λ(dz) < ∞
    bool z2d_finite;        // ∫_(0,1] z^{2/d} λ(dz) < ∞
};

SmallJumpInfo small_jump_info(const LevyMeasureSpec& spec, int d) {
    SmallJumpInfo info{true, true, true, true, true, true};
    const double a = spec.small_index();  // density ~ z^{-a-1} near 0 (0: no small mass)
    if (a <= 0.0) return info;            // finite activity or support bounded away from 0
    // power comparisons: ∫_0 z^{p-a-1} dz < ∞ iff p > a; a |log z| factor
    // still diverges at the boundary, so the comparison stays strict
    auto finite = [&](double p) { return p > a; };
    info.z2_finite = a < 2.0;  // guaranteed by the Lévy property
    info.z2log_finite = a < 2.0;
    info.z1p2d_finite = finite(1.0 + 2.0 / d);
    info.z1_finite = finite(1.0);
    info.z2d_finite = finite(2.0 / d);
    info.z2d_local_finite = finite(2.0 / d);
    return info;
}

}  // namespace

ConditionReport check_conditions(const LevyMeasureSpec& spec, const ModelParams& params) {
    params.validate();
    ConditionReport rep;
    const int d = params.d;
    rep.estimated = spec.kind() == FamilyKind::Custom;

    // log-moment half: ∫_(1,∞) (log z)^{d/2} λ(dz) < ∞
    bool log_moment = true;
    if (spec.kind() == FamilyKind::LogTail) {
        log_moment = spec.param("beta") > 0.5 * d;
    } else if (spec.kind() == FamilyKind::Custom) {
        log_moment = spec.tail_index() > 0.0;
        if (!log_moment && spec.has_density()) {
            // α = 0: estimate by quadrature and flag
            auto f = [&](double z) {
                return std::pow(std::log(z), 0.5 * d) * spec.density(z);
            };
            QuadOptions opt;
            opt.rel_tol = 1e-6;
            double v = integrate_upper(f, std::max(1.0, spec.support_lo()), opt);
            log_moment = std::isfinite(v) && v < 1e12;
        }
    }

    SmallJumpInfo sj = small_jump_info(spec, d);
    bool small_branch = d == 1 ? sj.z2_finite : (d == 2 ? sj.z2log_finite : sj.z1p2d_finite);

    rep.log_moment_finite = log_moment;
    rep.mild_solution_exists = log_moment && small_branch;
    rep.uncompensated_integral_exists = log_moment && sj.z1_finite;
    rep.local_sup_finite = sj.z2d_local_finite;
    rep.sup_infinite = !sj.z2d_finite;

    // ∃ q ∈ (0,2): M_q(1) < ∞; always true when the small-jump index is < 2
    const double si = spec.small_index();
    rep.q_condition = si < 2.0;
    if (rep.q_condition) rep.q_witness = si > 0.0 ? 0.5 * (si + 2.0) : 1.0;

    if (!log_moment) {
        std::ostringstream os;
        os << "log-moment condition fails: int_(1,inf) (log z)^{d/2} lambda(dz) = inf for "
           << spec.describe() << " at d=" << d;
        rep.failures.push_back(os.str());
    }
    if (!small_branch) {
        std::ostringstream os;
        os << "small-jump existence branch fails at d=" << d << " (";
        if (d == 1) os << "int_(0,1] z^2 lambda(dz) = inf";
        else if (d == 2) os << "int_(0,1] z^2 |log z| lambda(dz) = inf";
        else os << "int_(0,1] z^{1+2/d} lambda(dz) = inf";
        os << ")";
        rep.failures.push_back(os.str());
    }
    if (!rep.local_sup_finite)
        rep.failures.push_back(
            "local-supremum condition fails: int_(0,1) z^{2/d} |log z|^{1{d=2}} lambda(dz) = inf");
    if (rep.sup_infinite)
        rep.failures.push_back(
            "int_(0,1] z^{2/d} lambda(dz) = inf: local suprema are a.s. infinite");
    return rep;
}

PointCloud sample_jumps(const LevyMeasureSpec& spec, const ModelParams& params, const Box& box,
                        double eps, std::uint64_t seed) {
    params.validate();
    if (box.d != params.d) throw Error(ErrorCode::ConfigInvalid, "sample_jumps: box dimension mismatch");
    double rate = spec.activity(eps);
    if (!std::isfinite(rate))
        throw Error(ErrorCode::InfiniteIntensity,
                    "sample_jumps: lambda((eps,inf)) = inf; use a positive small-jump cutoff");
    double vol = box.volume();
    if (!(vol >= 0.0) || !std::isfinite(vol))
        throw Error(ErrorCode::ConfigInvalid, "sample_jumps: box must have finite volume");

    PointCloud cloud;
    cloud.eps = eps;
    cloud.box = box;
    cloud.t = params.t;
    cloud.seed = seed;

    Rng rng(seed);
    std::uint64_t n = rng.poisson(params.t * vol * rate);
    cloud.atoms.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Atom a;
        a.tau = rng.uniform(0.0, params.t);
        for (int k = 0; k < params.d; ++k) a.pos[k] = rng.uniform(box.lo[k], box.hi[k]);
        a.mark = spec.sample_one(rng, eps);
        cloud.atoms.push_back(a);
    }
    return cloud;
}

}  // namespace levyshe
