#include "levyshe/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "levyshe/errors.hpp"
#include "levyshe/special_functions.hpp"

namespace levyshe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) {
    Rng r(master, index);
    return r.next();
}

double squared_distance(const std::array<double, 3>& a, const std::array<double, 3>& b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

// smallest padding P with Q(d/2, P²/(2κt)) <= tol, i.e. the Gaussian mass an
// atom can send past the padded boundary
double mean_based_padding(const ModelParams& params, double tol) {
    double lo = 0.0, hi = 1.0;
    while (gamma_q(0.5 * params.d, hi) > tol && hi < 1e6) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (gamma_q(0.5 * params.d, mid) > tol)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(2.0 * params.kappa * params.t * hi);
}

// cutoff with at most `cap` expected atoms per unit space-time volume budget
double count_capped_eps(const LevyMeasureSpec& spec, double budget, double cap) {
    if (spec.activity(0.0) * budget <= cap) return 0.0;
    double lo = 1e-14, hi = 1.0;
    while (spec.activity(hi) * budget > cap && hi < 1e9) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = std::sqrt(lo * hi);
        if (spec.activity(mid) * budget > cap)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

struct FieldSetup {
    double eps = 0.0;
    double padding = 0.0;
    bool summable = true;
    double comp_offset = 0.0;  // deterministic drift/compensator per unit field
    double bias = 0.0;
    bool sup_ok = true;
};

FieldSetup prepare_field(const LevyMeasureSpec& spec, const ModelParams& params,
                         const GridSpec& grid, double eps, double padding) {
    ConditionReport rep = check_conditions(spec, params);
    if (!rep.mild_solution_exists) {
        std::string msg = "simulate_field: existence conditions fail";
        for (const auto& f : rep.failures) msg += "; " + f;
        throw Error(ErrorCode::ConditionViolated, msg);
    }
    FieldSetup st;
    st.sup_ok = !rep.sup_infinite;
    st.summable = rep.uncompensated_integral_exists;
    if (!st.summable && params.d >= 2)
        throw Error(ErrorCode::ConditionViolated,
                    "simulate_field: d >= 2 with non-summable small jumps is not supported "
                    "(the compensated remainder has unbounded pointwise variance)");

    const double m1 = spec.total_moment(1.0);
    if (padding >= 0.0) {
        st.padding = padding;
    } else if (std::isfinite(m1)) {
        st.padding = mean_based_padding(params, 1e-8);
    } else {
        // heavy mark tails: no usable mean; pick the padding that keeps the
        // exclusion probability tiny at the kernel scale and report it as bias
        double r_ref = std::pow(2.0 * M_PI * params.kappa * params.t, -0.5 * params.d) * 1e-3;
        double R = std::sqrt(2.0 * params.kappa * params.t);
        while (contribution_tail_outside(spec, params, r_ref, R) > 1e-6 && R < 1e4) R *= 2.0;
        st.padding = R;
        st.bias += 1e-6;
    }

    double vol = 1.0;
    for (int i = 0; i < params.d; ++i)
        vol *= (grid.hi[i] - grid.lo[i]) + 2.0 * st.padding;
    if (eps >= 0.0) {
        st.eps = eps;
        if (!std::isfinite(spec.activity(eps)))
            throw Error(ErrorCode::InfiniteIntensity,
                        "simulate_field: infinite atom intensity at the requested cutoff");
    } else if (std::isfinite(spec.activity(0.0))) {
        st.eps = 0.0;
    } else {
        // automatic cutoff: keep the omitted-jump std below 1e-4 of the field
        // std when second moments exist; without second moments the cutoff is
        // a user decision (the bias cannot be tied to the field scale)
        double m2 = spec.total_moment(2.0);
        if (!std::isfinite(m2))
            throw Error(ErrorCode::ConfigInvalid,
                        "simulate_field: set the small-jump cutoff explicitly for "
                        "infinite-activity measures without second moments; the omitted "
                        "contribution is reported in bias_bound");
        double lo = 1e-14, hi = 1.0;
        while (spec.partial_moment(2.0, 0.0, lo) > 1e-8 * m2 && lo > 1e-300) lo *= 0.1;
        for (int i = 0; i < 200; ++i) {
            double mid = std::sqrt(lo * hi);
            if (spec.partial_moment(2.0, 0.0, mid) > 1e-8 * m2)
                hi = mid;
            else
                lo = mid;
        }
        st.eps = std::max(lo, count_capped_eps(spec, params.t * vol, 1e7));
    }

    // omitted small jumps
    if (st.eps > 0.0) {
        double m2_below = spec.partial_moment(2.0, 0.0, st.eps);
        if (st.summable) {
            double mean_below = spec.partial_moment(1.0, 0.0, st.eps);
            st.comp_offset = params.t * mean_below;  // add back the omitted mean
            if (params.d == 1) {
                st.bias += std::sqrt(params.t / (M_PI * params.kappa) * m2_below);
            } else {
                st.bias += 2.0 * params.t * mean_below;  // L1 bound; variance diverges for d >= 2
            }
        }
    }
    if (!st.summable) {
        if (st.eps > 1.0)
            throw Error(ErrorCode::ConfigInvalid,
                        "simulate_field: the compensated pathway needs a cutoff <= 1 "
                        "(jumps in (1, eps] would be dropped uncompensated)");
        // d = 1 compensated pathway: field = m t + Σ g ζ − t ∫_(eps,1] z λ(dz)
        double drift = params.drift.value_or(0.0);
        st.comp_offset = params.t * (drift - spec.partial_moment(1.0, std::min(st.eps, 1.0), 1.0));
        st.bias += std::sqrt(params.t / (M_PI * params.kappa) *
                             spec.partial_moment(2.0, 0.0, st.eps));
    } else if (params.drift.has_value()) {
        // drift override relative to the summable convention m = ∫_(0,1] z λ(dz)
        st.comp_offset += params.t * (*params.drift - spec.partial_moment(1.0, 0.0, 1.0));
    }

    // spatial truncation bias at any grid point
    if (std::isfinite(m1)) {
        double x = st.padding * st.padding / (2.0 * params.kappa * params.t);
        st.bias += params.t * m1 * gamma_q(0.5 * params.d, x);
    }
    return st;
}

}  // namespace

GridSpec GridSpec::single_point(int d, std::array<double, 3> x) {
    GridSpec g;
    g.d = d;
    g.lo = x;
    g.hi = x;
    g.n = {{1, 1, 1}};
    return g;
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n[i]);
    return s;
}

std::array<double, 3> GridSpec::point(std::size_t flat) const {
    std::array<double, 3> x{{0, 0, 0}};
    std::size_t rem = flat;
    for (int i = d - 1; i >= 0; --i) {
        std::size_t ni = static_cast<std::size_t>(n[i]);
        std::size_t idx = rem % ni;
        rem /= ni;
        x[i] = n[i] == 1 ? 0.5 * (lo[i] + hi[i])
                         : lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx) / (n[i] - 1);
    }
    return x;
}

FieldSample simulate_field(const LevyMeasureSpec& spec, const ModelParams& params,
                           const GridSpec& grid, double eps, double padding, std::uint64_t seed) {
    if (grid.d != params.d) throw Error(ErrorCode::ConfigInvalid, "simulate_field: grid dimension mismatch");
    if (params.d > 3) throw Error(ErrorCode::ConfigInvalid, "simulate_field: d <= 3 supported");
    FieldSetup st = prepare_field(spec, params, grid, eps, padding);

    Box box;
    box.d = params.d;
    for (int i = 0; i < params.d; ++i) {
        box.lo[i] = grid.lo[i] - st.padding;
        box.hi[i] = grid.hi[i] + st.padding;
    }
    PointCloud cloud = sample_jumps(spec, params, box, st.eps, seed);

    FieldSample out;
    out.grid = grid;
    out.values.assign(grid.size(), st.comp_offset);
    out.bias_bound = st.bias;
    out.padding = st.padding;
    out.eps = st.eps;
    out.n_atoms = cloud.atoms.size();
    out.sup_queries_valid = st.sup_ok;
    out.seed = seed;

    const std::size_t npts = out.values.size();
    for (const Atom& a : cloud.atoms) {
        double s = params.t - a.tau;
        for (std::size_t i = 0; i < npts; ++i) {
            double r2 = squared_distance(grid.point(i), a.pos, params.d);
            out.values[i] += params.heat_kernel(s, r2) * a.mark;
        }
    }
    return out;
}

MaxContributionSampler::MaxContributionSampler(const LevyMeasureSpec& spec,
                                               const ModelParams& params, double r_min,
                                               double exclusion_prob, double eps, double padding)
    : spec_(spec), params_(params) {
    if (!(r_min > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "max-contribution sampler: r_min > 0 required");
    ConditionReport rep = check_conditions(spec, params);
    if (!rep.mild_solution_exists)
        throw Error(ErrorCode::ConditionViolated,
                    "max-contribution sampler requires the existence conditions");
    double budget = exclusion_prob;
    // cutoff: exclude marks only if their contribution intensity above r_min
    // stays within half the budget
    if (eps >= 0.0) {
        eps_ = eps;
    } else if (std::isfinite(spec.activity(0.0))) {
        eps_ = 0.0;
    } else {
        double e = 1.0;
        while (e > 1e-13 && contribution_tail_below(spec, params, r_min, e) > 0.5 * budget)
            e *= 0.5;
        eps_ = e;
    }
    double excl_marks =
        eps_ > 0.0 ? contribution_tail_below(spec, params, r_min, eps_) : 0.0;
    if (padding >= 0.0) {
        padding_ = padding;
    } else {
        double R = std::sqrt(2.0 * params.kappa * params.t);
        while (R < 1e5 &&
               contribution_tail_outside(spec, params, r_min, R) > 0.5 * budget)
            R *= 2.0;
        padding_ = R;
    }
    exclusion_bound_ = excl_marks + contribution_tail_outside(spec, params, r_min, padding_);
}

double MaxContributionSampler::sample(std::uint64_t seed) const {
    Box box = Box::centered(params_.d, padding_);
    PointCloud cloud = sample_jumps(spec_, params_, box, eps_, seed);
    double best = 0.0;  // sup over the empty set
    std::array<double, 3> origin{{0, 0, 0}};
    for (const Atom& a : cloud.atoms) {
        double g = params_.heat_kernel(params_.t - a.tau, squared_distance(origin, a.pos, params_.d));
        best = std::max(best, g * a.mark);
    }
    return best;
}

double simulate_max_contribution(const LevyMeasureSpec& spec, const ModelParams& params,
                                 double eps, double padding, std::uint64_t seed, double r_min) {
    MaxContributionSampler sampler(spec, params, r_min, 1e-6, eps, padding);
    return sampler.sample(seed);
}

RegionFunctionals simulate_region_functionals(const LevyMeasureSpec& spec,
                                              const ModelParams& params, const Box& A,
                                              std::uint64_t seed) {
    ConditionReport rep = check_conditions(spec, params);
    if (!rep.local_sup_finite)
        throw Error(ErrorCode::ConditionViolated,
                    "region functionals exist iff int_(0,1) z^{2/d} |log z|^{1{d=2}} lambda(dz) < inf");
    double eps = 0.0;
    double bias = 0.0;
    if (!std::isfinite(spec.activity(0.0))) {
        if (params.d >= 2)
            throw Error(ErrorCode::InfiniteIntensity,
                        "region functionals with infinite activity are only simulable for d = 1");
        // d = 1: atoms below the cutoff can only enter the thresholded sum when
        // their kernel peak beats 1; keep that intensity negligible
        double volA = A.volume();
        eps = 1.0;
        auto missed = [&](double e) {
            double cap = std::min(e, params.D());
            double m = volA * spec.partial_moment(2.0, 0.0, cap) / (2.0 * M_PI * params.kappa);
            if (e > cap) m += volA * params.t * (spec.tail(cap) - spec.tail(e));
            return m;
        };
        while (eps > 1e-13 && (missed(eps) > 1e-9 ||
                               spec.activity(eps) * params.t * volA > 1e7))
            eps *= 0.5;
        bias = missed(eps);
    }
    PointCloud cloud = sample_jumps(spec, params, A, eps, seed);
    RegionFunctionals out;
    out.n_atoms = cloud.atoms.size();
    out.bias_bound = bias;
    const double c = 2.0 * M_PI * params.kappa;
    for (const Atom& a : cloud.atoms) {
        double peak = std::pow(c * (params.t - a.tau), -0.5 * params.d) * a.mark;
        out.peak = std::max(out.peak, peak);
        if (params.d == 1) {
            if (peak > 1.0) out.sum += peak;
        } else {
            out.sum += peak;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Estimand estimand_from_name(const std::string& name) {
    if (name == "ypoint") return Estimand::PointValue;
    if (name == "ybar") return Estimand::MaxContribution;
    if (name == "xa") return Estimand::RegionSum;
    if (name == "xbara") return Estimand::RegionPeak;
    if (name == "supa") return Estimand::RegionSupGrid;
    throw Error(ErrorCode::ConfigInvalid, "unknown estimand '" + name + "'");
}

const char* estimand_name(Estimand e) {
    switch (e) {
        case Estimand::PointValue: return "ypoint";
        case Estimand::MaxContribution: return "ybar";
        case Estimand::RegionSum: return "xa";
        case Estimand::RegionPeak: return "xbara";
        case Estimand::RegionSupGrid: return "supa";
    }
    return "?";
}

double wilson_halfwidth(std::uint64_t k, std::uint64_t n) {
    const double z = 1.959963984540054;
    double nn = static_cast<double>(n);
    double p = static_cast<double>(k) / nn;
    double denom = 1.0 + z * z / nn;
    return z / denom * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn));
}

double wilson_center(std::uint64_t k, std::uint64_t n) {
    const double z = 1.959963984540054;
    double nn = static_cast<double>(n);
    double p = static_cast<double>(k) / nn;
    return (p + z * z / (2.0 * nn)) / (1.0 + z * z / nn);
}

McResult mc_tail(Estimand estimand, const LevyMeasureSpec& spec, const ModelParams& params,
                 const std::vector<double>& levels, const McOptions& opt) {
    if (levels.empty() || !std::is_sorted(levels.begin(), levels.end()))
        throw Error(ErrorCode::ConfigInvalid, "mc_tail: levels must be ascending and nonempty");
    if (opt.n_replicates < 1000)
        throw Error(ErrorCode::ConfigInvalid, "mc_tail: at least 1e3 replicates required");

    const std::size_t n = opt.n_replicates;
    const std::size_t nl = levels.size();

    // per-estimand fixed setup so every replicate shares cutoffs and boxes
    std::unique_ptr<MaxContributionSampler> ybar;
    double field_eps = -1.0, field_padding = -1.0;
    GridSpec point_grid = GridSpec::single_point(params.d);
    GridSpec fine_grid, coarse_grid;
    if (estimand == Estimand::MaxContribution) {
        ybar = std::make_unique<MaxContributionSampler>(spec, params, levels.front(), 1e-6,
                                                        opt.eps, opt.padding);
    } else if (estimand == Estimand::PointValue) {
        FieldSetup st = prepare_field(spec, params, point_grid, opt.eps, opt.padding);
        field_eps = st.eps;
        field_padding = st.padding;
    } else if (estimand == Estimand::RegionSupGrid) {
        if (opt.region.d != params.d)
            throw Error(ErrorCode::ConfigInvalid, "mc_tail: region dimension mismatch");
        ConditionReport rep = check_conditions(spec, params);
        if (rep.sup_infinite)
            throw Error(ErrorCode::SupInfinite,
                        "mc_tail: grid supremum refused, local suprema are a.s. infinite");
        fine_grid.d = coarse_grid.d = params.d;
        for (int i = 0; i < params.d; ++i) {
            fine_grid.lo[i] = coarse_grid.lo[i] = opt.region.lo[i];
            fine_grid.hi[i] = coarse_grid.hi[i] = opt.region.hi[i];
            coarse_grid.n[i] = std::max(2, opt.grid_n);
            fine_grid.n[i] = 2 * coarse_grid.n[i] - 1;
        }
        FieldSetup st = prepare_field(spec, params, fine_grid, opt.eps, opt.padding);
        field_eps = st.eps;
        field_padding = st.padding;
    } else {
        if (opt.region.d != params.d)
            throw Error(ErrorCode::ConfigInvalid, "mc_tail: region dimension mismatch");
    }

    auto one_value = [&](std::uint64_t rep_index, double& gap) -> double {
        std::uint64_t s = replicate_seed(opt.seed, rep_index);
        switch (estimand) {
            case Estimand::PointValue:
                return simulate_field(spec, params, point_grid, field_eps, field_padding, s)
                    .values[0];
            case Estimand::MaxContribution: return ybar->sample(s);
            case Estimand::RegionSum:
                return simulate_region_functionals(spec, params, opt.region, s).sum;
            case Estimand::RegionPeak:
                return simulate_region_functionals(spec, params, opt.region, s).peak;
            case Estimand::RegionSupGrid: {
                FieldSample fine = simulate_field(spec, params, fine_grid, field_eps,
                                                  field_padding, s);
                FieldSample coarse = simulate_field(spec, params, coarse_grid, field_eps,
                                                    field_padding, s);
                double mf = *std::max_element(fine.values.begin(), fine.values.end());
                double mc = *std::max_element(coarse.values.begin(), coarse.values.end());
                gap += mf - mc;
                return mf;
            }
        }
        return 0.0;
    };

    unsigned hw = std::thread::hardware_concurrency();
    unsigned n_threads = opt.threads > 0 ? static_cast<unsigned>(opt.threads) : std::max(1u, hw);
    n_threads = std::min<unsigned>(n_threads, 64);
    if (n < 4 * n_threads) n_threads = 1;

    std::vector<std::vector<std::uint64_t>> counts(n_threads,
                                                   std::vector<std::uint64_t>(nl, 0));
    std::vector<double> gaps(n_threads, 0.0);
    std::vector<std::vector<double>> kept(n_threads);

    auto worker = [&](unsigned tid) {
        std::size_t lo = n * tid / n_threads;
        std::size_t hi = n * (tid + 1) / n_threads;
        auto& cnt = counts[tid];
        for (std::size_t i = lo; i < hi; ++i) {
            double v = one_value(i, gaps[tid]);
            if (opt.keep_values) kept[tid].push_back(v);
            // levels ascending: first level the value fails to exceed ends the scan
            for (std::size_t j = 0; j < nl; ++j) {
                if (v > levels[j])
                    ++cnt[j];
                else
                    break;
            }
        }
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned tth = 0; tth < n_threads; ++tth) pool.emplace_back(worker, tth);
        for (auto& th : pool) th.join();
    }

    std::vector<std::uint64_t> total(nl, 0);
    double gap_total = 0.0;
    for (unsigned tid = 0; tid < n_threads; ++tid) {
        for (std::size_t j = 0; j < nl; ++j) total[j] += counts[tid][j];
        gap_total += gaps[tid];
    }

    McResult res;
    res.n_replicates = n;
    res.refinement_gap_mean = estimand == Estimand::RegionSupGrid ? gap_total / n : 0.0;
    res.curve.kind = CurveKind::Empirical;
    res.curve.levels = levels;
    res.curve.values.resize(nl);
    res.curve.ci_halfwidth.resize(nl);
    for (std::size_t j = 0; j < nl; ++j) {
        res.curve.values[j] = static_cast<double>(total[j]) / static_cast<double>(n);
        res.curve.ci_halfwidth[j] = wilson_halfwidth(total[j], n);
    }
    std::ostringstream meta;
    meta << "estimand=" << estimand_name(estimand) << " n=" << n << " seed=" << opt.seed
         << " measure=" << spec.describe();
    if (estimand == Estimand::RegionSupGrid)
        meta << " refinement_gap_mean=" << res.refinement_gap_mean;
    res.curve.meta = meta.str();
    if (opt.keep_values)
        for (auto& kv : kept) res.values.insert(res.values.end(), kv.begin(), kv.end());
    return res;
}

}  // namespace levyshe
