#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "levyshe/errors.hpp"
#include "levyshe/levy_measure.hpp"
#include "levyshe/rng.hpp"
#include "levyshe/special_functions.hpp"
#include "levyshe/tail_analytics.hpp"

using namespace levyshe;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::vector<std::pair<std::string, LevyMeasureSpec>> builtin_families() {
    return {
        {"pointmass", LevyMeasureSpec::point_mass(1.0, 1.0)},
        {"pareto1", LevyMeasureSpec::pareto(1.0)},
        {"pareto3", LevyMeasureSpec::pareto(3.0)},
        {"logtail2", LevyMeasureSpec::log_tail(2.0)},
        {"stable15", LevyMeasureSpec::stable_like(1.5)},
        {"truncexp", LevyMeasureSpec::truncated_exp(2.0)},
    };
}

// test-own adaptive Simpson over a geometric pre-partition, independent of the
// library quadrature (the pre-partition keeps concentrated mass visible)
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
    auto simp = [](double fa, double fm, double fb, double h) {
        return h / 6.0 * (fa + 4.0 * fm + fb);
    };
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double a_, double m_, double b_, double fa, double fm, double fb, int d) -> double {
        double lm = 0.5 * (a_ + m_), rm = 0.5 * (m_ + b_);
        double flm = f(lm), frm = f(rm);
        double left = simp(fa, flm, fm, m_ - a_), right = simp(fm, frm, fb, b_ - m_);
        double whole = simp(fa, fm, fb, b_ - a_);
        if (d <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return rec(a_, lm, m_, fa, flm, fm, d - 1) + rec(m_, rm, b_, fm, frm, fb, d - 1);
    };
    double lo = std::max(a, 1e-24);  // below this the remaining mass is far under the check tolerance
    std::vector<double> cuts{lo};
    while (cuts.back() * 2.0 < b) cuts.push_back(cuts.back() * 2.0);
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double m = 0.5 * (cuts[i] + cuts[i + 1]);
        total += rec(cuts[i], m, cuts[i + 1], f(cuts[i]), f(m), f(cuts[i + 1]), depth);
    }
    return total;
}

}  // namespace

TEST_CASE("tail closed forms per family") {
    auto pm = LevyMeasureSpec::point_mass(1.0, 1.0);
    CHECK(pm.tail(0.5) == 1.0);  // mass above the level
    CHECK(pm.tail(2.0) == 0.0);  // mass below the level
    CHECK(pm.tail(1.0) == 0.0);  // right continuity at the atom

    auto pa = LevyMeasureSpec::pareto(1.0);
    CHECK(pa.tail(10.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(pa.tail(0.3) == 1.0);

    auto lt = LevyMeasureSpec::log_tail(2.0);
    CHECK(lt.tail(1.0) == 1.0);
    CHECK(lt.tail(std::exp(10.0)) == doctest::Approx(0.01).epsilon(1e-13));

    auto st = LevyMeasureSpec::stable_like(0.5, 2.0);
    CHECK(st.tail(4.0) == doctest::Approx(4.0 * std::pow(4.0, -0.5)).epsilon(1e-14));
}

TEST_CASE("truncated and total moments") {
    auto pa1 = LevyMeasureSpec::pareto(1.0);
    CHECK(pa1.truncated_moment(2.0, 4.0) == doctest::Approx(3.0).epsilon(1e-13));  // x - 1
    auto pm = LevyMeasureSpec::point_mass(1.0, 1.0);
    CHECK(pm.truncated_moment(3.0, 2.0) == 1.0);
    CHECK(pm.truncated_moment(3.0, 0.5) == 0.0);
    CHECK(pm.total_moment(1.0 + 2.0 / 3.0) == 1.0);

    CHECK(pa1.total_moment(2.0) == kInf);
    CHECK(LevyMeasureSpec::pareto(3.0).total_moment(2.0) == doctest::Approx(3.0).epsilon(1e-14));

    auto st = LevyMeasureSpec::stable_like(1.5);
    CHECK_THROWS_AS(st.truncated_moment(1.5, 2.0), Error);
    CHECK_THROWS_AS(st.truncated_moment(1.0, 2.0), Error);
    CHECK(st.truncated_moment(2.0, 3.0) == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-13));
    CHECK(st.total_moment(1.9) == kInf);

    auto te = LevyMeasureSpec::truncated_exp(2.0);
    CHECK(te.total_moment(1.0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(te.total_moment(2.0) == doctest::Approx(0.5).epsilon(1e-13));

    // logtail truncated moment against a brute-force Simpson in log z
    auto lt = LevyMeasureSpec::log_tail(2.0);
    double direct = simpson([&](double w) { return std::exp(3.0 * w) * 2.0 * std::pow(w, -3.0); },
                            1.0, std::log(50.0), 1e-13, 40);
    CHECK(lt.truncated_moment(3.0, 50.0) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("integration-by-parts identity ties moments to the tail") {
    // M_gamma(r) = gamma ∫_0^r u^{gamma-1} tail(u) du − r^gamma tail(r), with the
    // right side integrated independently of the moment implementation
    for (auto& [name, spec] : builtin_families()) {
        for (double gamma : {0.5, 1.0, 2.0, 3.0}) {
            if (gamma <= spec.small_index()) continue;  // divergent truncated moment
            for (double r : {0.5, 1.0, 2.0, 10.0, 100.0}) {
                double M = spec.truncated_moment(gamma, r);
                auto integrand = [&](double u) {
                    return u <= 0.0 ? 0.0 : gamma * std::pow(u, gamma - 1.0) * spec.tail(u);
                };
                double lhs = 0.0;
                double cut = std::min(r, spec.support_lo() > 0.0 ? spec.support_lo() : r);
                lhs += simpson(integrand, 0.0, cut, 1e-13, 48);
                if (r > cut) lhs += simpson(integrand, cut, r, 1e-13, 48);
                double rhs = lhs - std::pow(r, gamma) * spec.tail(r);
                INFO(name << " gamma=" << gamma << " r=" << r);
                CHECK(std::fabs(M - rhs) <= 1e-8 * (1.0 + M));
            }
        }
    }
}

TEST_CASE("tail nonincreasing, truncated moment nondecreasing") {
    for (auto& [name, spec] : builtin_families()) {
        double prev_tail = kInf;
        double prev_m = -1.0;
        for (int i = 0; i <= 60; ++i) {
            double r = 0.01 * std::pow(10.0, i / 10.0);
            INFO(name << " r=" << r);
            double t = spec.tail(r);
            CHECK(t <= prev_tail * (1.0 + 1e-14));
            prev_tail = t;
            double gamma = std::max(2.0, spec.small_index() + 0.5);
            double m = spec.truncated_moment(gamma, r);
            CHECK(m >= prev_m * (1.0 - 1e-14));
            prev_m = m;
        }
    }
}

TEST_CASE("partial moments agree with truncated-moment differences") {
    for (auto& [name, spec] : builtin_families()) {
        double gamma = std::max(2.0, spec.small_index() + 0.7);
        double a = 0.7, b = 19.0;
        INFO(name);
        CHECK(spec.partial_moment(gamma, a, b) ==
              doctest::Approx(spec.truncated_moment(gamma, b) - spec.truncated_moment(gamma, a))
                  .epsilon(1e-9));
    }
    // stable: partial moments exist below the divergence exponent on (a,b]
    auto st = LevyMeasureSpec::stable_like(1.5);
    CHECK(st.partial_moment(1.0, 0.5, 2.0) ==
          doctest::Approx((std::pow(2.0, -0.5) - std::pow(0.5, -0.5)) / (-0.5)).epsilon(1e-13));
}

TEST_CASE("custom measures run through the whole stack on declared indices") {
    // a custom measure re-expressing pareto(1.5): every evaluator must agree
    // with the built-in within quadrature tolerance
    CustomMeasure m;
    m.tail = [](double r) { return r <= 1.0 ? 1.0 : std::pow(r, -1.5); };
    m.density = [](double z) { return z <= 1.0 ? 0.0 : 1.5 * std::pow(z, -2.5); };
    m.sample_above = [](Rng& rng, double eps) {
        double a = std::max(eps, 1.0);
        return a * std::pow(rng.uniform_pos(), -1.0 / 1.5);
    };
    m.support_lo = 1.0;
    m.tail_index = 1.5;
    m.small_index = 0.0;
    auto cu = LevyMeasureSpec::custom(m);
    auto pa = LevyMeasureSpec::pareto(1.5);

    CHECK(cu.tail(7.0) == doctest::Approx(pa.tail(7.0)).epsilon(1e-14));
    CHECK(cu.truncated_moment(2.0, 9.0) ==
          doctest::Approx(pa.truncated_moment(2.0, 9.0)).epsilon(1e-9));
    CHECK(cu.partial_moment(1.0, 2.0, 5.0) ==
          doctest::Approx(pa.partial_moment(1.0, 2.0, 5.0)).epsilon(1e-9));

    ModelParams mp{1, 1.0 / (2.0 * M_PI), 1.0, {}};
    ConditionReport rep = check_conditions(cu, mp);
    CHECK(rep.estimated);  // decisions rest on the declared indices
    CHECK(rep.mild_solution_exists);
    CHECK(rep.local_sup_finite);
    CHECK(rep.q_condition);

    for (double r : {2.0, 50.0}) {
        double ec = contribution_tail(cu, mp, r);
        double eb = contribution_tail(pa, mp, r);
        CHECK(std::fabs(ec - eb) / eb < 1e-7);
        CHECK(contribution_tail_alternate(cu, mp, r) == doctest::Approx(ec).epsilon(1e-6));
        CHECK(kernel_peak_tail(cu, mp, r) ==
              doctest::Approx(kernel_peak_tail(pa, mp, r)).epsilon(1e-7));
    }
    CHECK(contribution_tail_asymptotic(cu, mp, 1e4) ==
          doctest::Approx(contribution_tail_asymptotic(pa, mp, 1e4)).epsilon(1e-9));

    Box box = Box::centered(1, 1.0);
    PointCloud cloud = sample_jumps(cu, mp, box, 0.0, 44);
    for (const Atom& a : cloud.atoms) CHECK(a.mark >= 1.0);

    // a custom measure without a density cannot back quadrature evaluations
    CustomMeasure tail_only;
    tail_only.tail = m.tail;
    tail_only.support_lo = 1.0;
    tail_only.tail_index = 1.5;
    auto cu2 = LevyMeasureSpec::custom(tail_only);
    CHECK_THROWS_AS(cu2.truncated_moment(2.0, 9.0), Error);
}

TEST_CASE("requested moments can be cached on the spec") {
    auto pa = LevyMeasureSpec::pareto(3.0);
    pa.cache_moments({1.0, 2.0, 4.0});
    CHECK(pa.cached_moments().at(1.0) == doctest::Approx(1.5));
    CHECK(pa.cached_moments().at(2.0) == doctest::Approx(3.0));
    CHECK(pa.cached_moments().at(4.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("condition report: representative cases") {
    ModelParams d1{1, 1.0 / (2.0 * M_PI), 1.0, {}};
    ModelParams d2 = d1;
    d2.d = 2;
    ModelParams d3 = d1;
    d3.d = 3;

    auto pm = LevyMeasureSpec::point_mass(1.0, 1.0);
    ConditionReport r = check_conditions(pm, d2);
    CHECK(r.mild_solution_exists);
    CHECK(r.uncompensated_integral_exists);
    CHECK(r.local_sup_finite);
    CHECK(r.q_condition);
    CHECK_FALSE(r.sup_infinite);

    auto st19 = LevyMeasureSpec::stable_like(1.9);
    r = check_conditions(st19, d1);
    CHECK(r.mild_solution_exists);
    CHECK_FALSE(r.uncompensated_integral_exists);  // ∫_0^1 z λ(dz) = ∞
    CHECK(r.q_condition);
    CHECK(*r.q_witness == doctest::Approx(1.95));

    auto lt04 = LevyMeasureSpec::log_tail(0.4);
    r = check_conditions(lt04, d1);
    CHECK_FALSE(r.mild_solution_exists);  // needs beta > d/2
    CHECK_FALSE(r.failures.empty());

    r = check_conditions(st19, d3);
    CHECK_FALSE(r.mild_solution_exists);  // 1.9 > 1 + 2/3
    CHECK(r.sup_infinite);                // 1.9 >= 2/3
}

TEST_CASE("jump sampling: determinism, marks and counts") {
    ModelParams mp{1, 1.0 / (2.0 * M_PI), 1.0, {}};
    Box box = Box::centered(1, 1.0);

    auto pm = LevyMeasureSpec::point_mass(1.0, 1.0);
    PointCloud c1 = sample_jumps(pm, mp, box, 0.0, 42);
    PointCloud c2 = sample_jumps(pm, mp, box, 0.0, 42);
    REQUIRE(c1.atoms.size() == c2.atoms.size());
    for (std::size_t i = 0; i < c1.atoms.size(); ++i) {
        CHECK(c1.atoms[i].tau == c2.atoms[i].tau);
        CHECK(c1.atoms[i].pos[0] == c2.atoms[i].pos[0]);
        CHECK(c1.atoms[i].mark == 1.0);
        CHECK(c1.atoms[i].tau <= mp.t);
    }

    // mean count for pareto(1), cutoff 1, |box| = 2, t = 1: expect 2
    auto pa = LevyMeasureSpec::pareto(1.0);
    double total = 0;
    int n = 4000;
    for (int i = 0; i < n; ++i) {
        Rng rs(7, i);
        total += sample_jumps(pa, mp, box, 1.0, rs.next()).atoms.size();
    }
    double mean = total / n;
    double se = std::sqrt(2.0 / n);
    CHECK(std::fabs(mean - 2.0) <= 4.0 * se);

    // infinite intensity is refused
    auto st = LevyMeasureSpec::stable_like(1.0);
    CHECK_THROWS_AS(sample_jumps(st, mp, box, 0.0, 1), Error);
}

TEST_CASE("mark law: empirical CDF of pareto(2) jumps within KS 0.01") {
    auto pa = LevyMeasureSpec::pareto(2.0);
    Rng rng(2024);
    const int n = 100000;
    std::vector<double> marks(n);
    for (int i = 0; i < n; ++i) marks[i] = pa.sample_one(rng, 1.0);
    std::sort(marks.begin(), marks.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        double F = 1.0 - std::pow(marks[i], -2.0);
        ks = std::max(ks, std::fabs(F - static_cast<double>(i + 1) / n));
        ks = std::max(ks, std::fabs(F - static_cast<double>(i) / n));
    }
    CHECK(ks < 0.01);
}

TEST_CASE("atom counts pass a chi-square test against the Poisson law") {
    ModelParams mp{1, 1.0 / (2.0 * M_PI), 1.0, {}};
    Box box = Box::centered(1, 1.5);  // mean = t |box| lambda_bar(eps) = 3
    auto pm = LevyMeasureSpec::point_mass(1.0, 1.0);
    const double mean = 3.0;
    const int n = 10000;
    std::vector<int> hist(64, 0);
    for (int i = 0; i < n; ++i) {
        Rng rs(11, i);
        std::size_t k = sample_jumps(pm, mp, box, 0.0, rs.next()).atoms.size();
        ++hist[std::min<std::size_t>(k, hist.size() - 1)];
    }
    // merge bins with expected < 5 into the tail
    std::vector<double> expected;
    std::vector<double> observed;
    double pk = std::exp(-mean);
    double tail_exp = n, tail_obs = n;
    for (std::size_t k = 0; k < hist.size(); ++k) {
        double e = n * pk;
        if (e < 5.0) break;
        expected.push_back(e);
        observed.push_back(hist[k]);
        tail_exp -= e;
        tail_obs -= hist[k];
        pk *= mean / static_cast<double>(k + 1);
    }
    expected.push_back(std::max(tail_exp, 1e-12));
    observed.push_back(tail_obs);
    double stat = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    double pvalue = chi_square_sf(static_cast<double>(expected.size() - 1), stat);
    CHECK(pvalue >= 1e-3);
}

TEST_CASE("large-mean Poisson draws pass the chi-square test (rejection sampler path)") {
    const double mean = 40.0;
    const int n = 10000;
    Rng rng(90210);
    std::vector<int> hist(120, 0);
    for (int i = 0; i < n; ++i) ++hist[std::min<std::uint64_t>(rng.poisson(mean), hist.size() - 1)];
    std::vector<double> expected, observed;
    // merge the left and right tails so every cell expects >= 5
    double tail_exp = n, tail_obs = n;
    double logmean = std::log(mean);
    for (std::size_t k = 0; k < hist.size(); ++k) {
        double e = n * std::exp(k * logmean - mean - std::lgamma(k + 1.0));
        if (e < 5.0) continue;
        expected.push_back(e);
        observed.push_back(hist[k]);
        tail_exp -= e;
        tail_obs -= hist[k];
    }
    expected.push_back(std::max(tail_exp, 1e-9));
    observed.push_back(tail_obs);
    double stat = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    CHECK(chi_square_sf(static_cast<double>(expected.size() - 1), stat) >= 1e-3);
}
