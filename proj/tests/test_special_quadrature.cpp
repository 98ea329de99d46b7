#include <doctest.h>

#include <cmath>

#include "levyshe/quadrature.hpp"
#include "levyshe/special_functions.hpp"

using namespace levyshe;

TEST_CASE("incomplete gamma basics") {
    CHECK(gamma_q(1.0, 2.5) == doctest::Approx(std::exp(-2.5)).epsilon(1e-13));
    CHECK(gamma_p(1.0, 2.5) == doctest::Approx(1.0 - std::exp(-2.5)).epsilon(1e-13));
    // Q(1/2, x) = erfc(sqrt(x))
    for (double x : {0.1, 1.0, 4.0, 30.0})
        CHECK(gamma_q(0.5, x) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-12));
    CHECK(gamma_upper(1.5, 0.0) == doctest::Approx(std::tgamma(1.5)).epsilon(1e-14));
    CHECK(beta_function(0.5, 1.5) == doctest::Approx(M_PI / 2.0).epsilon(1e-13));
    CHECK(chi_square_sf(1.0, 3.841458820694124) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("scaled upper gamma agrees with the exact product past its branch switch") {
    // the asymptotic branch starts at x = 500; e^x Γ(s,x) is still computable
    // exactly up to x ~ 700, so the two can be compared directly
    for (double s : {0.5, 1.0, 1.5, 2.0, 2.5}) {
        for (double x : {510.0, 600.0, 690.0}) {
            double exact = std::exp(x) * gamma_upper(s, x);
            CHECK(gamma_upper_scaled(s, x) == doctest::Approx(exact).epsilon(1e-11));
        }
    }
    for (double x : {0.5, 5.0, 40.0})
        CHECK(gamma_upper_scaled(1.5, x) ==
              doctest::Approx(std::exp(x) * gamma_upper(1.5, x)).epsilon(1e-12));
}

TEST_CASE("adaptive panels: smooth, kinked and singular integrands") {
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0, opt) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    QuadOptions opts = opt;
    opts.breakpoints = {0.3};
    CHECK(integrate([](double x) { return x < 0.3 ? 1.0 : 2.0; }, 0.0, 1.0, opts) ==
          doctest::Approx(0.3 + 1.4).epsilon(1e-12));
    // endpoint sqrt singularity at a tiny absolute scale (error scaling must
    // not stall on small magnitudes)
    double w0 = std::log(1e6);
    QuadOptions optb;
    optb.rel_tol = 1e-10;
    optb.breakpoints = {w0};
    auto g = [&](double w) { return w > w0 ? std::exp(-3.0 * w) * std::sqrt(w - w0) : 0.0; };
    double exact = std::exp(-3.0 * w0) * std::tgamma(1.5) / std::pow(3.0, 1.5);
    CHECK(integrate_upper(g, 0.0, optb) == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("semi-infinite and to-zero extensions") {
    QuadOptions opt;
    opt.rel_tol = 1e-11;
    CHECK(integrate_upper([](double x) { return std::exp(-x); }, 0.0, opt) ==
          doctest::Approx(1.0).epsilon(1e-10));
    // algebraic tail (1+u)^{-5/2}
    CHECK(integrate_upper([](double u) { return std::pow(1.0 + u, -2.5); }, 0.0, opt) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(integrate_to_zero([](double x) { return 1.0 / std::sqrt(x); }, 1.0, opt) ==
          doctest::Approx(2.0).epsilon(1e-10));
}
