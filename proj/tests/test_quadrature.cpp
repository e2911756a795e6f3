#include <doctest.h>

#include <svbarrier/errors.hpp>
#include <svbarrier/quadrature.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace svb;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("adaptive panel quadrature reproduces smooth integrals") {
    QuadConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;

    // cubic is exact for the Gauss rule before any subdivision
    auto cubic = [](double x) { return cdouble{x * x * x - 2.0 * x, 0.0}; };
    QuadResult r = integrate_gk(cubic, 0.0, 2.0, cfg);
    CHECK(std::abs(r.value.real()) < 1e-14);
    CHECK(r.evaluations == 15);

    // complex integrand with known antiderivative
    auto f = [](double x) { return std::exp(cdouble{0.0, 3.0 * x}); };
    r = integrate_gk(f, 0.0, 5.0, cfg);
    const cdouble want = (std::exp(cdouble{0.0, 15.0}) - 1.0) / cdouble{0.0, 3.0};
    CHECK(std::abs(r.value - want) < 1e-12);
}

TEST_CASE("adaptive quadrature resolves oscillation and reports failure honestly") {
    QuadConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-13;

    // int_0^20 sin(40 x)/(1+x) dx needs many panels but converges
    auto osc = [](double x) { return cdouble{std::sin(40.0 * x) / (1.0 + x), 0.0}; };
    QuadResult r = integrate_gk(osc, 0.0, 20.0, cfg);
    CHECK(r.err_est < 1e-9);
    CHECK(r.evaluations > 100);

    // same integrand with a starvation budget must throw, carrying its best value
    cfg.max_subdivisions = 3;
    bool threw = false;
    try {
        integrate_gk(osc, 0.0, 20.0, cfg);
    } catch (const ToleranceNotMet& e) {
        threw = true;
        CHECK(std::isfinite(e.best_value));
        CHECK(e.err_estimate > 0.0);
    }
    CHECK(threw);
}

TEST_CASE("vector engine matches the scalar engine component-wise") {
    QuadConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-13;

    auto f0 = [](double x) { return cdouble{std::sin(7.0 * x) * std::exp(-0.1 * x), 0.0}; };
    auto f1 = [](double x) { return cdouble{std::cos(3.0 * x) / (1.0 + x * x), 0.0}; };
    QuadResult s0 = integrate_gk(f0, 0.0, 12.0, cfg);
    QuadResult s1 = integrate_gk(f1, 0.0, 12.0, cfg);

    auto fv = [](double x, double* out) {
        out[0] = std::sin(7.0 * x) * std::exp(-0.1 * x);
        out[1] = std::cos(3.0 * x) / (1.0 + x * x);
    };
    VectorQuadResult v = integrate_gk_vec(2, fv, 0.0, 12.0, cfg);
    REQUIRE(v.converged);
    CHECK(v.value[0] == doctest::Approx(s0.value.real()).epsilon(1e-9));
    CHECK(v.value[1] == doctest::Approx(s1.value.real()).epsilon(1e-9));
}

TEST_CASE("vector engine reports non-convergence without throwing") {
    QuadConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-15;
    cfg.max_subdivisions = 2;

    auto fv = [](double x, double* out) { out[0] = std::sin(50.0 * x); };
    VectorQuadResult v = integrate_gk_vec(1, fv, 0.0, 10.0, cfg);
    CHECK_FALSE(v.converged);
    CHECK(std::isfinite(v.value[0]));
    CHECK(v.err_est[0] > 0.0);
}

TEST_CASE("vector engine honors pre-split edges") {
    QuadConfig cfg;
    auto fv = [](double x, double* out) { out[0] = std::exp(-x); };
    std::vector<double> edges{0.0, 1.0, 4.0, 10.0};
    VectorQuadResult v = integrate_gk_vec(1, fv, 0.0, 10.0, cfg, edges);
    CHECK(v.converged);
    CHECK(v.value[0] == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-10));

    CHECK_THROWS_AS(integrate_gk_vec(1, fv, 0.0, 10.0, cfg, {0.0, 5.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate_gk_vec(1, fv, 0.0, 10.0, cfg, {0.0, 5.0, 3.0, 10.0}),
                    std::invalid_argument);
}

TEST_CASE("oscillation-aware pre-split covers the interval with growing panels") {
    std::vector<double> e = split_panels(0.0, 500.0, 0.4);
    REQUIRE(e.size() >= 3);
    CHECK(e.front() == 0.0);
    CHECK(e.back() == 500.0);
    // first panel ~ 3 pi / osc
    CHECK(e[1] == doctest::Approx(3.0 * kPi / 0.4).epsilon(1e-12));
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] > e[i - 1]);
    // widths grow (except possibly the clipped last panel)
    for (std::size_t i = 2; i + 1 < e.size(); ++i)
        CHECK(e[i] - e[i - 1] > e[i - 1] - e[i - 2]);

    // tiny oscillation frequency: panel floor of 2 applies
    std::vector<double> e2 = split_panels(0.0, 10.0, 1e5);
    CHECK(e2[1] == doctest::Approx(2.0));

    CHECK_THROWS_AS(split_panels(1.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(split_panels(0.0, 1.0, 0.5, 0.9), std::invalid_argument);
}

TEST_CASE("composite Simpson nodes, weights and exactness") {
    std::vector<double> nodes, weights;
    simpson_rule(0.0, 1.0, 5, nodes, weights);
    REQUIRE(nodes.size() == 5);
    CHECK(nodes.front() == 0.0);
    CHECK(nodes.back() == 1.0);
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));

    // Simpson is exact on cubics
    auto cubic = [](double t) { return cdouble{t * t * t, 0.0}; };
    cdouble v = integrate_time_simpson(cubic, 0.0, 2.0, 5);
    CHECK(v.real() == doctest::Approx(4.0).epsilon(1e-14));

    CHECK_THROWS_AS(simpson_rule(0.0, 1.0, 4, nodes, weights), std::invalid_argument);
    CHECK_THROWS_AS(simpson_rule(0.0, 1.0, 1, nodes, weights), std::invalid_argument);
    CHECK_THROWS_AS(simpson_rule(1.0, 0.5, 3, nodes, weights), std::invalid_argument);
}

TEST_CASE("maturity-dependent truncation policy") {
    CHECK(choose_upsilon(1.0 / 24.0) == doctest::Approx(500.0));
    CHECK(choose_upsilon(0.999) == doctest::Approx(500.0));
    CHECK(choose_upsilon(1.0) == doctest::Approx(5000.0));
    CHECK(choose_upsilon(1.999) == doctest::Approx(5000.0));
    CHECK(choose_upsilon(2.0) == doctest::Approx(20000.0));
    CHECK_THROWS_AS(choose_upsilon(0.0), std::invalid_argument);
}
