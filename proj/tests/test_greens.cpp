#include <doctest.h>

#include <svbarrier/errors.hpp>
#include <svbarrier/greens.hpp>
#include <svbarrier/specfun.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

using namespace svb;

namespace {

ModelInputs table_inputs(double horizon) {
    ModelInputs in;
    in.theta0 = 0.1;
    in.sigma0 = 0.3;
    in.rho0 = -0.7;
    in.theta_k = 0.3;
    in.sigma_k = 0.2;
    in.r = 0.02;
    in.q = 0.01;
    in.segments = 10;
    in.horizon = horizon;
    return in;
}

double integrate_real(const std::function<double(double)>& f, double a, double b,
                      double rel = 1e-9) {
    QuadConfig cfg;
    cfg.rel_tol = rel;
    cfg.abs_tol = 1e-13;
    auto g = [&](double x) { return cdouble{f(x), 0.0}; };
    return integrate_gk(g, a, b, cfg).value.real();
}

} // namespace

TEST_CASE("transition density integrates to one") {
    const double b = 1.5;
    for (double tau : {0.05, 0.5}) {
        for (double z : {0.3, 1.0, 3.0}) {
            const double upper = z + 25.0 * std::sqrt(tau);
            const double mass = integrate_real(
                [&](double zeta) { return green({tau, 0.0}, {z, 0.0}, {zeta, 0.0}, b).real(); },
                0.0, upper);
            CHECK_MESSAGE(std::abs(mass - 1.0) < 1e-7, "tau=", tau, " z=", z,
                          " mass=", mass);
        }
    }
}

TEST_CASE("transition density normalizes for other drift orders too") {
    for (double b : {0.5, 1.0, 2.5}) {
        const double mass = integrate_real(
            [&](double zeta) { return green({0.2, 0.0}, {1.1, 0.0}, {zeta, 0.0}, b).real(); },
            0.0, 1.1 + 25.0 * std::sqrt(0.2));
        CHECK_MESSAGE(std::abs(mass - 1.0) < 1e-7, "b=", b, " mass=", mass);
    }
}

TEST_CASE("detailed-balance exponent links the two argument orders") {
    // G(tau,z,zeta)/G(tau,zeta,z) = (zeta/z)^{2b} exactly
    const double b = 1.5, tau = 0.17, z = 0.8, zeta = 1.9;
    const double lhs = green({tau, 0.0}, {z, 0.0}, {zeta, 0.0}, b).real() /
                       green({tau, 0.0}, {zeta, 0.0}, {z, 0.0}, b).real();
    CHECK(lhs == doctest::Approx(std::pow(zeta / z, 2.0 * b)).epsilon(1e-12));
}

TEST_CASE("Chapman-Kolmogorov composition") {
    // int G(t1,z,zeta) G(t2,zeta,w) dzeta = G(t1+t2,z,w)
    const double b = 1.5, t1 = 0.1, t2 = 0.15, z = 1.0, w = 1.2;
    const double composed = integrate_real(
        [&](double zeta) {
            return (green({t1, 0.0}, {z, 0.0}, {zeta, 0.0}, b) *
                    green({t2, 0.0}, {zeta, 0.0}, {w, 0.0}, b))
                .real();
        },
        0.0, 8.0);
    const double direct = green({t1 + t2, 0.0}, {z, 0.0}, {w, 0.0}, b).real();
    CHECK(composed == doctest::Approx(direct).epsilon(1e-7));
}

TEST_CASE("density guards") {
    CHECK_THROWS_AS(green({0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, 1.5), DiagonalDegeneracy);
    CHECK_THROWS_AS(green({1e-15, 0.0}, {1.0, 0.0}, {1.0, 0.0}, 1.5), DiagonalDegeneracy);
    // complex tau off the degenerate ball is fine
    CHECK(std::isfinite(std::abs(green({0.05, 0.01}, {1.0, 0.1}, {0.9, 0.0}, 1.5))));
}

TEST_CASE("raw kernel matches an independent reassembly from cache state") {
    HestonModel mdl = build_model(table_inputs(0.5));
    SqrtP sp{Branch::MinusIXi, 2.0};
    std::vector<double> grid{0.1, 0.3, 0.5};
    TransformCache cache = build_cache(mdl, sp, grid, 4);

    const double v = 0.5, v_prime = 0.45;
    const double y_s = std::log(40.0 / 60.0);
    const double b = mdl.b();

    const cdouble got = kernel_frak(cache, 0, 1, v, v_prime, y_s, b);

    // reassemble from first principles: plain formula arithmetic plus the
    // unscaled Bessel, no log-space tricks
    const TransformPoint at_t = cache_point(cache, 0);
    const TransformPoint at_s = cache_point(cache, 1);
    const cdouble dtau = at_t.tau - at_s.tau;
    const cdouble z = at_t.g * std::sqrt(v);
    const cdouble zeta = at_s.g * std::sqrt(v_prime);
    const cdouble g_direct = std::sqrt(z * zeta) / dtau * std::pow(zeta / z, b) *
                             std::exp(-(z * z + zeta * zeta) / (2.0 * dtau)) *
                             bessel_i(b - 0.5, z * zeta / dtau);
    const cdouble want = std::sqrt(v_prime) * at_s.g * g_direct *
                         std::exp(-y_s * sp.value() + at_t.alpha * v + at_t.beta -
                                  at_s.beta - at_s.alpha * v_prime);
    CHECK(std::abs(got - want) < 1e-10 * std::abs(want));

    // the two overloads are the same function
    const cdouble other = kernel_frak(at_t, at_s, v, v_prime, y_s, sp.value(), b);
    CHECK(std::abs(got - other) == 0.0);

    CHECK_THROWS_AS(kernel_frak(cache, 1, 1, v, v_prime, y_s, b), DiagonalDegeneracy);
    CHECK_THROWS_AS(kernel_frak(at_t, at_s, -0.5, v_prime, y_s, sp.value(), b),
                    std::invalid_argument);
}

TEST_CASE("xi-integrated reference kernel is finite and time-ordered") {
    HestonModel mdl = build_model(table_inputs(1.0 / 12.0));
    BarrierContract c;
    c.strike = 60.0;
    c.maturity = 1.0 / 12.0;
    c.barrier = PiecewiseCurve::constant(40.0);

    QuadConfig quad;
    quad.upsilon = 300.0;
    quad.rel_tol = 1e-6;
    quad.abs_tol = 1e-9;

    const double t = c.maturity / 3.0, s = 2.0 * c.maturity / 3.0;
    const double val = kernel_K_reference(mdl, c, s, 0.45, t, 0.5, quad);
    CHECK(std::isfinite(val));
    CHECK(std::abs(val) > 0.0);

    CHECK_THROWS_AS(kernel_K_reference(mdl, c, t, 0.45, s, 0.5, quad),
                    std::invalid_argument);
}
