#include <doctest.h>

#include <svbarrier/errors.hpp>
#include <svbarrier/model.hpp>

#include <cmath>
#include <stdexcept>

using namespace svb;

namespace {

ModelInputs table_inputs(double horizon) {
    ModelInputs in;
    in.m = 2.0;
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

} // namespace

TEST_CASE("piecewise curve holds values right-continuously") {
    PiecewiseCurve c({0.0, 1.0, 2.0}, {5.0, 7.0, 9.0});
    CHECK(c(0.0) == 5.0);
    CHECK(c(0.999) == 5.0);
    CHECK(c(1.0) == 7.0);   // right-continuous at the breakpoint
    CHECK(c(1.5) == 7.0);
    CHECK(c(2.0) == 9.0);
    CHECK(c(50.0) == 9.0);  // last value held beyond the final breakpoint
    CHECK_THROWS_AS(c(-0.1), std::invalid_argument);
    CHECK_FALSE(c.is_constant());
    CHECK(PiecewiseCurve::constant(3.0).is_constant());
    CHECK(PiecewiseCurve::constant(3.0)(123.0) == 3.0);
}

TEST_CASE("piecewise curve rejects malformed inputs") {
    CHECK_THROWS_AS(PiecewiseCurve({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseCurve({0.5}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseCurve({0.0, 1.0, 1.0}, {1.0, 2.0, 3.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseCurve({0.0, 1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseCurve({0.0}, {std::nan("")}), std::invalid_argument);
}

TEST_CASE("sampled curve uses left endpoints of equal segments") {
    auto f = [](double t) { return 1.0 + t; };
    PiecewiseCurve c = PiecewiseCurve::sampled(f, 4, 2.0);
    REQUIRE(c.breakpoints().size() == 4);
    CHECK(c.breakpoints()[1] == doctest::Approx(0.5));
    CHECK(c(0.0) == doctest::Approx(1.0));
    CHECK(c(0.49) == doctest::Approx(1.0)); // left-endpoint value held on the segment
    CHECK(c(0.5) == doctest::Approx(1.5));
    CHECK(c(1.99) == doctest::Approx(2.5));
    CHECK_THROWS_AS(PiecewiseCurve::sampled(f, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseCurve::sampled(f, 3, 0.0), std::invalid_argument);
}

TEST_CASE("built model satisfies the structural constraint exactly") {
    HestonModel mdl = build_model(table_inputs(1.0));
    CHECK(mdl.b() == doctest::Approx(1.5));

    // kappa(0) = m sigma0^2 / (2 theta0) = 2 * 0.09 / 0.2
    CHECK(mdl.kappa(0.0) == doctest::Approx(0.9).epsilon(1e-15));

    // the ratio kappa*theta/sigma^2 = m/2 must hold to machine precision at
    // arbitrary times, including segment interiors
    for (double t : {0.0, 0.05, 0.37, 0.5, 0.99}) {
        double ratio = mdl.kappa(t) * mdl.theta(t) / (mdl.sigma(t) * mdl.sigma(t));
        CHECK(ratio == doctest::Approx(1.0).epsilon(1e-14));
    }

    // decaying curves really decay
    CHECK(mdl.theta(0.9) < mdl.theta(0.0));
    CHECK(mdl.sigma(0.9) < mdl.sigma(0.0));
    CHECK(mdl.rho(0.3) == doctest::Approx(-0.7));
}

TEST_CASE("curve-built model matches the exponential-family builder") {
    ModelInputs in = table_inputs(2.0);
    HestonModel a = build_model(in);
    HestonModel b = build_model_from_curves(in.m, a.sigma, a.theta, a.rho, a.r, a.q);
    for (double t : {0.0, 0.3, 1.1, 1.95}) {
        CHECK(b.kappa(t) == doctest::Approx(a.kappa(t)).epsilon(1e-15));
        CHECK(b.sigma(t) == doctest::Approx(a.sigma(t)).epsilon(1e-15));
    }
}

TEST_CASE("model validation rejects out-of-range parameters") {
    ModelInputs in = table_inputs(1.0);
    in.m = 0.5;
    CHECK_THROWS_AS(build_model(in), UnsupportedBranch);
    in = table_inputs(1.0);
    in.sigma0 = 0.0;
    CHECK_THROWS_AS(build_model(in), std::invalid_argument);
    in = table_inputs(1.0);
    in.theta0 = -0.1;
    CHECK_THROWS_AS(build_model(in), std::invalid_argument);
    in = table_inputs(1.0);
    in.rho0 = -1.2;
    CHECK_THROWS_AS(build_model(in), std::invalid_argument);
    in = table_inputs(1.0);
    in.segments = 0;
    CHECK_THROWS_AS(build_model(in), std::invalid_argument);
}

TEST_CASE("log barrier in strike units") {
    BarrierContract c;
    c.strike = 60.0;
    c.maturity = 1.0;
    c.barrier = PiecewiseCurve::constant(40.0);
    CHECK(log_barrier(c, 0.0) == doctest::Approx(-0.4054651081081644).epsilon(1e-14));

    c.strike = 90.0;
    CHECK(log_barrier(c, 0.7) == doctest::Approx(-0.8109302162163288).epsilon(1e-14));
    CHECK_THROWS_AS(log_barrier(c, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(log_barrier(c, -0.1), std::invalid_argument);
}

TEST_CASE("contract validation") {
    BarrierContract c;
    c.strike = 60.0;
    c.maturity = 0.5;
    c.barrier = PiecewiseCurve::constant(40.0);
    CHECK_NOTHROW(validate_contract(c));

    c.barrier = PiecewiseCurve::constant(70.0); // above strike
    CHECK_THROWS_AS(validate_contract(c), std::invalid_argument);

    c.barrier = PiecewiseCurve::constant(-1.0);
    CHECK_THROWS_AS(validate_contract(c), std::invalid_argument);

    c.barrier = PiecewiseCurve::constant(40.0);
    c.strike = 0.0;
    CHECK_THROWS_AS(validate_contract(c), std::invalid_argument);

    c.strike = 60.0;
    c.maturity = -0.25;
    CHECK_THROWS_AS(validate_contract(c), std::invalid_argument);

    // a time-dependent barrier only needs to sit below the strike at maturity
    c.maturity = 1.0;
    c.barrier = PiecewiseCurve({0.0, 0.5}, {65.0, 40.0});
    CHECK_NOTHROW(validate_contract(c));
}

TEST_CASE("market validation allows spot parked on the barrier") {
    BarrierContract c;
    c.strike = 60.0;
    c.maturity = 1.0;
    c.barrier = PiecewiseCurve::constant(40.0);

    MarketState m{60.0, 0.5, 0.0};
    CHECK_NOTHROW(validate_market(m, c));

    m.spot = 40.0; // knocked out at inception, prices to zero
    CHECK_NOTHROW(validate_market(m, c));

    m.spot = 39.0;
    CHECK_THROWS_AS(validate_market(m, c), std::invalid_argument);

    m.spot = 60.0;
    m.v0 = 0.0;
    CHECK_THROWS_AS(validate_market(m, c), std::invalid_argument);
}
