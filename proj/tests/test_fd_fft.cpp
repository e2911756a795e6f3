#include <doctest.h>

#include <svbarrier/errors.hpp>
#include <svbarrier/fd.hpp>
#include <svbarrier/fft.hpp>
#include <svbarrier/model.hpp>
#include <svbarrier/validators.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

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

ConstHestonParams table_frozen() {
    const HestonModel model = build_model(table_inputs(0.5));
    return frozen_params(MarketState{60.0, 0.5, 0.0}, model);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bs_put(double S, double K, double r, double q, double vol, double T) {
    const double sd = vol * std::sqrt(T);
    const double d1 = (std::log(S / K) + (r - q + 0.5 * vol * vol) * T) / sd;
    const double d2 = d1 - sd;
    return K * std::exp(-r * T) * norm_cdf(-d2) - S * std::exp(-q * T) * norm_cdf(-d1);
}

} // namespace

TEST_CASE("characteristic function satisfies its exact constraints") {
    const ConstHestonParams p = table_frozen();
    const double T = 0.5;
    CHECK(std::abs(heston_cf(cdouble(0.0, 0.0), p, T) - 1.0) <= 1e-14);
    // martingale condition: phi(-i) = E[S_T/S_0] = e^{(r-q)T}
    const cdouble mart = heston_cf(cdouble(0.0, -1.0), p, T);
    const double expect = std::exp((p.r - p.q) * T);
    CHECK(std::abs(mart - expect) <= 1e-12 * expect);
    for (double u : {0.5, 3.0, 17.0})
        CHECK(std::abs(heston_cf(cdouble(u, 0.0), p, T)) <= 1.0 + 1e-12);
    const cdouble direct = heston_cf(cdouble(2.3, 0.0), p, T);
    const cdouble mirror = heston_cf(cdouble(-2.3, 0.0), p, T);
    CHECK(std::abs(mirror - std::conj(direct)) <= 1e-14);
}

TEST_CASE("transform pricer collapses onto Black-Scholes as vol-of-vol vanishes") {
    ConstHestonParams p{2.0, 0.04, 1e-4, 0.0, 0.04, 0.03, 0.01, 100.0};
    const double T = 0.75;
    const double fft_px = fft_vanilla_put(p, 105.0, T);
    const double bs_px = bs_put(100.0, 105.0, 0.03, 0.01, 0.2, T);
    CHECK_MESSAGE(std::abs(fft_px - bs_px) <= 1e-4 * bs_px, "fft=", fft_px,
                  " bs=", bs_px);
    // calls come from the same damped transform and satisfy parity
    const double call = fft_vanilla_call(p, 105.0, T);
    const double parity = 100.0 * std::exp(-0.01 * T) - 105.0 * std::exp(-0.03 * T);
    CHECK(std::abs(call - fft_px - parity) <= 1e-10 * 105.0);
}

TEST_CASE("transform put is stable under node doubling") {
    const ConstHestonParams p = table_frozen();
    const double px = fft_vanilla_put(p, 60.0, 0.25);
    const double px2 = fft_vanilla_put(p, 60.0, 0.25, 16384);
    CHECK(px > 0.0);
    CHECK(1e4 * std::abs(px2 - px) / 60.0 <= 1.0);  // within one basis point
}

TEST_CASE("grid vanilla agrees with the transform vanilla") {
    const ConstHestonParams p = table_frozen();
    const double fft_px = fft_vanilla_put(p, 60.0, 0.25);
    const double fd_px = fd_vanilla_put(p, 60.0, 0.25);
    CHECK_MESSAGE(std::abs(fd_px - fft_px) <= 5e-3 * fft_px, "fd=", fd_px,
                  " fft=", fft_px);
}

TEST_CASE("grid solver prices the knock-out below the vanilla") {
    const ConstHestonParams p = table_frozen();
    const HestonModel cmodel = build_model_from_curves(
        2.0 * p.kappa * p.theta / (p.sigma * p.sigma),
        PiecewiseCurve::constant(p.sigma), PiecewiseCurve::constant(p.theta),
        PiecewiseCurve::constant(p.rho), PiecewiseCurve::constant(p.r),
        PiecewiseCurve::constant(p.q));
    const PiecewiseCurve barrier = PiecewiseCurve::constant(40.0);
    const BarrierContract c{60.0, 0.25, barrier, BarrierKind::DownOutPut};
    const MarketState market{60.0, 0.5, 0.0};

    const FdSolution sol = fd_solve(cmodel, c, market);
    const double do_px = sol.price_at(60.0, 0.5);
    const double van_px = fd_vanilla_put(p, 60.0, 0.25);
    CHECK(do_px >= 0.0);
    CHECK(do_px < van_px);
    CHECK(sol.steps >= 25);
    CHECK(sol.seconds > 0.0);

    // self-convergence under simultaneous grid and step refinement
    FdGridSpec fine;
    fine.n_s = 113;
    fine.n_v = 118;
    fine.dt_cap = 0.005;
    const double px_fine = fd_solve(cmodel, c, market, fine).price_at(60.0, 0.5);
    CHECK_MESSAGE(std::abs(do_px - px_fine) <= 0.01 * std::max(px_fine, 0.1),
                  "coarse=", do_px, " fine=", px_fine);
}

TEST_CASE("grid solver handles time-dependent coefficients") {
    const HestonModel tmodel = build_model(table_inputs(1.0 / 12.0));
    const PiecewiseCurve barrier = PiecewiseCurve::constant(40.0);
    const BarrierContract c{60.0, 1.0 / 12.0, barrier, BarrierKind::DownOutPut};
    const MarketState market{60.0, 0.5, 0.0};
    const FdSolution sol = fd_solve(tmodel, c, market);
    const double px = sol.price_at(60.0, 0.5);
    CHECK(px > 0.0);
    CHECK(px < 60.0);

    // interpolation reproduces grid nodes and rejects points off the mesh
    const std::size_t i = sol.s_nodes.size() / 2;
    const std::size_t j = sol.v_nodes.size() / 2;
    CHECK(sol.price_at(sol.s_nodes[i], sol.v_nodes[j]) ==
          doctest::Approx(sol.surface[i * sol.v_nodes.size() + j]).epsilon(1e-10));
    CHECK_THROWS_AS(sol.price_at(1e9, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(sol.price_at(60.0, 50.0), std::invalid_argument);
}

TEST_CASE("grid solver rejects unsupported setups") {
    const HestonModel model = build_model(table_inputs(0.25));
    const MarketState market{60.0, 0.5, 0.0};
    const PiecewiseCurve moving({0.0, 0.1}, {40.0, 39.0});
    const BarrierContract c_moving{60.0, 0.25, moving, BarrierKind::DownOutPut};
    CHECK_THROWS_AS(fd_solve(model, c_moving, market), std::invalid_argument);

    const PiecewiseCurve barrier = PiecewiseCurve::constant(40.0);
    const BarrierContract c{60.0, 0.25, barrier, BarrierKind::DownOutPut};
    FdGridSpec bad_dt;
    bad_dt.dt_cap = -1.0;
    CHECK_THROWS_AS(fd_solve(model, c, market, bad_dt), std::invalid_argument);
    FdGridSpec low_v;
    low_v.v_max = 0.3;  // below the spot variance
    CHECK_THROWS_AS(fd_solve(model, c, market, low_v), std::invalid_argument);
    const BarrierContract c0{60.0, 0.0, barrier, BarrierKind::DownOutPut};
    CHECK_THROWS_AS(fd_solve(model, c0, market), std::invalid_argument);
}

TEST_CASE("grid price table isolates per-cell failures") {
    const HestonModel model = build_model(table_inputs(1.0 / 12.0));
    const PiecewiseCurve barrier = PiecewiseCurve::constant(40.0);
    const MarketState market{60.0, 0.5, 0.0};
    const PriceTable t =
        fd_price_table(market, model, barrier, {60.0}, {0.0, 1.0 / 12.0});
    CHECK(t.method == "FD");
    CHECK(t.at(0, 0).failed);
    CHECK_FALSE(t.at(0, 0).error.empty());
    CHECK_FALSE(t.at(0, 1).failed);
    CHECK(t.at(0, 1).price > 0.0);
    CHECK(t.at(0, 1).seconds > 0.0);
}

TEST_CASE("frozen parameters read the curves at the valuation date") {
    const ConstHestonParams p = table_frozen();
    CHECK(p.kappa == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(p.theta == 0.1);
    CHECK(p.sigma == 0.3);
    CHECK(p.rho == -0.7);
    CHECK(p.v0 == 0.5);
    CHECK(p.r == 0.02);
    CHECK(p.q == 0.01);
    CHECK(p.spot == 60.0);
}

TEST_CASE("anchor scan returns the cell nearest the target") {
    const ConstHestonParams p = table_frozen();
    const double p50 = fft_vanilla_put(p, 50.0, 0.25);
    const double p60 = fft_vanilla_put(p, 60.0, 0.25);
    REQUIRE(p50 < p60);

    const VanillaAnchor a = pin_vanilla_anchor(p, {50.0, 60.0}, {0.25}, p60 + 1e-4);
    CHECK(a.strike == 60.0);
    CHECK(a.maturity == 0.25);
    CHECK(a.fft_price == p60);
    const VanillaAnchor b = pin_vanilla_anchor(p, {50.0, 60.0}, {0.25}, p50 - 1e-4);
    CHECK(b.strike == 50.0);
    CHECK_THROWS_AS(pin_vanilla_anchor(p, {}, {0.25}, 1.0), std::invalid_argument);
}

TEST_CASE("cross validation reports per-cell percentage errors") {
    PriceTable cand, ref;
    cand.strikes = ref.strikes = {50.0, 60.0};
    cand.maturities = ref.maturities = {0.25};
    cand.method = "GIT";
    ref.method = "FD";
    cand.cells.resize(2);
    ref.cells.resize(2);
    cand.at(0, 0).price = 1.02;
    ref.at(0, 0).price = 1.0;
    cand.at(1, 0).price = 2.0;
    ref.at(1, 0).price = 2.5;

    const ErrorReport rep = cross_validate(cand, ref);
    CHECK(rep.pct_error[0] == doctest::Approx(2.0));
    CHECK(rep.pct_error[1] == doctest::Approx(-20.0));
    CHECK(rep.max_abs_pct == doctest::Approx(20.0));
    CHECK(rep.mean_abs_pct == doctest::Approx(11.0));
    CHECK(error_report_csv(rep) ==
          "strike,maturity,pct_error\n"
          "50,0.25,2\n"
          "60,0.25,-20\n");

    // a failed reference cell drops out of the statistics
    ref.at(1, 0).failed = true;
    const ErrorReport rep2 = cross_validate(cand, ref);
    CHECK(std::isnan(rep2.pct_error[1]));
    CHECK(rep2.max_abs_pct == doctest::Approx(2.0));

    PriceTable other = ref;
    other.strikes = {50.0, 61.0};
    CHECK_THROWS_AS(cross_validate(cand, other), std::invalid_argument);
}
