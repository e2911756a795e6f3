#pragma once

#include <svbarrier/curve.hpp>

namespace svb {

// Time-dependent Heston model under the structural constraint
// kappa(t) * theta(t) / sigma(t)^2 = m/2 for all t. kappa is always derived
// from that constraint, never user-supplied, so it holds exactly.
struct HestonModel {
    double m = 2.0;
    PiecewiseCurve sigma = PiecewiseCurve::constant(0.0);
    PiecewiseCurve theta = PiecewiseCurve::constant(0.0);
    PiecewiseCurve rho = PiecewiseCurve::constant(0.0);
    PiecewiseCurve r = PiecewiseCurve::constant(0.0);
    PiecewiseCurve q = PiecewiseCurve::constant(0.0);
    PiecewiseCurve kappa = PiecewiseCurve::constant(0.0); // derived

    // Green's-function drift constant; m >= 1 gives b >= 1/2.
    double b() const { return m - 0.5; }
};

// Exponential test family: theta(t) = theta0*exp(-theta_k t),
// sigma(t) = sigma0*exp(-sigma_k t), rho and rates constant.
struct ModelInputs {
    double m = 2.0;
    double theta0 = 0.1;
    double sigma0 = 0.3;
    double rho0 = -0.7;
    double theta_k = 0.0;
    double sigma_k = 0.0;
    double r = 0.0;
    double q = 0.0;
    int segments = 10;
    double horizon = 1.0;
};

HestonModel build_model(const ModelInputs& in);

// General entry: curves resampled onto a merged breakpoint grid, kappa derived.
HestonModel build_model_from_curves(double m, PiecewiseCurve sigma,
                                    PiecewiseCurve theta, PiecewiseCurve rho,
                                    PiecewiseCurve r, PiecewiseCurve q);

enum class BarrierKind { DownOutPut, DownInPut };

struct BarrierContract {
    double strike = 0.0;
    double maturity = 0.0;
    PiecewiseCurve barrier = PiecewiseCurve::constant(0.0);
    BarrierKind kind = BarrierKind::DownOutPut;
};

// Throws std::invalid_argument unless L(t) > 0 on breakpoints and L(T) < K.
void validate_contract(const BarrierContract& c);

// y(t) = ln(L(t)/K).
double log_barrier(const BarrierContract& c, double t);

struct MarketState {
    double spot = 0.0;
    double v0 = 0.0;
    double t0 = 0.0;
};

void validate_market(const MarketState& m, const BarrierContract& c);

} // namespace svb
