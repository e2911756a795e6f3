#pragma once

#include <svbarrier/model.hpp>

#include <vector>

namespace svb {

struct FdGridSpec {
    int n_s = 76;
    int n_v = 79;
    double dt_cap = 0.01;      // actual dt = T / ceil(T/dt_cap)
    int rannacher_steps = 2;
    double v_max = 5.0;
    double s_max = -1.0;       // <= 0: max(600, 6*max(S0,K))
};

struct FdSolution {
    std::vector<double> s_nodes;
    std::vector<double> v_nodes;
    std::vector<double> surface; // row-major [i_s * n_v + i_v] at t = t0
    int steps = 0;
    double seconds = 0.0;

    // 4x4 Lagrange (bicubic) interpolation off-node.
    double price_at(double S, double v) const;
};

// Backward ADI (Hundsdorfer-Verwer, theta = 1/2, damped startup steps) solve
// of the pricing PDE for a Down-and-Out put; barrier column pinned to zero.
// Time-dependent coefficients are sampled at step midpoints. Throws
// NoConvergence if the max norm blows up.
FdSolution fd_solve(const HestonModel& model, const BarrierContract& contract,
                    const MarketState& market, const FdGridSpec& spec = {});

} // namespace svb
