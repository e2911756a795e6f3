#pragma once

#include <svbarrier/fd.hpp>
#include <svbarrier/fft.hpp>
#include <svbarrier/pricer.hpp>

#include <string>

namespace svb {

// Per-cell relative percentage error 100*(candidate-reference)/reference.
struct ErrorReport {
    std::vector<double> strikes;
    std::vector<double> maturities;
    std::vector<double> pct_error; // row-major strikes x maturities; NaN on failure
    double max_abs_pct = 0.0;
    double mean_abs_pct = 0.0;
};

ErrorReport cross_validate(const PriceTable& candidate, const PriceTable& reference);

std::string error_report_csv(const ErrorReport& rep);

// FD price table over a strike/maturity grid (one backward solve per cell).
PriceTable fd_price_table(const MarketState& market, const HestonModel& model,
                          const PiecewiseCurve& barrier,
                          const std::vector<double>& strikes,
                          const std::vector<double>& maturities,
                          const FdGridSpec& spec = {});

// Freeze the model at t=0 into a constant-parameter set.
ConstHestonParams frozen_params(const MarketState& market, const HestonModel& model);

// Scan the (strikes x maturities) grid for the (K,T) whose FFT vanilla put is
// nearest the target; used to pin the paper-style vanilla anchor.
struct VanillaAnchor {
    double strike = 0.0, maturity = 0.0;
    double fft_price = 0.0;
};
VanillaAnchor pin_vanilla_anchor(const ConstHestonParams& p,
                                 const std::vector<double>& strikes,
                                 const std::vector<double>& maturities,
                                 double target);

// FD vanilla through the barrier contract with the barrier pushed to ~0.
double fd_vanilla_put(const ConstHestonParams& p, double strike, double T,
                      const FdGridSpec& spec = {});

} // namespace svb
