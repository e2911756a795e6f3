#include <svbarrier/errors.hpp>
#include <svbarrier/validators.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace svb {

namespace {

using Clock = std::chrono::steady_clock;

bool grids_match(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
    return true;
}

}  // namespace

ErrorReport cross_validate(const PriceTable& candidate, const PriceTable& reference) {
    if (!grids_match(candidate.strikes, reference.strikes) ||
        !grids_match(candidate.maturities, reference.maturities))
        throw std::invalid_argument("price tables live on different grids");
    ErrorReport rep;
    rep.strikes = candidate.strikes;
    rep.maturities = candidate.maturities;
    rep.pct_error.assign(candidate.cells.size(),
                         std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    int count = 0;
    for (std::size_t ik = 0; ik < candidate.strikes.size(); ++ik)
        for (std::size_t jt = 0; jt < candidate.maturities.size(); ++jt) {
            const PriceCell& c = candidate.at(int(ik), int(jt));
            const PriceCell& r = reference.at(int(ik), int(jt));
            if (c.failed || r.failed || !std::isfinite(c.price) ||
                !std::isfinite(r.price) || std::abs(r.price) < 1e-300)
                continue;
            const double pct = 100.0 * (c.price - r.price) / r.price;
            rep.pct_error[ik * candidate.maturities.size() + jt] = pct;
            rep.max_abs_pct = std::max(rep.max_abs_pct, std::abs(pct));
            sum += std::abs(pct);
            ++count;
        }
    rep.mean_abs_pct = count ? sum / count : 0.0;
    return rep;
}

std::string error_report_csv(const ErrorReport& rep) {
    std::string out = "strike,maturity,pct_error\n";
    char buf[96];
    for (std::size_t ik = 0; ik < rep.strikes.size(); ++ik)
        for (std::size_t jt = 0; jt < rep.maturities.size(); ++jt) {
            std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g\n", rep.strikes[ik],
                          rep.maturities[jt],
                          rep.pct_error[ik * rep.maturities.size() + jt]);
            out += buf;
        }
    return out;
}

PriceTable fd_price_table(const MarketState& market, const HestonModel& model,
                          const PiecewiseCurve& barrier,
                          const std::vector<double>& strikes,
                          const std::vector<double>& maturities,
                          const FdGridSpec& spec) {
    PriceTable table;
    table.strikes = strikes;
    table.maturities = maturities;
    table.method = "FD";
    table.cells.resize(strikes.size() * maturities.size());
    for (std::size_t ik = 0; ik < strikes.size(); ++ik)
        for (std::size_t jt = 0; jt < maturities.size(); ++jt) {
            PriceCell& cell = table.at(int(ik), int(jt));
            cell.strike = strikes[ik];
            cell.maturity = maturities[jt];
            const auto tic = Clock::now();
            try {
                const BarrierContract c{strikes[ik], maturities[jt], barrier,
                                        BarrierKind::DownOutPut};
                const FdSolution sol = fd_solve(model, c, market, spec);
                cell.price = sol.price_at(market.spot, market.v0);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
                cell.price = std::numeric_limits<double>::quiet_NaN();
            }
            cell.seconds = std::chrono::duration<double>(Clock::now() - tic).count();
        }
    return table;
}

ConstHestonParams frozen_params(const MarketState& market, const HestonModel& model) {
    return ConstHestonParams{model.kappa(market.t0), model.theta(market.t0),
                             model.sigma(market.t0), model.rho(market.t0),
                             market.v0,              model.r(market.t0),
                             model.q(market.t0),     market.spot};
}

VanillaAnchor pin_vanilla_anchor(const ConstHestonParams& p,
                                 const std::vector<double>& strikes,
                                 const std::vector<double>& maturities,
                                 double target) {
    if (strikes.empty() || maturities.empty())
        throw std::invalid_argument("anchor scan needs a nonempty grid");
    VanillaAnchor best;
    double dist = std::numeric_limits<double>::infinity();
    for (double K : strikes)
        for (double T : maturities) {
            const double px = fft_vanilla_put(p, K, T);
            const double d = std::abs(px - target);
            if (d < dist) {
                dist = d;
                best = VanillaAnchor{K, T, px};
            }
        }
    return best;
}

double fd_vanilla_put(const ConstHestonParams& p, double strike, double T,
                      const FdGridSpec& spec) {
    // barrier pushed to S = 0.01: unreachable from any spot of interest, so
    // the down-and-out solve reproduces the vanilla put
    const double m_eff = 2.0 * p.kappa * p.theta / (p.sigma * p.sigma);
    const HestonModel model = build_model_from_curves(
        m_eff, PiecewiseCurve::constant(p.sigma), PiecewiseCurve::constant(p.theta),
        PiecewiseCurve::constant(p.rho), PiecewiseCurve::constant(p.r),
        PiecewiseCurve::constant(p.q));
    const BarrierContract c{strike, T, PiecewiseCurve::constant(0.01),
                            BarrierKind::DownOutPut};
    const MarketState market{p.spot, p.v0, 0.0};
    return fd_solve(model, c, market, spec).price_at(p.spot, p.v0);
}

} // namespace svb
