#include <svbarrier/errors.hpp>
#include <svbarrier/model.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace svb {

namespace {

void check_common(double m, double sigma0, double theta0, double rho0) {
    if (m < 1.0)
        throw UnsupportedBranch("m < 1 requires the reflected-process branch, not implemented");
    if (!(sigma0 > 0.0))
        throw std::invalid_argument("sigma must be positive");
    if (!(theta0 > 0.0))
        throw std::invalid_argument("theta must be positive");
    if (rho0 < -1.0 || rho0 > 1.0)
        throw std::invalid_argument("rho must lie in [-1, 1]");
}

} // namespace

HestonModel build_model(const ModelInputs& in) {
    check_common(in.m, in.sigma0, in.theta0, in.rho0);
    if (in.segments < 1)
        throw std::invalid_argument("segments must be >= 1");
    if (!(in.horizon > 0.0))
        throw std::invalid_argument("horizon must be positive");

    auto theta_f = [&](double t) { return in.theta0 * std::exp(-in.theta_k * t); };
    auto sigma_f = [&](double t) { return in.sigma0 * std::exp(-in.sigma_k * t); };

    HestonModel mdl;
    mdl.m = in.m;
    mdl.theta = PiecewiseCurve::sampled(theta_f, in.segments, in.horizon);
    mdl.sigma = PiecewiseCurve::sampled(sigma_f, in.segments, in.horizon);
    mdl.rho = PiecewiseCurve::constant(in.rho0);
    mdl.r = PiecewiseCurve::constant(in.r);
    mdl.q = PiecewiseCurve::constant(in.q);
    // kappa derived segment-by-segment so the structural constraint is exact
    auto kappa_f = [&](double t) {
        double s = mdl.sigma(t), th = mdl.theta(t);
        return in.m * s * s / (2.0 * th);
    };
    mdl.kappa = PiecewiseCurve::sampled(kappa_f, in.segments, in.horizon);
    return mdl;
}

HestonModel build_model_from_curves(double m, PiecewiseCurve sigma,
                                    PiecewiseCurve theta, PiecewiseCurve rho,
                                    PiecewiseCurve r, PiecewiseCurve q) {
    check_common(m, sigma.values().front(), theta.values().front(),
                 rho.values().front());
    for (double v : sigma.values())
        if (!(v > 0.0)) throw std::invalid_argument("sigma must be positive");
    for (double v : theta.values())
        if (!(v > 0.0)) throw std::invalid_argument("theta must be positive");
    for (double v : rho.values())
        if (v < -1.0 || v > 1.0) throw std::invalid_argument("rho must lie in [-1, 1]");

    // kappa on the union of sigma/theta breakpoints
    std::set<double> bps(sigma.breakpoints().begin(), sigma.breakpoints().end());
    bps.insert(theta.breakpoints().begin(), theta.breakpoints().end());
    std::vector<double> bp(bps.begin(), bps.end());
    std::vector<double> kv;
    kv.reserve(bp.size());
    for (double t : bp) {
        double s = sigma(t), th = theta(t);
        kv.push_back(m * s * s / (2.0 * th));
    }

    HestonModel mdl;
    mdl.m = m;
    mdl.sigma = std::move(sigma);
    mdl.theta = std::move(theta);
    mdl.rho = std::move(rho);
    mdl.r = std::move(r);
    mdl.q = std::move(q);
    mdl.kappa = PiecewiseCurve(std::move(bp), std::move(kv));
    return mdl;
}

void validate_contract(const BarrierContract& c) {
    if (!(c.strike > 0.0))
        throw std::invalid_argument("strike must be positive");
    if (!(c.maturity > 0.0))
        throw std::invalid_argument("maturity must be positive");
    for (double L : c.barrier.values())
        if (!(L > 0.0))
            throw std::invalid_argument("barrier must stay positive");
    if (!(c.barrier(c.maturity) < c.strike))
        throw std::invalid_argument("barrier at maturity must lie below the strike");
}

double log_barrier(const BarrierContract& c, double t) {
    if (t < 0.0 || t > c.maturity)
        throw std::invalid_argument("time outside [0, maturity]");
    return std::log(c.barrier(t) / c.strike);
}

void validate_market(const MarketState& m, const BarrierContract& c) {
    if (!(m.v0 > 0.0))
        throw std::invalid_argument("initial variance must be positive");
    // spot == barrier is allowed: the contract is knocked out and prices to zero
    if (!(m.spot >= c.barrier(m.t0)))
        throw std::invalid_argument("spot must start at or above the barrier");
}

} // namespace svb
