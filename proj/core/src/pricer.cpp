#include <svbarrier/errors.hpp>
#include <svbarrier/pricer.hpp>

#include "walk_detail.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace svb {

namespace {

constexpr double kPi = std::numbers::pi;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// (e^z - 1)/z, stable near z = 0
cdouble expm1_ratio(cdouble z) {
    if (std::abs(z) < 1e-4)
        return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)));
    return (std::exp(z) - 1.0) / z;
}

// D_l(s_j) = sum_k c_kl e^{-eps (s_j - t_k)^2} for Simpson nodes j >= 1
std::vector<double> fold_time_weights(const BoundaryGradient& phi,
                                      const detail::RowPlan& plan) {
    const auto& g = phi.grid;
    const int nv = int(g.v_nodes.size());
    const int nt = int(g.t_nodes.size());
    const int n = int(plan.nodes.size());
    std::vector<double> dtab(std::size_t(n - 1) * std::size_t(nv), 0.0);
    for (int j = 1; j < n; ++j)
        for (int k = 0; k < nt; ++k) {
            const double gw =
                detail::gaussian_time_weight(plan.nodes[j], g.t_nodes[k], g.epsilon);
            for (int l = 0; l < nv; ++l)
                dtab[std::size_t(j - 1) * nv + l] +=
                    phi.coeff[std::size_t(g.index(k, l))] * gw;
        }
    return dtab;
}

/*
  Per-xi state of the inversion integrand at (t0, v0).  folded(xi) returns
  (P1 + P2) e^{-i xi y(t0)}: P1 from the walk endpoint, P2 as the Simpson fold
  of the closed-form kernel columns against the basis-projected gradient.  The
  kernel phases are taken strike-free (ln L), so the fold against y_ref =
  ln L(t0) lands exactly on the strike convention of the e^{-i xi y} factor.
*/
struct InversionContext {
    const HestonModel* model = nullptr;
    detail::RowPlan plan;
    detail::QTables qt;
    std::vector<double> ynode;  // ln L(s_j)
    double y_ref = 0.0;         // ln L(t0)
    std::vector<double> dtab;
    double strike = 0.0, y_T = 0.0, y_t = 0.0, v = 0.0;
    double osc = 1.0;  // dominant phase frequency, for the panel pre-split
    long evaluations = 0;
    detail::WalkState ws;
    detail::QWork qw;
    std::vector<cdouble> qbuf;

    cdouble folded(double xi) {
        ++evaluations;
        detail::run_walk(plan, *model, xi, ws);
        detail::q_values(plan, ws, qt, xi, y_ref, ynode, qw, qbuf.data());
        const cdouble sp = SqrtP{Branch::MinusIXi, xi}.value();
        const cdouble p1f = p1_value(strike, y_T, ws.alpha_t, ws.beta_t, v, sp) *
                            std::exp(cdouble(0.0, -xi * y_t));
        const int n = int(plan.nodes.size());
        const int nc = int(qt.vl.size());
        cdouble p2f{};
        for (int j = 1; j < n; ++j) {
            cdouble srow{};
            const cdouble* row = qbuf.data() + std::size_t(j - 1) * nc;
            const double* dw = dtab.data() + std::size_t(j - 1) * nc;
            for (int l = 0; l < nc; ++l) srow += dw[l] * row[l];
            p2f += plan.wts[j] * srow;
        }
        // backward Duhamel: the boundary-source image subtracts from the
        // terminal-payoff image
        return p1f - 0.5 * p2f;
    }
};

InversionContext make_inversion(const MarketState& market, const HestonModel& model,
                                const BarrierContract& contract,
                                const BoundaryGradient& phi,
                                const AssemblyOptions& opts, double xfree) {
    validate_contract(contract);
    validate_market(market, contract);
    if (contract.kind != BarrierKind::DownOutPut)
        throw std::invalid_argument("inversion prices the down-and-out put");
    const auto& g = phi.grid;
    if (phi.coeff.size() != std::size_t(g.size()))
        throw std::invalid_argument("gradient coefficients do not match its grid");
    const double T = contract.maturity, t0 = market.t0;
    const double tolt = 1e-10 * std::max(1.0, T);
    if (g.t_nodes.empty() || std::abs(g.t_nodes.back() - T) > tolt)
        throw std::invalid_argument("gradient grid does not end at the maturity");
    if (std::abs(g.t_nodes.front() - t0) > tolt)
        throw std::invalid_argument("market t0 does not match the gradient grid");

    InversionContext cx;
    cx.model = &model;
    cx.plan = detail::make_plan(model, t0, T, opts);
    cx.qt = detail::make_qtables(model.b(), g.epsilon, {market.v0}, g.v_nodes,
                                 opts.kummer);
    cx.ynode = detail::barrier_ynodes(contract.barrier, cx.plan.nodes);
    cx.y_ref = cx.ynode.front();
    cx.dtab = fold_time_weights(phi, cx.plan);
    cx.strike = contract.strike;
    cx.y_T = log_barrier(contract, T);
    cx.y_t = log_barrier(contract, t0);
    cx.v = market.v0;
    cx.qbuf.assign((cx.plan.nodes.size() - 1) * g.v_nodes.size(), cdouble{});
    double dev = std::abs(cx.y_T - cx.y_t);
    for (double y : cx.ynode) dev = std::max(dev, std::abs(y - cx.y_ref));
    cx.osc = std::max(1.0, std::abs(xfree) + dev);
    return cx;
}

double clamp_price(double raw, double strike, PriceDiag* diag) {
    if (raw >= 0.0) return raw;
    if (raw < -0.01 * strike)
        throw NegativePrice("price inversion returned " + std::to_string(raw) +
                            " for strike " + std::to_string(strike));
    if (diag) diag->negative_residue = -raw;
    return 0.0;
}

}  // namespace

cdouble u_bar_terminal(double strike, double y_T, cdouble sqrtp) {
    if (!(strike > 0.0)) throw std::invalid_argument("strike must be positive");
    // both terms written through (e^z - 1)/z so sqrt(p) -> 0 and 1 stay regular
    const cdouble first = -y_T * expm1_ratio(-y_T * sqrtp);
    const cdouble second = -y_T * expm1_ratio(-y_T * (sqrtp - 1.0));
    return strike * (first - second);
}

cdouble p1_value(double strike, double y_T, cdouble alpha_t, cdouble beta_t,
                 double v, cdouble sqrtp) {
    return u_bar_terminal(strike, y_T, sqrtp) * std::exp(beta_t + alpha_t * v);
}

cdouble p1(double t, double v, double xi, const BarrierContract& contract,
           const HestonModel& model, const TransformCache& cache) {
    (void)model;
    if (std::abs(xi - cache.xi) > 1e-12 * (1.0 + std::abs(xi)))
        throw std::invalid_argument("xi does not match the cache");
    const auto& tg = cache.time_grid;
    if (tg.empty()) throw std::invalid_argument("empty transform cache");
    const double tolt = 1e-10 * std::max(1.0, tg.back());
    auto it = std::lower_bound(tg.begin(), tg.end(), t - tolt);
    if (it == tg.end() || std::abs(*it - t) > tolt)
        throw std::invalid_argument("t is not a cache grid node");
    const std::size_t i = std::size_t(it - tg.begin());
    const double y_T = log_barrier(contract, contract.maturity);
    const cdouble sp = SqrtP{cache.branch, cache.xi}.value();
    return p1_value(contract.strike, y_T, cache.alpha[i], cache.beta[i], v, sp);
}

cdouble p2(double t, double v, double xi, const BoundaryGradient& phi,
           const BarrierContract& contract, const HestonModel& model,
           const AssemblyOptions& opts) {
    validate_contract(contract);
    const auto& g = phi.grid;
    if (phi.coeff.size() != std::size_t(g.size()))
        throw std::invalid_argument("gradient coefficients do not match its grid");
    const double T = contract.maturity;
    detail::RowPlan plan = detail::make_plan(model, t, T, opts);
    detail::QTables qt =
        detail::make_qtables(model.b(), g.epsilon, {v}, g.v_nodes, opts.kummer);
    // strike-anchored y(s) = ln(L(s)/K) with no inversion fold (y_ref = 0)
    std::vector<double> ynode(plan.nodes.size());
    for (std::size_t j = 0; j < plan.nodes.size(); ++j)
        ynode[j] = log_barrier(contract, plan.nodes[j]);
    std::vector<double> dtab = fold_time_weights(phi, plan);
    detail::WalkState ws;
    detail::QWork qw;
    const int n = int(plan.nodes.size());
    const int nc = int(g.v_nodes.size());
    std::vector<cdouble> qbuf(std::size_t(n - 1) * std::size_t(nc));
    detail::run_walk(plan, model, xi, ws);
    detail::q_values(plan, ws, qt, xi, 0.0, ynode, qw, qbuf.data());
    cdouble acc{};
    for (int j = 1; j < n; ++j) {
        cdouble srow{};
        const cdouble* row = qbuf.data() + std::size_t(j - 1) * nc;
        const double* dw = dtab.data() + std::size_t(j - 1) * nc;
        for (int l = 0; l < nc; ++l) srow += dw[l] * row[l];
        acc += plan.wts[j] * srow;
    }
    return 0.5 * acc;
}

double price_down_out_put(const MarketState& market, const HestonModel& model,
                          const BarrierContract& contract, const BoundaryGradient& phi,
                          const AssemblyOptions& opts, PriceDiag* diag) {
    const auto tic = Clock::now();
    const double xfree = std::log(market.spot / contract.barrier(market.t0));
    InversionContext cx = make_inversion(market, model, contract, phi, opts, xfree);
    auto f = [&](double xi, double* out) {
        out[0] = std::sin(xi * xfree) * cx.folded(xi).imag();
    };
    const QuadConfig& qc = opts.quad;
    const VectorQuadResult res = integrate_gk_vec(
        1, f, 0.0, qc.upsilon, qc, split_panels(0.0, qc.upsilon, cx.osc));
    if (!res.converged)
        throw ToleranceNotMet("price inversion quadrature did not converge",
                              (2.0 / kPi) * res.value[0], (2.0 / kPi) * res.err_est[0]);
    const double raw = (2.0 / kPi) * res.value[0];
    if (diag) {
        diag->xi_evaluations = int(cx.evaluations);
        diag->seconds = seconds_since(tic);
    }
    return clamp_price(raw, contract.strike, diag);
}

double price_down_out_put_polar(const MarketState& market, const HestonModel& model,
                                const BarrierContract& contract,
                                const BoundaryGradient& phi,
                                const AssemblyOptions& opts) {
    // product-to-sum split of sin(theta) Im[F]: direct wave at x and mirror
    // wave at 2 y - x, each a plain Re[] against the folded transform
    const double xfree = std::log(market.spot / contract.barrier(market.t0));
    InversionContext cx = make_inversion(market, model, contract, phi, opts, xfree);
    auto f = [&](double xi, double* out) {
        const cdouble z = cx.folded(xi);
        const cdouble rot = std::exp(cdouble(0.0, -xi * xfree));
        out[0] = (z * rot).real() - (z / rot).real();
    };
    const QuadConfig& qc = opts.quad;
    const VectorQuadResult res = integrate_gk_vec(
        1, f, 0.0, qc.upsilon, qc, split_panels(0.0, qc.upsilon, cx.osc));
    if (!res.converged)
        throw ToleranceNotMet("price inversion quadrature did not converge",
                              res.value[0] / kPi, res.err_est[0] / kPi);
    return clamp_price(res.value[0] / kPi, contract.strike, nullptr);
}

double price_down_in_put(double vanilla_price, double down_out_price) {
    return vanilla_price - down_out_price;
}

double NumericsConfig::epsilon_for(double strike) const {
    if (epsilon_scalar) return *epsilon_scalar;
    for (const auto& [k, e] : epsilon_map)
        if (std::abs(k - strike) <= 1e-9 * std::max(1.0, std::abs(k))) return e;
    // shape parameter by moneyness band: tighter far OTM, wider near the barrier
    if (std::abs(strike - 45.0) <= 1e-9 * 45.0) return 3.0;
    if (std::abs(strike - 50.0) <= 1e-9 * 50.0) return 5.0;
    return 4.0;
}

std::string to_csv(const PriceTable& table) {
    std::string out = "strike,maturity,price,method,seconds\n";
    char buf[160];
    for (std::size_t ik = 0; ik < table.strikes.size(); ++ik)
        for (std::size_t jt = 0; jt < table.maturities.size(); ++jt) {
            const PriceCell& c = table.at(int(ik), int(jt));
            std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%s,%.6g\n", c.strike,
                          c.maturity, c.price, table.method.c_str(), c.seconds);
            out += buf;
        }
    return out;
}

namespace {

// prices one (maturity, epsilon) group: one assembly, shared walks across strikes
void price_group(const MarketState& market, const HestonModel& model,
                 const PiecewiseCurve& barrier, const std::vector<double>& strikes,
                 double T, int jt, double eps, const std::vector<int>& members,
                 const NumericsConfig& cfg, BatchResult& out) {
    QuadConfig quad;
    quad.upsilon = cfg.upsilon_override > 0.0 ? cfg.upsilon_override : choose_upsilon(T);
    quad.rel_tol = cfg.rel_tol;
    quad.abs_tol = cfg.abs_tol;
    quad.max_subdivisions = cfg.max_subdivisions;
    quad.simpson_nodes = cfg.simpson_nodes;
    AssemblyOptions opts;
    opts.quad = quad;
    opts.kummer = cfg.kummer;
    opts.refinement = cfg.refinement;

    std::vector<int> live;
    std::vector<BarrierContract> contracts;
    for (int ik : members) {
        BarrierContract c{strikes[std::size_t(ik)], T, barrier, BarrierKind::DownOutPut};
        try {
            validate_contract(c);
            validate_market(market, c);
            live.push_back(ik);
            contracts.push_back(std::move(c));
        } catch (const std::exception& e) {
            PriceCell& cell = out.table.at(ik, jt);
            cell.failed = true;
            cell.error = e.what();
        }
    }
    if (live.empty()) return;

    const CollocationGrid grid = make_collocation_grid(
        market.t0, T, cfg.n_t, market.v0, cfg.v_m, cfg.n_v, eps);
    const LmvfSystem sys = assemble(model, barrier, grid, opts);
    const std::vector<std::vector<double>> rhs =
        rhs_vectors(model, contracts, grid, opts);

    SolveDiag sd;
    sd.maturity = T;
    sd.epsilon = eps;
    sd.assembly_seconds = sys.assembly_seconds;
    sd.max_asymmetry = sys.max_asymmetry;
    sd.max_abs = sys.max_abs;

    const int nv = int(grid.v_nodes.size());
    const int nt = int(grid.t_nodes.size());
    std::vector<BoundaryGradient> grads;
    grads.reserve(live.size());
    for (std::size_t c = 0; c < live.size(); ++c) {
        SolveReport rep;
        std::vector<double> coeff =
            solve_system(sys, rhs[c], cfg.solver, cfg.minres_tol, &rep);
        if (rep.unsym_residual >= sd.unsym_residual) {
            sd.minres_iterations = rep.iterations;
            sd.rel_residual = rep.rel_residual;
            sd.unsym_residual = rep.unsym_residual;
            sd.used_lu_fallback = rep.used_lu_fallback;
        }
        grads.push_back(BoundaryGradient{grid, std::move(coeff)});
        for (int k = 0; k < nt; ++k)
            for (int l = 0; l < nv; ++l)
                out.phi.push_back(PhiSample{contracts[c].strike, T, grid.t_nodes[k],
                                            grid.v_nodes[l],
                                            grads[c](grid.t_nodes[k], grid.v_nodes[l])});
    }
    out.solves.push_back(sd);

    const detail::RowPlan plan = detail::make_plan(model, market.t0, T, opts);
    const detail::QTables qt =
        detail::make_qtables(model.b(), eps, {market.v0}, grid.v_nodes, cfg.kummer);
    const std::vector<double> ynode = detail::barrier_ynodes(barrier, plan.nodes);
    const double y_ref = ynode.front();
    const int ns = int(plan.nodes.size());
    std::vector<std::vector<double>> dtabs(live.size());
    for (std::size_t c = 0; c < live.size(); ++c)
        dtabs[c] = fold_time_weights(grads[c], plan);

    const double xfree = std::log(market.spot / barrier(market.t0));
    std::vector<double> yt(live.size()), yT(live.size());
    double dev = 0.0;
    for (double y : ynode) dev = std::max(dev, std::abs(y - y_ref));
    for (std::size_t c = 0; c < live.size(); ++c) {
        yt[c] = log_barrier(contracts[c], market.t0);
        yT[c] = log_barrier(contracts[c], T);
        dev = std::max(dev, std::abs(yT[c] - yt[c]));
    }
    const double osc = std::max(1.0, std::abs(xfree) + dev);

    detail::WalkState ws;
    detail::QWork qw;
    std::vector<cdouble> qbuf(std::size_t(ns - 1) * std::size_t(nv));
    auto f = [&](double xi, double* comp) {
        detail::run_walk(plan, model, xi, ws);
        detail::q_values(plan, ws, qt, xi, y_ref, ynode, qw, qbuf.data());
        const cdouble sp = SqrtP{Branch::MinusIXi, xi}.value();
        const double sn = std::sin(xi * xfree);
        for (std::size_t c = 0; c < live.size(); ++c) {
            cdouble p2f{};
            for (int j = 1; j < ns; ++j) {
                cdouble srow{};
                const cdouble* row = qbuf.data() + std::size_t(j - 1) * nv;
                const double* dw = dtabs[c].data() + std::size_t(j - 1) * nv;
                for (int l = 0; l < nv; ++l) srow += dw[l] * row[l];
                p2f += plan.wts[j] * srow;
            }
            const cdouble p1f = p1_value(contracts[c].strike, yT[c], ws.alpha_t,
                                         ws.beta_t, market.v0, sp) *
                                std::exp(cdouble(0.0, -xi * yt[c]));
            comp[c] = sn * (p1f - 0.5 * p2f).imag();
        }
    };
    const VectorQuadResult res =
        integrate_gk_vec(int(live.size()), f, 0.0, quad.upsilon, quad,
                         split_panels(0.0, quad.upsilon, osc));

    for (std::size_t c = 0; c < live.size(); ++c) {
        PriceCell& cell = out.table.at(live[c], jt);
        const double raw = (2.0 / kPi) * res.value[c];
        if (raw < -0.01 * contracts[c].strike) {
            cell.failed = true;
            cell.error = "price inversion returned " + std::to_string(raw);
            continue;
        }
        cell.price = std::max(raw, 0.0);
        cell.failed = false;
        if (!res.converged) cell.error = "quadrature tolerance not met";
    }
}

}  // namespace

BatchResult batch_price(const MarketState& market, const HestonModel& model,
                        const PiecewiseCurve& barrier, std::vector<double> strikes,
                        std::vector<double> maturities, const NumericsConfig& cfg) {
    if (strikes.empty() || maturities.empty())
        throw std::invalid_argument("batch needs at least one strike and one maturity");
    BatchResult out;
    out.table.strikes = strikes;
    out.table.maturities = maturities;
    out.table.method = "GIT";
    out.table.cells.resize(strikes.size() * maturities.size());
    for (std::size_t ik = 0; ik < strikes.size(); ++ik)
        for (std::size_t jt = 0; jt < maturities.size(); ++jt) {
            PriceCell& c = out.table.at(int(ik), int(jt));
            c.strike = strikes[ik];
            c.maturity = maturities[jt];
            c.price = std::numeric_limits<double>::quiet_NaN();
        }

    for (std::size_t jt = 0; jt < maturities.size(); ++jt) {
        std::map<double, std::vector<int>> groups;
        for (std::size_t ik = 0; ik < strikes.size(); ++ik)
            groups[cfg.epsilon_for(strikes[ik])].push_back(int(ik));
        for (const auto& [eps, members] : groups) {
            const auto tic = Clock::now();
            try {
                price_group(market, model, barrier, strikes, maturities[jt], int(jt),
                            eps, members, cfg, out);
            } catch (const std::exception& e) {
                for (int ik : members) {
                    PriceCell& cell = out.table.at(ik, int(jt));
                    if (!cell.failed && std::isnan(cell.price)) {
                        cell.failed = true;
                        cell.error = e.what();
                    }
                }
            }
            const double share = seconds_since(tic) / double(members.size());
            for (int ik : members) out.table.at(ik, int(jt)).seconds = share;
        }
    }
    return out;
}

} // namespace svb
