#include <svbarrier/errors.hpp>
#include <svbarrier/lmvf.hpp>
#include <svbarrier/pricer.hpp>

#include "walk_detail.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace svb {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

namespace detail {

RowPlan make_plan(const HestonModel& model, double t, double T,
                  const AssemblyOptions& opts) {
    if (!(T > t))
        throw std::invalid_argument("row time must precede the maturity");
    if (opts.refinement < 1)
        throw std::invalid_argument("refinement must be >= 1");
    RowPlan plan;
    plan.t = t;
    plan.T = T;
    simpson_rule(t, T, opts.quad.simpson_nodes, plan.nodes, plan.wts);

    std::set<double> bps;
    for (const PiecewiseCurve* c :
         {&model.sigma, &model.theta, &model.rho, &model.r, &model.q, &model.kappa})
        for (double bp : c->breakpoints())
            if (bp > t && bp < T) bps.insert(bp);

    const int ni = int(plan.nodes.size()) - 1;
    plan.edges.resize(ni);
    for (int i = 0; i < ni; ++i) {
        const double a = plan.nodes[i], bnd = plan.nodes[i + 1];
        std::set<double> e;
        for (int k = 0; k <= opts.refinement; ++k)
            e.insert(a + (bnd - a) * k / opts.refinement);
        for (auto it = bps.upper_bound(a); it != bps.end() && *it < bnd; ++it)
            e.insert(*it);
        e.insert(a);
        e.insert(bnd);
        plan.edges[i].assign(e.begin(), e.end());
    }
    return plan;
}

void run_walk(const RowPlan& plan, const HestonModel& model, double xi,
              WalkState& ws) {
    const cdouble sqrtp = SqrtP{Branch::MinusIXi, xi}.value();
    const int n = int(plan.nodes.size());
    const int ni = n - 1;
    ws.alpha.assign(n, cdouble{});
    ws.dlg.assign(n, cdouble{});
    ws.dbeta.assign(n, cdouble{});
    ws.jtil.assign(n, cdouble{});
    ws.int_dlg.assign(ni, cdouble{});
    ws.int_dbeta.assign(ni, cdouble{});
    ws.int_j.assign(ni, cdouble{});

    cdouble alpha_run{0.0, 0.0};  // alpha(T) = 0
    ws.alpha[n - 1] = alpha_run;
    for (int i = ni - 1; i >= 0; --i) {
        const auto& edges = plan.edges[i];
        ws.seg_dlg.clear();
        ws.seg_j.clear();
        cdouble dlg_sum{}, dbeta_sum{};
        for (int k = int(edges.size()) - 2; k >= 0; --k) {
            const double le = edges[k];
            const double dt = edges[k + 1] - le;
            const AuxCoeffs coef =
                aux_coeffs_raw(model.kappa(le), model.sigma(le), model.theta(le),
                               model.rho(le), model.r(le), model.q(le), sqrtp);
            const SegmentIncrements seg =
                segment_increments(alpha_run, coef, model.sigma(le), dt);
            alpha_run = seg.alpha_start;
            dlg_sum += seg.d_lg;
            dbeta_sum += seg.d_beta;
            ws.seg_dlg.push_back(seg.d_lg);
            ws.seg_j.push_back(seg.j_seg);
        }
        // fold the scaled integral left-to-right (buffers were filled right-to-left)
        cdouble jacc{0.0, 0.0};
        for (int k = int(ws.seg_j.size()) - 1; k >= 0; --k)
            jacc = ws.seg_j[k] + std::exp(-2.0 * ws.seg_dlg[k]) * jacc;
        ws.int_dlg[i] = dlg_sum;
        ws.int_dbeta[i] = dbeta_sum;
        ws.int_j[i] = jacc;
        ws.alpha[i] = alpha_run;
    }
    for (int i = 0; i < ni; ++i) {
        ws.dlg[i + 1] = ws.dlg[i] + ws.int_dlg[i];
        ws.dbeta[i + 1] = ws.dbeta[i] + ws.int_dbeta[i];
        ws.jtil[i + 1] = ws.int_j[i] + std::exp(-2.0 * ws.int_dlg[i]) * ws.jtil[i];
    }
    ws.alpha_t = ws.alpha[0];
    ws.beta_t = ws.dbeta[n - 1];
}

QTables make_qtables(double b, double eps, const std::vector<double>& v_rows,
                     const std::vector<double>& v_cols, KummerMode mode) {
    QTables qt;
    qt.b = b;
    qt.eps = eps;
    qt.mode = mode;
    qt.vr = v_rows;
    qt.vl = v_cols;
    for (double v : v_rows)
        if (!(v > 0.0)) throw std::invalid_argument("row variance must be positive");
    const std::size_t nc = v_cols.size();
    qt.a0.resize(nc);
    qt.a4.resize(nc);
    qt.gratio.resize(nc);
    for (std::size_t l = 0; l < nc; ++l) {
        const double vl = v_cols[l];
        if (!(vl > 0.0)) throw std::invalid_argument("center variance must be positive");
        qt.a0[l] = 2.0 * std::exp(eps * vl * (1.0 - std::log(vl)));
        qt.a4[l] = b + 1.5 + eps * vl;
        qt.gratio[l] = gamma_fn(qt.a4[l]) / gamma_fn(b + 0.5);
    }
    qt.c1.resize(v_rows.size() * nc);
    for (std::size_t r = 0; r < v_rows.size(); ++r)
        for (std::size_t l = 0; l < nc; ++l)
            qt.c1[r * nc + l] =
                std::exp(-eps * v_rows[r] + eps * v_cols[l] * std::log(v_rows[r]));
    return qt;
}

void q_values(const RowPlan& plan, const WalkState& ws, const QTables& qt,
              double xi, double y_ref, const std::vector<double>& ynode,
              QWork& qw, cdouble* out) {
    const int n = int(plan.nodes.size());
    const int nr = int(qt.vr.size());
    const int nc = int(qt.vl.size());
    const double b = qt.b, eps = qt.eps;
    qw.p2pow.assign(nc, cdouble{1.0, 0.0});
    for (int j = 1; j < n; ++j) {
        const cdouble halfJ = 0.5 * ws.jtil[j];
        const cdouble w = (eps + ws.alpha[j]) * halfJ;
        const cdouble l1w = std::log(1.0 + w);
        const cdouble powbase = halfJ * std::exp(-(b + 1.5) * l1w);
        const cdouble damp = std::exp(-2.0 * ws.dlg[j]);
        const cdouble rhp = 1.0 / (1.0 + w);
        const cdouble zeta = damp / halfJ;
        const cdouble xk = zeta * rhp;
        const cdouble sterm = ws.alpha_t - zeta * w * rhp;
        const cdouble phase = cdouble(0.0, xi * (ynode[j] - y_ref)) + ws.dbeta[j];
        if (qt.mode == KummerMode::Series) {
            const cdouble lw2 = l1w - std::log(halfJ);
            for (int l = 0; l < nc; ++l)
                qw.p2pow[l] = std::exp(-(eps * qt.vl[l]) * lw2);
        }
        for (int r = 0; r < nr; ++r) {
            const double v = qt.vr[r];
            const cdouble ev = std::exp(phase + sterm * v);
            const cdouble xkv = xk * v;
            cdouble* row = out + std::size_t((j - 1) * nr + r) * nc;
            if (qt.mode == KummerMode::Approx) {
                const cdouble base = powbase * (b + 0.5 + xkv) * ev;
                for (int l = 0; l < nc; ++l)
                    row[l] = qt.a0[l] * qt.c1[std::size_t(r) * nc + l] * base;
            } else {
                const cdouble base = powbase * ev;
                for (int l = 0; l < nc; ++l)
                    row[l] = qt.a0[l] * qt.gratio[l] * qw.p2pow[l] *
                             kummer_m_scaled(qt.a4[l], b + 0.5, xkv) * base;
            }
        }
    }
}

std::vector<double> barrier_ynodes(const PiecewiseCurve& barrier,
                                   const std::vector<double>& nodes) {
    std::vector<double> y(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double L = barrier(nodes[i]);
        if (!(L > 0.0))
            throw std::invalid_argument("barrier must be positive on [t,T]");
        y[i] = std::log(L);
    }
    return y;
}

double gaussian_time_weight(double s, double t_k, double eps) {
    const double d = s - t_k;
    return std::exp(-eps * d * d);
}

}  // namespace detail

using namespace detail;

CollocationGrid make_collocation_grid(double t0, double T, int n_t, double v0,
                                      double v_m, int n_v, double epsilon) {
    if (!(T > t0)) throw std::invalid_argument("maturity must exceed the row origin");
    if (n_t < 2 || n_v < 1) throw std::invalid_argument("grid needs n_t >= 2, n_v >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (v_m < 0.0 || !(v0 - v_m > 0.0))
        throw std::invalid_argument("variance band must stay positive");
    CollocationGrid g;
    g.epsilon = epsilon;
    g.t_nodes.resize(n_t);
    for (int i = 0; i < n_t; ++i) g.t_nodes[i] = t0 + (T - t0) * i / (n_t - 1);
    g.t_nodes.back() = T;
    if (n_v == 1) {
        g.v_nodes = {v0};
    } else {
        g.v_nodes.resize(n_v);
        for (int j = 0; j < n_v; ++j)
            g.v_nodes[j] = v0 - v_m + 2.0 * v_m * j / (n_v - 1);
    }
    return g;
}

double basis_theta(double s, double nu, double t_k, double nu_l, double eps) {
    if (!(nu > 0.0) || !(nu_l > 0.0))
        throw std::invalid_argument("basis_theta needs nu, nu_l > 0");
    if (!(eps > 0.0)) throw std::invalid_argument("basis_theta needs eps > 0");
    const double dt = s - t_k;
    const double lg = 2.0 * eps * nu_l * nu_l * std::log(nu / nu_l) -
                      eps * (nu * nu - nu_l * nu_l) - eps * dt * dt;
    return std::exp(lg);
}

cdouble inner_J_closed(const InnerJCoeffs& jc, double b, KummerMode mode) {
    const cdouble x = jc.a3 * jc.a3 / (4.0 * jc.a2);
    const double a4 = (mode == KummerMode::Approx) ? b + 1.5 : jc.a4;
    const cdouble pref =
        jc.a0 * std::exp(-(b + 0.5) * std::numbers::ln2 +
                         (b - 0.5) * std::log(jc.a3) - a4 * std::log(jc.a2));
    if (mode == KummerMode::Approx) {
        const double c1 = std::exp(-jc.eps * jc.v + jc.eps * jc.v_l * std::log(jc.v));
        // Gamma(b+3/2)/Gamma(b+1/2) = b+1/2; the approx identity supplies M
        return pref * c1 * (b + 0.5) * kummer_m_approx(b, x);
    }
    const double gr = gamma_fn(jc.a4) / gamma_fn(b + 0.5);
    return pref * gr * kummer_m_series(jc.a4, b + 0.5, x);
}

cdouble i_kl_xi(const HestonModel& model, const PiecewiseCurve& barrier, double t,
                double T, double v, double t_k, double v_l, double eps, double xi,
                const AssemblyOptions& opts) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (xi < 0.0) throw std::invalid_argument("xi must be nonnegative");
    const RowPlan plan = make_plan(model, t, T, opts);
    const std::vector<double> ynode = barrier_ynodes(barrier, plan.nodes);
    const QTables qt = make_qtables(model.b(), eps, {v}, {v_l}, opts.kummer);
    WalkState ws;
    QWork qw;
    run_walk(plan, model, xi, ws);
    std::vector<cdouble> qbuf(plan.nodes.size() - 1);
    q_values(plan, ws, qt, xi, 0.0, ynode, qw, qbuf.data());
    cdouble sum{0.0, 0.0};
    for (std::size_t j = 1; j < plan.nodes.size(); ++j)
        sum += plan.wts[j] * gaussian_time_weight(plan.nodes[j], t_k, eps) * qbuf[j - 1];
    return sum;
}

double w_entry_direct(const HestonModel& model, const PiecewiseCurve& barrier,
                      double t, double T, double v, double t_k, double v_l,
                      double eps, const AssemblyOptions& opts) {
    const double y_t = std::log(barrier(t));
    const auto f = [&](double xi) -> cdouble {
        const cdouble col = i_kl_xi(model, barrier, t, T, v, t_k, v_l, eps, xi, opts);
        return xi * std::imag(col * std::exp(cdouble(0.0, -xi * y_t)));
    };
    return integrate_gk(f, 0.0, opts.quad.upsilon, opts.quad).value.real();
}

double w_entry_reference(const HestonModel& model, const PiecewiseCurve& barrier,
                         double t, double T, double v, double t_k, double v_l,
                         double eps, const AssemblyOptions& opts) {
    if (!(T > t)) throw std::invalid_argument("row time must precede the maturity");
    const double b = model.b();
    std::vector<double> nodes, wts;
    simpson_rule(t, T, opts.quad.simpson_nodes, nodes, wts);
    const std::vector<double> ynode = barrier_ynodes(barrier, nodes);
    const double y_t = ynode.front();
    const double nu_l = std::sqrt(v_l);
    const double vmax = 60.0 / eps + 10.0 * (1.0 + v_l);
    const auto f = [&](double xi) -> cdouble {
        const TransformCache cache =
            build_cache(model, SqrtP{Branch::MinusIXi, xi}, nodes, opts.refinement);
        cdouble ssum{0.0, 0.0};
        for (std::size_t j = 1; j < nodes.size(); ++j) {
            const auto inner = [&](double vp) -> cdouble {
                return kernel_frak(cache, 0, j, v, vp, ynode[j], b) *
                       basis_theta(nodes[j], std::sqrt(vp), t_k, nu_l, eps);
            };
            // near the diagonal the kernel is a width-sqrt(dtau) spike around
            // v' ~ v |g_t/g_s|^2 that a cold adaptive pass can sample right
            // past; seed the rule with edges bracketing the spike
            const cdouble dtau = cache.tau.front() - cache.tau[j];
            const double gs2 = std::exp(2.0 * cache.lg[j].real());
            const double vpk =
                v * std::exp(2.0 * (cache.lg.front().real() - cache.lg[j].real()));
            const double wd =
                2.0 * std::sqrt(std::max(vpk, 1e-6) * std::abs(dtau) / gs2);
            std::vector<double> edges{1e-12, vmax};
            for (double k : {-8.0, -3.0, -1.0, 1.0, 3.0, 8.0}) {
                const double e = vpk + k * wd;
                if (e > 1e-12 && e < vmax) edges.push_back(e);
            }
            std::sort(edges.begin(), edges.end());
            cdouble val{0.0, 0.0};
            for (std::size_t q = 1; q < edges.size(); ++q)
                if (edges[q] - edges[q - 1] > 1e-13)
                    val += integrate_gk(inner, edges[q - 1], edges[q], opts.quad).value;
            ssum += wts[j] * val;
        }
        return xi * std::imag(ssum * std::exp(cdouble(0.0, -xi * y_t)));
    };
    return integrate_gk(f, 0.0, opts.quad.upsilon, opts.quad).value.real();
}

LmvfSystem assemble(const HestonModel& model, const PiecewiseCurve& barrier,
                    const CollocationGrid& grid, const AssemblyOptions& opts) {
    const auto clock0 = std::chrono::steady_clock::now();
    const int n_t = int(grid.t_nodes.size());
    const int n_v = int(grid.v_nodes.size());
    const int n = grid.size();
    if (n == 0) throw std::invalid_argument("empty collocation grid");
    const double T = grid.t_nodes.back();
    const double eps = grid.epsilon;

    LmvfSystem sys;
    sys.grid = grid;
    sys.n = n;
    sys.A.assign(std::size_t(n) * n, 0.0);

    for (int it = 0; it < n_t; ++it)
        for (int iv = 0; iv < n_v; ++iv) {
            const int row = grid.index(it, iv);
            const double nu = std::sqrt(grid.v_nodes[iv]);
            for (int kt = 0; kt < n_t; ++kt)
                for (int kv = 0; kv < n_v; ++kv)
                    sys.A[std::size_t(row) * n + grid.index(kt, kv)] = basis_theta(
                        grid.t_nodes[it], nu, grid.t_nodes[kt],
                        std::sqrt(grid.v_nodes[kv]), eps);
        }

    if (!opts.kernel_off) {
        const QTables qt =
            make_qtables(model.b(), eps, grid.v_nodes, grid.v_nodes, opts.kummer);
        WalkState ws;
        QWork qw;
        for (int it = 0; it < n_t; ++it) {
            const double t = grid.t_nodes[it];
            if (!(t < T)) continue;  // maturity rows are pure interpolation
            const RowPlan plan = make_plan(model, t, T, opts);
            const std::vector<double> ynode = barrier_ynodes(barrier, plan.nodes);
            const double y_t = std::log(barrier(t));
            const int n_s = int(plan.nodes.size());
            const int ncomp = (n_s - 1) * n_v * n_v;
            std::vector<cdouble> qbuf(ncomp);
            const auto f = [&](double xi, double* out) {
                run_walk(plan, model, xi, ws);
                q_values(plan, ws, qt, xi, y_t, ynode, qw, qbuf.data());
                for (int c = 0; c < ncomp; ++c) out[c] = xi * qbuf[c].imag();
            };
            double osc = 1.0;
            for (int j = 1; j < n_s; ++j) osc = std::max(osc, std::abs(ynode[j] - y_t));
            const auto edges = split_panels(0.0, opts.quad.upsilon, osc);
            const VectorQuadResult res =
                integrate_gk_vec(ncomp, f, 0.0, opts.quad.upsilon, opts.quad, edges);
            sys.xi_evaluations += res.evaluations;
            sys.quad_converged = sys.quad_converged && res.converged;
            for (int iv = 0; iv < n_v; ++iv) {
                const int row = grid.index(it, iv);
                for (int kt = 0; kt < n_t; ++kt)
                    for (int kv = 0; kv < n_v; ++kv) {
                        double wsum = 0.0;
                        for (int j = 1; j < n_s; ++j)
                            wsum += plan.wts[j] *
                                    gaussian_time_weight(plan.nodes[j],
                                                         grid.t_nodes[kt], eps) *
                                    res.value[std::size_t((j - 1) * n_v + iv) * n_v + kv];
                        // the boundary source enters the backward image PDE
                        // through Duhamel with a minus, so the kernel term
                        // adds to the interpolation block
                        sys.A[std::size_t(row) * n + grid.index(kt, kv)] +=
                            wsum / (2.0 * kPi);
                    }
            }
        }
    }

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double aij = sys.A[std::size_t(i) * n + j];
            sys.max_abs = std::max(sys.max_abs, std::abs(aij));
            if (j > i)
                sys.max_asymmetry = std::max(
                    sys.max_asymmetry, std::abs(aij - sys.A[std::size_t(j) * n + i]));
        }
    sys.assembly_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
    return sys;
}

double rhs_f(double t, double v, const BarrierContract& contract,
             const HestonModel& model, const AssemblyOptions& opts) {
    const double T = contract.maturity;
    if (!(v > 0.0)) throw std::invalid_argument("variance must be positive");
    if (t > T) throw std::invalid_argument("row time beyond maturity");
    if (T - t <= 1e-12 * std::max(1.0, T)) return -0.5 * contract.barrier(T);
    const RowPlan plan = make_plan(model, t, T, opts);
    WalkState ws;
    const double y_t = log_barrier(contract, t);
    const double y_T = log_barrier(contract, T);
    const auto f = [&](double xi) -> cdouble {
        run_walk(plan, model, xi, ws);
        const cdouble sp = SqrtP{Branch::MinusIXi, xi}.value();
        const cdouble P1 = p1_value(contract.strike, y_T, ws.alpha_t, ws.beta_t, v, sp);
        return xi * std::imag(P1 * std::exp(cdouble(0.0, -xi * y_t)));
    };
    return integrate_gk(f, 0.0, opts.quad.upsilon, opts.quad).value.real() / kPi;
}

std::vector<std::vector<double>> rhs_vectors(const HestonModel& model,
                                             const std::vector<BarrierContract>& contracts,
                                             const CollocationGrid& grid,
                                             const AssemblyOptions& opts) {
    if (contracts.empty()) throw std::invalid_argument("no contracts");
    const int n_t = int(grid.t_nodes.size());
    const int n_v = int(grid.v_nodes.size());
    const double T = grid.t_nodes.back();
    const int nk = int(contracts.size());
    for (const auto& c : contracts)
        if (std::abs(c.maturity - T) > 1e-10 * std::max(1.0, T))
            throw std::invalid_argument("contract maturity must match the grid");

    std::vector<std::vector<double>> out(nk, std::vector<double>(grid.size(), 0.0));
    WalkState ws;
    for (int it = 0; it < n_t; ++it) {
        const double t = grid.t_nodes[it];
        if (!(t < T)) {
            for (int c = 0; c < nk; ++c)
                for (int iv = 0; iv < n_v; ++iv)
                    out[c][grid.index(it, iv)] = -0.5 * contracts[c].barrier(T);
            continue;
        }
        const RowPlan plan = make_plan(model, t, T, opts);
        std::vector<double> y_t(nk), y_T(nk);
        for (int c = 0; c < nk; ++c) {
            y_t[c] = log_barrier(contracts[c], t);
            y_T[c] = log_barrier(contracts[c], T);
        }
        const int ncomp = nk * n_v;
        const auto f = [&](double xi, double* comp) {
            run_walk(plan, model, xi, ws);
            const cdouble sp = SqrtP{Branch::MinusIXi, xi}.value();
            for (int c = 0; c < nk; ++c) {
                const cdouble ub = u_bar_terminal(contracts[c].strike, y_T[c], sp);
                const cdouble ph = ub * std::exp(cdouble(0.0, -xi * y_t[c]));
                for (int iv = 0; iv < n_v; ++iv) {
                    const cdouble P1 =
                        ph * std::exp(ws.beta_t + ws.alpha_t * grid.v_nodes[iv]);
                    comp[c * n_v + iv] = xi * P1.imag();
                }
            }
        };
        const auto edges = split_panels(0.0, opts.quad.upsilon, 1.0);
        const VectorQuadResult res =
            integrate_gk_vec(ncomp, f, 0.0, opts.quad.upsilon, opts.quad, edges);
        for (int c = 0; c < nk; ++c)
            for (int iv = 0; iv < n_v; ++iv)
                out[c][grid.index(it, iv)] = res.value[c * n_v + iv] / kPi;
    }
    return out;
}

std::vector<double> solve_system(const LmvfSystem& sys, const std::vector<double>& rhs,
                                 SolverKind kind, double tol, SolveReport* report) {
    const int n = sys.n;
    if (int(rhs.size()) != n) throw std::invalid_argument("rhs size mismatch");
    SolveReport local;
    SolveReport& rep = report ? *report : local;
    rep = SolveReport{};

    const auto raw_residual = [&](const std::vector<double>& x) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            double ri = -rhs[i];
            for (int j = 0; j < n; ++j) ri += sys.A[std::size_t(i) * n + j] * x[j];
            num += ri * ri;
            den += rhs[i] * rhs[i];
        }
        return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    };

    std::vector<double> x(n, 0.0);
    double bnorm = 0.0;
    for (double v : rhs) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return x;

    bool need_lu = (kind == SolverKind::Lu);
    if (kind == SolverKind::Minres) {
        // MINRES on the symmetrized operator
        std::vector<double> S(std::size_t(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                S[std::size_t(i) * n + j] =
                    0.5 * (sys.A[std::size_t(i) * n + j] + sys.A[std::size_t(j) * n + i]);

        std::vector<double> v_prev(n, 0.0), v(n), av(n), w(n, 0.0), w_prev(n, 0.0),
            w_next(n);
        for (int i = 0; i < n; ++i) v[i] = rhs[i] / bnorm;
        double beta = 0.0, eta = bnorm, norm_r = bnorm;
        double c_old = 1.0, c = 1.0, s_old = 0.0, s = 0.0;
        const int max_iter = 10 * n;
        int k = 0;
        for (k = 1; k <= max_iter; ++k) {
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += S[std::size_t(i) * n + j] * v[j];
                av[i] = acc;
            }
            double alpha = 0.0;
            for (int i = 0; i < n; ++i) alpha += v[i] * av[i];
            double beta_next = 0.0;
            for (int i = 0; i < n; ++i) {
                av[i] -= alpha * v[i] + beta * v_prev[i];
                beta_next += av[i] * av[i];
            }
            beta_next = std::sqrt(beta_next);

            const double delta = c * alpha - c_old * s * beta;
            const double rho1 = std::sqrt(delta * delta + beta_next * beta_next);
            const double rho2 = s * alpha + c_old * c * beta;
            const double rho3 = s_old * beta;
            c_old = c;
            s_old = s;
            c = delta / rho1;
            s = beta_next / rho1;
            for (int i = 0; i < n; ++i)
                w_next[i] = (v[i] - rho3 * w_prev[i] - rho2 * w[i]) / rho1;
            for (int i = 0; i < n; ++i) x[i] += c * eta * w_next[i];
            norm_r *= std::abs(s);
            eta = -s * eta;
            rep.residual_history.push_back(norm_r / bnorm);
            if (norm_r / bnorm <= tol) break;
            if (beta_next < 1e-300) break;  // invariant subspace reached
            std::swap(w_prev, w);
            std::swap(w, w_next);
            std::swap(v_prev, v);
            for (int i = 0; i < n; ++i) v[i] = av[i] / beta_next;
            beta = beta_next;
        }
        rep.iterations = std::min(k, max_iter);
        rep.rel_residual =
            rep.residual_history.empty() ? 1.0 : rep.residual_history.back();
        rep.unsym_residual = raw_residual(x);
        if (!(rep.rel_residual <= tol) || !(rep.unsym_residual <= 1e-4)) need_lu = true;
    }

    if (need_lu) {
        rep.used_lu_fallback = (kind == SolverKind::Minres);
        using RowMat =
            Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const RowMat> A(sys.A.data(), n, n);
        Eigen::Map<const Eigen::VectorXd> f(rhs.data(), n);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        Eigen::VectorXd sol;
        if (!lu.isInvertible()) {
            rep.ridge_applied = true;
            double tr = 0.0;
            for (int i = 0; i < n; ++i) tr += std::abs(A(i, i));
            double lam = 1e-12 * tr / n;
            if (!(lam > 0.0)) lam = 1e-12 * std::max(sys.max_abs, 1.0);
            Eigen::MatrixXd Ar = A;
            Ar.diagonal().array() += lam;
            lu.compute(Ar);
            sol = lu.solve(f);
        } else {
            sol = lu.solve(f);
        }
        for (int i = 0; i < n; ++i) x[i] = sol[i];
        rep.unsym_residual = raw_residual(x);
    }
    return x;
}

double BoundaryGradient::operator()(double t, double v) const {
    if (!(v > 0.0)) throw std::invalid_argument("variance must be positive");
    if (coeff.size() != std::size_t(grid.size()))
        throw std::invalid_argument("coefficient size mismatch");
    const double nu = std::sqrt(v);
    double acc = 0.0;
    std::size_t idx = 0;
    for (double t_k : grid.t_nodes)
        for (double v_l : grid.v_nodes)
            acc += coeff[idx++] * basis_theta(t, nu, t_k, std::sqrt(v_l), grid.epsilon);
    return acc;
}

double theta_positivity_F(double omega, double nu_l, double eps, double w) {
    if (!(nu_l > 0.0) || !(eps > 0.0))
        throw std::invalid_argument("theta_positivity_F needs nu_l, eps > 0");
    const double en2 = eps * nu_l * nu_l;
    const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * kPi);
    // e^{-X} M(1/2+en2, 1/2, -X) evaluated through the Kummer transform, which
    // is exactly the scaled form at (-en2, 1/2, X): sign-stable for X >= 0
    const double X = omega * omega / (4.0 * eps);
    const double mval = kummer_m_scaled(-en2, 0.5, X).real();
    const double pref = inv_sqrt2pi *
                        std::exp(en2 - 2.0 * en2 * std::log(nu_l) -
                                 (0.5 + en2) * std::log(eps)) *
                        gamma_fn(0.5 + en2);
    return w * inv_sqrt2pi + pref * mval;
}

bool theta_positivity_scan(double w, double* min_value) {
    static const double eps_grid[] = {0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0,
                                      2.5, 3.0,  3.5, 4.0,  4.5, 5.0};
    double mn = std::numeric_limits<double>::max();
    for (double eps : eps_grid)
        for (int inu = 1; inu <= 40; ++inu) {
            const double nu_l = 0.05 * inu;
            for (int iw = 0; iw <= 200; ++iw)
                mn = std::min(mn, theta_positivity_F(0.1 * iw, nu_l, eps, w));
        }
    if (min_value) *min_value = mn;
    return mn > 0.0;
}

} // namespace svb
