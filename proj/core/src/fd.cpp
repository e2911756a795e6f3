#include <svbarrier/errors.hpp>
#include <svbarrier/fd.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace svb {

namespace {

using Clock = std::chrono::steady_clock;

// Thomas solve, solution written into d
void solve_tridiag(std::vector<double>& a, std::vector<double>& b,
                   std::vector<double>& c, std::vector<double>& d, std::size_t n) {
    for (std::size_t k = 1; k < n; ++k) {
        const double m = a[k] / b[k - 1];
        b[k] -= m * c[k - 1];
        d[k] -= m * d[k - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) d[k] = (d[k] - c[k] * d[k + 1]) / b[k];
}

std::vector<double> sinh_grid(double lo, double hi, double center, double width,
                              int n) {
    const double xl = std::asinh((lo - center) / width);
    const double xh = std::asinh((hi - center) / width);
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = xl + (xh - xl) * i / (n - 1);
        g[std::size_t(i)] = center + width * std::sinh(x);
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

// move the interior node nearest to target onto it (mesh stays monotone)
void nudge_to_node(std::vector<double>& g, double target) {
    const int n = int(g.size());
    if (!(target > g.front() && target < g.back()))
        throw std::invalid_argument("grid target outside the mesh");
    const auto it = std::upper_bound(g.begin(), g.end(), target);
    const int lo = int(it - g.begin()) - 1;
    int cand = (target - g[std::size_t(lo)] <= g[std::size_t(lo) + 1] - target)
                   ? lo
                   : lo + 1;
    cand = std::clamp(cand, 1, n - 2);
    g[std::size_t(cand)] = target;
}

struct Stencil {
    double m = 0.0, c = 0.0, p = 0.0;  // weights on U_{k-1}, U_k, U_{k+1}
};

Stencil d1_central(double hm, double hp) {
    return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

Stencil d2_central(double hm, double hp) {
    return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

struct Operators {
    int ns = 0, nv = 0;
    const std::vector<double>* s = nullptr;
    const std::vector<double>* v = nullptr;
    std::vector<Stencil> d1s, d2s, d1v, d2v;  // interior central stencils

    // per-step coefficients
    double rr = 0.0, qq = 0.0, kp = 0.0, th = 0.0, sg = 0.0, rho = 0.0;

    std::size_t at(int i, int j) const { return std::size_t(i) * nv + j; }

    void sample(const HestonModel& model, double tm) {
        rr = model.r(tm);
        qq = model.q(tm);
        kp = model.kappa(tm);
        th = model.theta(tm);
        sg = model.sigma(tm);
        rho = model.rho(tm);
    }

    void a1_row(int i, int j, double& l, double& d, double& u) const {
        const double si = (*s)[std::size_t(i)];
        const double vj = (*v)[std::size_t(j)];
        const double dif = 0.5 * vj * si * si;
        const double con = (rr - qq) * si;
        l = dif * d2s[std::size_t(i)].m + con * d1s[std::size_t(i)].m;
        d = dif * d2s[std::size_t(i)].c + con * d1s[std::size_t(i)].c - 0.5 * rr;
        u = dif * d2s[std::size_t(i)].p + con * d1s[std::size_t(i)].p;
    }

    void a2_row(int j, double& l, double& d, double& u) const {
        if (j == 0) {
            // v = 0: degenerate row, forward convection only
            const double h0 = (*v)[1] - (*v)[0];
            const double con = kp * th / h0;
            l = 0.0;
            d = -con - 0.5 * rr;
            u = con;
            return;
        }
        const double vj = (*v)[std::size_t(j)];
        const double dif = 0.5 * sg * sg * vj;
        const double con = kp * (th - vj);
        l = dif * d2v[std::size_t(j)].m + con * d1v[std::size_t(j)].m;
        d = dif * d2v[std::size_t(j)].c + con * d1v[std::size_t(j)].c - 0.5 * rr;
        u = dif * d2v[std::size_t(j)].p + con * d1v[std::size_t(j)].p;
    }

    // out = A1 U (zero on pinned S rows)
    void apply_a1(const std::vector<double>& U, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 1; i + 1 < ns; ++i)
            for (int j = 0; j < nv; ++j) {
                double l, d, u;
                a1_row(i, j, l, d, u);
                out[at(i, j)] =
                    l * U[at(i - 1, j)] + d * U[at(i, j)] + u * U[at(i + 1, j)];
            }
    }

    // out = A2 U (zero on pinned S rows and the Neumann top row)
    void apply_a2(const std::vector<double>& U, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 1; i + 1 < ns; ++i)
            for (int j = 0; j + 1 < nv; ++j) {
                double l, d, u;
                a2_row(j, l, d, u);
                const double um = (j > 0) ? U[at(i, j - 1)] : 0.0;
                out[at(i, j)] = l * um + d * U[at(i, j)] + u * U[at(i, j + 1)];
            }
    }

    // out = A0 U, the explicit mixed term
    void apply_a0(const std::vector<double>& U, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 1; i + 1 < ns; ++i) {
            const double si = (*s)[std::size_t(i)];
            const Stencil& as = d1s[std::size_t(i)];
            const double ws[3] = {as.m, as.c, as.p};
            for (int j = 1; j + 1 < nv; ++j) {
                const double coef = rho * sg * (*v)[std::size_t(j)] * si;
                if (coef == 0.0) continue;
                const Stencil& av = d1v[std::size_t(j)];
                const double wv[3] = {av.m, av.c, av.p};
                double acc = 0.0;
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                        acc += ws[di + 1] * wv[dj + 1] * U[at(i + di, j + dj)];
                out[at(i, j)] = coef * acc;
            }
        }
    }

    // solve (I - w A1) X = rhs per v level; X has pinned S rows zero
    void solve_a1(std::vector<double>& rhs, double w, std::vector<double>& ta,
                  std::vector<double>& tb, std::vector<double>& tc,
                  std::vector<double>& td) const {
        const std::size_t ni = std::size_t(ns - 2);
        for (int j = 0; j < nv; ++j) {
            for (int i = 1; i + 1 < ns; ++i) {
                double l, d, u;
                a1_row(i, j, l, d, u);
                ta[std::size_t(i - 1)] = -w * l;
                tb[std::size_t(i - 1)] = 1.0 - w * d;
                tc[std::size_t(i - 1)] = -w * u;
                td[std::size_t(i - 1)] = rhs[at(i, j)];
            }
            solve_tridiag(ta, tb, tc, td, ni);
            rhs[at(0, j)] = 0.0;
            rhs[at(ns - 1, j)] = 0.0;
            for (int i = 1; i + 1 < ns; ++i) rhs[at(i, j)] = td[std::size_t(i - 1)];
        }
    }

    // solve (I - w A2) X = rhs per S level; top row carries P_v = 0
    void solve_a2(std::vector<double>& rhs, double w, std::vector<double>& ta,
                  std::vector<double>& tb, std::vector<double>& tc,
                  std::vector<double>& td) const {
        for (int i = 1; i + 1 < ns; ++i) {
            for (int j = 0; j + 1 < nv; ++j) {
                double l, d, u;
                a2_row(j, l, d, u);
                ta[std::size_t(j)] = -w * l;
                tb[std::size_t(j)] = 1.0 - w * d;
                tc[std::size_t(j)] = -w * u;
                td[std::size_t(j)] = rhs[at(i, j)];
            }
            ta[std::size_t(nv - 1)] = -1.0;
            tb[std::size_t(nv - 1)] = 1.0;
            tc[std::size_t(nv - 1)] = 0.0;
            td[std::size_t(nv - 1)] = 0.0;
            solve_tridiag(ta, tb, tc, td, std::size_t(nv));
            for (int j = 0; j < nv; ++j) rhs[at(i, j)] = td[std::size_t(j)];
        }
    }
};

}  // namespace

double FdSolution::price_at(double S, double v) const {
    const int ns = int(s_nodes.size()), nv = int(v_nodes.size());
    if (ns < 4 || nv < 4) throw std::invalid_argument("grid too small to interpolate");
    if (!(S >= s_nodes.front() && S <= s_nodes.back()) ||
        !(v >= v_nodes.front() && v <= v_nodes.back()))
        throw std::invalid_argument("query point outside the grid");
    auto window = [](const std::vector<double>& g, double x) {
        const int n = int(g.size());
        int lo = int(std::upper_bound(g.begin(), g.end(), x) - g.begin()) - 1;
        lo = std::clamp(lo - 1, 0, n - 4);
        return lo;
    };
    auto weights = [](const std::vector<double>& g, int lo, double x,
                      double w[4]) {
        for (int a = 0; a < 4; ++a) {
            double acc = 1.0;
            for (int b = 0; b < 4; ++b)
                if (b != a)
                    acc *= (x - g[std::size_t(lo + b)]) /
                           (g[std::size_t(lo + a)] - g[std::size_t(lo + b)]);
            w[a] = acc;
        }
    };
    const int is = window(s_nodes, S), iv = window(v_nodes, v);
    double ws[4], wv[4];
    weights(s_nodes, is, S, ws);
    weights(v_nodes, iv, v, wv);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            acc += ws[a] * wv[b] *
                   surface[std::size_t(is + a) * nv + std::size_t(iv + b)];
    return acc;
}

FdSolution fd_solve(const HestonModel& model, const BarrierContract& contract,
                    const MarketState& market, const FdGridSpec& spec) {
    const auto tic = Clock::now();
    validate_contract(contract);
    validate_market(market, contract);
    if (!contract.barrier.is_constant())
        throw std::invalid_argument("grid solver needs a constant barrier");
    if (spec.n_s < 8 || spec.n_v < 8)
        throw std::invalid_argument("grid too small");
    if (!(spec.dt_cap > 0.0)) throw std::invalid_argument("dt_cap must be positive");

    const double K = contract.strike, T = contract.maturity, t0 = market.t0;
    const double L = contract.barrier(t0);
    if (!(T > t0)) throw std::invalid_argument("maturity must exceed t0");
    const double s_max =
        spec.s_max > 0.0 ? spec.s_max : std::max(600.0, 6.0 * std::max(market.spot, K));
    if (!(s_max > K && s_max > market.spot))
        throw std::invalid_argument("s_max too small");
    if (!(spec.v_max > market.v0)) throw std::invalid_argument("v_max too small");

    FdSolution sol;
    sol.s_nodes = sinh_grid(L, s_max, K, K / 5.0, spec.n_s);
    nudge_to_node(sol.s_nodes, market.spot);
    sol.v_nodes = sinh_grid(0.0, spec.v_max, 0.0, market.v0 / 2.0, spec.n_v);
    nudge_to_node(sol.v_nodes, market.v0);

    const int ns = spec.n_s, nv = spec.n_v;
    Operators op;
    op.ns = ns;
    op.nv = nv;
    op.s = &sol.s_nodes;
    op.v = &sol.v_nodes;
    op.d1s.resize(std::size_t(ns));
    op.d2s.resize(std::size_t(ns));
    for (int i = 1; i + 1 < ns; ++i) {
        const double hm = sol.s_nodes[std::size_t(i)] - sol.s_nodes[std::size_t(i) - 1];
        const double hp = sol.s_nodes[std::size_t(i) + 1] - sol.s_nodes[std::size_t(i)];
        op.d1s[std::size_t(i)] = d1_central(hm, hp);
        op.d2s[std::size_t(i)] = d2_central(hm, hp);
    }
    op.d1v.resize(std::size_t(nv));
    op.d2v.resize(std::size_t(nv));
    for (int j = 1; j + 1 < nv; ++j) {
        const double hm = sol.v_nodes[std::size_t(j)] - sol.v_nodes[std::size_t(j) - 1];
        const double hp = sol.v_nodes[std::size_t(j) + 1] - sol.v_nodes[std::size_t(j)];
        op.d1v[std::size_t(j)] = d1_central(hm, hp);
        op.d2v[std::size_t(j)] = d2_central(hm, hp);
    }

    const std::size_t nn = std::size_t(ns) * std::size_t(nv);
    std::vector<double> U(nn, 0.0);

    // payoff, cell averaged across the strike kink, barrier and far rows pinned
    for (int i = 1; i + 1 < ns; ++i) {
        const double si = sol.s_nodes[std::size_t(i)];
        const double ml = 0.5 * (sol.s_nodes[std::size_t(i) - 1] + si);
        const double mr = 0.5 * (si + sol.s_nodes[std::size_t(i) + 1]);
        double val;
        if (ml < K && K < mr)
            val = 0.5 * (K - ml) * (K - ml) / (mr - ml);
        else
            val = std::max(K - si, 0.0);
        for (int j = 0; j < nv; ++j) U[op.at(i, j)] = val;
    }

    const int total = std::max(1, int(std::ceil((T - t0) / spec.dt_cap - 1e-12)));
    const double dt = (T - t0) / total;
    const int damped = std::min(spec.rannacher_steps, total);

    std::vector<double> e0(nn), e1(nn), e2(nn), f0(nn), f1(nn), f2(nn);
    std::vector<double> y0(nn), work(nn);
    const std::size_t tmax = std::size_t(std::max(ns, nv));
    std::vector<double> ta(tmax), tb(tmax), tc(tmax), td(tmax);

    for (int k = 0; k < total; ++k) {
        const double tm = T - (k + 0.5) * dt;  // midpoint coefficient sampling
        const bool hv = k >= damped;
        const double theta = hv ? 0.5 : 1.0;
        op.sample(model, tm);

        op.apply_a0(U, e0);
        op.apply_a1(U, e1);
        op.apply_a2(U, e2);
        for (std::size_t p = 0; p < nn; ++p)
            y0[p] = U[p] + dt * (e0[p] + e1[p] + e2[p]);

        for (std::size_t p = 0; p < nn; ++p) work[p] = y0[p] - theta * dt * e1[p];
        op.solve_a1(work, theta * dt, ta, tb, tc, td);
        for (std::size_t p = 0; p < nn; ++p) work[p] -= theta * dt * e2[p];
        op.solve_a2(work, theta * dt, ta, tb, tc, td);  // work = Y2

        if (!hv) {
            U.swap(work);
        } else {
            op.apply_a0(work, f0);
            op.apply_a1(work, f1);
            op.apply_a2(work, f2);
            for (std::size_t p = 0; p < nn; ++p)
                y0[p] += 0.5 * dt *
                         (f0[p] + f1[p] + f2[p] - e0[p] - e1[p] - e2[p]);
            for (std::size_t p = 0; p < nn; ++p) y0[p] -= theta * dt * f1[p];
            op.solve_a1(y0, theta * dt, ta, tb, tc, td);
            for (std::size_t p = 0; p < nn; ++p) y0[p] -= theta * dt * f2[p];
            op.solve_a2(y0, theta * dt, ta, tb, tc, td);
            U.swap(y0);
        }

        for (int j = 0; j < nv; ++j) {
            U[op.at(0, j)] = 0.0;
            U[op.at(ns - 1, j)] = 0.0;
        }
        double mx = 0.0;
        for (double x : U) {
            if (!std::isfinite(x)) mx = std::numeric_limits<double>::infinity();
            mx = std::max(mx, std::abs(x));
        }
        if (!(mx <= 10.0 * K))
            throw NoConvergence("grid solution exceeded 10x strike at step " +
                                std::to_string(k));
    }

    sol.surface = std::move(U);
    sol.steps = total;
    sol.seconds = std::chrono::duration<double>(Clock::now() - tic).count();
    return sol;
}

} // namespace svb
