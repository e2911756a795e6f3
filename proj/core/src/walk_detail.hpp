#pragma once

#include <svbarrier/lmvf.hpp>

#include <vector>

/*
  Internal backward-walk machinery shared by the system assembly and the price
  inversion.  For a row time t the kernel needs, at every Simpson node s_j in
  (t, T], the image-space state relative to t:
    alpha(s), dlg = lg(s)-lg(t), dbeta = beta(t)-beta(s),
    jtil = sigma^2 int_t^s exp(2(lg(u)-lg(s))) du.
  jtil replaces the raw tau difference: tau(t)-tau(s) = g(s)^2 jtil / 4, so no
  g or tau value is ever exponentiated on its own and the walk stays finite for
  arbitrarily large xi*T.  Everything is exact per coefficient segment.
*/
namespace svb::detail {

struct RowPlan {
    double t = 0.0, T = 0.0;
    std::vector<double> nodes, wts;          // Simpson rule on [t,T]
    std::vector<std::vector<double>> edges;  // per interval: refinement + model breakpoints
};

RowPlan make_plan(const HestonModel& model, double t, double T,
                  const AssemblyOptions& opts);

struct WalkState {
    cdouble alpha_t{}, beta_t{};
    std::vector<cdouble> alpha, dlg, dbeta, jtil;  // per Simpson node
    std::vector<cdouble> seg_dlg, seg_j;           // scratch, per sub-step
    std::vector<cdouble> int_dlg, int_dbeta, int_j;
};

void run_walk(const RowPlan& plan, const HestonModel& model, double xi,
              WalkState& ws);

// xi-independent tables for the closed-form inner integral
struct QTables {
    double b = 0.0, eps = 0.0;
    KummerMode mode = KummerMode::Approx;
    std::vector<double> vr, vl;
    std::vector<double> a0;      // 2 (e/v_l)^{eps v_l}
    std::vector<double> a4;      // b + 3/2 + eps v_l
    std::vector<double> gratio;  // Gamma(a4)/Gamma(b+1/2)
    std::vector<double> c1;      // [ivr*ncol+ivl] e^{-eps v} v^{eps v_l}
};

QTables make_qtables(double b, double eps, const std::vector<double>& v_rows,
                     const std::vector<double>& v_cols, KummerMode mode);

struct QWork {
    std::vector<cdouble> p2pow;  // per center variance
};

/*
  Closed form of the inner variance integral at one (row, node, xi), written in
  walk variables with every fractional power taken of a right-half-plane
  argument:
    Q = a0 (J/2) (1+w)^{-(b+3/2)} * [kummer factor] * exp(i xi (y_s - y_ref)
        + dbeta + (alpha_t - zeta w/(1+w)) v),
  w = (eps + alpha_s) J/2, zeta = e^{-2 dlg} (2/J), x_K = zeta/(1+w).
  Series mode: kummer factor = (2/J)^{eps v_l} (1+w)^{-eps v_l} Gamma(a4)/
  Gamma(b+1/2) e^{-x_K v} M(a4; b+1/2; x_K v).  Approx mode replaces the exact
  M by the b+3/2 identity, contributing (b+1/2+x_K v) and the short-time factor
  C1 = e^{-eps v} v^{eps v_l}.
  out is indexed [(j-1)*nr + r]*nc + l for Simpson node j >= 1.
*/
void q_values(const RowPlan& plan, const WalkState& ws, const QTables& qt,
              double xi, double y_ref, const std::vector<double>& ynode,
              QWork& qw, cdouble* out);

std::vector<double> barrier_ynodes(const PiecewiseCurve& barrier,
                                   const std::vector<double>& nodes);

double gaussian_time_weight(double s, double t_k, double eps);

} // namespace svb::detail
