#pragma once

#include <svbarrier/greens.hpp>
#include <svbarrier/model.hpp>
#include <svbarrier/quadrature.hpp>

#include <optional>
#include <map>
#include <vector>

namespace svb {

// Collocation lattice: uniform times on [t0,T] (T included; the t=T rows are
// pure interpolation rows) and uniform variances on [v0-v_m, v0+v_m].
struct CollocationGrid {
    std::vector<double> t_nodes;
    std::vector<double> v_nodes;
    double epsilon = 4.0;

    int size() const { return int(t_nodes.size() * v_nodes.size()); }
    // row/col layout: index = it * n_v + iv
    int index(int it, int iv) const { return it * int(v_nodes.size()) + iv; }
};

CollocationGrid make_collocation_grid(double t0, double T, int n_t, double v0,
                                      double v_m, int n_v, double epsilon);

// Basis function in (t, nu = sqrt(v)) coordinates:
//   (nu/nu_l)^{2 eps nu_l^2} exp(-eps [nu^2 - nu_l^2 + (s - t_k)^2]).
// The Dirac term of the definition carries weight w but is never evaluated:
// the collocation grid excludes v = 0 and the kernel integrand vanishes there.
double basis_theta(double s, double nu, double t_k, double nu_l, double eps);

enum class KummerMode { Approx, Series };

// Coefficients of the inner variance integral
//   J = a0 * int_0^inf nu^{a1} exp(-a2 nu^2) I_{b-1/2}(a3 nu) dnu.
struct InnerJCoeffs {
    cdouble a0;  // 2 (e/v_l)^{eps v_l}
    double a1;   // 5/2 + b + 2 eps v_l
    cdouble a2;  // eps + alpha(s) + g_s^2 / (2 (tau_t - tau_s))
    cdouble a3;  // g_t g_s sqrt(v) / (tau_t - tau_s)
    double a4;   // b + 3/2 + eps v_l
    double eps = 0.0, v_l = 0.0, v = 0.0; // carried for the short-time factor
};

// Closed form of J: a0 2^{-b-1/2} a3^{b-1/2} a2^{-a4} (Gamma(a4)/Gamma(b+1/2))
// * M(a4; b+1/2; a3^2/(4 a2)). Series mode evaluates M exactly; Approx mode
// substitutes a4 -> b+3/2 with the identity M(b+3/2;b+1/2;x) = (1+2x/(1+2b))e^x
// and multiplies the short-time correction C1 = e^{-eps v} v^{eps v_l}.
cdouble inner_J_closed(const InnerJCoeffs& jc, double b, KummerMode mode);

struct AssemblyOptions {
    QuadConfig quad;
    KummerMode kummer = KummerMode::Approx;
    int refinement = 4;     // backward-walk substeps per Simpson interval
    bool kernel_off = false; // interpolation-only system (tests)
};

// Closed-form kernel column for one basis center at fixed xi (branch -i xi):
// the Simpson s-sum over (t,T] of the variance-integrated kernel against the
// basis, weights e^{-eps (s_j - t_k)^2} included; the s = t node contributes
// exactly zero (diagonal Dirac cancellation) and is skipped. y(s) is read as
// ln L(s); the strike shift cancels against the inversion phase.
cdouble i_kl_xi(const HestonModel& model, const PiecewiseCurve& barrier, double t,
                double T, double v, double t_k, double v_l, double eps, double xi,
                const AssemblyOptions& opts);

// One assembled kernel entry W(t,v; t_k,v_l) = int_0^Upsilon xi *
// Im[i_kl_xi(xi) e^{-i xi y(t)}] dxi by scalar adaptive quadrature (tests).
double w_entry_direct(const HestonModel& model, const PiecewiseCurve& barrier,
                      double t, double T, double v, double t_k, double v_l,
                      double eps, const AssemblyOptions& opts);

// Same entry by brute force: the variance integral done by adaptive quadrature
// of the raw kernel against the basis instead of the closed form (tests).
double w_entry_reference(const HestonModel& model, const PiecewiseCurve& barrier,
                         double t, double T, double v, double t_k, double v_l,
                         double eps, const AssemblyOptions& opts);

struct LmvfSystem {
    CollocationGrid grid;
    int n = 0;
    std::vector<double> A;  // row-major n*n, strike-independent
    double max_abs = 0.0;
    double max_asymmetry = 0.0;
    double assembly_seconds = 0.0;
    long xi_evaluations = 0;
    bool quad_converged = true;
};

// Assemble A = Theta - (1/2pi) W over the collocation grid. The kernel phases
// combine to exp(i xi ln(L(s)/L(t))), so A never sees the strike.
LmvfSystem assemble(const HestonModel& model, const PiecewiseCurve& barrier,
                    const CollocationGrid& grid, const AssemblyOptions& opts);

// Free term at one collocation point: f = (1/pi) int xi Im[P1 e^{-i xi y(t)}];
// at t = T the analytic value -L(T)/2 (regular payoff-gradient part).
double rhs_f(double t, double v, const BarrierContract& contract,
             const HestonModel& model, const AssemblyOptions& opts);

// All collocation rows for several strikes sharing the transform walks.
std::vector<std::vector<double>> rhs_vectors(const HestonModel& model,
                                             const std::vector<BarrierContract>& contracts,
                                             const CollocationGrid& grid,
                                             const AssemblyOptions& opts);

enum class SolverKind { Minres, Lu };

struct SolveReport {
    int iterations = 0;
    double rel_residual = 0.0;   // of the symmetrized MINRES iteration
    double unsym_residual = 0.0; // ||Ac-f||/||f|| against the raw matrix
    bool used_lu_fallback = false;
    bool ridge_applied = false;
    std::vector<double> residual_history;
};

// MINRES on the symmetrized operator (A+A^T)/2 with an unsymmetrized residual
// check (fallback to pivoted LU beyond 1e-4), or direct LU on request.
std::vector<double> solve_system(const LmvfSystem& sys, const std::vector<double>& rhs,
                                 SolverKind kind, double tol, SolveReport* report);

// Phi(t,v) = sum c_kl Theta_kl(t, sqrt(v)).
struct BoundaryGradient {
    CollocationGrid grid;
    std::vector<double> coeff;

    double operator()(double t, double v) const;
};

// Appendix-style positivity surrogate for the basis: F(omega) with Dirac
// weight w; must be > 0 for the basis to be positive definite.
double theta_positivity_F(double omega, double nu_l, double eps, double w);

// Scan F over the documented lattice; true if positive everywhere.
bool theta_positivity_scan(double w, double* min_value = nullptr);

} // namespace svb
