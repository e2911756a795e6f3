#pragma once

#include <svbarrier/model.hpp>
#include <svbarrier/specfun.hpp>

#include <complex>
#include <vector>

namespace svb {

// The inversion contour evaluates images at sqrt(p) = -i*xi or +i*xi (p = -xi^2).
enum class Branch { MinusIXi, PlusIXi };

struct SqrtP {
    Branch branch = Branch::MinusIXi;
    double xi = 0.0;

    cdouble value() const {
        return branch == Branch::MinusIXi ? cdouble(0.0, -xi) : cdouble(0.0, xi);
    }
    cdouble p() const { return cdouble(-xi * xi, 0.0); }
};

struct AuxCoeffs {
    cdouble a;          // r(sqrt(p)-1) - q*sqrt(p)
    cdouble c;          // (p - sqrt(p))/2
    cdouble kappa_bar;  // kappa - rho*sigma*sqrt(p)
    cdouble theta_bar;  // theta*kappa/kappa_bar
};

// Coefficients of the image-space ODE at time t. Throws DegenerateKappaBar if
// |kappa_bar| < 1e-14.
AuxCoeffs aux_coeffs(const HestonModel& model, SqrtP sqrtp, double t);
AuxCoeffs aux_coeffs_raw(double kappa, double sigma, double theta, double rho,
                         double r, double q, cdouble sqrtp);

// One analytic constant-coefficient Riccati step: given alpha at the segment
// end, return alpha at the segment start (dt earlier). Evaluated in a tan-free
// scaled-exponential Moebius form; near a tangent pole the step is bisected.
cdouble riccati_segment(cdouble alpha_end, cdouble kappa_bar, double sigma,
                        cdouble c, double dt);

// Exact increments across one constant-coefficient segment [t_e - dt, t_e]:
//   alpha_start = alpha(t_e - dt)
//   d_lg   = lg(t_e) - lg(t_e - dt)           (forward log-g increment)
//   d_beta = int_{t_e-dt}^{t_e} (a + kappa*theta*alpha) ds
//   j_seg  = sigma^2 int_{t_e-dt}^{t_e} exp(2(lg(s) - lg(t_e))) ds
// j_seg is the overflow-free building block for g^2-weighted time integrals:
// tau(t_e - dt) - tau(t_e) = g(t_e)^2 j_seg / 4.
struct SegmentIncrements {
    cdouble alpha_start;
    cdouble d_lg;
    cdouble d_beta;
    cdouble j_seg;
};
SegmentIncrements segment_increments(cdouble alpha_end, const AuxCoeffs& k,
                                     double sigma, double dt);

// Backward recursion of alpha from alpha(T)=0 over the grid (grid covers
// [t0,T], ascending). Returns alpha at every grid time.
std::vector<cdouble> riccati_path(const HestonModel& model, SqrtP sqrtp,
                                  const std::vector<double>& grid);

// Image-space state along a time grid for one (branch, xi).
struct TransformCache {
    double xi = 0.0;
    Branch branch = Branch::MinusIXi;
    std::vector<double> time_grid;
    std::vector<cdouble> alpha; // alpha(t, p)
    std::vector<cdouble> beta;  // beta(t, p)  = int_t^T (a + kappa*theta*alpha)
    std::vector<cdouble> lg;    // log g(t, p) = 1/2 int_{t0}^t (kappa_bar - alpha*sigma^2)
    std::vector<cdouble> tau;   // tau(t, p)   = 1/4 int_t^T g^2 sigma^2

    cdouble g(std::size_t i) const { return std::exp(lg[i]); }
};

// Build the cache on the union of `grid`, the model breakpoints, and a
// `refinement`-fold split of each grid interval, then restrict to `grid`.
// All increments are exact per coefficient segment (no quadrature error);
// refinement only adds pole-robustness via shorter Moebius steps. Raw tau
// overflows to inf for xi*T large; production paths consume scaled j_seg
// quantities instead.
TransformCache build_cache(const HestonModel& model, SqrtP sqrtp,
                           const std::vector<double>& grid, int refinement = 4);

// Real critical points of C(t,p) in the sqrt(p) plane (diagnostic).
// Throws DegenerateCorrelation when |rho(t)| = 1.
std::pair<double, double> branch_points(const HestonModel& model, double t);

} // namespace svb
