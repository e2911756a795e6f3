#pragma once

#include <svbarrier/model.hpp>
#include <svbarrier/quadrature.hpp>
#include <svbarrier/transform.hpp>

namespace svb {

// Transition density of the Bessel-type process dX = dW + (b/X)dt on the
// half-line: G(tau,z,zeta) = (sqrt(z*zeta)/tau) (zeta/z)^b
//   exp(-(z^2+zeta^2)/(2 tau)) I_{b-1/2}(z*zeta/tau),
// assembled in log space via the scaled Bessel primitive. Throws
// DiagonalDegeneracy when |tau| < 1e-14 (caller must use the delta limit).
cdouble green(cdouble tau, cdouble z, cdouble zeta, double b);

// Image-space transform state at one time, extracted from a cache.
struct TransformPoint {
    cdouble alpha, beta, g, tau;
};
TransformPoint cache_point(const TransformCache& cache, std::size_t i);

// Raw kernel of the boundary-gradient integral equation for one branch:
//   K(s,v',t,v) = sqrt(v') g(s) G(tau(t)-tau(s), g(t)sqrt(v), g(s)sqrt(v'))
//                 * exp(-y(s) sqrt(p) + alpha(t) v + beta(t) - beta(s) - alpha(s) v').
// y_s = log(L(s)/K). Throws DiagonalDegeneracy when |tau_t - tau_s| < 1e-14
// (the s = t contribution cancels analytically and must be skipped).
cdouble kernel_frak(const TransformPoint& at_t, const TransformPoint& at_s,
                    double v, double v_prime, double y_s, cdouble sqrtp, double b);

// Convenience overload reading both times from one cache.
cdouble kernel_frak(const TransformCache& cache, std::size_t idx_t,
                    std::size_t idx_s, double v, double v_prime, double y_s,
                    double b);

// Xi-integrated real kernel (reference path, tests only): for fixed (t,v,s,v')
// integrates xi * Im[K(-i xi) e^{-i xi y(t)}] over xi in [0, Upsilon] with
// fresh caches per xi node (anchored at the contract maturity). Heavy; used to
// validate the closed-form assembly.
double kernel_K_reference(const HestonModel& model, const BarrierContract& contract,
                          double s, double v_prime, double t, double v,
                          const QuadConfig& quad, int refinement = 4);

} // namespace svb
