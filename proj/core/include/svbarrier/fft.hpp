#pragma once

#include <complex>

namespace svb {

using cdouble = std::complex<double>;

// Constant-parameter Heston set for the vanilla cross-check.
struct ConstHestonParams {
    double kappa, theta, sigma, rho, v0, r, q, spot;
};

// Characteristic function of ln(S_T/S_0) in the numerically stable branch
// convention; phi(0)=1, phi(-i)=e^{(r-q)T}.
cdouble heston_cf(cdouble u, const ConstHestonParams& p, double T);

// Damped-call transform (alpha = 1.5) integrated by composite Simpson with
// n_nodes points on u in [0, 200]; put obtained through parity.
double fft_vanilla_put(const ConstHestonParams& p, double strike, double T,
                       int n_nodes = 8192);
double fft_vanilla_call(const ConstHestonParams& p, double strike, double T,
                        int n_nodes = 8192);

} // namespace svb
