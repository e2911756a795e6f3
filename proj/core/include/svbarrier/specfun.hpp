#pragma once

#include <complex>

namespace svb {

using cdouble = std::complex<double>;

// Gamma for positive real x (1e-13 relative or better).
double gamma_fn(double x);

// Modified Bessel I_nu(z), real order nu > -1, complex z.
// Power series for |z| <= 30 (1e-12 relative), uniform large-|z| asymptotics
// beyond (1e-9). Throws NumericalOverflow for Re(z) > 700; use the scaled form.
cdouble bessel_i(double nu, cdouble z);

// exp(-Re z) * I_nu(z): the primitive the Green's function consumes.
cdouble bessel_i_scaled(double nu, cdouble z);

// Kummer confluent hypergeometric M(a,b,x) for real a,b and complex x.
// Series (with the e^x M(b-a,b,-x) transform for Re x < 0) for moderate |x|;
// large-|x| asymptotic expansion beyond. 1e-10 relative for |x| <= 50.
cdouble kummer_m_series(double a, double b, cdouble x);

// exp(-x) * M(a,b,x), stable for large Re(x) > 0.
cdouble kummer_m_scaled(double a, double b, cdouble x);

// The identity M(b+3/2; b+1/2; x) = (1 + 2x/(1+2b)) e^x.
cdouble kummer_m_approx(double b, cdouble x);

} // namespace svb
