#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace svb {

using cdouble = std::complex<double>;

struct QuadConfig {
    double upsilon = 500.0;       // truncation bound for the xi integrals
    double rel_tol = 1e-7;
    double abs_tol = 1e-10;
    int max_subdivisions = 2000;
    int simpson_nodes = 21;       // odd, >= 3
};

// Maturity-dependent truncation of the oscillatory integrals.
double choose_upsilon(double T);

struct QuadResult {
    cdouble value{0.0, 0.0};
    double err_est = 0.0;
    int evaluations = 0;
};

// Adaptive (G7,K15) bisection of a complex-valued integrand on [a,b] until
// err <= max(abs_tol, rel_tol*|value|). Throws ToleranceNotMet (carrying the
// best value) if max_subdivisions panels are exhausted.
QuadResult integrate_gk(const std::function<cdouble(double)>& f, double a, double b,
                        const QuadConfig& cfg);

// Same engine over many real-valued components sharing each abscissa: f(x, out)
// fills out[0..ncomp). Panels are refined where the worst normalized component
// error sits; per-component convergence uses max(abs_tol, rel_tol*scale_c) with
// scale_c a running magnitude estimate. initial_edges (if nonempty) pre-splits
// [a,b]; edges must start at a and end at b.
struct VectorQuadResult {
    std::vector<double> value;
    std::vector<double> err_est;
    int evaluations = 0;
    bool converged = true;
};
VectorQuadResult integrate_gk_vec(int ncomp,
                                  const std::function<void(double, double*)>& f,
                                  double a, double b, const QuadConfig& cfg,
                                  const std::vector<double>& initial_edges = {});

// Geometric panel pre-split of [a,b] for an integrand with oscillation
// frequency osc_freq: first panel ~ min(b-a, max(2, 3*pi/osc_freq)), growing by
// `growth` per panel.
std::vector<double> split_panels(double a, double b, double osc_freq,
                                 double growth = 1.4);

// Composite Simpson with n nodes (odd >= 3) on [t,T].
cdouble integrate_time_simpson(const std::function<cdouble(double)>& f, double t,
                               double T, int n);

// Simpson nodes/weights on [t,T] (n odd >= 3), so callers can share node loops.
void simpson_rule(double t, double T, int n, std::vector<double>& nodes,
                  std::vector<double>& weights);

} // namespace svb
