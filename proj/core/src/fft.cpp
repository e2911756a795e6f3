#include <svbarrier/errors.hpp>
#include <svbarrier/fft.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace svb {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_const_params(const ConstHestonParams& p) {
    if (!(p.spot > 0.0)) throw std::invalid_argument("spot must be positive");
    if (!(p.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    if (!(p.theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (!(p.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(std::abs(p.rho) < 1.0)) throw std::invalid_argument("|rho| must be < 1");
    if (!(p.v0 > 0.0)) throw std::invalid_argument("v0 must be positive");
}

}  // namespace

cdouble heston_cf(cdouble u, const ConstHestonParams& p, double T) {
    if (!(T >= 0.0)) throw std::invalid_argument("T must be nonnegative");
    const cdouble i{0.0, 1.0};
    const double s2 = p.sigma * p.sigma;
    const cdouble xi = p.kappa - p.rho * p.sigma * i * u;
    const cdouble d = std::sqrt(xi * xi + s2 * (u * u + i * u));
    // (xi - d)/(xi + d) keeps the log argument off the negative axis for all T
    const cdouble g = (xi - d) / (xi + d);
    const cdouble emdt = std::exp(-d * T);
    const cdouble A = i * u * ((p.r - p.q) * T);
    const cdouble C = (p.kappa * p.theta / s2) *
                      ((xi - d) * T - 2.0 * std::log((1.0 - g * emdt) / (1.0 - g)));
    const cdouble D = ((xi - d) / s2) * (1.0 - emdt) / (1.0 - g * emdt);
    return std::exp(A + C + D * p.v0);
}

double fft_vanilla_call(const ConstHestonParams& p, double strike, double T,
                        int n_nodes) {
    validate_const_params(p);
    if (!(strike > 0.0)) throw std::invalid_argument("strike must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    if (n_nodes < 3) throw std::invalid_argument("need at least 3 nodes");

    const double alpha = 1.5;
    const double umax = 200.0;
    const int n = n_nodes | 1;  // composite Simpson wants an odd count
    const double h = umax / (n - 1);
    const double k = std::log(strike / p.spot);
    const cdouble i{0.0, 1.0};

    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double u = j * h;
        const cdouble arg = cdouble(u, 0.0) - (alpha + 1.0) * i;
        const cdouble den =
            cdouble(alpha * alpha + alpha - u * u, (2.0 * alpha + 1.0) * u);
        const cdouble val = std::exp(cdouble(0.0, -u * k)) * heston_cf(arg, p, T) / den;
        const double w = (j == 0 || j == n - 1) ? 1.0 : ((j % 2) ? 4.0 : 2.0);
        acc += w * val.real();
    }
    acc *= h / 3.0;
    return p.spot * std::exp(-alpha * k - p.r * T) * acc / kPi;
}

double fft_vanilla_put(const ConstHestonParams& p, double strike, double T,
                       int n_nodes) {
    const double call = fft_vanilla_call(p, strike, T, n_nodes);
    // parity: C - P = S e^{-qT} - K e^{-rT}
    return call - p.spot * std::exp(-p.q * T) + strike * std::exp(-p.r * T);
}

} // namespace svb
