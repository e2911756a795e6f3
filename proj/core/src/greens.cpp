#include <svbarrier/errors.hpp>
#include <svbarrier/greens.hpp>
#include <svbarrier/specfun.hpp>

#include <cmath>
#include <stdexcept>

namespace svb {

cdouble green(cdouble tau, cdouble z, cdouble zeta, double b) {
    if (std::abs(tau) < 1e-14)
        throw DiagonalDegeneracy("green: |tau| < 1e-14, use the delta limit");
    const cdouble w = z * zeta / tau;
    // log-space assembly: exp(-(z^2+zeta^2)/(2tau) + Re w) stays bounded where
    // the density is meaningful, and the Bessel factor is pre-scaled by e^{-Re w}
    cdouble expo = 0.5 * (std::log(z) + std::log(zeta)) - std::log(tau) +
                   b * (std::log(zeta) - std::log(z)) -
                   (z * z + zeta * zeta) / (2.0 * tau) + w.real();
    return std::exp(expo) * bessel_i_scaled(b - 0.5, w);
}

TransformPoint cache_point(const TransformCache& cache, std::size_t i) {
    if (i >= cache.time_grid.size())
        throw std::out_of_range("cache_point: index outside cache grid");
    return {cache.alpha[i], cache.beta[i], std::exp(cache.lg[i]), cache.tau[i]};
}

cdouble kernel_frak(const TransformPoint& at_t, const TransformPoint& at_s,
                    double v, double v_prime, double y_s, cdouble sqrtp, double b) {
    if (!(v > 0.0) || !(v_prime > 0.0))
        throw std::invalid_argument("kernel_frak requires positive variances");
    const cdouble dtau = at_t.tau - at_s.tau;
    if (std::abs(dtau) < 1e-14)
        throw DiagonalDegeneracy("kernel_frak: coincident times, skip the node");
    const cdouble z = at_t.g * std::sqrt(v);
    const cdouble zeta = at_s.g * std::sqrt(v_prime);
    const cdouble w = z * zeta / dtau;
    // the Green factor decays like exp(-Re(alpha_s) v') while the boundary
    // factor grows like exp(-Re(alpha_s) v'); multiplied separately each side
    // overflows or underflows long before their bounded product does, so fold
    // both exponents (plus the sqrt(v') g_s Jacobian) into one exponential
    const cdouble expo = 0.5 * (std::log(z) + std::log(zeta)) - std::log(dtau) +
                         b * (std::log(zeta) - std::log(z)) -
                         (z * z + zeta * zeta) / (2.0 * dtau) + w.real() -
                         y_s * sqrtp + at_t.alpha * v + at_t.beta - at_s.beta -
                         at_s.alpha * v_prime + 0.5 * std::log(v_prime) +
                         std::log(at_s.g);
    return std::exp(expo) * bessel_i_scaled(b - 0.5, w);
}

cdouble kernel_frak(const TransformCache& cache, std::size_t idx_t,
                    std::size_t idx_s, double v, double v_prime, double y_s,
                    double b) {
    return kernel_frak(cache_point(cache, idx_t), cache_point(cache, idx_s), v,
                       v_prime, y_s, SqrtP{cache.branch, cache.xi}.value(), b);
}

double kernel_K_reference(const HestonModel& model, const BarrierContract& contract,
                          double s, double v_prime, double t, double v,
                          const QuadConfig& quad, int refinement) {
    const double T = contract.maturity;
    if (!(t < s) || !(s <= T))
        throw std::invalid_argument("kernel_K_reference requires t < s <= maturity");
    const double b = model.b();
    // strike-independent combination: exp(-y_s sqrt(p)) exp(-i xi y_t) with
    // y = ln(L/K) reduces to exp(i xi ln(L_s/L_t)); use ln L directly
    const double yl_s = std::log(contract.barrier(s));
    const double yl_t = std::log(contract.barrier(t));

    std::vector<double> grid{t, s};
    if (s < T) grid.push_back(T);

    auto integrand = [&](double xi) -> cdouble {
        if (xi == 0.0) return {0.0, 0.0};
        SqrtP sp{Branch::MinusIXi, xi};
        TransformCache cache = build_cache(model, sp, grid, refinement);
        const cdouble k = kernel_frak(cache, 0, 1, v, v_prime, yl_s, b);
        const cdouble combined = k * std::exp(cdouble(0.0, -xi * yl_t));
        return {xi * combined.imag(), 0.0};
    };
    return integrate_gk(integrand, 0.0, quad.upsilon, quad).value.real();
}

} // namespace svb
