#include <svbarrier/errors.hpp>
#include <svbarrier/specfun.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace svb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesSeamBessel = 30.0;
constexpr double kSeriesSeamKummer = 320.0;

// digits lost to alternating-series cancellation ~ (|x| - |Re x|)/ln 10
double cancellation_exponent(cdouble x) { return std::abs(x) - std::abs(x.real()); }

bool near_nonpositive_integer(double x, double tol = 1e-12) {
    if (x > 0.5) return false;
    return std::abs(x - std::round(x)) < tol;
}

/*
  I_nu(z) = (z/2)^nu sum_k (z^2/4)^k / (k! Gamma(nu+k+1)),
  returned scaled by exp(-Re z).
*/
cdouble bessel_i_series_scaled(double nu, cdouble z) {
    const cdouble q = 0.25 * z * z;
    cdouble term = std::exp(nu * std::log(0.5 * z)) / std::tgamma(nu + 1.0);
    cdouble sum = term;
    for (int k = 1; k <= 400; ++k) {
        term *= q / (static_cast<double>(k) * (nu + k));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum) && k > 3) break;
    }
    return sum * std::exp(-z.real());
}

/*
  Large-|z| expansion, both exponential channels:
    I_nu(z) ~ [e^z S1(z) + e^{±(nu+1/2) pi i} e^{-z} S2(z)] / sqrt(2 pi z),
  upper sign for Im z >= 0.  Coefficients a_k(nu) via the usual recurrence,
  each series truncated at its smallest term.  Scaled by exp(-Re z).
*/
cdouble bessel_i_asymptotic_scaled(double nu, cdouble z) {
    const double mu = 4.0 * nu * nu;
    cdouble s1{1.0, 0.0}, s2{1.0, 0.0};
    cdouble t1{1.0, 0.0}, t2{1.0, 0.0};
    double prev = std::numeric_limits<double>::max();
    for (int k = 1; k <= 60; ++k) {
        const double num = mu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
        const double fac = num / (8.0 * k);
        t1 *= -fac / z;
        t2 *= fac / z;
        const double mag = std::abs(t1);
        if (mag >= prev || mag <= 1e-18) break; // divergence onset or converged
        prev = mag;
        s1 += t1;
        s2 += t2;
    }
    // channel 2: e^{-z} relative to the e^{Re z} scaling -> e^{-2 Re z} phase-shifted
    const double xr = z.real();
    if (-2.0 * xr > 700.0)
        throw NumericalOverflow("scaled Bessel I: reflected channel overflows for Re z < -350");
    const cdouble rot = std::exp(cdouble(0.0, (z.imag() >= 0.0 ? 1.0 : -1.0) * (nu + 0.5) * kPi));
    const cdouble ch1 = std::exp(cdouble(0.0, z.imag())) * s1;
    const cdouble ch2 = rot * std::exp(-z - xr) * s2;
    return (ch1 + ch2) / std::sqrt(2.0 * kPi * z);
}

/*
  Branch choice.  The direct series loses ~exp(|x| - |Re x|) to cancellation;
  the large-x expansion bottoms out near exp(-|x| + p log|x|) where p grows with
  the parameters.  Prefer a clean series, then a deep expansion floor, then the
  lesser evil.
*/
bool kummer_prefer_series(double a, double b, cdouble x) {
    const double ax = std::abs(x);
    if (ax <= kSeriesSeamKummer && cancellation_exponent(x) <= 16.0) return true;
    const double p = std::max({b - 2.0 * a - 1.0, 2.0 * a - b - 1.0, 0.0});
    const double floor_log = -ax + p * std::log(ax) + 0.5 * std::log(2.0 * kPi * ax);
    if (floor_log <= -21.0) return false;
    return ax <= kSeriesSeamKummer;
}

bool bessel_prefer_series(cdouble z) {
    const double az = std::abs(z);
    if (az <= kSeriesSeamBessel && cancellation_exponent(z) <= 16.0) return true;
    return az < 14.0;
}

struct AsymptoticSum {
    cdouble value;
    bool usable;
};

// sum_k (alpha)_k (beta)_k / (k! x^k), truncated at the smallest term
AsymptoticSum kummer_asymptotic_sum(double alpha, double beta, cdouble x) {
    cdouble term{1.0, 0.0};
    cdouble sum = term;
    double prev = std::numeric_limits<double>::max();
    for (int k = 0; k < 400; ++k) {
        term *= (alpha + k) * (beta + k) / ((k + 1.0) * x);
        const double mag = std::abs(term);
        if (mag >= prev) break;
        prev = mag;
        sum += term;
        if (mag <= 1e-17 * std::abs(sum)) break;
    }
    return {sum, prev < 1e-6};
}

/*
  M(a,b,x) ~ Gamma(b) [ e^x x^{a-b}/Gamma(a) S1 + (-x)^{-a}/Gamma(b-a) S2 ],
  S1 = sum (b-a)_k (1-a)_k / (k! x^k),  S2 = sum (a)_k (a-b+1)_k / (k! (-x)^k).
  `scale` shifts both channel exponents by -x (the exp(-x) M form).
  Channels with a gamma pole in the prefactor drop.
*/
cdouble kummer_asymptotic(double a, double b, cdouble x, bool scale) {
    const double gb = std::tgamma(b);
    const cdouble shift = scale ? -x : cdouble{0.0, 0.0};
    cdouble out{0.0, 0.0};
    if (!near_nonpositive_integer(a)) {
        const auto s1 = kummer_asymptotic_sum(b - a, 1.0 - a, x);
        const cdouble expo = x + (a - b) * std::log(x) + shift;
        if (expo.real() > 700.0)
            throw NumericalOverflow("Kummer M: exponential channel overflows; use kummer_m_scaled");
        out += gb / std::tgamma(a) * std::exp(expo) * s1.value;
    }
    if (!near_nonpositive_integer(b - a)) {
        const auto s2 = kummer_asymptotic_sum(a, a - b + 1.0, -x);
        const cdouble expo = -a * std::log(-x) + shift;
        if (expo.real() > 700.0)
            throw NumericalOverflow("Kummer M: reflected channel overflows");
        out += gb / std::tgamma(b - a) * std::exp(expo) * s2.value;
    }
    return out;
}

// direct series, argument assumed Re x >= 0 for stability
cdouble kummer_series_core(double a, double b, cdouble x) {
    cdouble term{1.0, 0.0};
    cdouble sum = term;
    int small_streak = 0;
    for (int k = 0; k < 3000; ++k) {
        term *= (a + k) * x / ((b + k) * (k + 1.0));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) {
            if (++small_streak >= 2) return sum;
        } else {
            small_streak = 0;
        }
        if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag()))
            throw NumericalOverflow("Kummer M series overflowed");
    }
    throw SeriesDivergence("Kummer M series failed to converge");
}

} // namespace

double gamma_fn(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument("gamma_fn requires finite x > 0");
    return std::tgamma(x);
}

cdouble bessel_i(double nu, cdouble z) {
    if (nu <= -1.0)
        throw std::invalid_argument("bessel_i requires order nu > -1");
    if (z.real() > 700.0)
        throw NumericalOverflow("bessel_i overflows for Re z > 700; use bessel_i_scaled");
    return bessel_i_scaled(nu, z) * std::exp(z.real());
}

cdouble bessel_i_scaled(double nu, cdouble z) {
    if (nu <= -1.0)
        throw std::invalid_argument("bessel_i_scaled requires order nu > -1");
    if (std::abs(z) == 0.0)
        return nu == 0.0 ? cdouble{1.0, 0.0} : cdouble{0.0, 0.0};
    if (bessel_prefer_series(z))
        return bessel_i_series_scaled(nu, z);
    return bessel_i_asymptotic_scaled(nu, z);
}

cdouble kummer_m_series(double a, double b, cdouble x) {
    if (near_nonpositive_integer(b))
        throw SeriesDivergence("Kummer M undefined: b is a nonpositive integer");
    if (std::abs(x) == 0.0) return cdouble{1.0, 0.0};
    if (kummer_prefer_series(a, b, x)) {
        if (x.real() >= 0.0) return kummer_series_core(a, b, x);
        // M(a,b,x) = e^x M(b-a, b, -x) keeps the summed argument in Re >= 0
        return std::exp(x) * kummer_series_core(b - a, b, -x);
    }
    return kummer_asymptotic(a, b, x, false);
}

cdouble kummer_m_scaled(double a, double b, cdouble x) {
    if (near_nonpositive_integer(b))
        throw SeriesDivergence("Kummer M undefined: b is a nonpositive integer");
    if (std::abs(x) == 0.0) return cdouble{1.0, 0.0};
    if (kummer_prefer_series(a, b, x)) {
        // fold the transform's e^x and the scaling together so neither overflows
        if (x.real() >= 0.0) return std::exp(-x) * kummer_series_core(a, b, x);
        return kummer_series_core(b - a, b, -x);
    }
    return kummer_asymptotic(a, b, x, true);
}

cdouble kummer_m_approx(double b, cdouble x) {
    return (1.0 + 2.0 * x / (1.0 + 2.0 * b)) * std::exp(x);
}

} // namespace svb
