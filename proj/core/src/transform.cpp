#include <svbarrier/errors.hpp>
#include <svbarrier/transform.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace svb {

namespace {

// (1 - exp(-z))/z, series near zero to avoid cancellation
cdouble one_minus_exp_over(cdouble z) {
    if (std::abs(z) < 1e-3)
        return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
    return (1.0 - std::exp(-z)) / z;
}

void collect_breakpoints(const PiecewiseCurve& c, double lo, double hi,
                         std::set<double>& out) {
    for (double b : c.breakpoints())
        if (b > lo && b < hi) out.insert(b);
}

std::vector<double> model_breakpoints(const HestonModel& m, double lo, double hi) {
    std::set<double> s;
    collect_breakpoints(m.kappa, lo, hi, s);
    collect_breakpoints(m.sigma, lo, hi, s);
    collect_breakpoints(m.theta, lo, hi, s);
    collect_breakpoints(m.rho, lo, hi, s);
    collect_breakpoints(m.r, lo, hi, s);
    collect_breakpoints(m.q, lo, hi, s);
    return {s.begin(), s.end()};
}

SegmentIncrements segment_increments_impl(cdouble alpha_end, const AuxCoeffs& k,
                                          double sigma, double dt, int depth) {
    if (depth > 40)
        throw NoConvergence("riccati segment: pole bisection exceeded depth 40");

    const double s2 = sigma * sigma;
    /*
      alpha' = -c + kappa_bar*alpha - (sigma^2/2) alpha^2 linearizes through
      alpha = (2/sigma^2) w'/w,  w'' - kappa_bar w' + (c sigma^2/2) w = 0,
      roots lam_pm = (kappa_bar +- D)/2, D = sqrt(kappa_bar^2 - 2 c sigma^2).
      With A = (sigma^2/2) alpha_end - lam_minus and em = (1-e^{-D dt})/(D dt):
        alpha_start = (2/s2) [(s2/2) alpha_end - A lam_plus dt em] / (1 - A dt em)
        d_lg        = D dt / 2 + Log(1 - A dt em)
        j_seg       = s2 dt em / (1 - A dt em)
      all free of cancellation as D -> 0.
    */
    const cdouble D = std::sqrt(k.kappa_bar * k.kappa_bar - 2.0 * k.c * s2);
    const cdouble lam_p = 0.5 * (k.kappa_bar + D);
    const cdouble lam_m = 0.5 * (k.kappa_bar - D);
    const cdouble A = 0.5 * s2 * alpha_end - lam_m;
    const cdouble em = one_minus_exp_over(D * dt);
    const cdouble den = 1.0 - A * dt * em;

    if (std::abs(den) < 1e-12 * (1.0 + std::abs(A) * dt * std::abs(em))) {
        // tangent pole inside the step: compose two half steps
        SegmentIncrements hi = segment_increments_impl(alpha_end, k, sigma, 0.5 * dt,
                                                       depth + 1);
        SegmentIncrements lo = segment_increments_impl(hi.alpha_start, k, sigma,
                                                       0.5 * dt, depth + 1);
        SegmentIncrements out;
        out.alpha_start = lo.alpha_start;
        out.d_lg = lo.d_lg + hi.d_lg;
        out.d_beta = lo.d_beta + hi.d_beta;
        out.j_seg = hi.j_seg + std::exp(-2.0 * hi.d_lg) * lo.j_seg;
        return out;
    }

    SegmentIncrements out;
    out.alpha_start = (2.0 / s2) * (0.5 * s2 * alpha_end - A * lam_p * dt * em) / den;
    out.d_lg = 0.5 * D * dt + std::log(den);
    const cdouble kth = k.theta_bar * k.kappa_bar; // = kappa * theta exactly
    out.d_beta = k.a * dt + kth * (k.kappa_bar * dt - 2.0 * out.d_lg) / s2;
    out.j_seg = s2 * dt * em / den;
    return out;
}

} // namespace

AuxCoeffs aux_coeffs_raw(double kappa, double sigma, double theta, double rho,
                         double r, double q, cdouble sqrtp) {
    const cdouble p = sqrtp * sqrtp;
    AuxCoeffs k;
    k.a = r * (sqrtp - 1.0) - q * sqrtp;
    k.c = 0.5 * (p - sqrtp);
    k.kappa_bar = kappa - rho * sigma * sqrtp;
    if (std::abs(k.kappa_bar) < 1e-14)
        throw DegenerateKappaBar("kappa_bar collapsed below 1e-14");
    k.theta_bar = theta * kappa / k.kappa_bar;
    return k;
}

AuxCoeffs aux_coeffs(const HestonModel& model, SqrtP sqrtp, double t) {
    return aux_coeffs_raw(model.kappa(t), model.sigma(t), model.theta(t),
                          model.rho(t), model.r(t), model.q(t), sqrtp.value());
}

SegmentIncrements segment_increments(cdouble alpha_end, const AuxCoeffs& k,
                                     double sigma, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("segment_increments requires dt > 0");
    return segment_increments_impl(alpha_end, k, sigma, dt, 0);
}

cdouble riccati_segment(cdouble alpha_end, cdouble kappa_bar, double sigma,
                        cdouble c, double dt) {
    AuxCoeffs k;
    k.a = 0.0;
    k.c = c;
    k.kappa_bar = kappa_bar;
    k.theta_bar = 0.0;
    return segment_increments_impl(alpha_end, k, sigma, dt, 0).alpha_start;
}

std::vector<cdouble> riccati_path(const HestonModel& model, SqrtP sqrtp,
                                  const std::vector<double>& grid) {
    if (grid.size() < 2) throw std::invalid_argument("riccati_path needs >= 2 times");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("riccati_path grid must be ascending");

    std::vector<cdouble> alpha(grid.size());
    alpha.back() = 0.0;
    for (std::size_t i = grid.size() - 1; i-- > 0;) {
        // walk [grid[i], grid[i+1]] backward, splitting at coefficient jumps
        std::vector<double> edges{grid[i]};
        for (double b : model_breakpoints(model, grid[i], grid[i + 1]))
            edges.push_back(b);
        edges.push_back(grid[i + 1]);
        cdouble a = alpha[i + 1];
        for (std::size_t j = edges.size() - 1; j-- > 0;) {
            const AuxCoeffs k = aux_coeffs(model, sqrtp, edges[j]);
            a = riccati_segment(a, k.kappa_bar, model.sigma(edges[j]), k.c,
                                edges[j + 1] - edges[j]);
        }
        alpha[i] = a;
    }
    return alpha;
}

TransformCache build_cache(const HestonModel& model, SqrtP sqrtp,
                           const std::vector<double>& grid, int refinement) {
    if (grid.size() < 2) throw std::invalid_argument("build_cache needs >= 2 times");
    if (refinement < 1) throw std::invalid_argument("build_cache refinement >= 1");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("build_cache grid must be ascending");

    // refined walk grid: grid intervals split `refinement`-fold, plus jumps
    std::set<double> nodes(grid.begin(), grid.end());
    for (std::size_t i = 1; i < grid.size(); ++i)
        for (int j = 1; j < refinement; ++j)
            nodes.insert(grid[i - 1] + (grid[i] - grid[i - 1]) * j / refinement);
    for (double b : model_breakpoints(model, grid.front(), grid.back()))
        nodes.insert(b);
    std::vector<double> walk(nodes.begin(), nodes.end());
    const std::size_t n = walk.size();

    std::vector<cdouble> alpha(n), beta(n), lg(n), tau(n);
    std::vector<cdouble> jseg(n - 1), dlg(n - 1);
    alpha[n - 1] = 0.0;
    beta[n - 1] = 0.0;
    lg[n - 1] = 0.0; // provisional; shifted so lg(grid.front()) = 0 below
    for (std::size_t i = n - 1; i-- > 0;) {
        const AuxCoeffs k = aux_coeffs(model, sqrtp, walk[i]);
        const SegmentIncrements inc = segment_increments(alpha[i + 1], k,
                                                         model.sigma(walk[i]),
                                                         walk[i + 1] - walk[i]);
        alpha[i] = inc.alpha_start;
        beta[i] = beta[i + 1] + inc.d_beta;
        lg[i] = lg[i + 1] - inc.d_lg;
        jseg[i] = inc.j_seg;
        dlg[i] = inc.d_lg;
    }
    const cdouble shift = lg[0];
    for (auto& v : lg) v -= shift;
    tau[n - 1] = 0.0;
    for (std::size_t i = n - 1; i-- > 0;)
        tau[i] = tau[i + 1] + 0.25 * std::exp(2.0 * lg[i + 1]) * jseg[i];

    TransformCache cache;
    cache.xi = sqrtp.xi;
    cache.branch = sqrtp.branch;
    cache.time_grid = grid;
    cache.alpha.resize(grid.size());
    cache.beta.resize(grid.size());
    cache.lg.resize(grid.size());
    cache.tau.resize(grid.size());
    // grid values were inserted into the walk set verbatim: exact matches exist
    std::size_t w = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (walk[w] < grid[i]) ++w;
        cache.alpha[i] = alpha[w];
        cache.beta[i] = beta[w];
        cache.lg[i] = lg[w];
        cache.tau[i] = tau[w];
    }
    return cache;
}

std::pair<double, double> branch_points(const HestonModel& model, double t) {
    const double kappa = model.kappa(t), sigma = model.sigma(t), rho = model.rho(t);
    const double one_m_r2 = 1.0 - rho * rho;
    if (std::abs(one_m_r2) < 1e-14)
        throw DegenerateCorrelation("critical points undefined at |rho| = 1");
    const double disc = 4.0 * kappa * kappa - 4.0 * kappa * rho * sigma + sigma * sigma;
    const double root = std::sqrt(disc);
    const double base = sigma - 2.0 * kappa * rho;
    const double w_minus = (base - root) / (2.0 * sigma * one_m_r2);
    const double w_plus = (base + root) / (2.0 * sigma * one_m_r2);
    return {std::min(w_minus, w_plus), std::max(w_minus, w_plus)};
}

} // namespace svb
