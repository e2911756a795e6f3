#pragma once

#include <svbarrier/lmvf.hpp>

#include <string>
#include <vector>

namespace svb {

// Terminal image of the vanilla-put payoff on [y(T), inf):
//   K [ (e^{-y_T sqrt(p)} - 1)/sqrt(p) - (e^{-y_T (sqrt(p)-1)} - 1)/(sqrt(p)-1) ].
cdouble u_bar_terminal(double strike, double y_T, cdouble sqrtp);

// Homogeneous image part P1 = u_bar_terminal * e^{beta(t) + alpha(t) v}.
cdouble p1_value(double strike, double y_T, cdouble alpha_t, cdouble beta_t,
                 double v, cdouble sqrtp);

// Spec-shaped convenience: reads alpha/beta at time t from the cache.
cdouble p1(double t, double v, double xi, const BarrierContract& contract,
           const HestonModel& model, const TransformCache& cache);

// Gradient-driven image part P2 at fixed xi (branch -i xi), from the solved
// boundary gradient, via the same closed-form variance integral as the matrix.
cdouble p2(double t, double v, double xi, const BoundaryGradient& phi,
           const BarrierContract& contract, const HestonModel& model,
           const AssemblyOptions& opts);

struct PriceDiag {
    double negative_residue = 0.0; // clamped magnitude, if any
    int xi_evaluations = 0;
    double seconds = 0.0;
};

// Sine-inversion of P1+P2 at (t0, x=ln(S0/K), v0). Tiny negative residues are
// clamped to zero (warning in diag); residues below -0.01 K throw NegativePrice.
double price_down_out_put(const MarketState& market, const HestonModel& model,
                          const BarrierContract& contract, const BoundaryGradient& phi,
                          const AssemblyOptions& opts, PriceDiag* diag = nullptr);

// Same price via the modulus/phase form of the inversion integrand (tests).
double price_down_out_put_polar(const MarketState& market, const HestonModel& model,
                                const BarrierContract& contract,
                                const BoundaryGradient& phi,
                                const AssemblyOptions& opts);

// Parity: P_di = P_van - P_do.
double price_down_in_put(double vanilla_price, double down_out_price);

struct NumericsConfig {
    int n_t = 10;
    int n_v = 4;
    double v_m = 0.1;
    std::optional<double> epsilon_scalar;   // overrides everything if set
    std::map<double, double> epsilon_map;   // per-strike overrides
    int simpson_nodes = 21;
    SolverKind solver = SolverKind::Minres;
    double minres_tol = 1e-8;
    double upsilon_override = -1.0; // <= 0: choose_upsilon(T)
    double rel_tol = 1e-7;
    double abs_tol = 1e-10;
    int max_subdivisions = 2000;
    KummerMode kummer = KummerMode::Approx;
    int refinement = 4;
    int threads = 1;

    double epsilon_for(double strike) const;
};

struct PriceCell {
    double strike = 0.0;
    double maturity = 0.0;
    double price = 0.0;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct PriceTable {
    std::vector<double> strikes;
    std::vector<double> maturities;
    std::string method; // "GIT", "FD", "FFT"
    std::vector<PriceCell> cells; // row-major strikes x maturities

    const PriceCell& at(int ik, int jt) const {
        return cells[std::size_t(ik) * maturities.size() + std::size_t(jt)];
    }
    PriceCell& at(int ik, int jt) {
        return cells[std::size_t(ik) * maturities.size() + std::size_t(jt)];
    }
};

// header strike,maturity,price,method,seconds; 6 significant digits
std::string to_csv(const PriceTable& table);

struct PhiSample {
    double strike, maturity, t, v, phi;
};

struct SolveDiag {
    double maturity = 0.0;
    double epsilon = 0.0;
    double assembly_seconds = 0.0;
    double max_asymmetry = 0.0;
    double max_abs = 0.0;
    int minres_iterations = 0;
    double rel_residual = 0.0;
    double unsym_residual = 0.0;
    bool used_lu_fallback = false;
};

struct BatchResult {
    PriceTable table;
    std::vector<PhiSample> phi;     // collocation-grid gradient per (K,T)
    std::vector<SolveDiag> solves;  // one per (maturity, epsilon) assembly
};

// One assembly per (maturity, epsilon value); shared matrix across strikes;
// per-cell failures recorded, not fatal.
BatchResult batch_price(const MarketState& market, const HestonModel& model,
                        const PiecewiseCurve& barrier, std::vector<double> strikes,
                        std::vector<double> maturities, const NumericsConfig& cfg);

} // namespace svb
