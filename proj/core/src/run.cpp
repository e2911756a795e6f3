#include <svbarrier/errors.hpp>
#include <svbarrier/lmvf.hpp>
#include <svbarrier/run.hpp>
#include <svbarrier/validators.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace svb {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string fmt6(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// FFT vs FD vanilla agreement at the near-the-money strike, longest maturity
json fft_check(const RunConfig& cfg, const MarketState& market,
               const HestonModel& model, bool& breach) {
    const ConstHestonParams fp = frozen_params(market, model);
    double k_star = cfg.strikes.front();
    for (double K : cfg.strikes)
        if (std::abs(K - cfg.spot) < std::abs(k_star - cfg.spot)) k_star = K;
    const double t_star =
        *std::max_element(cfg.maturities.begin(), cfg.maturities.end());

    const double fft_px = fft_vanilla_put(fp, k_star, t_star);
    const double fft_px2 = fft_vanilla_put(fp, k_star, t_star, 16384);
    const double fd_px = fd_vanilla_put(fp, k_star, t_star);
    const double self_bps = 1e4 * std::abs(fft_px2 - fft_px) / k_star;
    const double cross_bps = 1e4 * std::abs(fd_px - fft_px) / k_star;

    json out;
    out["strike"] = k_star;
    out["maturity"] = t_star;
    out["fft_put"] = fft_px;
    out["fft_put_doubled_nodes"] = fft_px2;
    out["fd_put"] = fd_px;
    out["self_stability_bps"] = self_bps;
    out["fd_agreement_bps"] = cross_bps;
    const bool ok = self_bps <= 1.0 && cross_bps <= 20.0;
    out["pass"] = ok;
    if (!ok) breach = true;
    return out;
}

// closed-form kernel entries against the brute-force variance quadrature
json kernel_check(const RunConfig& cfg, const MarketState& market,
                  const HestonModel& model, bool& breach) {
    const double t_min =
        *std::min_element(cfg.maturities.begin(), cfg.maturities.end());
    const double T = std::min(t_min, 0.5);
    const double eps = cfg.numerics.epsilon_for(cfg.strikes.front());
    AssemblyOptions opts;
    opts.quad.upsilon = 500.0;
    opts.quad.simpson_nodes = cfg.numerics.simpson_nodes;
    opts.kummer = KummerMode::Series;
    opts.refinement = cfg.numerics.refinement;

    const double v0 = market.v0;
    const struct {
        double t, v, t_k, v_l;
    } probes[2] = {{T / 9.0, v0, T / 3.0, v0},
                   {T / 3.0, v0 - 0.05, 2.0 * T / 3.0, v0 + 0.05}};

    json out;
    out["entries"] = json::array();
    double worst = 0.0;
    for (const auto& pr : probes) {
        const double direct = w_entry_direct(model, cfg.barrier, pr.t, T, pr.v,
                                             pr.t_k, pr.v_l, eps, opts);
        const double reference = w_entry_reference(model, cfg.barrier, pr.t, T, pr.v,
                                                   pr.t_k, pr.v_l, eps, opts);
        const double scale = std::max({std::abs(direct), std::abs(reference), 1.0});
        const double rel = std::abs(direct - reference) / scale;
        worst = std::max(worst, rel);
        json e;
        e["t"] = pr.t;
        e["v"] = pr.v;
        e["t_k"] = pr.t_k;
        e["v_l"] = pr.v_l;
        e["closed_form"] = direct;
        e["quadrature"] = reference;
        e["rel_diff"] = rel;
        out["entries"].push_back(e);
    }
    out["worst_rel_diff"] = worst;
    const bool ok = worst <= 1e-4;
    out["pass"] = ok;
    if (!ok) breach = true;
    return out;
}

}  // namespace

void emit_plot_data(const RunConfig& cfg, const BatchResult& batch,
                    const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);

    // basis shapes over nu at s = t_k (time factor 1), long format
    std::string basis = "epsilon,nu_l,nu,theta\n";
    std::vector<double> eps_values;
    for (double K : cfg.strikes) {
        const double e = cfg.numerics.epsilon_for(K);
        if (std::find(eps_values.begin(), eps_values.end(), e) == eps_values.end())
            eps_values.push_back(e);
    }
    const double v_lo = std::max(cfg.v0 - cfg.numerics.v_m, 1e-4);
    const double v_hi = cfg.v0 + cfg.numerics.v_m;
    for (double e : eps_values)
        for (int l = 0; l < std::max(cfg.numerics.n_v, 1); ++l) {
            const double v_l =
                cfg.numerics.n_v > 1
                    ? v_lo + (v_hi - v_lo) * l / (cfg.numerics.n_v - 1)
                    : cfg.v0;
            const double nu_l = std::sqrt(v_l);
            for (int i = 1; i <= 150; ++i) {
                const double nu = 1.5 * i / 150.0;
                basis += fmt6(e) + "," + fmt6(nu_l) + "," + fmt6(nu) + "," +
                         fmt6(basis_theta(0.0, nu, 0.0, nu_l, e)) + "\n";
            }
        }
    write_text(dir / "basis_shapes.csv", basis);

    // solved gradient at the collocation nodes, long format
    std::string phi = "strike,maturity,t,v,phi\n";
    for (const PhiSample& s : batch.phi)
        phi += fmt6(s.strike) + "," + fmt6(s.maturity) + "," + fmt6(s.t) + "," +
               fmt6(s.v) + "," + fmt6(s.phi) + "\n";
    write_text(dir / "phi_surface.csv", phi);
}

int run(const RunConfig& cfg) {
    const auto tic = Clock::now();
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);

    const HestonModel model = build_model(cfg.model);
    const MarketState market{cfg.spot, cfg.v0, 0.0};

    const BatchResult batch = batch_price(market, model, cfg.barrier, cfg.strikes,
                                          cfg.maturities, cfg.numerics);
    write_text(dir / "git_prices.csv", to_csv(batch.table));
    emit_plot_data(cfg, batch, cfg.out_dir);

    json meta;
    meta["schema"] = cfg.schema;
    meta["spot"] = cfg.spot;
    meta["v0"] = cfg.v0;
    meta["strikes"] = cfg.strikes;
    meta["maturities"] = cfg.maturities;
    meta["out_dir"] = cfg.out_dir;

    json solves = json::array();
    for (const SolveDiag& d : batch.solves) {
        json s;
        s["maturity"] = d.maturity;
        s["epsilon"] = d.epsilon;
        s["assembly_seconds"] = d.assembly_seconds;
        s["max_asymmetry"] = d.max_asymmetry;
        s["max_abs"] = d.max_abs;
        s["minres_iterations"] = d.minres_iterations;
        s["rel_residual"] = d.rel_residual;
        s["unsym_residual"] = d.unsym_residual;
        s["used_lu_fallback"] = d.used_lu_fallback;
        solves.push_back(s);
    }
    meta["solves"] = solves;

    bool any_failed = false;
    json failures = json::array();
    for (const PriceCell& c : batch.table.cells)
        if (c.failed) {
            any_failed = true;
            json f;
            f["strike"] = c.strike;
            f["maturity"] = c.maturity;
            f["error"] = c.error;
            failures.push_back(f);
        }
    meta["failures"] = failures;

    bool breach = false;
    if (cfg.validators.fd) {
        const PriceTable fd_table = fd_price_table(market, model, cfg.barrier,
                                                   cfg.strikes, cfg.maturities);
        write_text(dir / "fd_prices.csv", to_csv(fd_table));
        const ErrorReport rep = cross_validate(batch.table, fd_table);
        write_text(dir / "errors.csv", error_report_csv(rep));
        json v;
        v["max_abs_pct"] = rep.max_abs_pct;
        v["mean_abs_pct"] = rep.mean_abs_pct;
        meta["fd_cross_validation"] = v;
    }
    if (cfg.validators.fft) meta["fft_check"] = fft_check(cfg, market, model, breach);
    if (cfg.validators.reference_kernel)
        meta["kernel_check"] = kernel_check(cfg, market, model, breach);

    const int code = (any_failed || breach) ? 2 : 0;
    meta["exit_code"] = code;
    meta["total_seconds"] =
        std::chrono::duration<double>(Clock::now() - tic).count();
    write_text(dir / "run_meta.json", meta.dump(2) + "\n");
    return code;
}

} // namespace svb
