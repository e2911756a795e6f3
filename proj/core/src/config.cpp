#include <svbarrier/config.hpp>
#include <svbarrier/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace svb {

namespace {

using nlohmann::json;

double require_positive(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    const double x = j.get<double>();
    if (!(x > 0.0)) throw ConfigError(path + ": must be positive");
    return x;
}

std::vector<double> number_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw ConfigError(path + ": expected a nonempty array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_number()) throw ConfigError(path + ": expected numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

PiecewiseCurve parse_barrier(const json& j) {
    if (j.is_number()) {
        const double L = j.get<double>();
        if (!(L > 0.0)) throw ConfigError("barrier: must be positive");
        return PiecewiseCurve::constant(L);
    }
    if (j.is_object()) {
        const auto bp = number_list(j.at("breakpoints"), "barrier.breakpoints");
        const auto vals = number_list(j.at("values"), "barrier.values");
        try {
            return PiecewiseCurve(bp, vals);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("barrier: ") + e.what());
        }
    }
    throw ConfigError("barrier: expected a number or {breakpoints, values}");
}

void parse_numerics(const json& j, NumericsConfig& n) {
    if (!j.is_object()) throw ConfigError("numerics: expected an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "n_t")
            n.n_t = val.get<int>();
        else if (key == "n_v")
            n.n_v = val.get<int>();
        else if (key == "v_m")
            n.v_m = val.get<double>();
        else if (key == "epsilon")
            n.epsilon_scalar = val.get<double>();
        else if (key == "epsilon_map") {
            if (!val.is_object())
                throw ConfigError("numerics.epsilon_map: expected an object");
            for (const auto& [ks, ev] : val.items()) {
                try {
                    n.epsilon_map[std::stod(ks)] = ev.get<double>();
                } catch (const std::invalid_argument&) {
                    throw ConfigError("numerics.epsilon_map: non-numeric strike key '" +
                                      ks + "'");
                }
            }
        } else if (key == "simpson_nodes")
            n.simpson_nodes = val.get<int>();
        else if (key == "solver") {
            const std::string s = val.get<std::string>();
            if (s == "minres")
                n.solver = SolverKind::Minres;
            else if (s == "lu")
                n.solver = SolverKind::Lu;
            else
                throw ConfigError("numerics.solver: expected 'minres' or 'lu'");
        } else if (key == "minres_tol")
            n.minres_tol = val.get<double>();
        else if (key == "upsilon")
            n.upsilon_override = val.get<double>();
        else if (key == "rel_tol")
            n.rel_tol = val.get<double>();
        else if (key == "abs_tol")
            n.abs_tol = val.get<double>();
        else if (key == "max_subdivisions")
            n.max_subdivisions = val.get<int>();
        else if (key == "kummer") {
            const std::string s = val.get<std::string>();
            if (s == "approx")
                n.kummer = KummerMode::Approx;
            else if (s == "series")
                n.kummer = KummerMode::Series;
            else
                throw ConfigError("numerics.kummer: expected 'approx' or 'series'");
        } else if (key == "refinement")
            n.refinement = val.get<int>();
        else if (key == "threads")
            n.threads = val.get<int>();
        else
            throw ConfigError("numerics." + key + ": unknown field");
    }
    if (n.n_t < 2) throw ConfigError("numerics.n_t: must be >= 2");
    if (n.n_v < 1) throw ConfigError("numerics.n_v: must be >= 1");
    if (n.simpson_nodes < 3 || n.simpson_nodes % 2 == 0)
        throw ConfigError("numerics.simpson_nodes: must be odd and >= 3");
    if (n.refinement < 1) throw ConfigError("numerics.refinement: must be >= 1");
}

void parse_model(const json& j, ModelInputs& m, bool& horizon_given) {
    if (!j.is_object()) throw ConfigError("model: expected an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "m")
            m.m = val.get<double>();
        else if (key == "theta0")
            m.theta0 = require_positive(val, "model.theta0");
        else if (key == "sigma0")
            m.sigma0 = require_positive(val, "model.sigma0");
        else if (key == "rho0")
            m.rho0 = val.get<double>();
        else if (key == "theta_k")
            m.theta_k = val.get<double>();
        else if (key == "sigma_k")
            m.sigma_k = val.get<double>();
        else if (key == "r")
            m.r = val.get<double>();
        else if (key == "q")
            m.q = val.get<double>();
        else if (key == "segments")
            m.segments = val.get<int>();
        else if (key == "horizon") {
            m.horizon = require_positive(val, "model.horizon");
            horizon_given = true;
        } else
            throw ConfigError("model." + key + ": unknown field");
    }
    if (m.segments < 1) throw ConfigError("model.segments: must be >= 1");
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

    RunConfig cfg;
    bool horizon_given = false;
    try {
        for (const auto& [key, val] : root.items()) {
            if (key == "schema") {
                cfg.schema = val.get<int>();
                if (cfg.schema != 1)
                    throw ConfigError("schema: only version 1 is supported");
            } else if (key == "model")
                parse_model(val, cfg.model, horizon_given);
            else if (key == "spot")
                cfg.spot = require_positive(val, "spot");
            else if (key == "v0")
                cfg.v0 = require_positive(val, "v0");
            else if (key == "barrier")
                cfg.barrier = parse_barrier(val);
            else if (key == "strikes")
                cfg.strikes = number_list(val, "strikes");
            else if (key == "maturities")
                cfg.maturities = number_list(val, "maturities");
            else if (key == "numerics")
                parse_numerics(val, cfg.numerics);
            else if (key == "validators") {
                if (!val.is_array()) throw ConfigError("validators: expected an array");
                for (const auto& e : val) {
                    const std::string s = e.get<std::string>();
                    if (s == "fd")
                        cfg.validators.fd = true;
                    else if (s == "fft")
                        cfg.validators.fft = true;
                    else if (s == "reference_kernel")
                        cfg.validators.reference_kernel = true;
                    else
                        throw ConfigError("validators: unknown entry '" + s + "'");
                }
            } else if (key == "out_dir")
                cfg.out_dir = val.get<std::string>();
            else
                throw ConfigError(key + ": unknown field");
        }
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    if (!(cfg.spot > 0.0)) throw ConfigError("spot: required and positive");
    if (!(cfg.v0 > 0.0)) throw ConfigError("v0: required and positive");
    if (cfg.strikes.empty()) throw ConfigError("strikes: required");
    if (cfg.maturities.empty()) throw ConfigError("maturities: required");
    if (!(cfg.barrier(0.0) > 0.0)) throw ConfigError("barrier: required");
    for (double K : cfg.strikes)
        if (!(K > 0.0)) throw ConfigError("strikes: must be positive");
    for (double T : cfg.maturities)
        if (!(T > 0.0)) throw ConfigError("maturities: must be positive");

    // the exponential family is sampled out to the longest maturity by default
    const double t_max = *std::max_element(cfg.maturities.begin(), cfg.maturities.end());
    if (!horizon_given) cfg.model.horizon = t_max;
    if (cfg.model.horizon < t_max)
        throw ConfigError("model.horizon: must cover the longest maturity");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace svb
