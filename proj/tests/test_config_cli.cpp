#include <doctest.h>

#include <svbarrier/config.hpp>
#include <svbarrier/errors.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifdef __unix__
#include <sys/wait.h>
#include <unistd.h>
#endif

using namespace svb;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& body) { return parse_config(body, "test.json"); }

const char* kMinimal = R"({
  "spot": 60.0, "v0": 0.5, "barrier": 40.0,
  "strikes": [60.0], "maturities": [0.25]
})";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE_MESSAGE(in.good(), "missing file ", p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

} // namespace

TEST_CASE("full configuration round-trips every field") {
    const RunConfig cfg = parse(R"({
      "schema": 1,
      "spot": 60.0,
      "v0": 0.5,
      "barrier": 40.0,
      "strikes": [60.0, 90.0],
      "maturities": [0.0416667, 0.5],
      "model": {"m": 2.0, "theta0": 0.1, "sigma0": 0.3, "rho0": -0.7,
                "theta_k": 0.3, "sigma_k": 0.2, "r": 0.02, "q": 0.01,
                "segments": 10, "horizon": 1.0},
      "numerics": {"n_t": 6, "n_v": 3, "v_m": 0.08, "epsilon": 4.0,
                   "epsilon_map": {"60": 2.5}, "simpson_nodes": 11,
                   "solver": "lu", "minres_tol": 1e-9, "upsilon": 250.0,
                   "rel_tol": 1e-6, "abs_tol": 1e-9, "max_subdivisions": 500,
                   "kummer": "series", "refinement": 2, "threads": 1},
      "validators": ["fd", "fft"],
      "out_dir": "/tmp/svb_out"
    })");
    CHECK(cfg.schema == 1);
    CHECK(cfg.spot == 60.0);
    CHECK(cfg.v0 == 0.5);
    CHECK(cfg.barrier(0.0) == 40.0);
    CHECK(cfg.barrier(0.3) == 40.0);
    CHECK(cfg.strikes == std::vector<double>{60.0, 90.0});
    CHECK(cfg.maturities == std::vector<double>{0.0416667, 0.5});
    CHECK(cfg.model.theta_k == 0.3);
    CHECK(cfg.model.horizon == 1.0);
    CHECK(cfg.numerics.n_t == 6);
    CHECK(cfg.numerics.n_v == 3);
    CHECK(cfg.numerics.v_m == 0.08);
    REQUIRE(cfg.numerics.epsilon_scalar.has_value());
    CHECK(*cfg.numerics.epsilon_scalar == 4.0);
    CHECK(cfg.numerics.epsilon_map.at(60.0) == 2.5);
    CHECK(cfg.numerics.simpson_nodes == 11);
    CHECK(cfg.numerics.solver == SolverKind::Lu);
    CHECK(cfg.numerics.minres_tol == 1e-9);
    CHECK(cfg.numerics.upsilon_override == 250.0);
    CHECK(cfg.numerics.rel_tol == 1e-6);
    CHECK(cfg.numerics.abs_tol == 1e-9);
    CHECK(cfg.numerics.max_subdivisions == 500);
    CHECK(cfg.numerics.kummer == KummerMode::Series);
    CHECK(cfg.numerics.refinement == 2);
    CHECK(cfg.validators.fd);
    CHECK(cfg.validators.fft);
    CHECK_FALSE(cfg.validators.reference_kernel);
    CHECK(cfg.out_dir == "/tmp/svb_out");
}

TEST_CASE("omitted blocks fall back to defaults") {
    const RunConfig cfg = parse(kMinimal);
    CHECK(cfg.schema == 1);
    CHECK(cfg.numerics.n_t == 10);
    CHECK(cfg.numerics.n_v == 4);
    CHECK(cfg.numerics.v_m == 0.1);
    CHECK_FALSE(cfg.numerics.epsilon_scalar.has_value());
    CHECK(cfg.numerics.epsilon_map.empty());
    CHECK(cfg.numerics.solver == SolverKind::Minres);
    CHECK(cfg.numerics.kummer == KummerMode::Approx);
    CHECK_FALSE(cfg.validators.fd);
    CHECK_FALSE(cfg.validators.fft);
    CHECK(cfg.out_dir == ".");
    // the model horizon widens automatically to the longest maturity
    CHECK(cfg.model.horizon == 0.25);
}

TEST_CASE("explicit horizon must cover the longest maturity") {
    const char* body = R"({
      "spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25, 1.5],
      "model": {"horizon": %H%}
    })";
    std::string ok(body);
    ok.replace(ok.find("%H%"), 3, "2.0");
    CHECK(parse(ok).model.horizon == 2.0);
    // without a model block the horizon follows the maturities
    const RunConfig cfg = parse(R"({
      "spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25, 1.5]
    })");
    CHECK(cfg.model.horizon == 1.5);
    std::string bad(body);
    bad.replace(bad.find("%H%"), 3, "0.5");
    CHECK_THROWS_AS(parse(bad), ConfigError);
    try {
        parse(bad);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("horizon") != std::string::npos);
    }
}

TEST_CASE("barrier accepts a constant or a step curve") {
    const RunConfig cfg = parse(R"({
      "spot": 60.0, "v0": 0.5,
      "barrier": {"breakpoints": [0.0, 0.5], "values": [40.0, 38.0]},
      "strikes": [60.0], "maturities": [1.0]
    })");
    CHECK(cfg.barrier(0.0) == 40.0);
    CHECK(cfg.barrier(0.6) == 38.0);

    CHECK_THROWS_AS(parse(R"({
      "spot": 60.0, "v0": 0.5, "barrier": -1.0,
      "strikes": [60.0], "maturities": [0.25]
    })"),
                    ConfigError);
}

TEST_CASE("unknown or malformed fields are rejected with a path") {
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25], "typo_key": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25], "model": {"nope": 1}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25], "numerics": {"nope": 1}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25], "numerics": {"solver": "qr"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25], "numerics": {"kummer": "exact"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25],
      "numerics": {"epsilon_map": {"abc": 2.0}}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25], "numerics": {"n_t": 1}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25],
      "numerics": {"simpson_nodes": 10}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25], "validators": ["mc"]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"schema": 2, "spot": 60.0, "v0": 0.5,
      "barrier": 40.0, "strikes": [60.0], "maturities": [0.25]})"),
                    ConfigError);
    // required fields
    CHECK_THROWS_AS(parse(R"({"v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [0.25]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [], "maturities": [0.25]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse(R"({"spot": 60.0, "v0": 0.5, "barrier": 40.0,
      "strikes": [60.0], "maturities": [-0.25]})"),
                    ConfigError);
}

TEST_CASE("json syntax errors carry the origin name") {
    try {
        parse("{ not json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("test.json") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/path/cfg.json"), ConfigError);
    try {
        load_config("/nonexistent/path/cfg.json");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("cannot open") != std::string::npos);
    }
}

#ifdef __unix__
TEST_CASE("command line drives a full run and writes every artifact") {
#ifdef SVB_CLI_PATH
    const char* cli = SVB_CLI_PATH;
#else
    const char* cli = std::getenv("SVB_CLI_PATH");
#endif
    if (cli == nullptr) {
        MESSAGE("SVB_CLI_PATH not set; skipping the end-to-end run");
        return;
    }
    const fs::path root =
        fs::temp_directory_path() / ("svb_cli_" + std::to_string(::getpid()));
    const fs::path out = root / "out";
    fs::create_directories(out);

    const fs::path cfg_path = root / "run.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({
          "spot": 60.0, "v0": 0.5, "barrier": 40.0,
          "strikes": [60.0], "maturities": [0.0416666666666667],
          "numerics": {"n_t": 4, "n_v": 2, "upsilon": 200.0,
                       "simpson_nodes": 11, "solver": "lu"}
        })";
    }

    auto exit_code = [](const std::string& cmd) {
        const int rc = std::system(cmd.c_str());
        REQUIRE(WIFEXITED(rc));
        return WEXITSTATUS(rc);
    };

    const std::string quiet = " > /dev/null 2>&1";
    const std::string base = std::string("\"") + cli + "\"";
    CHECK(exit_code(base + " --version" + quiet) == 0);
    CHECK(exit_code(base + " -c " + cfg_path.string() + " -o " + out.string() +
                    quiet) == 0);

    CHECK(first_line(slurp(out / "git_prices.csv")) ==
          "strike,maturity,price,method,seconds");
    CHECK(first_line(slurp(out / "basis_shapes.csv")) == "epsilon,nu_l,nu,theta");
    CHECK(first_line(slurp(out / "phi_surface.csv")) ==
          "strike,maturity,t,v,phi");

    const nlohmann::json meta = nlohmann::json::parse(slurp(out / "run_meta.json"));
    CHECK(meta.at("exit_code").get<int>() == 0);
    CHECK(meta.at("failures").is_array());
    CHECK(meta.at("failures").empty());
    CHECK(meta.at("spot").get<double>() == 60.0);
    CHECK(meta.at("solves").is_array());

    // malformed configs and missing files exit with the config status
    const fs::path bad_path = root / "bad.json";
    {
        std::ofstream bad(bad_path);
        bad << "{ \"spot\": 60.0 }";
    }
    CHECK(exit_code(base + " -c " + bad_path.string() + quiet) == 1);
    CHECK(exit_code(base + " -c " + (root / "missing.json").string() + quiet) == 1);
    CHECK(exit_code(base + quiet) == 1);  // --config is required

    fs::remove_all(root);
}
#endif
