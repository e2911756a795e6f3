#include <svbarrier/errors.hpp>
#include <svbarrier/run.hpp>
#include <svbarrier/version.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"semi-analytical barrier put pricer under time-dependent Heston"};
    app.set_version_flag("--version", SVBARRIER_VERSION);

    std::string config_path;
    std::string out_dir;
    std::vector<std::string> validators;
    double upsilon = -1.0;
    std::string solver;

    app.add_option("-c,--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("-o,--out-dir", out_dir, "output directory override");
    app.add_option("--validators", validators,
                   "validators to run: fd, fft, reference_kernel")
        ->delimiter(',');
    app.add_option("--upsilon", upsilon, "override the xi truncation bound");
    app.add_option("--solver", solver, "linear solver: minres or lu")
        ->check(CLI::IsMember({"minres", "lu"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        svb::RunConfig cfg = svb::load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        for (const std::string& v : validators) {
            if (v == "fd")
                cfg.validators.fd = true;
            else if (v == "fft")
                cfg.validators.fft = true;
            else if (v == "reference_kernel")
                cfg.validators.reference_kernel = true;
            else
                throw svb::ConfigError("unknown validator '" + v + "'");
        }
        if (upsilon > 0.0) cfg.numerics.upsilon_override = upsilon;
        if (solver == "minres") cfg.numerics.solver = svb::SolverKind::Minres;
        if (solver == "lu") cfg.numerics.solver = svb::SolverKind::Lu;
        return svb::run(cfg);
    } catch (const svb::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }
}
