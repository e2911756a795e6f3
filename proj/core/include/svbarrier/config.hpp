#pragma once

#include <svbarrier/model.hpp>
#include <svbarrier/pricer.hpp>

#include <string>
#include <vector>

namespace svb {

struct ValidatorFlags {
    bool fd = false;
    bool fft = false;
    bool reference_kernel = false;
};

struct RunConfig {
    int schema = 1;
    ModelInputs model;
    double spot = 0.0;
    double v0 = 0.0;
    PiecewiseCurve barrier = PiecewiseCurve::constant(0.0);
    std::vector<double> strikes;
    std::vector<double> maturities;
    NumericsConfig numerics;
    ValidatorFlags validators;
    std::string out_dir = ".";
};

// Parse a JSON config file. Throws ConfigError with a line/column diagnostic
// on malformed JSON and with a field path on invalid values.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& origin);

} // namespace svb
