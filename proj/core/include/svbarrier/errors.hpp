#pragma once

#include <stdexcept>
#include <string>

namespace svb {

// Configuration / input rejection (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Model branch m < 1 is not implemented.
class UnsupportedBranch : public std::runtime_error {
public:
    explicit UnsupportedBranch(const std::string& msg) : std::runtime_error(msg) {}
};

// |kappa_bar| collapsed below 1e-14 (branch-point collision in image space).
class DegenerateKappaBar : public std::runtime_error {
public:
    explicit DegenerateKappaBar(const std::string& msg) : std::runtime_error(msg) {}
};

// |rho| = 1 makes the critical-point formula singular.
class DegenerateCorrelation : public std::runtime_error {
public:
    explicit DegenerateCorrelation(const std::string& msg) : std::runtime_error(msg) {}
};

// An exponent or special-function argument left the representable range.
class NumericalOverflow : public std::runtime_error {
public:
    explicit NumericalOverflow(const std::string& msg) : std::runtime_error(msg) {}
};

// A series evaluation genuinely failed to converge in the supported range.
class SeriesDivergence : public std::runtime_error {
public:
    explicit SeriesDivergence(const std::string& msg) : std::runtime_error(msg) {}
};

// Adaptive quadrature hit max_subdivisions; carries the best value found.
class ToleranceNotMet : public std::runtime_error {
public:
    ToleranceNotMet(const std::string& msg, double best, double err)
        : std::runtime_error(msg), best_value(best), err_estimate(err) {}
    double best_value;
    double err_estimate;
};

// Green's function asked for |tau| < 1e-14: caller must use the delta limit.
class DiagonalDegeneracy : public std::runtime_error {
public:
    explicit DiagonalDegeneracy(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative solver or time stepper failed; message carries diagnostics.
class NoConvergence : public std::runtime_error {
public:
    explicit NoConvergence(const std::string& msg) : std::runtime_error(msg) {}
};

// Price integral returned a negative value beyond the tolerated residue.
class NegativePrice : public std::runtime_error {
public:
    explicit NegativePrice(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace svb
