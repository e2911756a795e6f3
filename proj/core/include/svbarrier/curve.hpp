#pragma once

#include <functional>
#include <vector>

namespace svb {

// Deterministic piecewise-constant function of time. Value i applies on
// [breakpoints[i], breakpoints[i+1]); the last value is held beyond the final
// breakpoint. Evaluation is right-continuous.
class PiecewiseCurve {
public:
    PiecewiseCurve(std::vector<double> breakpoints, std::vector<double> values);

    static PiecewiseCurve constant(double value);

    // Sample f at the left endpoint of each of n equal segments over [0, horizon].
    static PiecewiseCurve sampled(const std::function<double(double)>& f,
                                  int n_segments, double horizon);

    double operator()(double t) const;

    const std::vector<double>& breakpoints() const { return bp_; }
    const std::vector<double>& values() const { return val_; }
    bool is_constant() const;

private:
    std::vector<double> bp_;
    std::vector<double> val_;
};

} // namespace svb
