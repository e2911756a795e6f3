#include <svbarrier/curve.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svb {

PiecewiseCurve::PiecewiseCurve(std::vector<double> breakpoints,
                               std::vector<double> values)
    : bp_(std::move(breakpoints)), val_(std::move(values)) {
    if (bp_.empty())
        throw std::invalid_argument("curve needs at least one breakpoint");
    if (bp_.front() != 0.0)
        throw std::invalid_argument("curve breakpoints must start at 0");
    for (std::size_t i = 1; i < bp_.size(); ++i)
        if (!(bp_[i] > bp_[i - 1]))
            throw std::invalid_argument("curve breakpoints must be strictly increasing");
    if (val_.size() != bp_.size())
        throw std::invalid_argument("curve needs one value per interval");
    for (double v : val_)
        if (!std::isfinite(v))
            throw std::invalid_argument("curve values must be finite");
}

PiecewiseCurve PiecewiseCurve::constant(double value) {
    return PiecewiseCurve({0.0}, {value});
}

PiecewiseCurve PiecewiseCurve::sampled(const std::function<double(double)>& f,
                                       int n_segments, double horizon) {
    if (n_segments < 1)
        throw std::invalid_argument("need at least one segment");
    if (!(horizon > 0.0))
        throw std::invalid_argument("horizon must be positive");
    std::vector<double> bp(static_cast<std::size_t>(n_segments));
    std::vector<double> val(static_cast<std::size_t>(n_segments));
    for (int i = 0; i < n_segments; ++i) {
        bp[std::size_t(i)] = horizon * double(i) / double(n_segments);
        val[std::size_t(i)] = f(bp[std::size_t(i)]); // left-endpoint sampling
    }
    return PiecewiseCurve(std::move(bp), std::move(val));
}

double PiecewiseCurve::operator()(double t) const {
    if (t < 0.0)
        throw std::invalid_argument("curve evaluated at negative time");
    // right-continuous: value i on [bp[i], bp[i+1]), last held beyond
    auto it = std::upper_bound(bp_.begin(), bp_.end(), t);
    std::size_t idx = std::size_t(it - bp_.begin());
    if (idx == 0) idx = 1; // t == 0 lands here via upper_bound on bp[0]=0
    return val_[std::min(idx - 1, val_.size() - 1)];
}

bool PiecewiseCurve::is_constant() const {
    return std::all_of(val_.begin(), val_.end(),
                       [&](double v) { return v == val_.front(); });
}

} // namespace svb
