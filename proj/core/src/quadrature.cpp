#include <svbarrier/errors.hpp>
#include <svbarrier/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace svb {

namespace {

// (G7, K15) pair on [-1, 1]; positive half, symmetric completion at runtime.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
    double a, b;
    cdouble value;
    double err;
};

Panel eval_panel(const std::function<cdouble(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cdouble k{0.0, 0.0}, g{0.0, 0.0};
    for (int i = 0; i < 8; ++i) {
        cdouble fs;
        if (i == 7) {
            fs = f(c);
        } else {
            fs = f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
        }
        k += kWk[i] * fs;
        if (i % 2 == 1) g += kWg[i / 2] * fs;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}

struct VecPanel {
    double a, b;
    std::vector<double> value;
    std::vector<double> err;
    double priority = 0.0;
};

VecPanel eval_panel_vec(int ncomp, const std::function<void(double, double*)>& f,
                        double a, double b, std::vector<double>& fbuf,
                        std::vector<double>& kbuf, std::vector<double>& gbuf) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::fill(kbuf.begin(), kbuf.end(), 0.0);
    std::fill(gbuf.begin(), gbuf.end(), 0.0);
    auto accumulate = [&](double wk, double wg) {
        for (int j = 0; j < ncomp; ++j) kbuf[j] += wk * fbuf[j];
        if (wg != 0.0)
            for (int j = 0; j < ncomp; ++j) gbuf[j] += wg * fbuf[j];
    };
    for (int i = 0; i < 8; ++i) {
        const double wg = (i % 2 == 1) ? kWg[i / 2] : 0.0;
        if (i == 7) {
            f(c, fbuf.data());
            accumulate(kWk[i], wg);
        } else {
            f(c - h * kXgk[i], fbuf.data());
            accumulate(kWk[i], wg);
            f(c + h * kXgk[i], fbuf.data());
            accumulate(kWk[i], wg);
        }
    }
    VecPanel p;
    p.a = a;
    p.b = b;
    p.value.resize(ncomp);
    p.err.resize(ncomp);
    for (int j = 0; j < ncomp; ++j) {
        p.value[j] = kbuf[j] * h;
        p.err[j] = std::abs(kbuf[j] - gbuf[j]) * h;
    }
    return p;
}

} // namespace

double choose_upsilon(double T) {
    if (!(T > 0.0)) throw std::invalid_argument("choose_upsilon requires T > 0");
    if (T < 1.0) return 500.0;
    if (T < 2.0) return 5000.0;
    return 20000.0;
}

QuadResult integrate_gk(const std::function<cdouble(double)>& f, double a, double b,
                        const QuadConfig& cfg) {
    if (!(b > a)) throw std::invalid_argument("integrate_gk requires b > a");
    auto worse = [](const Panel& x, const Panel& y) { return x.err < y.err; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> heap(worse);

    cdouble total{0.0, 0.0};
    double err = 0.0;
    int evals = 15;
    Panel root = eval_panel(f, a, b);
    total = root.value;
    err = root.err;
    heap.push(std::move(root));

    int splits = 0;
    while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
        if (splits >= cfg.max_subdivisions) {
            std::ostringstream os;
            os << "integrate_gk: " << cfg.max_subdivisions
               << " panels exhausted, err=" << err << " value=(" << total.real()
               << "," << total.imag() << ")";
            throw ToleranceNotMet(os.str(), std::abs(total), err);
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = eval_panel(f, worst.a, mid);
        Panel right = eval_panel(f, mid, worst.b);
        evals += 30;
        total += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(std::move(left));
        heap.push(std::move(right));
        ++splits;
    }
    return {total, err, evals};
}

VectorQuadResult integrate_gk_vec(int ncomp,
                                  const std::function<void(double, double*)>& f,
                                  double a, double b, const QuadConfig& cfg,
                                  const std::vector<double>& initial_edges) {
    if (ncomp < 1) throw std::invalid_argument("integrate_gk_vec requires ncomp >= 1");
    if (!(b > a)) throw std::invalid_argument("integrate_gk_vec requires b > a");

    std::vector<double> edges;
    if (initial_edges.empty()) {
        edges = {a, b};
    } else {
        edges = initial_edges;
        if (edges.front() != a || edges.back() != b)
            throw std::invalid_argument("initial_edges must span [a, b]");
        for (std::size_t i = 1; i < edges.size(); ++i)
            if (!(edges[i] > edges[i - 1]))
                throw std::invalid_argument("initial_edges must be strictly increasing");
    }

    std::vector<double> fbuf(ncomp), kbuf(ncomp), gbuf(ncomp);
    std::vector<double> total(ncomp, 0.0), err(ncomp, 0.0), scale(ncomp, 0.0);

    auto worse = [](const VecPanel& x, const VecPanel& y) {
        return x.priority < y.priority;
    };
    std::priority_queue<VecPanel, std::vector<VecPanel>, decltype(worse)> heap(worse);

    int evals = 0;
    auto tol_of = [&](int j) { return std::max(cfg.abs_tol, cfg.rel_tol * scale[j]); };
    auto push_panel = [&](VecPanel&& p) {
        double pr = 0.0;
        for (int j = 0; j < ncomp; ++j) pr = std::max(pr, p.err[j] / tol_of(j));
        p.priority = pr;
        heap.push(std::move(p));
    };

    for (std::size_t i = 1; i < edges.size(); ++i) {
        VecPanel p = eval_panel_vec(ncomp, f, edges[i - 1], edges[i], fbuf, kbuf, gbuf);
        evals += 15;
        for (int j = 0; j < ncomp; ++j) {
            total[j] += p.value[j];
            err[j] += p.err[j];
            scale[j] += std::abs(p.value[j]);
        }
        push_panel(std::move(p));
    }

    auto converged = [&]() {
        for (int j = 0; j < ncomp; ++j)
            if (err[j] > tol_of(j)) return false;
        return true;
    };

    int splits = 0;
    bool ok = true;
    while (!converged()) {
        if (splits >= cfg.max_subdivisions) {
            ok = false;
            break;
        }
        VecPanel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        VecPanel left = eval_panel_vec(ncomp, f, worst.a, mid, fbuf, kbuf, gbuf);
        VecPanel right = eval_panel_vec(ncomp, f, mid, worst.b, fbuf, kbuf, gbuf);
        evals += 30;
        for (int j = 0; j < ncomp; ++j) {
            total[j] += left.value[j] + right.value[j] - worst.value[j];
            err[j] += left.err[j] + right.err[j] - worst.err[j];
            scale[j] += std::abs(left.value[j]) + std::abs(right.value[j]) -
                        std::abs(worst.value[j]);
        }
        push_panel(std::move(left));
        push_panel(std::move(right));
        ++splits;
    }

    VectorQuadResult res;
    res.value = std::move(total);
    res.err_est = std::move(err);
    res.evaluations = evals;
    res.converged = ok;
    return res;
}

std::vector<double> split_panels(double a, double b, double osc_freq, double growth) {
    if (!(b > a)) throw std::invalid_argument("split_panels requires b > a");
    if (!(growth > 1.0)) throw std::invalid_argument("split_panels requires growth > 1");
    double width = b - a;
    if (osc_freq > 0.0)
        width = std::min(width, std::max(2.0, 3.0 * std::numbers::pi / osc_freq));
    std::vector<double> edges{a};
    double x = a;
    while (x + width < b) {
        x += width;
        edges.push_back(x);
        width *= growth;
    }
    edges.push_back(b);
    return edges;
}

cdouble integrate_time_simpson(const std::function<cdouble(double)>& f, double t,
                               double T, int n) {
    std::vector<double> nodes, weights;
    simpson_rule(t, T, n, nodes, weights);
    cdouble sum{0.0, 0.0};
    for (int i = 0; i < n; ++i) sum += weights[i] * f(nodes[i]);
    return sum;
}

void simpson_rule(double t, double T, int n, std::vector<double>& nodes,
                  std::vector<double>& weights) {
    if (n < 3 || n % 2 == 0)
        throw std::invalid_argument("simpson_rule requires odd n >= 3");
    if (!(T > t)) throw std::invalid_argument("simpson_rule requires T > t");
    const double h = (T - t) / (n - 1);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = t + h * i;
        double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        weights[i] = w * h / 3.0;
    }
    nodes[n - 1] = T; // exact endpoint despite rounding
}

} // namespace svb
