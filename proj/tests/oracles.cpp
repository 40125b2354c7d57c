#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

struct Ray {
    double u, w;  // U and U'
};

Ray rk4_to(double lambda, Ray y, double from, double to, int nsteps) {
    const double h = (to - from) / nsteps;
    auto acc = [lambda](double u) { return lambda / ((1.0 + u) * (1.0 + u)); };
    for (int k = 0; k < nsteps; ++k) {
        const double k1u = y.w, k1w = acc(y.u);
        const double k2u = y.w + 0.5 * h * k1w, k2w = acc(y.u + 0.5 * h * k1u);
        const double k3u = y.w + 0.5 * h * k2w, k3w = acc(y.u + 0.5 * h * k2u);
        const double k4u = y.w + h * k3w, k4w = acc(y.u + h * k3u);
        y.u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        y.w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    }
    return y;
}

// end value U(1; m) for the shot starting at U(0)=m, U'(0)=0
double end_value(double lambda, double m) {
    return rk4_to(lambda, {m, 0.0}, 0.0, 1.0, 2000).u;
}

// minimum of the end value over the midpoint depth, ternary-refined
double min_end_value(double lambda, double* arg = nullptr) {
    double best = 1e300, bm = 0.0;
    for (int k = 0; k <= 120; ++k) {
        const double m = -0.95 + 0.95 * k / 120.0;
        const double r = end_value(lambda, m);
        if (r < best) {
            best = r;
            bm = m;
        }
    }
    double lo = std::max(-0.95, bm - 0.02), hi = std::min(0.0, bm + 0.02);
    for (int it = 0; it < 80; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (end_value(lambda, m1) < end_value(lambda, m2))
            hi = m2;
        else
            lo = m1;
    }
    const double m = 0.5 * (lo + hi);
    if (arg) *arg = m;
    return end_value(lambda, m);
}

}  // namespace

ShootResult shoot_steady(double lambda, const std::vector<double>& x) {
    ShootResult res;
    if (lambda == 0.0) {
        res.exists = true;
        res.U.assign(x.size(), 0.0);
        return res;
    }
    double m_deep = 0.0;
    const double minval = min_end_value(lambda, &m_deep);
    if (minval > 0.0) return res;  // beyond the fold, no solution
    res.exists = true;

    // shallow root of the end value in (m_deep, 0]
    double lo = m_deep, hi = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (end_value(lambda, mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double m = 0.5 * (lo + hi);

    // march outward once, landing exactly on each requested |x|
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = std::abs(x[i]);
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });

    res.U.assign(x.size(), 0.0);
    Ray y{m, 0.0};
    double cur = 0.0;
    const double hbase = 5e-5;
    for (std::size_t idx : order) {
        const double target = t[idx];
        if (target > cur) {
            const int k = std::max(1, static_cast<int>(std::ceil((target - cur) / hbase)));
            y = rk4_to(lambda, y, cur, target, k);
            cur = target;
        }
        res.U[idx] = y.u;
    }
    return res;
}

double pull_in_lambda() {
    double lo = 0.2, hi = 0.6;  // exists at lo, fails at hi
    if (min_end_value(lo) > 0.0 || min_end_value(hi) <= 0.0)
        throw std::runtime_error("pull-in bracket invalid");
    for (int it = 0; it < 45; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (min_end_value(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
