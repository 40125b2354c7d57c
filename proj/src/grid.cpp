#include "mems/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace mems {

Grid1D make_grid1(int n) {
    if (n < 3) throw std::invalid_argument("grid needs at least 3 nodes");
    Grid1D g;
    g.n = n;
    g.h = 2.0 / (n - 1);
    g.x.resize(n);
    for (int i = 0; i < n; ++i) g.x[i] = -1.0 + i * g.h;
    g.x.front() = -1.0;
    g.x.back() = 1.0;
    return g;
}

Grid2D make_grid2(int nx, int neta) {
    if (nx < 3 || neta < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
    Grid2D g;
    g.nx = nx;
    g.neta = neta;
    g.hx = 2.0 / (nx - 1);
    g.heta = 1.0 / (neta - 1);
    g.x.resize(nx);
    for (int i = 0; i < nx; ++i) g.x[i] = -1.0 + i * g.hx;
    g.x.front() = -1.0;
    g.x.back() = 1.0;
    g.eta.resize(neta);
    for (int j = 0; j < neta; ++j) g.eta[j] = j * g.heta;
    g.eta.front() = 0.0;
    g.eta.back() = 1.0;
    return g;
}

Interval1D make_interval(double a, double b, int n) {
    if (n < 2) throw std::invalid_argument("interval needs at least 2 nodes");
    if (!(b > a)) throw std::invalid_argument("interval must have positive length");
    Interval1D iv;
    iv.n = n;
    iv.a = a;
    iv.b = b;
    iv.h = (b - a) / (n - 1);
    iv.z.resize(n);
    for (int k = 0; k < n; ++k) iv.z[k] = a + k * iv.h;
    iv.z.front() = a;
    iv.z.back() = b;
    return iv;
}

Field1D make_field1(const Grid1D& g, double fill) {
    Field1D f;
    f.grid = g;
    f.values.assign(g.n, fill);
    return f;
}

Field2D make_field2(const Grid2D& g, double fill) {
    Field2D f;
    f.grid = g;
    f.values.assign(static_cast<size_t>(g.nx) * g.neta, fill);
    return f;
}

namespace {

// first derivative along a strided line
void d1_line(const double* f, double* out, int n, std::ptrdiff_t stride, double h) {
    auto v = [&](int i) { return f[i * stride]; };
    out[0] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
    for (int i = 1; i < n - 1; ++i) out[static_cast<size_t>(i)] = (v(i + 1) - v(i - 1)) / (2.0 * h);
    out[static_cast<size_t>(n - 1)] = (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * h);
}

void d2_line(const double* f, double* out, int n, std::ptrdiff_t stride, double h) {
    auto v = [&](int i) { return f[i * stride]; };
    const double h2 = h * h;
    out[0] = (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) / h2;
    for (int i = 1; i < n - 1; ++i)
        out[static_cast<size_t>(i)] = (v(i + 1) - 2.0 * v(i) + v(i - 1)) / h2;
    out[static_cast<size_t>(n - 1)] =
        (2.0 * v(n - 1) - 5.0 * v(n - 2) + 4.0 * v(n - 3) - v(n - 4)) / h2;
}

}  // namespace

Field1D diff1(const Field1D& f) {
    if (f.grid.n < 3) throw std::invalid_argument("diff1 needs n >= 3");
    Field1D out = make_field1(f.grid);
    d1_line(f.values.data(), out.values.data(), f.grid.n, 1, f.grid.h);
    return out;
}

Field1D diff2(const Field1D& f) {
    if (f.grid.n < 4) throw std::invalid_argument("diff2 needs n >= 4");
    Field1D out = make_field1(f.grid);
    d2_line(f.values.data(), out.values.data(), f.grid.n, 1, f.grid.h);
    return out;
}

std::vector<double> quad_weights(int n, double h, bool* trapezoid_tail) {
    if (n < 3) throw std::invalid_argument("quadrature needs n >= 3");
    std::vector<double> w(n, 0.0);
    bool tail = false;
    int m = n;  // node count covered by Simpson
    if (n % 2 == 0) {
        m = n - 1;  // Simpson over the first n-2 intervals, trapezoid on the last
        tail = true;
    }
    w[0] += h / 3.0;
    w[static_cast<size_t>(m - 1)] += h / 3.0;
    for (int i = 1; i < m - 1; ++i) w[i] += (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
    if (tail) {
        w[static_cast<size_t>(n - 2)] += h / 2.0;
        w[static_cast<size_t>(n - 1)] += h / 2.0;
    }
    if (trapezoid_tail) *trapezoid_tail = tail;
    return w;
}

Quad1 integrate1_meta(const Field1D& f) {
    Quad1 q;
    std::vector<double> w = quad_weights(f.grid.n, f.grid.h, &q.trapezoid_tail);
    double s = 0.0;
    for (int i = 0; i < f.grid.n; ++i) s += w[i] * f.values[i];
    q.value = s;
    return q;
}

double integrate1(const Field1D& f) { return integrate1_meta(f).value; }

Quad2 integrate2_meta(const Field2D& f) {
    Quad2 q;
    std::vector<double> wx = quad_weights(f.grid.nx, f.grid.hx, &q.trapezoid_tail_x);
    std::vector<double> we = quad_weights(f.grid.neta, f.grid.heta, &q.trapezoid_tail_eta);
    double s = 0.0;
    for (int i = 0; i < f.grid.nx; ++i) {
        double row = 0.0;
        const double* base = f.values.data() + static_cast<size_t>(i) * f.grid.neta;
        for (int j = 0; j < f.grid.neta; ++j) row += we[j] * base[j];
        s += wx[i] * row;
    }
    q.value = s;
    return q;
}

double integrate2(const Field2D& f) { return integrate2_meta(f).value; }

Field2D diff_x(const Field2D& f) {
    if (f.grid.nx < 3) throw std::invalid_argument("diff_x needs nx >= 3");
    Field2D out = make_field2(f.grid);
    std::vector<double> col(f.grid.nx);
    for (int j = 0; j < f.grid.neta; ++j) {
        d1_line(f.values.data() + j, col.data(), f.grid.nx, f.grid.neta, f.grid.hx);
        for (int i = 0; i < f.grid.nx; ++i) out.at(i, j) = col[i];
    }
    return out;
}

Field2D diff_eta(const Field2D& f) {
    if (f.grid.neta < 3) throw std::invalid_argument("diff_eta needs neta >= 3");
    Field2D out = make_field2(f.grid);
    for (int i = 0; i < f.grid.nx; ++i)
        d1_line(f.values.data() + static_cast<size_t>(i) * f.grid.neta,
                out.values.data() + static_cast<size_t>(i) * f.grid.neta, f.grid.neta, 1,
                f.grid.heta);
    return out;
}

Field2D diff2_x(const Field2D& f) {
    if (f.grid.nx < 4) throw std::invalid_argument("diff2_x needs nx >= 4");
    Field2D out = make_field2(f.grid);
    std::vector<double> col(f.grid.nx);
    for (int j = 0; j < f.grid.neta; ++j) {
        d2_line(f.values.data() + j, col.data(), f.grid.nx, f.grid.neta, f.grid.hx);
        for (int i = 0; i < f.grid.nx; ++i) out.at(i, j) = col[i];
    }
    return out;
}

Field2D diff2_eta(const Field2D& f) {
    if (f.grid.neta < 4) throw std::invalid_argument("diff2_eta needs neta >= 4");
    Field2D out = make_field2(f.grid);
    for (int i = 0; i < f.grid.nx; ++i)
        d2_line(f.values.data() + static_cast<size_t>(i) * f.grid.neta,
                out.values.data() + static_cast<size_t>(i) * f.grid.neta, f.grid.neta, 1,
                f.grid.heta);
    return out;
}

double sup_norm(const Field1D& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double sup_norm(const Field2D& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double lq_norm(const Field1D& f, double q) {
    if (q < 1.0) throw std::invalid_argument("lq_norm needs q >= 1");
    double s = 0.0;
    for (double v : f.values) s += std::pow(std::abs(v), q);
    return std::pow(f.grid.h * s, 1.0 / q);
}

double l2_norm(const Field2D& f) {
    std::vector<double> wx = quad_weights(f.grid.nx, f.grid.hx);
    std::vector<double> we = quad_weights(f.grid.neta, f.grid.heta);
    double s = 0.0;
    for (int i = 0; i < f.grid.nx; ++i) {
        double row = 0.0;
        const double* base = f.values.data() + static_cast<size_t>(i) * f.grid.neta;
        for (int j = 0; j < f.grid.neta; ++j) row += we[j] * base[j] * base[j];
        s += wx[i] * row;
    }
    return std::sqrt(std::max(0.0, s));
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_line needs two same-length series");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
        syy += ys[k] * ys[k];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / n;
    for (size_t k = 0; k < xs.size(); ++k) {
        const double pred = fit.slope * xs[k] + fit.intercept;
        ss_res += (ys[k] - pred) * (ys[k] - pred);
        ss_tot += (ys[k] - ybar) * (ys[k] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace mems
