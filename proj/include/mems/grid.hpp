#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mems {

// Uniform grid on [-1,1] with x_i = -1 + i*h, h = 2/(n-1); endpoints exact.
struct Grid1D {
    int n = 0;
    double h = 0.0;
    std::vector<double> x;
};

Grid1D make_grid1(int n);

// Tensor-product grid on [-1,1] x [0,1].
struct Grid2D {
    int nx = 0, neta = 0;
    double hx = 0.0, heta = 0.0;
    std::vector<double> x, eta;
};

Grid2D make_grid2(int nx, int neta);

// Uniform grid on an arbitrary interval [a,b]; used for physical z-grids.
struct Interval1D {
    int n = 0;
    double a = 0.0, b = 0.0, h = 0.0;
    std::vector<double> z;
};

Interval1D make_interval(double a, double b, int n);

struct Field1D {
    Grid1D grid;
    std::vector<double> values;

    int n() const { return grid.n; }
    double& operator[](int i) { return values[static_cast<size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<size_t>(i)]; }
};

// Row-major in (x, eta): values[i*neta + j].
struct Field2D {
    Grid2D grid;
    std::vector<double> values;

    double& at(int i, int j) { return values[static_cast<size_t>(i) * grid.neta + j]; }
    double at(int i, int j) const { return values[static_cast<size_t>(i) * grid.neta + j]; }
};

Field1D make_field1(const Grid1D& g, double fill = 0.0);
Field2D make_field2(const Grid2D& g, double fill = 0.0);

template <class F>
Field1D sample1(const Grid1D& g, F f) {
    Field1D out = make_field1(g);
    for (int i = 0; i < g.n; ++i) out.values[i] = f(g.x[i]);
    return out;
}

template <class F>
Field2D sample2(const Grid2D& g, F f) {
    Field2D out = make_field2(g);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.neta; ++j) out.at(i, j) = f(g.x[i], g.eta[j]);
    return out;
}

// Second-order first/second derivatives, one-sided second-order at endpoints.
Field1D diff1(const Field1D& f);
Field1D diff2(const Field1D& f);

// Composite Simpson weights on n uniform nodes; even n falls back to a
// trapezoid on the last panel (reported through *trapezoid_tail).
std::vector<double> quad_weights(int n, double h, bool* trapezoid_tail = nullptr);

struct Quad1 {
    double value = 0.0;
    bool trapezoid_tail = false;
};

Quad1 integrate1_meta(const Field1D& f);
double integrate1(const Field1D& f);

struct Quad2 {
    double value = 0.0;
    bool trapezoid_tail_x = false;
    bool trapezoid_tail_eta = false;
};

Quad2 integrate2_meta(const Field2D& f);
double integrate2(const Field2D& f);

// Line-by-line partial derivatives with the same stencils as diff1/diff2.
Field2D diff_x(const Field2D& f);
Field2D diff_eta(const Field2D& f);
Field2D diff2_x(const Field2D& f);
Field2D diff2_eta(const Field2D& f);

double sup_norm(const Field1D& f);
double sup_norm(const Field2D& f);

// Discrete L_q norm (h * sum |f_i|^q)^(1/q).
double lq_norm(const Field1D& f, double q);

// L2(Omega) norm via the tensor quadrature applied to f^2.
double l2_norm(const Field2D& f);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace mems
