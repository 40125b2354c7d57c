#include "mems/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mems/errors.hpp"

namespace mems {

namespace {

MembraneProfile finish_profile(Field1D v) {
    for (double val : v.values)
        if (!std::isfinite(val)) throw std::invalid_argument("profile has non-finite values");
    MembraneProfile m;
    m.dv = diff1(v);
    m.d2v = diff2(v);
    m.min_gap = 1.0 + *std::min_element(v.values.begin(), v.values.end());
    m.v = std::move(v);
    if (m.min_gap <= 0.0)
        throw DegenerateGapError("membrane gap collapsed: min(1+v) = " +
                                 std::to_string(m.min_gap));
    return m;
}

}  // namespace

MembraneProfile make_profile(const Field1D& v) {
    Field1D w = v;
    w.values.front() = 0.0;
    w.values.back() = 0.0;
    return finish_profile(std::move(w));
}

MembraneProfile make_profile_analytic(const Field1D& v) { return finish_profile(v); }

MembraneProfile random_admissible_profile(const Grid1D& g, std::mt19937& rng, double amp_max,
                                          bool force_noneven) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (;;) {
        const double c0 = unit(rng), c1 = unit(rng), c2 = unit(rng), c3 = unit(rng);
        Field1D v = sample1(g, [&](double x) {
            return (1.0 - x * x) *
                   (c0 + c1 * x + c2 * x * x + c3 * std::sin(2.0 * std::acos(-1.0) * x));
        });
        double sup = sup_norm(v);
        if (sup < 1e-8) continue;
        const double amp = amp_max * (0.3 + 0.7 * std::abs(unit(rng)));
        for (double& val : v.values) val *= amp / sup;
        MembraneProfile m = make_profile(v);
        if (force_noneven) {
            double asym = 0.0;
            for (int i = 0; i < g.n; ++i)
                asym = std::max(asym, std::abs(m.v[i] - m.v[g.n - 1 - i]));
            if (asym < 1e-3) continue;
        }
        return m;
    }
}

CoefficientSet coefficient_set(const MembraneProfile& m, double eps, const Grid2D& g) {
    if (m.min_gap <= 0.0) throw DegenerateGapError("coefficient_set: degenerate gap");
    CoefficientSet c;
    c.a11 = make_field2(g, eps * eps);
    c.a12 = make_field2(g);
    c.a22 = make_field2(g);
    c.b1 = make_field2(g);
    c.b2 = make_field2(g);
    for (int i = 0; i < g.nx; ++i) {
        const double gap = 1.0 + m.v[i];
        const double s = m.dv[i] / gap;
        for (int j = 0; j < g.neta; ++j) {
            const double eta = g.eta[j];
            c.a22.at(i, j) = (1.0 + eps * eps * eta * eta * m.dv[i] * m.dv[i]) / (gap * gap);
            c.a12.at(i, j) = -eps * eps * eta * s;
            c.b1.at(i, j) = eps * eps * s;
            c.b2.at(i, j) = -eps * eps * eta * s * s;
        }
    }
    return c;
}

Field2D rhs_fv(const MembraneProfile& m, double eps, const Grid2D& g) {
    if (m.min_gap <= 0.0) throw DegenerateGapError("rhs_fv: degenerate gap");
    Field2D f = make_field2(g);
    for (int i = 0; i < g.nx; ++i) {
        const double gap = 1.0 + m.v[i];
        const double s = m.dv[i] / gap;
        const double coef = eps * eps * (2.0 * s * s - m.d2v[i] / gap);
        for (int j = 0; j < g.neta; ++j) f.at(i, j) = g.eta[j] * coef;
    }
    return f;
}

LinearSystem assemble(const MembraneProfile& m, double eps, const Grid2D& g) {
    if (m.min_gap <= 0.0) throw DegenerateGapError("assemble: degenerate gap");
    if (static_cast<int>(m.v.values.size()) != g.nx)
        throw std::invalid_argument("assemble: profile/grid mismatch");
    LinearSystem sys;
    sys.grid = g;
    sys.ni = g.nx - 2;
    sys.nj = g.neta - 2;
    const int nunk = sys.ni * sys.nj;
    const int band = sys.nj + 1;  // coupling (i+-1, j-+1) sits at offset nj+1
    sys.A = BandedMatrix(nunk, band, band);

    const double e2 = eps * eps;
    const double hx2 = g.hx * g.hx, he2 = g.heta * g.heta;
    for (int i = 1; i <= sys.ni; ++i) {
        const double gap = 1.0 + m.v[i];
        const double s = m.dv[i] / gap;
        const double ceta_coef = e2 * (2.0 * s * s - m.d2v[i] / gap);
        for (int j = 1; j <= sys.nj; ++j) {
            const double eta = g.eta[j];
            const double a22 = (1.0 + e2 * eta * eta * m.dv[i] * m.dv[i]) / (gap * gap);
            const double cross = -2.0 * e2 * eta * s;  // coefficient of w_xeta in L_v
            const double ceta = eta * ceta_coef;       // coefficient of w_eta in L_v
            const int r = sys.index(i, j);
            // -L_v with central differences
            sys.A.at(r, r) += 2.0 * e2 / hx2 + 2.0 * a22 / he2;
            if (i > 1) sys.A.at(r, sys.index(i - 1, j)) += -e2 / hx2;
            if (i < sys.ni) sys.A.at(r, sys.index(i + 1, j)) += -e2 / hx2;
            if (j > 1) sys.A.at(r, sys.index(i, j - 1)) += -a22 / he2 + ceta / (2.0 * g.heta);
            if (j < sys.nj) sys.A.at(r, sys.index(i, j + 1)) += -a22 / he2 - ceta / (2.0 * g.heta);
            const double cc = -cross / (4.0 * g.hx * g.heta);
            if (i > 1 && j > 1) sys.A.at(r, sys.index(i - 1, j - 1)) += cc;
            if (i < sys.ni && j < sys.nj) sys.A.at(r, sys.index(i + 1, j + 1)) += cc;
            if (i > 1 && j < sys.nj) sys.A.at(r, sys.index(i - 1, j + 1)) += -cc;
            if (i < sys.ni && j > 1) sys.A.at(r, sys.index(i + 1, j - 1)) += -cc;
        }
    }
    return sys;
}

Field2D LinearSystem::apply(const Field2D& w) const {
    std::vector<double> x(static_cast<size_t>(ni) * nj, 0.0);
    for (int i = 1; i <= ni; ++i)
        for (int j = 1; j <= nj; ++j) x[index(i, j)] = w.at(i, j);
    const std::vector<double> y = A.apply(x);
    Field2D out = make_field2(grid);
    for (int i = 1; i <= ni; ++i)
        for (int j = 1; j <= nj; ++j) out.at(i, j) = y[index(i, j)];
    return out;
}

Field2D solve_dirichlet(const MembraneProfile& m, double eps, const Grid2D& g,
                        const Field2D& rhs, double* residual_norm) {
    LinearSystem sys = assemble(m, eps, g);
    std::vector<double> b(static_cast<size_t>(sys.ni) * sys.nj);
    for (int i = 1; i <= sys.ni; ++i)
        for (int j = 1; j <= sys.nj; ++j) b[sys.index(i, j)] = rhs.at(i, j);

    BandedLU lu(sys.A);
    std::vector<double> x = lu.solve(b);

    auto resid = [&]() {
        std::vector<double> ax = sys.A.apply(x);
        double r = 0.0;
        for (size_t k = 0; k < ax.size(); ++k) r = std::max(r, std::abs(ax[k] - b[k]));
        return r;
    };
    double r = resid();
    const double scale = std::max(1.0, sup_norm(rhs));
    if (r > 1e-10 * scale) {
        // one step of iterative refinement
        std::vector<double> ax = sys.A.apply(x);
        std::vector<double> d(ax.size());
        for (size_t k = 0; k < ax.size(); ++k) d[k] = b[k] - ax[k];
        std::vector<double> dx = lu.solve(d);
        for (size_t k = 0; k < x.size(); ++k) x[k] += dx[k];
        r = resid();
    }
    if (residual_norm) *residual_norm = r;

    Field2D Phi = make_field2(g);
    for (int i = 1; i <= sys.ni; ++i)
        for (int j = 1; j <= sys.nj; ++j) Phi.at(i, j) = x[sys.index(i, j)];
    return Phi;
}

PotentialSolve solve_potential(const MembraneProfile& m, double eps, const Grid2D& g) {
    PotentialSolve p;
    p.eps = eps;
    p.v = m.v;
    const Field2D f = rhs_fv(m, eps, g);
    p.Phi = solve_dirichlet(m, eps, g, f, &p.residual_norm);
    p.phi = p.Phi;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.neta; ++j) p.phi.at(i, j) += g.eta[j];
    p.trace = trace_deta(p.phi);
    return p;
}

Field1D trace_deta(const Field2D& phi) {
    const Grid2D& g = phi.grid;
    if (g.neta < 4) throw std::invalid_argument("trace_deta needs neta >= 4");
    Grid1D gx = make_grid1(g.nx);
    Field1D t = make_field1(gx);
    const int jt = g.neta - 1;
    for (int i = 0; i < g.nx; ++i)
        t[i] = (3.0 * phi.at(i, jt) - 4.0 * phi.at(i, jt - 1) + phi.at(i, jt - 2)) /
               (2.0 * g.heta);
    return t;
}

Field1D trace_deta(const PotentialSolve& p) { return trace_deta(p.phi); }

Field1D g_eps_of(const PotentialSolve& p, const MembraneProfile& m) {
    Field1D g = p.trace;
    for (int i = 0; i < g.n(); ++i) {
        const double gap = 1.0 + m.v[i];
        const double pre = (1.0 + p.eps * p.eps * m.dv[i] * m.dv[i]) / (gap * gap);
        g[i] = pre * p.trace[i] * p.trace[i];
    }
    return g;
}

Field1D g_eps(const MembraneProfile& m, double eps, const Grid2D& g) {
    const PotentialSolve p = solve_potential(m, eps, g);
    return g_eps_of(p, m);
}

PsiField reconstruct_psi(const PotentialSolve& p, const MembraneProfile& m,
                         const Interval1D& zgrid) {
    const Grid2D& g = p.phi.grid;
    PsiField out;
    out.xgrid = make_grid1(g.nx);
    out.zgrid = zgrid;
    const size_t total = static_cast<size_t>(g.nx) * zgrid.n;
    out.psi.assign(total, 0.0);
    out.dpsi_dx.assign(total, 0.0);
    out.dpsi_dz.assign(total, 0.0);
    out.mask.assign(total, 0);

    const Field2D dphix = diff_x(p.phi);
    const Field2D dphie = diff_eta(p.phi);

    for (int i = 0; i < g.nx; ++i) {
        const double gap = 1.0 + m.v[i];
        const double slope = m.dv[i] / gap;
        for (int k = 0; k < zgrid.n; ++k) {
            const double z = zgrid.z[k];
            if (z > m.v[i] + 1e-12 || z < -1.0 - 1e-12) continue;
            double etas = (1.0 + z) / gap;
            etas = std::clamp(etas, 0.0, 1.0);
            int j = std::min(static_cast<int>(etas / g.heta), g.neta - 2);
            const double th = (etas - g.eta[j]) / g.heta;
            auto lerp = [&](const Field2D& f) {
                return (1.0 - th) * f.at(i, j) + th * f.at(i, j + 1);
            };
            const size_t id = out.idx(i, k);
            out.mask[id] = 1;
            const double de = lerp(dphie);
            out.psi[id] = lerp(p.phi);
            out.dpsi_dz[id] = de / gap;
            out.dpsi_dx[id] = lerp(dphix) - etas * slope * de;
        }
    }
    return out;
}

double manufactured_error(double eps, const Grid2D& g) {
    const double pi = std::numbers::pi;
    Grid1D gx = make_grid1(g.nx);
    const Field1D v = sample1(gx, [](double x) { return -0.25 * (1.0 - x * x); });
    const MembraneProfile m = make_profile(v);

    // target W = sin(pi x) sin(pi eta); rhs = -L_v W with exact derivatives
    Field2D rhs = make_field2(g);
    Field2D ref = make_field2(g);
    const double e2 = eps * eps;
    for (int i = 0; i < g.nx; ++i) {
        const double x = g.x[i];
        const double gap = 1.0 + v[i];
        const double dv = 0.5 * x, d2v = 0.5;
        const double s = dv / gap;
        for (int j = 0; j < g.neta; ++j) {
            const double eta = g.eta[j];
            const double W = std::sin(pi * x) * std::sin(pi * eta);
            const double Wxx = -pi * pi * W;
            const double Wee = -pi * pi * W;
            const double Wxe = pi * pi * std::cos(pi * x) * std::cos(pi * eta);
            const double We = pi * std::sin(pi * x) * std::cos(pi * eta);
            const double a22 = (1.0 + e2 * eta * eta * dv * dv) / (gap * gap);
            const double cross = -2.0 * e2 * eta * s;
            const double ceta = eta * e2 * (2.0 * s * s - d2v / gap);
            ref.at(i, j) = W;
            rhs.at(i, j) = -(e2 * Wxx + cross * Wxe + a22 * Wee + ceta * We);
        }
    }
    const Field2D Wh = solve_dirichlet(m, eps, g, rhs);
    double err = 0.0;
    for (size_t k = 0; k < Wh.values.size(); ++k)
        err = std::max(err, std::abs(Wh.values[k] - ref.values[k]));
    return err;
}

MembraneGradients membrane_gradients(const PotentialSolve& p, const MembraneProfile& m) {
    const Grid2D& g = p.phi.grid;
    Grid1D gx = make_grid1(g.nx);
    Field1D top = make_field1(gx);
    for (int i = 0; i < g.nx; ++i) top[i] = p.phi.at(i, g.neta - 1);
    const Field1D dtop = diff1(top);

    MembraneGradients mg;
    mg.dpsi_dx = make_field1(gx);
    mg.dpsi_dz = make_field1(gx);
    for (int i = 0; i < g.nx; ++i) {
        const double gap = 1.0 + m.v[i];
        mg.dpsi_dz[i] = p.trace[i] / gap;
        mg.dpsi_dx[i] = dtop[i] - (m.dv[i] / gap) * p.trace[i];
    }
    return mg;
}

}  // namespace mems
