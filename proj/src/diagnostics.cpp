#include "mems/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mems {

EigenData make_eigendata(const Grid1D& g) {
    EigenData e;
    const double pi = std::numbers::pi;
    e.zeta1 = sample1(g, [&](double x) { return (pi / 4.0) * std::cos(pi * x / 2.0); });
    e.mu1 = kMu1;
    return e;
}

BlowupParams make_blowup_params(double lambda, double eps) {
    if (!(lambda > 0.0)) throw std::invalid_argument("blow-up parameters need lambda > 0");
    if (!(eps >= 0.0)) throw std::invalid_argument("blow-up parameters need eps >= 0");
    BlowupParams bp;
    bp.lambda = lambda;
    bp.eps = eps;
    bp.beta = std::sqrt(lambda) / 2.0;
    bp.p = 1.0 + 2.0 * kMu1 * eps * eps;
    const double denom = 4.0 * bp.beta * bp.beta + lambda * eps * eps;
    bp.alpha = lambda * eps * eps / denom;
    return bp;
}

BlowupCertificate make_certificate(double lambda, double eps) {
    BlowupCertificate c;
    c.params = make_blowup_params(lambda, eps);
    c.F0 = blowup_F(0.0, c.params);
    c.lambda_star = lambda_star(eps);
    if (c.F0 < 0.0) {
        c.has_horizon = true;
        c.horizon = -1.0 / c.F0;
    }
    return c;
}

double energy_Ealpha(const Field1D& u, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0,1]");
    const EigenData e = make_eigendata(u.grid);
    Field1D integrand = make_field1(u.grid);
    for (int i = 0; i < u.grid.n; ++i)
        integrand[i] = e.zeta1[i] * (u[i] + 0.5 * alpha * u[i] * u[i]);
    return integrate1(integrand);
}

double blowup_F(double E, const BlowupParams& bp) {
    if (!(E > -1.0)) throw std::domain_error("blowup_F needs E > -1");
    const double denom = 4.0 * bp.beta * bp.beta + bp.lambda * bp.eps * bp.eps;
    return kMu1 + (4.0 * bp.lambda * bp.beta / (denom * bp.p)) *
                      (kMu1 * bp.eps * bp.eps / bp.p + bp.p / (4.0 * bp.beta) - 1.0 / (1.0 + E));
}

double lambda_star(double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("lambda_star needs eps >= 0");
    const double f = 4.0 * kMu1 * (1.0 + eps * eps);
    return f * f;
}

EnergyReport check_energy_inequality(const Trajectory& traj, const BlowupParams& bp) {
    EnergyReport rep;
    rep.F0 = blowup_F(0.0, bp);
    if (traj.samples.size() < 3) {
        rep.note = "insufficient data: need at least 3 samples";
        return rep;
    }
    double dt_max = 0.0;
    for (const Sample& s : traj.samples) dt_max = std::max(dt_max, s.dt);
    rep.tol_dyn = 0.05 * std::abs(rep.F0) + 10.0 * std::abs(rep.F0) * dt_max;

    rep.strictly_decreasing = true;
    for (size_t k = 1; k < traj.samples.size(); ++k)
        if (!(traj.samples[k].E_alpha < traj.samples[k - 1].E_alpha))
            rep.strictly_decreasing = false;

    double worst = -std::numeric_limits<double>::infinity();
    int used = 0;
    for (size_t k = 1; k + 1 < traj.samples.size(); ++k) {
        const Sample& a = traj.samples[k - 1];
        const Sample& m = traj.samples[k];
        const Sample& b = traj.samples[k + 1];
        const double span = b.t - a.t;
        if (!(span > 0.0)) continue;
        const double dEdt = (b.E_alpha - a.E_alpha) / span;
        worst = std::max(worst, dEdt - blowup_F(m.E_alpha, bp));
        ++used;
    }
    if (used == 0) {
        rep.note = "insufficient data: degenerate sample times";
        return rep;
    }
    rep.max_violation = worst;
    rep.samples_used = used;
    rep.ok = worst <= rep.tol_dyn;
    return rep;
}

namespace {

double pow_clamped(double base, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return std::max(base, 0.0);
    return std::pow(std::max(base, 0.0), e);
}

}  // namespace

IdentityReport check_identity_n5(const PotentialSolve& p, const MembraneProfile& m, double eps,
                                 double p_exp) {
    if (!(p_exp >= 1.0)) throw std::invalid_argument("identity check needs p_exp >= 1");
    const Grid2D& g = p.phi.grid;
    const EigenData eig = make_eigendata(m.v.grid);
    const double e2 = eps * eps;

    // left side: weighted membrane flux
    Field1D lhs_int = make_field1(m.v.grid);
    for (int i = 0; i < m.v.grid.n; ++i) {
        const double gap = 1.0 + m.v[i];
        lhs_int[i] =
            eig.zeta1[i] * (1.0 + e2 * m.dv[i] * m.dv[i]) * (p.trace[i] / gap);
    }
    const double lhs = integrate1(lhs_int);

    // right side: interior energy in transformed coordinates, dz = (1+u) d_eta
    const Field2D dphix = diff_x(p.phi);
    const Field2D dphie = diff_eta(p.phi);
    Field2D w = make_field2(g);
    for (int i = 0; i < g.nx; ++i) {
        const double gap = 1.0 + m.v[i];
        const double slope = m.dv[i] / gap;
        const double zw = eig.zeta1[i] * gap;
        for (int j = 0; j < g.neta; ++j) {
            const double eta = g.eta[j];
            const double phi = p.phi.at(i, j);
            const double dxpsi = dphix.at(i, j) - eta * slope * dphie.at(i, j);
            const double dzpsi = dphie.at(i, j) / gap;
            const double pm1 = pow_clamped(phi, p_exp - 1.0);
            w.at(i, j) = zw * (p_exp * e2 * pm1 * dxpsi * dxpsi + p_exp * pm1 * dzpsi * dzpsi +
                               (kMu1 * e2 / (p_exp + 1.0)) *
                                   pow_clamped(phi, p_exp + 1.0));
        }
    }
    Field1D zu = make_field1(m.v.grid);
    for (int i = 0; i < m.v.grid.n; ++i) zu[i] = eig.zeta1[i] * m.v[i];
    const double rhs = integrate2(w) - kMu1 * e2 / ((p_exp + 1.0) * (p_exp + 2.0)) -
                       (kMu1 * e2 / (p_exp + 1.0)) * integrate1(zu);

    IdentityReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.residual = std::abs(lhs - rhs);
    return rep;
}

double check_inequality_n4(const PotentialSolve& p, const MembraneProfile& m, double p_exp) {
    if (!(p_exp >= 1.0)) throw std::invalid_argument("inequality check needs p_exp >= 1");
    const Grid2D& g = p.phi.grid;
    const EigenData eig = make_eigendata(m.v.grid);

    Field1D lhs_int = make_field1(m.v.grid);
    for (int i = 0; i < m.v.grid.n; ++i)
        lhs_int[i] = eig.zeta1[i] / (1.0 + m.v[i]);
    const double lhs =
        (4.0 * p_exp / ((p_exp + 1.0) * (p_exp + 1.0))) * integrate1(lhs_int);

    const Field2D dphie = diff_eta(p.phi);
    Field2D w = make_field2(g);
    for (int i = 0; i < g.nx; ++i) {
        const double gap = 1.0 + m.v[i];
        for (int j = 0; j < g.neta; ++j) {
            const double de = dphie.at(i, j);
            w.at(i, j) = eig.zeta1[i] * pow_clamped(p.phi.at(i, j), p_exp - 1.0) * de * de / gap;
        }
    }
    const double rhs = p_exp * integrate2(w);
    return rhs - lhs;
}

NormBundle discrete_norms(const Field1D& u, double q) {
    if (!(q >= 2.0)) throw std::invalid_argument("discrete_norms needs q >= 2");
    NormBundle nb;
    nb.sup = sup_norm(u);
    nb.lq_u = lq_norm(u, q);
    nb.lq_du = lq_norm(diff1(u), q);
    nb.lq_d2u = lq_norm(diff2(u), q);
    nb.surrogate = std::max({nb.sup, nb.lq_du, nb.lq_d2u});
    return nb;
}

}  // namespace mems
