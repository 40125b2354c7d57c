#include "mems/steady.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mems/banded.hpp"
#include "mems/errors.hpp"

namespace mems {

Field1D poisson_inverse(const Field1D& f) {
    const int n = f.grid.n;
    const double h2 = f.grid.h * f.grid.h;
    const int m = n - 2;
    Tridiag tri;
    tri.diag.assign(m, 2.0 / h2);
    tri.lower.assign(m - 1, -1.0 / h2);
    tri.upper.assign(m - 1, -1.0 / h2);
    std::vector<double> b(f.values.begin() + 1, f.values.end() - 1);
    std::vector<double> sol = tri.solve(std::move(b));
    Field1D out = make_field1(f.grid);
    std::copy(sol.begin(), sol.end(), out.values.begin() + 1);
    return out;
}

Field1D poisson_apply(const Field1D& u) {
    const int n = u.grid.n;
    const double h2 = u.grid.h * u.grid.h;
    Field1D out = make_field1(u.grid);
    for (int i = 1; i < n - 1; ++i) {
        const double um = i == 1 ? 0.0 : u[i - 1];
        const double up = i == n - 2 ? 0.0 : u[i + 1];
        out[i] = (-um + 2.0 * u[i] - up) / h2;
    }
    return out;
}

namespace {

double min_gap_of(const Field1D& u) {
    double m = 1.0 + u.values.front();
    for (double v : u.values) m = std::min(m, 1.0 + v);
    return m;
}

Field1D project(const Field1D& u) {
    Field1D w = u;
    w.values.front() = 0.0;
    w.values.back() = 0.0;
    return w;
}

// nonlinearity: elliptic for eps > 0, pointwise square-gap law for eps = 0
Field1D eval_g(const Field1D& U, double eps, int neta) {
    if (min_gap_of(U) <= 0.0)
        throw DegenerateGapError("steady iteration: gap collapsed");
    if (eps == 0.0) {
        Field1D g = make_field1(U.grid);
        for (int i = 0; i < U.grid.n; ++i) {
            const double gap = 1.0 + U[i];
            g[i] = 1.0 / (gap * gap);
        }
        return g;
    }
    const int ne = neta > 0 ? neta : (U.grid.n + 1) / 2;
    return g_eps(make_profile(U), eps, make_grid2(U.grid.n, ne));
}

void finalize(SteadyState& st, double eps, int neta, double tol) {
    const Field1D g = eval_g(st.U, eps, neta);
    const Field1D au = poisson_apply(st.U);
    double r = 0.0;
    for (int i = 1; i < st.U.grid.n - 1; ++i)
        r = std::max(r, std::abs(au[i] + st.lambda * g[i]));
    st.residual = r;
    if (st.converged) st.converged = r <= 10.0 * tol;
    if (eps == 0.0) {
        st.trace = make_field1(st.U.grid);
        for (int i = 0; i < st.U.grid.n; ++i) st.trace[i] = 1.0 / (1.0 + st.U[i]);
    } else {
        const int ne = neta > 0 ? neta : (st.U.grid.n + 1) / 2;
        st.trace =
            solve_potential(make_profile(st.U), eps, make_grid2(st.U.grid.n, ne)).trace;
    }
}

}  // namespace

SteadyState steady_fixed_point(double lambda, double eps, const Field1D& U_init,
                               const SteadyOptions& opt) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("steady solve needs lambda >= 0");
    SteadyState st;
    st.lambda = lambda;
    st.eps = eps;
    st.U = project(U_init);

    if (lambda == 0.0) {
        st.U = make_field1(U_init.grid, 0.0);
        st.iterations = 1;
        st.converged = true;
        finalize(st, eps, opt.neta, opt.tol);
        return st;
    }

    try {
        for (int k = 1; k <= opt.max_iter; ++k) {
            const Field1D g = eval_g(st.U, eps, opt.neta);
            Field1D rhs = make_field1(st.U.grid);
            for (int i = 0; i < st.U.grid.n; ++i) rhs[i] = -lambda * g[i];
            Field1D Unew = poisson_inverse(rhs);
            double delta = 0.0;
            for (int i = 0; i < st.U.grid.n; ++i)
                delta = std::max(delta, std::abs(Unew[i] - st.U[i]));
            st.U = std::move(Unew);
            st.iterations = k;
            if (delta <= opt.tol) {
                st.converged = true;
                finalize(st, eps, opt.neta, opt.tol);
                return st;
            }
        }
        st.note = "fixed point: max_iter exceeded";
    } catch (const DegenerateGapError& e) {
        // divergence past the fold collapses the gap; report, don't throw
        st.note = std::string("fixed point: ") + e.what();
    } catch (const SolverError& e) {
        st.note = std::string("fixed point: ") + e.what();
    }
    if (min_gap_of(st.U) > 0.0) finalize(st, eps, opt.neta, opt.tol);
    return st;
}

SteadyState steady_newton(double lambda, double eps, const Field1D& U_init,
                          const SteadyOptions& opt) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("steady solve needs lambda >= 0");
    SteadyState st;
    st.lambda = lambda;
    st.eps = eps;
    st.U = project(U_init);

    if (lambda == 0.0) {
        st.U = make_field1(U_init.grid, 0.0);
        st.iterations = 1;
        st.converged = true;
        finalize(st, eps, opt.neta, opt.tol);
        return st;
    }

    const int n = U_init.grid.n;
    const int m = n - 2;
    const int newton_cap = std::min(opt.max_iter, 30);
    std::string fail;
    try {
        for (int it = 1; it <= newton_cap; ++it) {
            const Field1D g = eval_g(st.U, eps, opt.neta);
            Field1D rhs = make_field1(st.U.grid);
            for (int i = 0; i < n; ++i) rhs[i] = -lambda * g[i];
            const Field1D fp = poisson_inverse(rhs);
            std::vector<double> G(m);
            for (int i = 1; i < n - 1; ++i) G[i - 1] = st.U[i] - fp[i];

            // forward-difference Jacobian, column by column
            std::vector<double> J(static_cast<size_t>(m) * m, 0.0);
            for (int k = 0; k < m; ++k) {
                const double delta = 1e-6 * (1.0 + std::abs(st.U[k + 1]));
                Field1D Up = st.U;
                Up[k + 1] += delta;
                const Field1D gp = eval_g(Up, eps, opt.neta);
                Field1D dr = make_field1(st.U.grid);
                for (int i = 0; i < n; ++i) dr[i] = -lambda * (gp[i] - g[i]) / delta;
                const Field1D col = poisson_inverse(dr);
                for (int i = 1; i < n - 1; ++i)
                    J[static_cast<size_t>(k) * m + (i - 1)] = -col[i];
                J[static_cast<size_t>(k) * m + k] += 1.0;
            }
            std::vector<double> step = G;
            std::vector<lapack_int> ipiv(m);
            const lapack_int info = LAPACKE_dgesv(LAPACK_COL_MAJOR, m, 1, J.data(), m,
                                                  ipiv.data(), step.data(), m);
            if (info != 0) {
                fail = "newton: singular Jacobian (info " + std::to_string(info) + ")";
                break;
            }
            double dnorm = 0.0;
            for (int k = 0; k < m; ++k) {
                st.U[k + 1] -= step[k];
                dnorm = std::max(dnorm, std::abs(step[k]));
            }
            st.iterations = it;
            if (min_gap_of(st.U) <= 0.0) {
                fail = "newton: iterate lost the gap";
                break;
            }
            if (dnorm <= opt.tol) {
                st.converged = true;
                finalize(st, eps, opt.neta, opt.tol);
                return st;
            }
        }
        if (fail.empty()) fail = "newton: max_iter exceeded";
    } catch (const DegenerateGapError& e) {
        fail = e.what();
    } catch (const SolverError& e) {
        fail = e.what();
    }

    SteadyState fb = steady_fixed_point(lambda, eps, U_init, opt);
    fb.note = fail + "; fixed-point fallback" + (fb.note.empty() ? "" : ": " + fb.note);
    return fb;
}

ContinuationResult continuation(double lambda_max, int steps, double eps, const Grid1D& g,
                                const SteadyOptions& opt) {
    if (steps < 2) throw std::invalid_argument("continuation needs steps >= 2");
    if (!(lambda_max > 0.0)) throw std::invalid_argument("continuation needs lambda_max > 0");
    ContinuationResult res;
    Field1D warm = make_field1(g, 0.0);
    double last = 0.0;
    double dl = lambda_max / steps;
    int halvings = 0;
    double last_failed = -1.0;
    while (last < lambda_max - 1e-14) {
        const double lam = std::min(last + dl, lambda_max);
        SteadyState st;
        bool ok = false;
        try {
            st = steady_fixed_point(lam, eps, warm, opt);
            if (!st.converged) {
                SteadyState nt = steady_newton(lam, eps, warm, opt);
                if (nt.converged) st = std::move(nt);
            }
            ok = st.converged;
        } catch (const DegenerateGapError&) {
            ok = false;
        } catch (const SolverError&) {
            ok = false;
        }
        if (ok) {
            BranchPoint bp;
            bp.lambda = lam;
            bp.state = std::move(st);
            bp.ok = true;
            res.points.push_back(std::move(bp));
            warm = res.points.back().state.U;
            last = lam;
            continue;
        }
        last_failed = lam;
        if (++halvings > 3) break;
        dl *= 0.5;
    }
    res.last_converged_lambda = last;
    if (last_failed > last) {
        BranchPoint marker;
        marker.lambda = last_failed;
        marker.ok = false;
        marker.state.lambda = last_failed;
        marker.state.eps = eps;
        marker.state.note = "no convergence";
        res.points.push_back(std::move(marker));
    }
    return res;
}

StabilityReport decay_rate(double lambda, double eps, double r, double t_end, const Grid1D& g,
                           const SteadyOptions& opt) {
    StabilityReport rep;
    rep.lambda = lambda;
    rep.eps = eps;

    Field1D zero = make_field1(g, 0.0);
    SteadyState st;
    try {
        st = steady_fixed_point(lambda, eps, zero, opt);
        if (!st.converged) {
            SteadyOptions nop = opt;
            nop.max_iter = std::min(opt.max_iter, 10);
            SteadyState nt = steady_newton(lambda, eps, zero, nop);
            if (nt.converged) st = std::move(nt);
        }
    } catch (const DegenerateGapError& e) {
        rep.note = std::string("stability-test-failed: no steady state (") + e.what() + ")";
        return rep;
    } catch (const SolverError& e) {
        rep.note = std::string("stability-test-failed: solver failure (") + e.what() + ")";
        return rep;
    }
    rep.steady = st;
    if (!st.converged) {
        rep.note = "stability-test-failed: steady solve did not converge";
        return rep;
    }

    const double pi = std::numbers::pi;
    Field1D u0 = st.U;
    for (int i = 0; i < g.n; ++i)
        u0[i] += r * (1.0 - g.x[i] * g.x[i]) * std::cos(pi * g.x[i] / 2.0);

    EvolutionConfig cfg;
    cfg.lambda = lambda;
    cfg.eps = eps;
    cfg.dt0 = 1e-3;
    cfg.t_end = t_end;
    cfg.neta = opt.neta;
    const long nsteps = static_cast<long>(t_end / cfg.dt0);
    cfg.sample_every = std::max(1L, nsteps / 120);

    Trajectory traj;
    try {
        traj = eps == 0.0 ? evolve_small_aspect(u0, cfg) : evolve_fbp(u0, cfg);
    } catch (const std::exception& e) {
        rep.note = std::string("stability-test-failed: evolution failed (") + e.what() + ")";
        return rep;
    }
    if (traj.outcome != Outcome::ReachedHorizon) {
        rep.note = "stability-test-failed: perturbed run ended with " +
                   outcome_name(traj.outcome) + " at t = " + std::to_string(traj.t_event);
        return rep;
    }

    rep.fit_t0 = 0.5 * t_end;
    rep.fit_t1 = t_end;
    std::vector<double> ts, ys;
    for (const Sample& s : traj.samples) {
        if (s.t < rep.fit_t0) continue;
        double d = 0.0;
        for (int i = 0; i < g.n; ++i) d = std::max(d, std::abs(s.u[i] - st.U[i]));
        if (d < 1e-14) continue;
        ts.push_back(s.t);
        ys.push_back(std::log(d));
    }
    if (ts.size() < 3) {
        rep.note = "stability-test-failed: too few usable samples in the fit window";
        return rep;
    }
    const LineFit fit = fit_line(ts, ys);
    rep.omega_hat = -fit.slope;
    rep.r2 = fit.r2;

    if (eps > 0.0) {
        const int ne = opt.neta > 0 ? opt.neta : (g.n + 1) / 2;
        const Grid2D g2 = make_grid2(g.n, ne);
        const PotentialSolve ps_star = solve_potential(make_profile(st.U), eps, g2);
        std::vector<double> tphi, yphi;
        const size_t stride = std::max<size_t>(1, ts.size() / 30);
        size_t used = 0;
        for (const Sample& s : traj.samples) {
            if (s.t < rep.fit_t0) continue;
            if (used++ % stride != 0) continue;
            const PotentialSolve ps = solve_potential(make_profile(s.u), eps, g2);
            Field2D d = ps.phi;
            for (size_t k = 0; k < d.values.size(); ++k)
                d.values[k] -= ps_star.phi.values[k];
            const double nrm = l2_norm(d);
            if (nrm < 1e-14) continue;
            tphi.push_back(s.t);
            yphi.push_back(std::log(nrm));
        }
        if (tphi.size() >= 3) {
            const LineFit pfit = fit_line(tphi, yphi);
            rep.omega_phi = -pfit.slope;
            rep.r2_phi = pfit.r2;
        }
    }

    rep.ok = true;
    return rep;
}

}  // namespace mems
