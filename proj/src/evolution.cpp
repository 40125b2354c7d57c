#include "mems/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mems/diagnostics.hpp"
#include "mems/errors.hpp"

namespace mems {

Scheme scheme_from_name(const std::string& name) {
    if (name == "backward-euler-imex") return Scheme::BackwardEulerImex;
    if (name == "crank-nicolson-imex") return Scheme::CrankNicolsonImex;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::string scheme_name(Scheme s) {
    return s == Scheme::BackwardEulerImex ? "backward-euler-imex" : "crank-nicolson-imex";
}

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::ReachedHorizon: return "reached-horizon";
        case Outcome::Touchdown: return "touchdown";
        case Outcome::AdmissibilityExit: return "admissibility-exit";
        case Outcome::SolverFailure: return "solver-failure";
    }
    return "unknown";
}

void validate(const EvolutionConfig& c) {
    if (!(c.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    if (!(c.eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
    if (!(c.dt0 > 0.0)) throw std::invalid_argument("dt0 must be positive");
    if (!(c.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (!(c.kappa > 0.0 && c.kappa < 1.0)) throw std::invalid_argument("kappa must be in (0,1)");
    if (!(c.touchdown_tol > 0.0 && c.touchdown_tol < c.kappa))
        throw std::invalid_argument("touchdown_tol must be in (0, kappa)");
    if (c.sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
    if (!(c.q_norm >= 2.0)) throw std::invalid_argument("q_norm must be >= 2");
}

namespace {

double min_gap_of(const Field1D& u) {
    double m = 1.0 + u.values.front();
    for (double v : u.values) m = std::min(m, 1.0 + v);
    return m;
}

// interior (I + c*A_h) solve with the Dirichlet 3-point -d_xx matrix
Field1D heat_solve(const Field1D& rhs, double coef) {
    const int n = rhs.grid.n;
    const double h2 = rhs.grid.h * rhs.grid.h;
    const int m = n - 2;
    Tridiag tri;
    tri.diag.assign(m, 1.0 + 2.0 * coef / h2);
    tri.lower.assign(m - 1, -coef / h2);
    tri.upper.assign(m - 1, -coef / h2);
    std::vector<double> b(rhs.values.begin() + 1, rhs.values.end() - 1);
    std::vector<double> sol = tri.solve(std::move(b));
    Field1D out = make_field1(rhs.grid);
    std::copy(sol.begin(), sol.end(), out.values.begin() + 1);
    return out;
}

// A_h u on interior nodes (boundary rows zero), u(+-1) taken as 0
Field1D heat_apply(const Field1D& u) {
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

Field1D eval_g(const Field1D& u, const EvolutionConfig& c, bool small_aspect) {
    if (small_aspect) {
        Field1D g = make_field1(u.grid);
        for (int i = 0; i < u.grid.n; ++i) {
            const double gap = 1.0 + u[i];
            g[i] = 1.0 / (gap * gap);
        }
        return g;
    }
    const int neta = c.neta > 0 ? c.neta : (u.grid.n + 1) / 2;
    const Grid2D g2 = make_grid2(u.grid.n, neta);
    const MembraneProfile m = make_profile(u);
    return g_eps(m, c.eps, g2);
}

EvolutionState step_core(const EvolutionState& s, const EvolutionConfig& c, bool small_aspect) {
    validate(c);
    if (!(s.min_gap > c.touchdown_tol))
        throw std::invalid_argument("step precondition violated: gap at or below threshold");
    if (!(s.dt > 0.0)) throw std::invalid_argument("step needs dt > 0");

    Field1D g_n;
    if (c.lambda == 0.0 && !s.g_last.values.empty() && !small_aspect) {
        g_n = s.g_last;  // source term vanishes; keep the last computed one
    } else {
        g_n = eval_g(s.u, c, small_aspect);
    }
    const Field1D& g_prev = s.g_last.values.empty() ? g_n : s.g_last;

    // source value used by the scheme
    Field1D ghat = g_n;
    if (c.scheme == Scheme::CrankNicolsonImex) {
        for (int i = 0; i < ghat.grid.n; ++i) ghat[i] = 1.5 * g_n[i] - 0.5 * g_prev[i];
    }

    auto advance = [&](double dt) {
        Field1D rhs = s.u;
        if (c.scheme == Scheme::BackwardEulerImex) {
            for (int i = 1; i < rhs.grid.n - 1; ++i) rhs[i] -= dt * c.lambda * ghat[i];
            rhs.values.front() = rhs.values.back() = 0.0;
            return heat_solve(rhs, dt);
        }
        const Field1D au = heat_apply(s.u);
        for (int i = 1; i < rhs.grid.n - 1; ++i)
            rhs[i] -= 0.5 * dt * au[i] + dt * c.lambda * ghat[i];
        rhs.values.front() = rhs.values.back() = 0.0;
        return heat_solve(rhs, 0.5 * dt);
    };

    Field1D u_new = advance(s.dt);
    double t_new = s.t + s.dt;
    double gap = min_gap_of(u_new);
    if (gap <= c.touchdown_tol) {
        // bisect the step so the state lands at the threshold, within dt/100
        double lo = 0.0, hi = s.dt;
        Field1D u_hi = u_new;
        double gap_hi = gap;
        while (hi - lo > s.dt / 100.0) {
            const double mid = 0.5 * (lo + hi);
            Field1D u_mid = advance(mid);
            const double gap_mid = min_gap_of(u_mid);
            if (gap_mid <= c.touchdown_tol) {
                hi = mid;
                u_hi = std::move(u_mid);
                gap_hi = gap_mid;
            } else {
                lo = mid;
            }
        }
        u_new = std::move(u_hi);
        gap = gap_hi;
        t_new = s.t + hi;
    }

    EvolutionState out;
    out.t = t_new;
    out.u = std::move(u_new);
    out.dt = s.dt;
    out.g_last = std::move(g_n);
    out.min_gap = gap;
    return out;
}

Trajectory evolve_core(const Field1D& u0, const EvolutionConfig& c, bool small_aspect) {
    validate(c);
    Trajectory traj;

    Field1D u = u0;
    u.values.front() = 0.0;
    u.values.back() = 0.0;
    for (double v : u.values)
        if (!std::isfinite(v)) throw std::invalid_argument("initial data has non-finite values");

    EvolutionState s;
    s.t = 0.0;
    s.u = std::move(u);
    s.min_gap = min_gap_of(s.u);
    if (!(s.min_gap > c.touchdown_tol))
        throw std::invalid_argument("initial data gap at or below touchdown threshold");
    s.g_last = eval_g(s.u, c, small_aspect);

    const double alpha = small_aspect ? 0.0 : c.eps * c.eps / (1.0 + c.eps * c.eps);
    auto record = [&](const EvolutionState& st, double dt_shown) {
        if (!traj.samples.empty() && traj.samples.back().t >= st.t) return;
        Sample smp;
        smp.t = st.t;
        smp.u = st.u;
        smp.min_gap = st.min_gap;
        smp.u_mid = st.u[st.u.grid.n / 2];
        smp.E_alpha = energy_Ealpha(st.u, alpha);
        smp.g_max = st.g_last.values.empty() ? 0.0 : sup_norm(st.g_last);
        smp.dt = dt_shown;
        traj.samples.push_back(std::move(smp));
    };

    double dt_cur = c.dt0;
    s.dt = dt_cur;
    // initial sample (record() skips nothing since samples is empty)
    {
        Sample smp;
        smp.t = 0.0;
        smp.u = s.u;
        smp.min_gap = s.min_gap;
        smp.u_mid = s.u[s.u.grid.n / 2];
        smp.E_alpha = energy_Ealpha(s.u, alpha);
        smp.g_max = sup_norm(s.g_last);
        smp.dt = dt_cur;
        traj.samples.push_back(std::move(smp));
    }

    const double tiny = 1e-12 * std::max(1.0, c.t_end);
    const double norm_cap = 1.0 / c.kappa;
    long step_index = 0;
    for (;;) {
        if (s.t >= c.t_end - tiny) {
            traj.outcome = Outcome::ReachedHorizon;
            traj.t_event = s.t;
            record(s, dt_cur);
            break;
        }
        {
            const NormBundle nb = discrete_norms(s.u, c.q_norm);
            if (nb.surrogate > norm_cap) {
                traj.outcome = Outcome::AdmissibilityExit;
                traj.t_event = s.t;
                traj.note = "norm surrogate " + std::to_string(nb.surrogate) +
                            " exceeded 1/kappa = " + std::to_string(norm_cap);
                record(s, dt_cur);
                break;
            }
        }
        const double dt_eff = std::min(dt_cur, c.t_end - s.t);
        EvolutionState s_in = s;
        s_in.dt = dt_eff;
        EvolutionState s_new;
        try {
            s_new = step_core(s_in, c, small_aspect);
        } catch (const SolverError& e) {
            traj.outcome = Outcome::SolverFailure;
            traj.t_event = s.t;
            traj.note = e.what();
            record(s, dt_cur);
            break;
        } catch (const DegenerateGapError& e) {
            traj.outcome = Outcome::SolverFailure;
            traj.t_event = s.t;
            traj.note = e.what();
            record(s, dt_cur);
            break;
        }
        ++step_index;

        const double drop = (s.min_gap - s_new.min_gap) / s.min_gap;
        if (drop > 0.10) {
            dt_cur = std::max(0.5 * dt_cur, c.dt0 * 1e-12);
        } else if (drop < 0.02) {
            dt_cur = std::min(2.0 * dt_cur, c.dt0);
        }
        s = std::move(s_new);
        s.dt = dt_cur;

        if (s.min_gap <= c.touchdown_tol) {
            traj.outcome = Outcome::Touchdown;
            traj.t_event = s.t;
            traj.t_td_bracket = dt_eff / 100.0;
            record(s, dt_eff);
            break;
        }
        if (step_index % c.sample_every == 0) record(s, dt_cur);
    }
    return traj;
}

}  // namespace

EvolutionState step_fbp(const EvolutionState& s, const EvolutionConfig& c) {
    return step_core(s, c, false);
}

Trajectory evolve_fbp(const Field1D& u0, const EvolutionConfig& c) {
    return evolve_core(u0, c, false);
}

EvolutionState step_small_aspect(const EvolutionState& s, const EvolutionConfig& c) {
    return step_core(s, c, true);
}

Trajectory evolve_small_aspect(const Field1D& u0, const EvolutionConfig& c) {
    return evolve_core(u0, c, true);
}

PsiField psi0_closed_form(const Field1D& u0, const Interval1D& zgrid) {
    if (min_gap_of(u0) <= 0.0) throw DegenerateGapError("psi0: degenerate gap");
    PsiField out;
    out.xgrid = u0.grid;
    out.zgrid = zgrid;
    const size_t total = static_cast<size_t>(u0.grid.n) * zgrid.n;
    out.psi.assign(total, 0.0);
    out.dpsi_dx.assign(total, 0.0);
    out.dpsi_dz.assign(total, 0.0);
    out.mask.assign(total, 0);
    const Field1D du = diff1(u0);
    for (int i = 0; i < u0.grid.n; ++i) {
        const double gap = 1.0 + u0[i];
        for (int k = 0; k < zgrid.n; ++k) {
            const double z = zgrid.z[k];
            if (z > u0[i] + 1e-12 || z < -1.0 - 1e-12) continue;
            const size_t id = out.idx(i, k);
            out.mask[id] = 1;
            out.psi[id] = (1.0 + z) / gap;
            out.dpsi_dz[id] = 1.0 / gap;
            out.dpsi_dx[id] = -(1.0 + z) * du[i] / (gap * gap);
        }
    }
    return out;
}

namespace {

// linear interpolation of sampled displacements at time t
Field1D interp_samples(const std::vector<Sample>& samples, double t) {
    if (samples.empty()) throw std::invalid_argument("no samples");
    if (t <= samples.front().t) return samples.front().u;
    if (t >= samples.back().t) return samples.back().u;
    size_t hi = 1;
    while (samples[hi].t < t) ++hi;
    const Sample& a = samples[hi - 1];
    const Sample& b = samples[hi];
    const double th = (t - a.t) / (b.t - a.t);
    Field1D out = a.u;
    for (size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = (1.0 - th) * a.u.values[i] + th * b.u.values[i];
    return out;
}

std::vector<double> trap_weights(int n, double h) {
    std::vector<double> w(n, h);
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
    return w;
}

// L2 norm of (psi_a - psi_b) on I x (-1,0), each extended by zero off its mask
double masked_l2_diff(const PsiField& a, const PsiField& b) {
    const std::vector<double> wx = trap_weights(a.xgrid.n, a.xgrid.h);
    const std::vector<double> wz = trap_weights(a.zgrid.n, a.zgrid.h);
    double s = 0.0;
    for (int i = 0; i < a.xgrid.n; ++i)
        for (int k = 0; k < a.zgrid.n; ++k) {
            const size_t id = a.idx(i, k);
            const double va = a.mask[id] ? a.psi[id] : 0.0;
            const double vb = b.mask[id] ? b.psi[id] : 0.0;
            const double d = va - vb;
            s += wx[i] * wz[k] * d * d;
        }
    return std::sqrt(std::max(0.0, s));
}

}  // namespace

LimitReport compare_limit(const Field1D& u0, double lambda, const std::vector<double>& eps_list,
                          double tau, const EvolutionConfig& c, int jobs) {
    if (eps_list.empty()) throw std::invalid_argument("compare_limit needs a nonempty eps list");
    if (!(tau > 0.0)) throw std::invalid_argument("compare_limit needs tau > 0");

    EvolutionConfig base = c;
    base.lambda = lambda;
    base.t_end = tau;
    base.sample_every = 1;  // dense samples so runs on different step sequences compare cleanly

    const size_t ntask = eps_list.size() + 1;  // slot 0 is the small-aspect reference
    std::vector<Trajectory> runs(ntask);
    std::vector<std::string> errors(ntask);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= ntask) return;
            try {
                if (k == 0) {
                    runs[k] = evolve_small_aspect(u0, base);
                } else {
                    EvolutionConfig ec = base;
                    ec.eps = eps_list[k - 1];
                    runs[k] = ec.eps == 0.0 ? evolve_small_aspect(u0, ec) : evolve_fbp(u0, ec);
                }
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(ntask)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    LimitReport rep;
    const Trajectory& ref = runs[0];
    rep.reference_ok = errors[0].empty() && ref.outcome == Outcome::ReachedHorizon;
    rep.reference_note = !errors[0].empty()
                             ? errors[0]
                             : outcome_name(ref.outcome) + " at t = " + std::to_string(ref.t_event);

    const int ncmp = 51;
    const int nz = base.neta > 0 ? base.neta : (u0.grid.n + 1) / 2;
    const Interval1D zgrid = make_interval(-1.0, 0.0, nz);

    for (size_t k = 1; k < ntask; ++k) {
        LimitEntry entry;
        entry.eps = eps_list[k - 1];
        const Trajectory& tr = runs[k];
        if (!errors[k].empty()) {
            entry.note = errors[k];
        } else if (tr.outcome != Outcome::ReachedHorizon) {
            entry.note = outcome_name(tr.outcome) + " at t = " + std::to_string(tr.t_event) +
                         " before tau";
        } else if (!rep.reference_ok) {
            entry.note = "reference run failed: " + rep.reference_note;
        } else {
            double eu = 0.0;
            for (int mth = 0; mth <= ncmp - 1; ++mth) {
                const double t = tau * mth / (ncmp - 1);
                const Field1D ue = interp_samples(tr.samples, t);
                const Field1D ur = interp_samples(ref.samples, t);
                for (int i = 0; i < u0.grid.n; ++i)
                    eu = std::max(eu, std::abs(ue[i] - ur[i]));
            }
            entry.e_u = eu;

            const Field1D ue_tau = tr.samples.back().u;
            const Field1D ur_tau = ref.samples.back().u;
            if (entry.eps == 0.0) {
                entry.e_psi = 0.0;  // identical model, identical potential
            } else {
                const MembraneProfile me = make_profile(ue_tau);
                const Grid2D g2 = make_grid2(u0.grid.n, nz);
                const PotentialSolve ps = solve_potential(me, entry.eps, g2);
                const PsiField psie = reconstruct_psi(ps, me, zgrid);
                const PsiField psi0 = psi0_closed_form(ur_tau, zgrid);
                entry.e_psi = masked_l2_diff(psie, psi0);
            }
            entry.ok = true;
        }
        rep.entries.push_back(std::move(entry));
    }

    std::vector<double> lx, lyu, lyp;
    for (const LimitEntry& e : rep.entries)
        if (e.ok && e.eps > 0.0 && e.e_u > 0.0 && e.e_psi > 0.0) {
            lx.push_back(std::log(e.eps));
            lyu.push_back(std::log(e.e_u));
            lyp.push_back(std::log(e.e_psi));
        }
    if (lx.size() >= 2) {
        rep.slope_u = fit_line(lx, lyu).slope;
        rep.slope_psi = fit_line(lx, lyp).slope;
    }
    return rep;
}

ScalingReport phi_scaling_probe(const MembraneProfile& m, const std::vector<double>& eps_list,
                                const Grid2D& g) {
    if (eps_list.empty()) throw std::invalid_argument("scaling probe needs a nonempty eps list");
    ScalingReport rep;
    for (double eps : eps_list) {
        const PotentialSolve p = solve_potential(m, eps, g);
        ScalingEntry e;
        e.eps = eps;
        e.n_phi = l2_norm(p.Phi);
        const Field2D de = diff_eta(p.Phi);
        e.n_dphi_eta = l2_norm(de);
        e.n_dphi_xeta = l2_norm(diff_x(de));
        e.n_d2phi_eta = l2_norm(diff2_eta(p.Phi));
        const Field1D tr = trace_deta(p.Phi);
        const std::vector<double> w = quad_weights(tr.grid.n, tr.grid.h);
        double s = 0.0;
        for (int i = 0; i < tr.grid.n; ++i) s += w[i] * tr[i] * tr[i];
        e.n_trace = std::sqrt(std::max(0.0, s));
        rep.entries.push_back(e);
    }
    auto variation = [&](auto member, double power) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const ScalingEntry& e : rep.entries) {
            const double r = (e.*member) / std::pow(e.eps, power);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (hi == 0.0) return 1.0;  // identically zero scales trivially
        return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    };
    rep.var_phi = variation(&ScalingEntry::n_phi, 1.0);
    rep.var_deta = variation(&ScalingEntry::n_dphi_eta, 1.0);
    rep.var_dxdeta = variation(&ScalingEntry::n_dphi_xeta, 1.0);
    rep.var_d2eta = variation(&ScalingEntry::n_d2phi_eta, 2.0);
    rep.var_trace = variation(&ScalingEntry::n_trace, 1.0);
    return rep;
}

}  // namespace mems
