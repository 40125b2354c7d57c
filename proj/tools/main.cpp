#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mems/diagnostics.hpp"
#include "mems/elliptic.hpp"
#include "mems/errors.hpp"
#include "mems/evolution.hpp"
#include "mems/io.hpp"
#include "mems/steady.hpp"
#include "mems/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mems;

namespace {

struct Opts {
    double lambda = 1.0;
    double eps = 0.1;
    double dt = 1e-3;
    double t_end = 1.0;
    double touchdown_tol = 1e-3;
    double kappa = 0.01;
    double q_norm = 4.0;
    double tol = 1e-9;
    double lambda_max = 1.0;
    double tau = 0.5;
    double r = 0.05;
    int n = 201;
    int neta = 0;
    int steps = 20;
    int max_iter = 400;
    int sample_every = 10;
    int jobs = 1;
    unsigned seed = 1234;
    bool fast = false;
    std::string u0 = "zero";
    std::string scheme = "backward-euler-imex";
    std::string method = "fixed-point";
    std::string eps_list = "0.2,0.1,0.05,0.025";
    std::string out;
    std::string config;
};

Field1D make_u0(const Grid1D& g, const std::string& spec) {
    const double pi = std::numbers::pi;
    std::string kind = spec;
    double amp = -0.3;
    if (const auto colon = spec.find(':'); colon != std::string::npos) {
        kind = spec.substr(0, colon);
        try {
            amp = std::stod(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad u0 amplitude in '" + spec + "'");
        }
    }
    if (kind == "zero") return make_field1(g, 0.0);
    if (kind == "cos")
        return sample1(g, [&](double x) { return amp * std::cos(pi * x / 2.0); });
    if (kind == "bowl") return sample1(g, [&](double x) { return amp * (1.0 - x * x); });
    throw std::invalid_argument("unknown u0 '" + spec + "' (want zero, cos[:amp], bowl[:amp])");
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad numeric list entry '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty numeric list");
    return out;
}

EvolutionConfig to_config(const Opts& o) {
    EvolutionConfig c;
    c.lambda = o.lambda;
    c.eps = o.eps;
    c.dt0 = o.dt;
    c.t_end = o.t_end;
    c.touchdown_tol = o.touchdown_tol;
    c.kappa = o.kappa;
    c.scheme = scheme_from_name(o.scheme);
    c.sample_every = o.sample_every;
    c.neta = o.neta;
    c.q_norm = o.q_norm;
    return c;
}

struct WallClock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

io::ConfigEcho base_echo(const Opts& o, std::initializer_list<const char*> keys) {
    io::ConfigEcho e;
    for (const char* k : keys) {
        const std::string key = k;
        if (key == "lambda") e[key] = io::format_g17(o.lambda);
        else if (key == "eps") e[key] = io::format_g17(o.eps);
        else if (key == "dt") e[key] = io::format_g17(o.dt);
        else if (key == "t_end") e[key] = io::format_g17(o.t_end);
        else if (key == "tol") e[key] = io::format_g17(o.tol);
        else if (key == "lambda_max") e[key] = io::format_g17(o.lambda_max);
        else if (key == "tau") e[key] = io::format_g17(o.tau);
        else if (key == "r") e[key] = io::format_g17(o.r);
        else if (key == "n") e[key] = std::to_string(o.n);
        else if (key == "neta") e[key] = std::to_string(o.neta);
        else if (key == "steps") e[key] = std::to_string(o.steps);
        else if (key == "max_iter") e[key] = std::to_string(o.max_iter);
        else if (key == "jobs") e[key] = std::to_string(o.jobs);
        else if (key == "seed") e[key] = std::to_string(o.seed);
        else if (key == "fast") e[key] = o.fast ? "1" : "0";
        else if (key == "u0") e[key] = o.u0;
        else if (key == "scheme") e[key] = o.scheme;
        else if (key == "method") e[key] = o.method;
        else if (key == "eps_list") e[key] = o.eps_list;
    }
    return e;
}

int run_evolve(const Opts& o) {
    WallClock wc;
    const fs::path dir = o.out.empty() ? "out/evolve" : o.out;
    fs::create_directories(dir);
    const Grid1D g = make_grid1(o.n);
    const Field1D u0 = make_u0(g, o.u0);
    const EvolutionConfig cfg = to_config(o);
    const Trajectory traj =
        o.eps == 0.0 ? evolve_small_aspect(u0, cfg) : evolve_fbp(u0, cfg);

    json extra = json::object();
    if (o.lambda > 0.0) {
        const BlowupCertificate cert = make_certificate(o.lambda, o.eps);
        if (cert.has_horizon) {
            json c;
            c["beta"] = cert.params.beta;
            c["p"] = cert.params.p;
            c["alpha"] = cert.params.alpha;
            c["F0"] = cert.F0;
            c["lambda_star"] = cert.lambda_star;
            c["horizon"] = cert.horizon;
            if (traj.outcome == Outcome::Touchdown)
                c["t_td_within_horizon"] = traj.t_event <= cert.horizon + 2.0 * o.dt;
            extra["certificate"] = c;
        }
    }
    if (o.lambda == 0.0) {
        std::vector<double> ts, ys;
        for (const Sample& s : traj.samples) {
            if (s.t < 0.5 * o.t_end) continue;
            const double d = sup_norm(s.u);
            if (d < 1e-14) continue;
            ts.push_back(s.t);
            ys.push_back(std::log(d));
        }
        if (ts.size() >= 3) {
            const LineFit fit = fit_line(ts, ys);
            json d;
            d["rate"] = -fit.slope;
            d["r2"] = fit.r2;
            d["mu1"] = kMu1;
            d["fit_t0"] = ts.front();
            d["fit_t1"] = ts.back();
            io::write_text(dir / "decay.json", d.dump(2) + "\n");
            extra["decay_rate"] = -fit.slope;
        }
    }
    io::write_trajectory(dir, traj, cfg, extra.dump());
    io::write_manifest(dir, io::config_echo(cfg), wc.seconds());
    std::printf("outcome: %s at t = %.10g\n", outcome_name(traj.outcome).c_str(),
                traj.t_event);
    if (!traj.note.empty()) std::printf("note: %s\n", traj.note.c_str());
    return traj.outcome == Outcome::SolverFailure ? 3 : 0;
}

int run_steady(const Opts& o) {
    WallClock wc;
    const fs::path dir = o.out.empty() ? "out/steady" : o.out;
    fs::create_directories(dir);
    const Grid1D g = make_grid1(o.n);
    const Field1D U0 = make_u0(g, o.u0);
    SteadyOptions opt;
    opt.tol = o.tol;
    opt.max_iter = o.max_iter;
    opt.neta = o.neta;
    const SteadyState st = o.method == "newton"
                               ? steady_newton(o.lambda, o.eps, U0, opt)
                               : steady_fixed_point(o.lambda, o.eps, U0, opt);
    io::write_field_csv(dir / "U.csv", st.U);
    io::write_field_csv(dir / "trace.csv", st.trace);
    json out;
    out["lambda"] = st.lambda;
    out["eps"] = st.eps;
    out["converged"] = st.converged;
    out["iterations"] = st.iterations;
    out["residual"] = st.residual;
    out["note"] = st.note;
    double min_u = 0.0;
    for (double u : st.U.values) min_u = std::min(min_u, u);
    out["min_u"] = min_u;
    io::write_text(dir / "steady.json", out.dump(2) + "\n");
    io::write_manifest(dir, base_echo(o, {"lambda", "eps", "n", "neta", "tol", "max_iter",
                                          "method", "u0"}),
                       wc.seconds());
    std::printf("steady: converged=%d iterations=%d residual=%.3e min_u=%.10g\n",
                st.converged ? 1 : 0, st.iterations, st.residual, min_u);
    if (!st.note.empty()) std::printf("note: %s\n", st.note.c_str());
    return st.converged ? 0 : 1;
}

int run_branch(const Opts& o) {
    WallClock wc;
    const fs::path dir = o.out.empty() ? "out/branch" : o.out;
    fs::create_directories(dir);
    const Grid1D g = make_grid1(o.n);
    SteadyOptions opt;
    opt.tol = o.tol;
    opt.max_iter = o.max_iter;
    opt.neta = o.neta;
    const ContinuationResult res = continuation(o.lambda_max, o.steps, o.eps, g, opt);
    io::write_branch_csv(dir / "branch.csv", res);
    json out;
    out["last_converged_lambda"] = res.last_converged_lambda;
    out["points"] = res.points.size();
    int ok = 0;
    for (const BranchPoint& bp : res.points) ok += bp.ok ? 1 : 0;
    out["converged_points"] = ok;
    io::write_text(dir / "branch.json", out.dump(2) + "\n");
    io::write_manifest(dir, base_echo(o, {"lambda_max", "steps", "eps", "n", "neta", "tol"}),
                       wc.seconds());
    std::printf("branch: %d converged points, last converged lambda = %.10g\n", ok,
                res.last_converged_lambda);
    return ok > 0 ? 0 : 1;
}

int run_stability(const Opts& o) {
    WallClock wc;
    const fs::path dir = o.out.empty() ? "out/stability" : o.out;
    fs::create_directories(dir);
    const Grid1D g = make_grid1(o.n);
    SteadyOptions opt;
    opt.tol = o.tol;
    opt.max_iter = o.max_iter;
    opt.neta = o.neta;
    const StabilityReport rep = decay_rate(o.lambda, o.eps, o.r, o.t_end, g, opt);
    io::write_stability_json(dir / "stability.json", rep);
    io::write_manifest(dir,
                       base_echo(o, {"lambda", "eps", "r", "t_end", "n", "neta", "tol"}),
                       wc.seconds());
    if (rep.ok)
        std::printf("stability: omega_hat = %.10g (r2 = %.6f)\n", rep.omega_hat, rep.r2);
    else
        std::printf("stability: failed (%s)\n", rep.note.c_str());
    return rep.ok ? 0 : 1;
}

int run_limit(const Opts& o) {
    WallClock wc;
    const fs::path dir = o.out.empty() ? "out/limit" : o.out;
    fs::create_directories(dir);
    const Grid1D g = make_grid1(o.n);
    const Field1D u0 = make_u0(g, o.u0);
    const std::vector<double> eps_list = parse_list(o.eps_list);
    EvolutionConfig cfg = to_config(o);
    const LimitReport rep = compare_limit(u0, o.lambda, eps_list, o.tau, cfg, o.jobs);

    std::vector<std::vector<double>> rows;
    bool all_ok = true;
    for (const LimitEntry& e : rep.entries) {
        rows.push_back({e.eps, e.e_u, e.e_psi, e.ok ? 1.0 : 0.0});
        all_ok = all_ok && e.ok;
    }
    io::write_series_csv(dir / "limit.csv", "eps,e_u,e_psi,ok", rows);
    json out;
    out["slope_u"] = rep.slope_u;
    out["slope_psi"] = rep.slope_psi;
    out["reference_ok"] = rep.reference_ok;
    out["reference_note"] = rep.reference_note;
    json entries = json::array();
    for (const LimitEntry& e : rep.entries) {
        json je;
        je["eps"] = e.eps;
        je["e_u"] = e.e_u;
        je["e_psi"] = e.e_psi;
        je["ok"] = e.ok;
        je["note"] = e.note;
        entries.push_back(je);
    }
    out["entries"] = entries;
    io::write_text(dir / "limit.json", out.dump(2) + "\n");
    io::write_manifest(dir,
                       base_echo(o, {"lambda", "tau", "eps_list", "u0", "n", "neta", "dt",
                                     "jobs", "scheme"}),
                       wc.seconds());
    std::printf("%-10s %-14s %-14s %s\n", "eps", "e_u", "e_psi", "ok");
    for (const LimitEntry& e : rep.entries)
        std::printf("%-10.4g %-14.6e %-14.6e %d\n", e.eps, e.e_u, e.e_psi, e.ok ? 1 : 0);
    std::printf("slope_u = %.4f, slope_psi = %.4f\n", rep.slope_u, rep.slope_psi);
    return (all_ok && rep.reference_ok) ? 0 : 1;
}

int run_blowup(const Opts& o) {
    WallClock wc;
    const fs::path dir = o.out.empty() ? "out/blowup" : o.out;
    fs::create_directories(dir);
    const BlowupCertificate cert = make_certificate(o.lambda, o.eps);
    std::printf("beta = %.17g\n", cert.params.beta);
    std::printf("p = %.17g\n", cert.params.p);
    std::printf("alpha = %.17g\n", cert.params.alpha);
    std::printf("F0 = %.17g\n", cert.F0);
    std::printf("lambda_star = %.17g\n", cert.lambda_star);
    if (cert.has_horizon)
        std::printf("horizon = %.17g\n", cert.horizon);
    else
        std::printf("horizon = none (F0 >= 0)\n");
    json out;
    out["lambda"] = o.lambda;
    out["eps"] = o.eps;
    out["beta"] = cert.params.beta;
    out["p"] = cert.params.p;
    out["alpha"] = cert.params.alpha;
    out["F0"] = cert.F0;
    out["lambda_star"] = cert.lambda_star;
    out["has_horizon"] = cert.has_horizon;
    out["horizon"] = cert.horizon;
    io::write_text(dir / "blowup.json", out.dump(2) + "\n");
    io::write_manifest(dir, base_echo(o, {"lambda", "eps"}), wc.seconds());
    return 0;
}

// ---- invariant suite for the check command ----

struct CheckRun {
    fs::path dir;
    bool all_pass = true;

    void record(io::CheckRecord rec) {
        all_pass = all_pass && rec.pass;
        std::printf("[%s] %-22s %s\n", rec.pass ? "PASS" : "FAIL", rec.name.c_str(),
                    rec.detail.c_str());
        io::write_check_json(dir / ("check_" + rec.name + ".json"), rec);
    }
};

std::string brief(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

void check_flat_membrane(CheckRun& cr, int n) {
    io::CheckRecord rec;
    rec.name = "flat_membrane";
    rec.tolerance = 1e-8;
    rec.inputs_hash = io::fnv1a("flat_membrane n=" + std::to_string(n));
    const Grid2D g2 = make_grid2(n, (n + 1) / 2);
    const Field1D v = make_field1(make_grid1(n), 0.0);
    double worst = 0.0;
    for (double eps : {0.05, 0.1, 0.5}) {
        const Field1D ge = g_eps(make_profile(v), eps, g2);
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(ge[i] - 1.0));
    }
    rec.values.emplace_back("max_deviation", worst);
    rec.pass = worst <= rec.tolerance;
    rec.detail = "max |g(0) - 1| = " + brief(worst);
    cr.record(rec);
}

void check_constant_profile(CheckRun& cr, int n) {
    io::CheckRecord rec;
    rec.name = "constant_profile";
    rec.tolerance = 1e-8;
    rec.inputs_hash = io::fnv1a("constant_profile n=" + std::to_string(n));
    const Grid2D g2 = make_grid2(n, (n + 1) / 2);
    double worst = 0.0;
    for (double c : {-0.5, -0.25, 0.5}) {
        const Field1D v = make_field1(make_grid1(n), c);
        const Field1D ge = g_eps(make_profile_analytic(v), 0.1, g2);
        const double want = 1.0 / ((1.0 + c) * (1.0 + c));
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(ge[i] - want));
    }
    rec.values.emplace_back("max_deviation", worst);
    rec.pass = worst <= rec.tolerance;
    rec.detail = "max |g(c) - (1+c)^-2| = " + brief(worst);
    cr.record(rec);
}

void check_manufactured_order(CheckRun& cr, int n_base) {
    io::CheckRecord rec;
    rec.name = "manufactured_order";
    rec.tolerance = 0.2;
    rec.inputs_hash = io::fnv1a("manufactured_order n=" + std::to_string(n_base));
    const int n2 = 2 * n_base - 1;
    const double e1 = manufactured_error(0.1, make_grid2(n_base, (n_base + 1) / 2));
    const double e2 = manufactured_error(0.1, make_grid2(n2, (n2 + 1) / 2));
    const double order = std::log2(e1 / e2);
    rec.values.emplace_back("err_coarse", e1);
    rec.values.emplace_back("err_fine", e2);
    rec.values.emplace_back("order", order);
    rec.pass = order >= 1.8 && order <= 2.2;
    rec.detail = "order = " + brief(order);
    cr.record(rec);
}

void check_psi_invariants(CheckRun& cr, int n, int count, unsigned seed) {
    io::CheckRecord rec;
    rec.name = "psi_invariants";
    rec.inputs_hash = io::fnv1a("psi_invariants n=" + std::to_string(n) +
                               " seed=" + std::to_string(seed));
    const Grid2D g2 = make_grid2(n, (n + 1) / 2);
    const Interval1D zg = make_interval(-1.0, 0.0, (n + 1) / 2);
    std::mt19937 rng(seed);
    const double h = g2.hx;
    const double btol = 10.0 * h * h;
    rec.tolerance = btol;
    double worst_bound = 0.0, min_dz = 1e300, worst_chain = 0.0;
    for (int k = 0; k < count; ++k) {
        const MembraneProfile m = random_admissible_profile(make_grid1(n), rng);
        const PotentialSolve p = solve_potential(m, 0.1, g2);
        const PsiField psi = reconstruct_psi(p, m, zg);
        for (int i = 0; i < psi.xgrid.n; ++i)
            for (int kk = 0; kk < psi.zgrid.n; ++kk) {
                if (!psi.mask[psi.idx(i, kk)]) continue;
                const double val = psi.psi[psi.idx(i, kk)];
                worst_bound = std::max(worst_bound, std::max(-val, val - 1.0));
            }
        const MembraneGradients mg = membrane_gradients(p, m);
        for (int i = 1; i < n - 1; ++i) {
            min_dz = std::min(min_dz, mg.dpsi_dz[i]);
            worst_chain = std::max(
                worst_chain, std::abs(mg.dpsi_dx[i] + m.dv[i] * mg.dpsi_dz[i]));
        }
    }
    rec.values.emplace_back("worst_bound_violation", worst_bound);
    rec.values.emplace_back("min_dpsi_dz", min_dz);
    rec.values.emplace_back("worst_chain_rule", worst_chain);
    rec.pass = worst_bound <= btol && min_dz > 0.0 && worst_chain <= 1e-10;
    rec.detail = "bound " + brief(worst_bound) + ", min dz " + brief(min_dz) + ", chain " +
                 brief(worst_chain);
    cr.record(rec);
}

void check_reflection(CheckRun& cr, int n, int count, unsigned seed) {
    io::CheckRecord rec;
    rec.name = "reflection_symmetry";
    rec.tolerance = 1e-9;
    rec.inputs_hash = io::fnv1a("reflection n=" + std::to_string(n) +
                               " seed=" + std::to_string(seed));
    const Grid2D g2 = make_grid2(n, (n + 1) / 2);
    std::mt19937 rng(seed);
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
        const MembraneProfile m = random_admissible_profile(make_grid1(n), rng, 0.55, true);
        Field1D vr = m.v;
        std::reverse(vr.values.begin(), vr.values.end());
        const Field1D ga = g_eps(m, 0.1, g2);
        const Field1D gb = g_eps(make_profile(vr), 0.1, g2);
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(gb[i] - ga[n - 1 - i]));
    }
    rec.values.emplace_back("max_mismatch", worst);
    rec.pass = worst <= rec.tolerance;
    rec.detail = "max reflection mismatch = " + brief(worst);
    cr.record(rec);
}

void check_flux_identity(CheckRun& cr, int n) {
    io::CheckRecord rec;
    rec.name = "flux_identity";
    rec.tolerance = 1e-6;
    rec.inputs_hash = io::fnv1a("flux_identity n=" + std::to_string(n));
    const double eps = 0.1;
    const Grid2D g2 = make_grid2(n, (n + 1) / 2);
    const Grid1D g1 = make_grid1(n);

    double worst_flat = 0.0;
    {
        const MembraneProfile m = make_profile(make_field1(g1, 0.0));
        const PotentialSolve p = solve_potential(m, eps, g2);
        for (double pe : {1.0, 2.0})
            worst_flat = std::max(worst_flat, check_identity_n5(p, m, eps, pe).residual);
    }

    // constant profile: both sides against their own closed forms
    double worst_const = 0.0;
    {
        const double c = -0.5;
        const double mu1 = kMu1;
        const MembraneProfile m = make_profile_analytic(make_field1(g1, c));
        const PotentialSolve p = solve_potential(m, eps, g2);
        for (double pe : {1.0, 2.0}) {
            const IdentityReport rep = check_identity_n5(p, m, eps, pe);
            const double gap = 1.0 + c;
            const double lhs_exact = 1.0 / gap;
            const double rhs_exact = 1.0 / gap - mu1 * eps * eps * c / (pe + 2.0);
            worst_const = std::max(worst_const, std::abs(rep.lhs - lhs_exact));
            worst_const = std::max(worst_const, std::abs(rep.rhs - rhs_exact));
        }
    }

    // generic profile: residual must shrink under refinement
    double ratio = 0.0;
    {
        const int n2 = 2 * n - 1;
        auto resid_at = [&](int nn, double pe) {
            Grid1D gg = make_grid1(nn);
            const Field1D v =
                sample1(gg, [](double x) { return -0.25 * (1.0 - x * x); });
            const MembraneProfile m = make_profile(v);
            const Grid2D gg2 = make_grid2(nn, (nn + 1) / 2);
            return check_identity_n5(solve_potential(m, eps, gg2), m, eps, pe).residual;
        };
        ratio = 1e300;
        for (double pe : {1.0, 2.0})
            ratio = std::min(ratio, resid_at(n, pe) / resid_at(n2, pe));
    }

    rec.values.emplace_back("flat_residual", worst_flat);
    rec.values.emplace_back("const_deviation", worst_const);
    rec.values.emplace_back("refinement_ratio", ratio);
    rec.pass = worst_flat <= 1e-8 && worst_const <= 1e-6 && ratio >= 1.7;
    rec.detail = "flat " + brief(worst_flat) + ", const " + brief(worst_const) +
                 ", ratio " + brief(ratio);
    cr.record(rec);
}

void check_lower_bound(CheckRun& cr, int n, unsigned seed) {
    io::CheckRecord rec;
    rec.name = "vertical_energy_bound";
    rec.inputs_hash = io::fnv1a("vertical_energy_bound n=" + std::to_string(n) +
                               " seed=" + std::to_string(seed));
    const double eps = 0.1;
    const Grid2D g2 = make_grid2(n, (n + 1) / 2);
    const Grid1D g1 = make_grid1(n);
    const double h = g1.h;
    rec.tolerance = 10.0 * h;
    std::mt19937 rng(seed);
    double worst = 1e300;
    auto probe = [&](const MembraneProfile& m) {
        const PotentialSolve p = solve_potential(m, eps, g2);
        for (double pe : {1.0, 2.0})
            worst = std::min(worst, check_inequality_n4(p, m, pe));
    };
    probe(make_profile(make_field1(g1, 0.0)));
    probe(make_profile_analytic(make_field1(g1, -0.4)));
    for (int k = 0; k < 3; ++k) probe(random_admissible_profile(g1, rng));
    rec.values.emplace_back("min_margin", worst);
    rec.pass = worst >= -10.0 * h;
    rec.detail = "min margin = " + brief(worst) + " (floor " + brief(-10.0 * h) + ")";
    cr.record(rec);
}

void check_heat_decay(CheckRun& cr, int n) {
    io::CheckRecord rec;
    rec.name = "heat_decay";
    rec.tolerance = 0.05;
    rec.inputs_hash = io::fnv1a("heat_decay n=" + std::to_string(n));
    const Grid1D g = make_grid1(n);
    const double pi = std::numbers::pi;
    const Field1D u0 =
        sample1(g, [&](double x) { return -0.3 * std::cos(pi * x / 2.0); });
    EvolutionConfig cfg;
    cfg.lambda = 0.0;
    cfg.eps = 0.0;
    cfg.dt0 = 1e-3;
    cfg.t_end = 1.5;
    cfg.sample_every = 10;
    const Trajectory traj = evolve_small_aspect(u0, cfg);
    std::vector<double> ts, ys;
    for (const Sample& s : traj.samples) {
        if (s.t < 0.5) continue;
        ts.push_back(s.t);
        ys.push_back(std::log(sup_norm(s.u)));
    }
    const LineFit fit = fit_line(ts, ys);
    const double rate = -fit.slope;
    const double rel = std::abs(rate - kMu1) / kMu1;
    rec.values.emplace_back("rate", rate);
    rec.values.emplace_back("mu1", kMu1);
    rec.values.emplace_back("relative_error", rel);
    rec.pass = rel <= rec.tolerance && traj.outcome == Outcome::ReachedHorizon;
    rec.detail = "rate = " + brief(rate) + " vs mu1 = " + brief(kMu1);
    cr.record(rec);
}

void check_certificate(CheckRun& cr) {
    io::CheckRecord rec;
    rec.name = "certificate_arithmetic";
    rec.tolerance = 1e-6;
    rec.inputs_hash = io::fnv1a("certificate lambda=400 eps=0.1");
    const BlowupCertificate cert = make_certificate(400.0, 0.1);
    const bool ok = std::abs(cert.params.beta - 10.0) <= 1e-12 &&
                    std::abs(cert.params.p - 1.049348) <= 1e-6 &&
                    std::abs(cert.params.alpha - 4.0 / 404.0) <= 1e-9 &&
                    std::abs(cert.F0 - (-33.40)) <= 0.05 && cert.has_horizon &&
                    std::abs(cert.horizon - 0.0299) <= 1e-4;
    rec.values.emplace_back("beta", cert.params.beta);
    rec.values.emplace_back("p", cert.params.p);
    rec.values.emplace_back("alpha", cert.params.alpha);
    rec.values.emplace_back("F0", cert.F0);
    rec.values.emplace_back("horizon", cert.horizon);
    rec.pass = ok;
    rec.detail = "F0 = " + brief(cert.F0) + ", horizon = " + brief(cert.horizon);
    cr.record(rec);
}

int run_check(const Opts& o) {
    WallClock wc;
    CheckRun cr;
    cr.dir = o.out.empty() ? "out/check" : o.out;
    fs::create_directories(cr.dir);
    const int n = o.fast ? 101 : 201;
    check_flat_membrane(cr, n);
    check_constant_profile(cr, n);
    check_manufactured_order(cr, o.fast ? 51 : 101);
    check_psi_invariants(cr, o.fast ? 101 : 151, o.fast ? 5 : 20, o.seed);
    check_reflection(cr, o.fast ? 101 : 151, o.fast ? 3 : 10, o.seed + 1);
    check_flux_identity(cr, o.fast ? 101 : 151);
    check_lower_bound(cr, o.fast ? 101 : 151, o.seed + 2);
    check_heat_decay(cr, o.fast ? 101 : 201);
    check_certificate(cr);
    io::write_manifest(cr.dir, base_echo(o, {"fast", "seed"}), wc.seconds());
    std::printf("check: %s\n", cr.all_pass ? "all invariants hold" : "FAILURES present");
    return cr.all_pass ? 0 : 1;
}

// plain key=value defaults; options already given on the command line win
void apply_config(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    const auto trim = [](const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        CLI::Option* opt = key == "config" ? nullptr : cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) throw std::invalid_argument(where + ": unknown key '" + key + "'");
        if (opt->count() > 0) continue;
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw std::invalid_argument(where + ": " + e.what());
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free-boundary MEMS membrane solver suite"};
    app.set_version_flag("--version", mems::kVersion);
    app.require_subcommand(1);
    Opts o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config, "key=value defaults file (flags override)");
        cmd->add_option("--out", o.out, "output directory");
        cmd->add_option("--n", o.n, "1d grid points");
        cmd->add_option("--neta", o.neta, "vertical grid points (0 = auto)");
    };

    CLI::App* evolve = app.add_subcommand("evolve", "time-step the membrane");
    add_common(evolve);
    evolve->add_option("--lambda", o.lambda, "voltage parameter");
    evolve->add_option("--eps", o.eps, "aspect ratio (0 = reduced model)");
    evolve->add_option("--dt", o.dt, "initial time step");
    evolve->add_option("--t-end", o.t_end, "horizon");
    evolve->add_option("--u0", o.u0, "initial profile: zero | cos[:amp] | bowl[:amp]");
    evolve->add_option("--scheme", o.scheme, "backward-euler-imex | crank-nicolson-imex");
    evolve->add_option("--kappa", o.kappa, "admissibility parameter");
    evolve->add_option("--touchdown-tol", o.touchdown_tol, "touchdown gap threshold");
    evolve->add_option("--sample-every", o.sample_every, "sampling stride");

    CLI::App* steady = app.add_subcommand("steady", "solve for a steady state");
    add_common(steady);
    steady->add_option("--lambda", o.lambda, "voltage parameter");
    steady->add_option("--eps", o.eps, "aspect ratio (0 = reduced model)");
    steady->add_option("--tol", o.tol, "iteration tolerance");
    steady->add_option("--max-iter", o.max_iter, "iteration cap");
    steady->add_option("--method", o.method, "fixed-point | newton");
    steady->add_option("--u0", o.u0, "initial iterate");

    CLI::App* branch = app.add_subcommand("branch", "march the steady branch in lambda");
    add_common(branch);
    branch->add_option("--lambda-max", o.lambda_max, "march target");
    branch->add_option("--steps", o.steps, "number of lambda steps");
    branch->add_option("--eps", o.eps, "aspect ratio");
    branch->add_option("--tol", o.tol, "iteration tolerance");
    branch->add_option("--max-iter", o.max_iter, "iteration cap");
    branch->add_option("--jobs", o.jobs, "parallel solves (branch marches sequentially)");

    CLI::App* stability = app.add_subcommand("stability", "perturb a steady state, fit decay");
    add_common(stability);
    stability->add_option("--lambda", o.lambda, "voltage parameter");
    stability->add_option("--eps", o.eps, "aspect ratio");
    stability->add_option("--r", o.r, "perturbation amplitude");
    stability->add_option("--t-end", o.t_end, "horizon of the perturbed run");
    stability->add_option("--tol", o.tol, "steady-solve tolerance");

    CLI::App* limit = app.add_subcommand("limit", "small-aspect-ratio convergence sweep");
    add_common(limit);
    limit->add_option("--lambda", o.lambda, "voltage parameter");
    limit->add_option("--eps", o.eps_list, "comma-separated aspect ratios");
    limit->add_option("--tau", o.tau, "comparison horizon");
    limit->add_option("--u0", o.u0, "initial profile");
    limit->add_option("--dt", o.dt, "initial time step");
    limit->add_option("--jobs", o.jobs, "parallel runs");
    limit->add_option("--scheme", o.scheme, "time scheme");

    CLI::App* blowup = app.add_subcommand("blowup", "print the touchdown certificate numbers");
    add_common(blowup);
    blowup->add_option("--lambda", o.lambda, "voltage parameter");
    blowup->add_option("--eps", o.eps, "aspect ratio");

    CLI::App* check = app.add_subcommand("check", "run the invariant suite");
    add_common(check);
    check->add_flag("--fast", o.fast, "coarse grids, fewer random profiles");
    check->add_option("--seed", o.seed, "seed for randomized profiles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* active = nullptr;
    for (CLI::App* cmd : {evolve, steady, branch, stability, limit, blowup, check})
        if (app.got_subcommand(cmd)) active = cmd;

    try {
        if (!o.config.empty()) apply_config(active, o.config);
        if (active == evolve) return run_evolve(o);
        if (active == steady) return run_steady(o);
        if (active == branch) return run_branch(o);
        if (active == stability) return run_stability(o);
        if (active == limit) return run_limit(o);
        if (active == blowup) return run_blowup(o);
        if (active == check) return run_check(o);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const DegenerateGapError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
