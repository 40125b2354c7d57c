#include "mems/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "mems/version.hpp"

namespace mems::io {

using nlohmann::json;

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::uint64_t fnv1a(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

std::uint64_t fnv1a_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for hashing: " + p.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

void write_field_csv(const std::filesystem::path& p, const Field1D& f) {
    std::string body = "x,value\n";
    for (int i = 0; i < f.grid.n; ++i)
        body += format_g17(f.grid.x[i]) + "," + format_g17(f[i]) + "\n";
    write_text(p, body);
}

void write_field_csv(const std::filesystem::path& p, const Field2D& f) {
    std::string body = "x,eta,value\n";
    for (int i = 0; i < f.grid.nx; ++i)
        for (int j = 0; j < f.grid.neta; ++j)
            body += format_g17(f.grid.x[i]) + "," + format_g17(f.grid.eta[j]) + "," +
                    format_g17(f.at(i, j)) + "\n";
    write_text(p, body);
}

void write_series_csv(const std::filesystem::path& p, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string body = header + "\n";
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k)
            body += (k ? "," : "") + format_g17(row[k]);
        body += "\n";
    }
    write_text(p, body);
}

ConfigEcho config_echo(const EvolutionConfig& cfg) {
    ConfigEcho e;
    e["lambda"] = format_g17(cfg.lambda);
    e["eps"] = format_g17(cfg.eps);
    e["dt0"] = format_g17(cfg.dt0);
    e["t_end"] = format_g17(cfg.t_end);
    e["touchdown_tol"] = format_g17(cfg.touchdown_tol);
    e["kappa"] = format_g17(cfg.kappa);
    e["scheme"] = scheme_name(cfg.scheme);
    e["sample_every"] = std::to_string(cfg.sample_every);
    e["neta"] = std::to_string(cfg.neta);
    e["q_norm"] = std::to_string(cfg.q_norm);
    return e;
}

void write_potential(const std::filesystem::path& dir, const PotentialSolve& p) {
    std::filesystem::create_directories(dir);
    write_field_csv(dir / "phi.csv", p.phi);
    Field1D tr = p.trace;
    write_field_csv(dir / "trace.csv", tr);
    json meta;
    meta["eps"] = p.eps;
    meta["nx"] = p.phi.grid.nx;
    meta["neta"] = p.phi.grid.neta;
    meta["residual_norm"] = p.residual_norm;
    meta["v_hash"] = hash_hex(fnv1a(p.v.values.data(), p.v.values.size() * sizeof(double)));
    write_text(dir / "meta.json", meta.dump(2) + "\n");
}

void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                      const EvolutionConfig& cfg, const std::string& extra_json) {
    std::filesystem::create_directories(dir);
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.samples.size());
    for (const Sample& s : traj.samples)
        rows.push_back({s.t, s.min_gap, s.u_mid, s.E_alpha, s.g_max, s.dt});
    write_series_csv(dir / "traj.csv", "t,min_gap,u_mid,E_alpha,g_max,dt", rows);
    for (std::size_t k = 0; k < traj.samples.size(); ++k)
        write_field_csv(dir / ("u_" + std::to_string(k) + ".csv"), traj.samples[k].u);

    json out;
    out["outcome"] = outcome_name(traj.outcome);
    out["t_event"] = traj.t_event;
    out["t_td_bracket"] = traj.t_td_bracket;
    out["note"] = traj.note;
    out["samples"] = traj.samples.size();
    json echo;
    for (const auto& [k, v] : config_echo(cfg)) echo[k] = v;
    out["config"] = echo;
    const json extra = json::parse(extra_json);
    for (auto it = extra.begin(); it != extra.end(); ++it) out[it.key()] = it.value();
    write_text(dir / "outcome.json", out.dump(2) + "\n");
}

void write_branch_csv(const std::filesystem::path& p, const ContinuationResult& br) {
    std::vector<std::vector<double>> rows;
    rows.reserve(br.points.size());
    for (const BranchPoint& bp : br.points) {
        double min_u = 0.0, sup_u = 0.0, l2 = 0.0;
        if (bp.ok) {
            const Field1D& U = bp.state.U;
            for (int i = 0; i < U.grid.n; ++i) {
                min_u = std::min(min_u, U[i]);
                sup_u = std::max(sup_u, std::abs(U[i]));
                l2 += U[i] * U[i] * U.grid.h;
            }
            l2 = std::sqrt(l2);
        }
        rows.push_back({bp.lambda, min_u, sup_u, l2,
                        static_cast<double>(bp.state.iterations), bp.state.residual,
                        bp.ok ? 1.0 : 0.0});
    }
    write_series_csv(p, "lambda,min_u,sup_u,l2_u,iterations,residual,converged", rows);
}

void write_stability_json(const std::filesystem::path& p, const StabilityReport& rep) {
    json out;
    out["ok"] = rep.ok;
    out["lambda"] = rep.lambda;
    out["eps"] = rep.eps;
    out["omega_hat"] = rep.omega_hat;
    out["r2"] = rep.r2;
    out["omega_phi"] = rep.omega_phi;
    out["r2_phi"] = rep.r2_phi;
    out["fit_t0"] = rep.fit_t0;
    out["fit_t1"] = rep.fit_t1;
    out["note"] = rep.note;
    out["steady_iterations"] = rep.steady.iterations;
    out["steady_residual"] = rep.steady.residual;
    write_text(p, out.dump(2) + "\n");
}

void write_check_json(const std::filesystem::path& p, const CheckRecord& rec) {
    json out;
    out["name"] = rec.name;
    out["inputs_hash"] = hash_hex(rec.inputs_hash);
    json vals;
    for (const auto& [k, v] : rec.values) vals[k] = v;
    out["values"] = vals;
    out["tolerance"] = rec.tolerance;
    out["pass"] = rec.pass;
    out["detail"] = rec.detail;
    write_text(p, out.dump(2) + "\n");
}

void write_manifest(const std::filesystem::path& dir, const ConfigEcho& echo,
                    double wall_clock_seconds) {
    std::vector<std::filesystem::path> files;
    for (const auto& ent : std::filesystem::directory_iterator(dir)) {
        if (!ent.is_regular_file()) continue;
        if (ent.path().filename() == "manifest.json") continue;
        files.push_back(ent.path());
    }
    std::sort(files.begin(), files.end());
    json out;
    json cfg;
    for (const auto& [k, v] : echo) cfg[k] = v;
    out["config"] = cfg;
    out["version"] = kVersion;
    out["wall_clock_seconds"] = wall_clock_seconds;
    json list = json::array();
    for (const auto& f : files) {
        json ent;
        ent["name"] = f.filename().string();
        ent["fnv1a"] = hash_hex(fnv1a_file(f));
        list.push_back(ent);
    }
    out["files"] = list;
    write_text(dir / "manifest.json", out.dump(2) + "\n");
}

}  // namespace mems::io
