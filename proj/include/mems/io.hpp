#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mems/elliptic.hpp"
#include "mems/evolution.hpp"
#include "mems/grid.hpp"
#include "mems/steady.hpp"

namespace mems::io {

// full-precision decimal, round-trips exactly
std::string format_g17(double x);

std::uint64_t fnv1a(const void* data, std::size_t len);
std::uint64_t fnv1a(const std::string& s);
std::uint64_t fnv1a_file(const std::filesystem::path& p);
std::string hash_hex(std::uint64_t h);

void write_text(const std::filesystem::path& p, const std::string& body);

void write_field_csv(const std::filesystem::path& p, const Field1D& f);   // x,value
void write_field_csv(const std::filesystem::path& p, const Field2D& f);   // x,eta,value
void write_series_csv(const std::filesystem::path& p, const std::string& header,
                      const std::vector<std::vector<double>>& rows);

using ConfigEcho = std::map<std::string, std::string>;

ConfigEcho config_echo(const EvolutionConfig& cfg);

// phi.csv, trace.csv, meta.json
void write_potential(const std::filesystem::path& dir, const PotentialSolve& p);

// traj.csv, u_<k>.csv per sample, outcome.json; extra_json is spliced into
// outcome.json as additional top-level members (pass "{}" for none)
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                      const EvolutionConfig& cfg, const std::string& extra_json = "{}");

void write_branch_csv(const std::filesystem::path& p, const ContinuationResult& br);

void write_stability_json(const std::filesystem::path& p, const StabilityReport& rep);

struct CheckRecord {
    std::string name;
    std::uint64_t inputs_hash = 0;
    std::vector<std::pair<std::string, double>> values;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

void write_check_json(const std::filesystem::path& p, const CheckRecord& rec);

// scans dir, hashes every regular file except manifest.json, writes manifest.json
void write_manifest(const std::filesystem::path& dir, const ConfigEcho& echo,
                    double wall_clock_seconds);

}  // namespace mems::io
