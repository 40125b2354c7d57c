#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mems/elliptic.hpp"
#include "mems/grid.hpp"

namespace mems {

enum class Scheme { BackwardEulerImex, CrankNicolsonImex };

Scheme scheme_from_name(const std::string& name);
std::string scheme_name(Scheme s);

struct EvolutionConfig {
    double lambda = 1.0;          // voltage parameter, >= 0
    double eps = 0.1;             // aspect ratio, >= 0
    double dt0 = 1e-3;            // initial step
    double t_end = 1.0;           // horizon
    double touchdown_tol = 1e-3;  // gap threshold, in (0, kappa)
    double kappa = 0.01;          // admissibility parameter, in (0,1)
    Scheme scheme = Scheme::BackwardEulerImex;
    int sample_every = 10;
    int neta = 0;                 // 2D solve resolution; 0 -> (n+1)/2
    double q_norm = 4.0;          // exponent of the discrete norm surrogate
};

void validate(const EvolutionConfig& c);

struct EvolutionState {
    double t = 0.0;
    Field1D u;
    double dt = 0.0;
    Field1D g_last;  // last computed nonlinearity, empty before the first evaluation
    double min_gap = 0.0;
};

struct Sample {
    double t = 0.0;
    Field1D u;
    double min_gap = 0.0;
    double u_mid = 0.0;
    double E_alpha = 0.0;
    double g_max = 0.0;
    double dt = 0.0;
};

enum class Outcome { ReachedHorizon, Touchdown, AdmissibilityExit, SolverFailure };

std::string outcome_name(Outcome o);

struct Trajectory {
    std::vector<Sample> samples;
    Outcome outcome = Outcome::ReachedHorizon;
    double t_event = 0.0;       // touchdown/exit/failure time, or the reached horizon
    double t_td_bracket = 0.0;  // bisection resolution of the touchdown time
    std::string note;
};

// One IMEX step of the full free-boundary model; diffusion implicit,
// nonlinearity from the elliptic solve explicit.  If the gap collapses below
// touchdown_tol mid-step, the step size is bisected so the returned state sits
// at the touchdown threshold (within dt/100 in time).
EvolutionState step_fbp(const EvolutionState& s, const EvolutionConfig& c);

Trajectory evolve_fbp(const Field1D& u0, const EvolutionConfig& c);

// Small-aspect-ratio variant: g replaced by the pointwise 1/(1+u)^2.
EvolutionState step_small_aspect(const EvolutionState& s, const EvolutionConfig& c);

Trajectory evolve_small_aspect(const Field1D& u0, const EvolutionConfig& c);

// Closed-form limit potential (1+z)/(1+u0) on the physical strip.
PsiField psi0_closed_form(const Field1D& u0, const Interval1D& zgrid);

struct LimitEntry {
    double eps = 0.0;
    double e_u = std::numeric_limits<double>::quiet_NaN();
    double e_psi = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string note;
};

struct LimitReport {
    std::vector<LimitEntry> entries;
    double slope_u = std::numeric_limits<double>::quiet_NaN();    // log e_u vs log eps
    double slope_psi = std::numeric_limits<double>::quiet_NaN();  // log e_psi vs log eps
    bool reference_ok = false;
    std::string reference_note;
};

// Runs the full model for each eps and the small-aspect reference, compares
// displacements on [0,tau] and potentials at t=tau on I x (-1,0).
LimitReport compare_limit(const Field1D& u0, double lambda, const std::vector<double>& eps_list,
                          double tau, const EvolutionConfig& c, int jobs = 1);

struct ScalingEntry {
    double eps = 0.0;
    double n_phi = 0.0;        // L2 of Phi
    double n_dphi_eta = 0.0;   // L2 of d_eta Phi
    double n_dphi_xeta = 0.0;  // L2 of d_x d_eta Phi
    double n_d2phi_eta = 0.0;  // L2 of d_eta^2 Phi
    double n_trace = 0.0;      // L2(I) of d_eta Phi(.,1)
};

struct ScalingReport {
    std::vector<ScalingEntry> entries;
    // max/min of (norm / predicted eps power) across the list, powers 1,1,1,2,1
    double var_phi = 0.0, var_deta = 0.0, var_dxdeta = 0.0, var_d2eta = 0.0, var_trace = 0.0;
};

ScalingReport phi_scaling_probe(const MembraneProfile& m, const std::vector<double>& eps_list,
                                const Grid2D& g);

}  // namespace mems
