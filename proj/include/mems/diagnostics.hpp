#pragma once

#include <numbers>
#include <string>

#include "mems/evolution.hpp"

namespace mems {

// principal Dirichlet eigenvalue of -d_xx on (-1,1)
inline constexpr double kMu1 = std::numbers::pi * std::numbers::pi / 4.0;

struct EigenData {
    Field1D zeta1;  // (pi/4) cos(pi x / 2), unit L1 mass
    double mu1 = kMu1;
};

EigenData make_eigendata(const Grid1D& g);

struct BlowupParams {
    double lambda = 0.0, eps = 0.0;
    double beta = 0.0;   // sqrt(lambda)/2
    double p = 1.0;      // 1 + 2 mu1 eps^2
    double alpha = 0.0;  // lambda eps^2 / (4 beta^2 + lambda eps^2)
};

BlowupParams make_blowup_params(double lambda, double eps);

struct BlowupCertificate {
    BlowupParams params;
    double F0 = 0.0;
    double lambda_star = 0.0;
    bool has_horizon = false;
    double horizon = 0.0;  // -1/F0 when F0 < 0
};

BlowupCertificate make_certificate(double lambda, double eps);

// weighted energy of the displacement: integral of zeta1 (u + alpha u^2/2)
double energy_Ealpha(const Field1D& u, double alpha);

double blowup_F(double E, const BlowupParams& bp);

double lambda_star(double eps);

struct EnergyReport {
    bool ok = false;
    double max_violation = 0.0;  // max over samples of dE/dt - F(E)
    double tol_dyn = 0.0;
    bool strictly_decreasing = false;
    double F0 = 0.0;
    int samples_used = 0;
    std::string note;
};

EnergyReport check_energy_inequality(const Trajectory& traj, const BlowupParams& bp);

struct IdentityReport {
    double lhs = 0.0, rhs = 0.0;
    double residual = 0.0;  // |lhs - rhs|
};

// membrane-flux identity: weighted trace integral against the weighted
// interior energy; evaluated in transformed coordinates with dz = (1+u) d_eta
IdentityReport check_identity_n5(const PotentialSolve& p, const MembraneProfile& m, double eps,
                                 double p_exp);

// Cauchy-Schwarz lower bound for the weighted vertical energy; returns RHS - LHS
double check_inequality_n4(const PotentialSolve& p, const MembraneProfile& m, double p_exp);

struct NormBundle {
    double sup = 0.0;
    double lq_u = 0.0;
    double lq_du = 0.0;
    double lq_d2u = 0.0;
    double surrogate = 0.0;  // max(sup, lq_du, lq_d2u)
};

NormBundle discrete_norms(const Field1D& u, double q);

}  // namespace mems
