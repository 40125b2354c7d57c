#pragma once

#include <random>

#include "mems/banded.hpp"
#include "mems/grid.hpp"

namespace mems {

struct MembraneProfile {
    Field1D v, dv, d2v;
    double min_gap = 0.0;
};

// Production path: endpoint values projected to zero before differentiating.
MembraneProfile make_profile(const Field1D& v);
// Validation path: values taken as-is (constant test profiles etc.).
MembraneProfile make_profile_analytic(const Field1D& v);

// Random admissible profile for the property suites; deterministic per rng state.
MembraneProfile random_admissible_profile(const Grid1D& g, std::mt19937& rng,
                                          double amp_max = 0.55, bool force_noneven = false);

// Divergence-form coefficient fields of the transformed operator.
struct CoefficientSet {
    Field2D a11, a12, a22, b1, b2;
};

CoefficientSet coefficient_set(const MembraneProfile& m, double eps, const Grid2D& g);

Field2D rhs_fv(const MembraneProfile& m, double eps, const Grid2D& g);

// Discrete negative transformed operator on interior nodes, eta-fastest order.
struct LinearSystem {
    Grid2D grid;
    int ni = 0, nj = 0;  // interior counts: nx-2, neta-2
    BandedMatrix A;

    int index(int i, int j) const { return (i - 1) * nj + (j - 1); }
    // Applies the interior stencil; boundary entries of w are treated as zero
    // (Dirichlet rows and columns are eliminated from A).
    Field2D apply(const Field2D& w) const;
};

LinearSystem assemble(const MembraneProfile& m, double eps, const Grid2D& g);

struct PotentialSolve {
    Field2D Phi;        // homogeneous part, zero on all four edges
    Field2D phi;        // Phi + eta
    Field1D trace;      // d_eta phi(., 1)
    double residual_norm = 0.0;
    double eps = 0.0;
    Field1D v;          // profile snapshot
};

// Homogeneous-Dirichlet solve of the assembled system with a caller RHS.
Field2D solve_dirichlet(const MembraneProfile& m, double eps, const Grid2D& g,
                        const Field2D& rhs, double* residual_norm = nullptr);

PotentialSolve solve_potential(const MembraneProfile& m, double eps, const Grid2D& g);

// Sup error of the discrete solve against a smooth reference field with
// homogeneous boundary data (fixed quadratic profile, trigonometric target);
// used for grid-refinement order studies.
double manufactured_error(double eps, const Grid2D& g);

// One-sided second-order trace of d_eta at eta = 1.
Field1D trace_deta(const Field2D& phi);
Field1D trace_deta(const PotentialSolve& p);

// Nonlocal nonlinearity (1 + eps^2 v'^2)/(1+v)^2 * |d_eta phi(.,1)|^2.
Field1D g_eps(const MembraneProfile& m, double eps, const Grid2D& g);
Field1D g_eps_of(const PotentialSolve& p, const MembraneProfile& m);

// Reconstruction of the physical potential on a z-grid; mask = 1 inside the
// membrane region z <= v(x).
struct PsiField {
    Grid1D xgrid;
    Interval1D zgrid;
    std::vector<double> psi, dpsi_dx, dpsi_dz;
    std::vector<unsigned char> mask;

    size_t idx(int i, int k) const { return static_cast<size_t>(i) * zgrid.n + k; }
};

PsiField reconstruct_psi(const PotentialSolve& p, const MembraneProfile& m,
                         const Interval1D& zgrid);

// Gradients of the reconstruction evaluated on the membrane z = v(x).
struct MembraneGradients {
    Field1D dpsi_dx, dpsi_dz;
};

MembraneGradients membrane_gradients(const PotentialSolve& p, const MembraneProfile& m);

}  // namespace mems
