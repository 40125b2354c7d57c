#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mems/evolution.hpp"

namespace mems {

struct SteadyState {
    double lambda = 0.0, eps = 0.0;
    Field1D U;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    Field1D trace;  // membrane trace of the associated potential
    bool converged = false;
    std::string note;
};

struct BranchPoint {
    double lambda = 0.0;
    SteadyState state;
    bool ok = false;
};

struct ContinuationResult {
    std::vector<BranchPoint> points;
    double last_converged_lambda = 0.0;
};

// Discrete inverse of -d_xx with homogeneous Dirichlet data; exact for the
// 3-point operator.
Field1D poisson_inverse(const Field1D& f);

// A_h u on interior nodes (boundary rows zero); companion of poisson_inverse.
Field1D poisson_apply(const Field1D& u);

struct SteadyOptions {
    double tol = 1e-9;
    int max_iter = 400;
    int neta = 0;  // 2D resolution for the elliptic nonlinearity; 0 -> (n+1)/2
};

// Fixed-point iteration U <- poisson_inverse(-lambda g(U)); g is the elliptic
// nonlinearity for eps > 0 and the pointwise 1/(1+U)^2 for eps = 0.
SteadyState steady_fixed_point(double lambda, double eps, const Field1D& U_init,
                               const SteadyOptions& opt = {});

// Newton on U - poisson_inverse(-lambda g(U)) with a forward-difference
// Jacobian; falls back to the fixed point on failure.
SteadyState steady_newton(double lambda, double eps, const Field1D& U_init,
                          const SteadyOptions& opt = {});

// Upward march in lambda with warm starts; stops at the first lambda where
// both solvers fail after 3 step halvings.
ContinuationResult continuation(double lambda_max, int steps, double eps, const Grid1D& g,
                                const SteadyOptions& opt = {});

struct StabilityReport {
    bool ok = false;
    std::string note;
    double lambda = 0.0, eps = 0.0;
    double omega_hat = std::numeric_limits<double>::quiet_NaN();
    double r2 = std::numeric_limits<double>::quiet_NaN();
    double omega_phi = std::numeric_limits<double>::quiet_NaN();
    double r2_phi = std::numeric_limits<double>::quiet_NaN();
    double fit_t0 = 0.0, fit_t1 = 0.0;
    SteadyState steady;
};

// Perturbs the steady state by r (1-x^2) cos(pi x/2) and fits the decay rate
// of the displacement (and for eps > 0 of the potential) over the last half
// of the run.
StabilityReport decay_rate(double lambda, double eps, double r, double t_end, const Grid1D& g,
                           const SteadyOptions& opt = {});

}  // namespace mems
