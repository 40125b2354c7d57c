#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mems/diagnostics.hpp"
#include "mems/elliptic.hpp"
#include "mems/evolution.hpp"
#include "oracles.hpp"

using namespace mems;
namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("principal eigenpair data") {
    const Grid1D g = make_grid1(201);
    const EigenData e = make_eigendata(g);
    CHECK(e.mu1 == doctest::Approx(pi * pi / 4.0).epsilon(1e-15));

    Field1D one = e.zeta1;
    // unit mass up to the composite-Simpson error, O(h^4)
    CHECK(integrate1(one) == doctest::Approx(1.0).epsilon(1e-8));

    const Field1D dd = diff2(e.zeta1);
    double resid = 0.0;
    for (int i = 0; i < g.n; ++i)
        resid = std::max(resid, std::abs(dd[i] + e.mu1 * e.zeta1[i]));
    CHECK(resid < 1e-3);
}

TEST_CASE("weighted energy closed forms") {
    const Grid1D g = make_grid1(201);
    CHECK(energy_Ealpha(make_field1(g, 0.0), 0.3) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(energy_Ealpha(make_field1(g, -0.5), 1.0) ==
          doctest::Approx(-3.0 / 8.0).epsilon(1e-8));
    CHECK(energy_Ealpha(make_field1(g, 0.2), 0.0) == doctest::Approx(0.2).epsilon(1e-8));
    CHECK_THROWS_AS(energy_Ealpha(make_field1(g, 0.0), -0.1), std::invalid_argument);
    CHECK_THROWS_AS(energy_Ealpha(make_field1(g, 0.0), 1.5), std::invalid_argument);
}

TEST_CASE("certificate parameter arithmetic") {
    const BlowupParams bp = make_blowup_params(400.0, 0.1);
    CHECK(bp.beta == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(4.0 * bp.beta * bp.beta == doctest::Approx(400.0).epsilon(1e-14));
    CHECK(bp.p == doctest::Approx(oracle::kP400).epsilon(1e-14));
    CHECK(std::abs(bp.p - 1.049348) < 1e-6);
    CHECK(std::abs(bp.alpha - 4.0 / 404.0) < 1e-9);
    // alpha depends only on the aspect ratio
    CHECK(make_blowup_params(7.0, 0.1).alpha == doctest::Approx(bp.alpha).epsilon(1e-13));

    CHECK(lambda_star(0.0) == doctest::Approx(pi * pi * pi * pi).epsilon(1e-13));
    CHECK(lambda_star(0.1) == doctest::Approx(oracle::kLambdaStar01).epsilon(1e-12));

    CHECK_THROWS_AS(make_blowup_params(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("certificate endpoint values are the frozen references") {
    const BlowupCertificate c400 = make_certificate(400.0, 0.1);
    CHECK(c400.F0 == doctest::Approx(oracle::kF0_400).epsilon(1e-12));
    CHECK(c400.has_horizon);
    CHECK(c400.horizon == doctest::Approx(oracle::kHorizon400).epsilon(1e-12));
    CHECK(std::abs(c400.F0 - (-33.40)) < 0.05);
    CHECK(std::abs(c400.horizon - 0.0299) < 1e-4);

    const BlowupCertificate c120 = make_certificate(120.0, 0.1);
    CHECK(c120.F0 == doctest::Approx(oracle::kF0_120).epsilon(1e-12));
    CHECK(c120.horizon == doctest::Approx(oracle::kHorizon120).epsilon(1e-12));

    // small lambda: no negative starting value, no horizon
    const BlowupCertificate small = make_certificate(1.0, 0.1);
    CHECK(!small.has_horizon);
}

TEST_CASE("certificate envelope is monotone and dominated near the threshold") {
    const BlowupParams bp = make_blowup_params(150.0, 0.1);
    double prev = blowup_F(-0.9, bp);
    for (double E = -0.8; E < 2.0; E += 0.1) {
        const double val = blowup_F(E, bp);
        CHECK(val > prev);
        prev = val;
    }
    CHECK_THROWS_AS(blowup_F(-1.0, bp), std::domain_error);

    // above the threshold the starting value sits below mu1 - sqrt(lambda)/(2(1+eps^2))
    for (double lam : {100.0, 150.0, 200.0, 400.0}) {
        const BlowupParams b = make_blowup_params(lam, 0.1);
        const double bound = kMu1 - std::sqrt(lam) / (2.0 * (1.0 + 0.01));
        CHECK(blowup_F(0.0, b) <= bound);
    }
}

TEST_CASE("flux identity: flat and constant profiles hit their closed forms") {
    const int n = 201;
    const Grid1D g = make_grid1(n);
    const Grid2D g2 = make_grid2(n, 101);
    const double eps = 0.1;

    {
        const MembraneProfile m = make_profile(make_field1(g, 0.0));
        const PotentialSolve p = solve_potential(m, eps, g2);
        for (double pe : {1.0, 2.0}) {
            const IdentityReport rep = check_identity_n5(p, m, eps, pe);
            CHECK(rep.residual < 1e-8);
            CHECK(rep.lhs == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    {
        const MembraneProfile m = make_profile_analytic(make_field1(g, -0.5));
        const PotentialSolve p = solve_potential(m, eps, g2);
        const IdentityReport r1 = check_identity_n5(p, m, eps, 1.0);
        CHECK(std::abs(r1.lhs - oracle::kN5ConstLhs) < 1e-6);
        CHECK(std::abs(r1.rhs - oracle::kN5ConstRhsP1) < 1e-6);
        const IdentityReport r2 = check_identity_n5(p, m, eps, 2.0);
        CHECK(std::abs(r2.lhs - oracle::kN5ConstLhs) < 1e-6);
        CHECK(std::abs(r2.rhs - oracle::kN5ConstRhsP2) < 1e-6);
    }
}

TEST_CASE("flux identity: generic residual shrinks under refinement") {
    const double eps = 0.1;
    auto resid = [&](int n, double pe) {
        const Grid1D g = make_grid1(n);
        const Field1D v = sample1(g, [](double x) { return -0.25 * (1.0 - x * x); });
        const MembraneProfile m = make_profile(v);
        const Grid2D g2 = make_grid2(n, (n + 1) / 2);
        return check_identity_n5(solve_potential(m, eps, g2), m, eps, pe).residual;
    };
    for (double pe : {1.0, 2.0}) {
        const double ratio = resid(101, pe) / resid(201, pe);
        CHECK(ratio >= 1.7);
    }
}

TEST_CASE("vertical-energy lower bound has nonnegative margin up to discretization") {
    const int n = 151;
    const Grid1D g = make_grid1(n);
    const Grid2D g2 = make_grid2(n, 76);
    const double floor = -10.0 * g.h;
    auto margin_ok = [&](const MembraneProfile& m) {
        const PotentialSolve p = solve_potential(m, 0.1, g2);
        for (double pe : {1.0, 2.0}) CHECK(check_inequality_n4(p, m, pe) >= floor);
    };
    margin_ok(make_profile(make_field1(g, 0.0)));
    margin_ok(make_profile_analytic(make_field1(g, -0.4)));
    std::mt19937 rng(5);
    for (int k = 0; k < 3; ++k) margin_ok(random_admissible_profile(g, rng));
}

TEST_CASE("discrete norm bundle") {
    const Grid1D g = make_grid1(201);
    const Field1D c = make_field1(g, -0.7);
    const NormBundle nb = discrete_norms(c, 4.0);
    CHECK(nb.sup == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(nb.lq_du == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(nb.surrogate == doctest::Approx(0.7).epsilon(1e-12));

    const Field1D s = sample1(g, [](double x) { return std::sin(pi * x); });
    const NormBundle ns = discrete_norms(s, 4.0);
    // ||pi cos(pi x)||_{L4(-1,1)} = pi (3/4)^(1/4)
    CHECK(ns.lq_du == doctest::Approx(pi * std::pow(0.75, 0.25)).epsilon(0.01));
    CHECK_THROWS_AS(discrete_norms(c, 1.0), std::invalid_argument);
}

TEST_CASE("energy inequality holds along a touchdown run of the reduced model") {
    const Grid1D g = make_grid1(201);
    EvolutionConfig cfg;
    cfg.lambda = 120.0;
    cfg.eps = 0.0;
    cfg.dt0 = 1e-5;
    cfg.t_end = 0.01;
    cfg.sample_every = 5;
    // the collapse steepens the boundary layers; keep the admissibility gate
    // out of the way so the run terminates by touchdown
    cfg.kappa = 1e-3;
    cfg.touchdown_tol = 1e-4;
    const Trajectory traj = evolve_small_aspect(make_field1(g, 0.0), cfg);
    REQUIRE(traj.outcome == Outcome::Touchdown);
    CHECK(std::abs(traj.t_event - oracle::kTouchdownZeroL120) < 3e-4);

    const BlowupParams bp = make_blowup_params(120.0, 0.0);
    const EnergyReport rep = check_energy_inequality(traj, bp);
    CHECK(rep.ok);
    CHECK(rep.strictly_decreasing);
    CHECK(rep.samples_used > 10);
    CHECK(rep.F0 < 0.0);
}
