#pragma once

#include <vector>

// Independent reference computations and frozen reference numbers for the
// test suites.  Everything here is deliberately self-contained: plain RK4
// shooting and closed-form arithmetic, no dependence on the library under
// test.
namespace oracle {

// reduced-model fold point (shooting + bisection)
inline constexpr double kPullIn0 = 0.3500041193;

// reduced-model touchdown times (adaptive reference integration)
inline constexpr double kTouchdownBowlL1 = 0.1627;      // lambda=1, u0=-0.3(1-x^2)
inline constexpr double kTouchdownZeroL05 = 1.3109;     // lambda=0.5, u0=0
inline constexpr double kTouchdownZeroL10 = 0.033362;   // lambda=10, u0=0
inline constexpr double kTouchdownZeroL120 = 0.002790;  // lambda=120, u0=0

// certificate arithmetic at (lambda, eps) = (400, 0.1) and (120, 0.1)
inline constexpr double kP400 = 1.0493480220054468;  // 1 + 2 mu1 eps^2
inline constexpr double kF0_400 = -33.39655172615422;
inline constexpr double kHorizon400 = 0.029943211149457044;
inline constexpr double kF0_120 = -16.728295416047961;
inline constexpr double kHorizon120 = 0.059778953870020115;
inline constexpr double kLambdaStar01 = 99.36701376378589;  // 16 mu1^2 (1+eps^2)^2

// elliptic anchors for v = -0.25(1-x^2), eps = 0.1, on the 201x101 grid
inline constexpr double kAnchorGMid = 1.782223426601;        // g at x = 0
inline constexpr double kAnchorGHalf = 1.518577300863;       // g at x = +-0.5
inline constexpr double kAnchorPhiMid = -2.341179162595e-4;  // Phi(0, 1/2)
inline constexpr double kAnchorPhiMax = 2.403145104758e-4;   // sup |Phi|
inline constexpr double kAnchorTol = 1e-7;

// closed forms of the flux identity for the constant profile c=-0.5, eps=0.1
inline constexpr double kN5ConstLhs = 2.0;
inline constexpr double kN5ConstRhsP1 = 2.004112335167120;
inline constexpr double kN5ConstRhsP2 = 2.003084251375340;

// FNV-1a 64 known vectors
inline constexpr unsigned long long kFnvEmpty = 0xcbf29ce484222325ull;
inline constexpr unsigned long long kFnvA = 0xaf63dc4c8601ec8cull;

struct ShootResult {
    bool exists = false;
    std::vector<double> U;  // on the requested x grid when exists
};

// Shallow-branch solution of U'' = lambda/(1+U)^2, U(+-1) = 0 by RK4
// shooting from the midpoint and bisection on the end value.
ShootResult shoot_steady(double lambda, const std::vector<double>& x);

// Fold point of the reduced model: bisection on solution existence.
double pull_in_lambda();

}  // namespace oracle
