#pragma once

#include <stdexcept>
#include <string>

namespace mems {

// Thrown when a membrane profile loses its gap to the ground plate (min(1+v) <= 0).
struct DegenerateGapError : std::runtime_error {
    explicit DegenerateGapError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by linear-algebra backends; carries a reciprocal condition estimate when available.
struct SolverError : std::runtime_error {
    double rcond;
    explicit SolverError(const std::string& what, double rcond_estimate = -1.0)
        : std::runtime_error(what), rcond(rcond_estimate) {}
};

}  // namespace mems
