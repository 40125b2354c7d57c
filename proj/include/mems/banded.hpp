#pragma once

#include <vector>

namespace mems {

// General banded matrix in LAPACK band storage (column-major, with kl extra
// rows on top for LU fill-in, as dgbtrf expects).
struct BandedMatrix {
    int n = 0, kl = 0, ku = 0;
    int ldab = 0;  // 2*kl + ku + 1
    std::vector<double> ab;

    BandedMatrix() = default;
    BandedMatrix(int n_, int kl_, int ku_);

    double& at(int r, int c);
    double get(int r, int c) const;  // zero outside the band
    std::vector<double> apply(const std::vector<double>& v) const;
    double inf_norm() const;
};

// LU factorization (dgbtrf) with repeated solves (dgbtrs).
struct BandedLU {
    explicit BandedLU(const BandedMatrix& a);  // factors; throws SolverError if singular
    std::vector<double> solve(std::vector<double> rhs) const;
    double rcond() const;  // reciprocal condition estimate in the 1-norm

  private:
    int n_ = 0, kl_ = 0, ku_ = 0, ldab_ = 0;
    std::vector<double> fac_;
    std::vector<int> ipiv_;
    double anorm_ = 0.0;
};

// Tridiagonal solve (dgtsv); bands are copied per call since LAPACK destroys them.
struct Tridiag {
    std::vector<double> lower, diag, upper;  // sizes n-1, n, n-1
    std::vector<double> solve(std::vector<double> rhs) const;
};

}  // namespace mems
