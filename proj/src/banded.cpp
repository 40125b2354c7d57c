#include "mems/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mems/errors.hpp"

namespace mems {

BandedMatrix::BandedMatrix(int n_, int kl_, int ku_) : n(n_), kl(kl_), ku(ku_) {
    if (n <= 0 || kl < 0 || ku < 0) throw std::invalid_argument("bad banded matrix shape");
    ldab = 2 * kl + ku + 1;
    ab.assign(static_cast<size_t>(ldab) * n, 0.0);
}

double& BandedMatrix::at(int r, int c) {
    if (r < 0 || c < 0 || r >= n || c >= n || r - c > kl || c - r > ku)
        throw std::out_of_range("banded entry outside band");
    return ab[static_cast<size_t>(c) * ldab + (kl + ku + r - c)];
}

double BandedMatrix::get(int r, int c) const {
    if (r < 0 || c < 0 || r >= n || c >= n || r - c > kl || c - r > ku) return 0.0;
    return ab[static_cast<size_t>(c) * ldab + (kl + ku + r - c)];
}

std::vector<double> BandedMatrix::apply(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != n) throw std::invalid_argument("apply: size mismatch");
    std::vector<double> y(v.size(), 0.0);
    for (int c = 0; c < n; ++c) {
        const int r0 = std::max(0, c - ku), r1 = std::min(n - 1, c + kl);
        for (int r = r0; r <= r1; ++r)
            y[r] += ab[static_cast<size_t>(c) * ldab + (kl + ku + r - c)] * v[c];
    }
    return y;
}

double BandedMatrix::inf_norm() const {
    std::vector<double> rowsum(n, 0.0);
    for (int c = 0; c < n; ++c) {
        const int r0 = std::max(0, c - ku), r1 = std::min(n - 1, c + kl);
        for (int r = r0; r <= r1; ++r)
            rowsum[r] += std::abs(ab[static_cast<size_t>(c) * ldab + (kl + ku + r - c)]);
    }
    double m = 0.0;
    for (double s : rowsum) m = std::max(m, s);
    return m;
}

BandedLU::BandedLU(const BandedMatrix& a)
    : n_(a.n), kl_(a.kl), ku_(a.ku), ldab_(a.ldab), fac_(a.ab), ipiv_(a.n) {
    // 1-norm (column sums) of the original matrix, for the condition estimate
    double m = 0.0;
    for (int c = 0; c < n_; ++c) {
        double s = 0.0;
        const int r0 = std::max(0, c - ku_), r1 = std::min(n_ - 1, c + kl_);
        for (int r = r0; r <= r1; ++r)
            s += std::abs(a.ab[static_cast<size_t>(c) * ldab_ + (kl_ + ku_ + r - c)]);
        m = std::max(m, s);
    }
    anorm_ = m;
    const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, fac_.data(),
                                           ldab_, ipiv_.data());
    if (info < 0) throw SolverError("dgbtrf: bad argument " + std::to_string(-info));
    if (info > 0)
        throw SolverError("banded factorization singular at pivot " + std::to_string(info), 0.0);
}

std::vector<double> BandedLU::solve(std::vector<double> rhs) const {
    if (static_cast<int>(rhs.size()) != n_) throw std::invalid_argument("solve: size mismatch");
    const lapack_int info =
        LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, fac_.data(), ldab_, ipiv_.data(),
                       rhs.data(), n_);
    if (info != 0) throw SolverError("dgbtrs failed, info " + std::to_string(info));
    return rhs;
}

double BandedLU::rcond() const {
    double rc = 0.0;
    const lapack_int info = LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', n_, kl_, ku_, fac_.data(),
                                           ldab_, ipiv_.data(), anorm_, &rc);
    if (info != 0) throw SolverError("dgbcon failed, info " + std::to_string(info));
    return rc;
}

std::vector<double> Tridiag::solve(std::vector<double> rhs) const {
    const int n = static_cast<int>(diag.size());
    if (static_cast<int>(rhs.size()) != n || static_cast<int>(lower.size()) != n - 1 ||
        static_cast<int>(upper.size()) != n - 1)
        throw std::invalid_argument("tridiagonal solve: size mismatch");
    std::vector<double> dl = lower, d = diag, du = upper;
    const lapack_int info =
        LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), d.data(), du.data(), rhs.data(), n);
    if (info < 0) throw SolverError("dgtsv: bad argument " + std::to_string(-info));
    if (info > 0)
        throw SolverError("tridiagonal system singular at pivot " + std::to_string(info), 0.0);
    return rhs;
}

}  // namespace mems
