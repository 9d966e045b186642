#include "clinewave/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <sstream>

#include "clinewave/error.hpp"

namespace clinewave {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
      ab_(static_cast<std::size_t>(ldab_) * static_cast<std::size_t>(n), 0.0) {
    if (n <= 0 || kl < 0 || ku < 0) throw GridError("banded matrix: invalid dimensions");
}

BandedMatrix BandedMatrix::from_sparse(const SparseMatrix& a) {
    int kl = 0;
    int ku = 0;
    for (int r = 0; r < a.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
            kl = std::max(kl, static_cast<int>(it.row() - it.col()));
            ku = std::max(ku, static_cast<int>(it.col() - it.row()));
        }
    }
    BandedMatrix m(static_cast<int>(a.rows()), kl, ku);
    m.add_sparse(a);
    return m;
}

void BandedMatrix::add(int i, int j, double v) {
    if (i - j > kl_ || j - i > ku_ || i < 0 || j < 0 || i >= n_ || j >= n_) {
        std::ostringstream os;
        os << "banded matrix: entry (" << i << ", " << j << ") outside band";
        throw GridError(os.str());
    }
    ref(i, j) += v;
}

void BandedMatrix::add_sparse(const SparseMatrix& a, double scale) {
    for (int r = 0; r < a.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
            add(static_cast<int>(it.row()), static_cast<int>(it.col()), scale * it.value());
        }
    }
}

double BandedMatrix::at(int i, int j) const {
    if (i - j > kl_ || j - i > ku_) return 0.0;
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
}

BandedLU::BandedLU(BandedMatrix a) : a_(std::move(a)), ipiv_(static_cast<std::size_t>(a_.n_)) {
    const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, a_.n_, a_.n_, a_.kl_, a_.ku_, a_.ab_.data(),
                                           a_.ldab_, ipiv_.data());
    if (info != 0) {
        std::ostringstream os;
        os << "banded LU: factorization failed (info=" << info << ")";
        throw SolverError(os.str());
    }
}

void BandedLU::solve(Eigen::VectorXd& rhs) const {
    if (rhs.size() != a_.n_) throw SolverError("banded LU: right-hand side has wrong length");
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', a_.n_, a_.kl_, a_.ku_, 1, a_.ab_.data(),
                                           a_.ldab_, ipiv_.data(), rhs.data(), a_.n_);
    if (info != 0) throw SolverError("banded LU: triangular solve failed");
}

}  // namespace clinewave
