#pragma once

#include <vector>

#include <Eigen/Core>

#include "clinewave/discretize.hpp"

namespace clinewave {

/// General banded matrix in LAPACK band storage, with room for the fill-in
/// of a partially pivoted LU factorization.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku);
    /// Copies a sparse matrix; bandwidths are measured from its pattern.
    static BandedMatrix from_sparse(const SparseMatrix& a);

    int size() const noexcept { return n_; }
    int lower() const noexcept { return kl_; }
    int upper() const noexcept { return ku_; }

    /// Adds v to entry (i, j); throws GridError when (i, j) is outside the band.
    void add(int i, int j, double v);
    void add_sparse(const SparseMatrix& a, double scale = 1.0);
    double at(int i, int j) const;

private:
    friend class BandedLU;
    double& ref(int i, int j) { return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)]; }

    int n_;
    int kl_;
    int ku_;
    int ldab_;
    std::vector<double> ab_;
};

/// Partially pivoted LU factorization of a banded matrix (LAPACK dgbtrf).
class BandedLU {
public:
    /// Throws SolverError when the matrix is singular.
    explicit BandedLU(BandedMatrix a);

    int size() const noexcept { return a_.n_; }
    /// Solves A x = rhs in place.
    void solve(Eigen::VectorXd& rhs) const;
    Eigen::VectorXd solve_copy(Eigen::VectorXd rhs) const {
        solve(rhs);
        return rhs;
    }

private:
    BandedMatrix a_;
    std::vector<int> ipiv_;
};

}  // namespace clinewave
