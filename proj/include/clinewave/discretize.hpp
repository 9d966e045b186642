#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "clinewave/grid.hpp"
#include "clinewave/model.hpp"

namespace clinewave {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Symmetric tridiagonal matrix: diag has n entries, off has n-1.
struct Tridiagonal {
    Eigen::VectorXd diag;
    Eigen::VectorXd off;

    int size() const noexcept { return static_cast<int>(diag.size()); }
    Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;
};

/// Discretization of -(B^2+1) d_zz - (r(z) + nu z^2) on the interior nodes of
/// a grid with homogeneous Dirichlet data at both ends.
struct Operator1D {
    Grid1D grid;
    double B;
    double nu;
    Tridiagonal matrix;
    Eigen::VectorXd potential;  ///< r(z_i) + nu z_i^2 at interior nodes
};

/// Throws ParameterError when nu >= delta.
Operator1D assemble_1d(const Grid1D& g, const GrowthProfile& growth, double B, double nu);

/// Discretization of -E(u) - c u_x on a Grid2D, where
/// E(u) = u_xx + (B^2+1) u_zz - 2B u_xz.
///
/// Unknowns are the interior nodes; `boundary` couples interior rows to the
/// full nodal vector (only boundary columns are populated) so that
/// (-E - c d_x) u = interior * u_int + boundary * u_full.
struct Operator2D {
    Grid2D grid;
    double B;
    double c;
    SparseMatrix interior;
    SparseMatrix boundary;

    /// Applies the operator to a full field, returning interior values.
    Eigen::VectorXd apply(const Field& u) const;
    /// Right-hand side contribution -boundary * u_full of Dirichlet data.
    Eigen::VectorXd dirichlet_rhs(const Field& u) const;
};

/// Throws GridError when the cell Peclet number |c| h_x / 2 reaches 1.
Operator2D assemble_2d(const Grid2D& g, double B, double c);
inline Operator2D assemble_2d(const Grid2D& g, const ModelParams& p, double c) {
    return assemble_2d(g, p.B, c);
}

/// -E(u) with the seven-point mixed stencil of positive type. The interior
/// matrix is an M-matrix when |B| h_x <= h_z <= (B^2+1) h_x / |B|; other
/// spacings throw GridError.
Operator2D assemble_monotone(const Grid2D& g, double B);

/// Centered first derivative -d_x in the same layout as Operator2D.
Operator2D assemble_minus_dx(const Grid2D& g);

/// Trapezoid weights; they sum to hi - lo.
Eigen::VectorXd quadrature_weights(const Grid1D& g);

}  // namespace clinewave
