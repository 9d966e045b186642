#pragma once

#include <Eigen/Core>

namespace clinewave {

/// Uniform 1D grid on [lo, hi] with an odd number of nodes (>= 3).
class Grid1D {
public:
    Grid1D(double lo, double hi, int n);
    /// Grid on [-half_width, half_width]; 0 is the middle node.
    static Grid1D symmetric(double half_width, int n);
    /// Symmetric grid whose spacing does not exceed h.
    static Grid1D with_spacing(double half_width, double h);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    int size() const noexcept { return n_; }
    double spacing() const noexcept { return (hi_ - lo_) / (n_ - 1); }
    double node(int i) const noexcept { return lo_ + i * spacing(); }
    int interior_size() const noexcept { return n_ - 2; }
    /// Index of the node at 0, or -1 when 0 is not a node.
    int zero_index() const noexcept;
    Eigen::VectorXd nodes() const;

private:
    double lo_;
    double hi_;
    int n_;
};

/// Box (-a, a) x (-b, b); x is the moving-frame space variable, z the trait
/// offset from the local optimum.
class Grid2D {
public:
    Grid2D(double a, double b, int nx, int nz);

    const Grid1D& x() const noexcept { return x_; }
    const Grid1D& z() const noexcept { return z_; }
    double a() const noexcept { return x_.hi(); }
    double b() const noexcept { return z_.hi(); }
    int nx() const noexcept { return x_.size(); }
    int nz() const noexcept { return z_.size(); }
    int interior_size() const noexcept { return (nx() - 2) * (nz() - 2); }
    /// Interior unknowns are ordered x-major, z-minor.
    int interior_index(int i, int j) const noexcept { return (i - 1) * (nz() - 2) + (j - 1); }

private:
    Grid1D x_;
    Grid1D z_;
};

/// Nodal samples on a Grid2D: row i is the column x = x_i, entry (i, j) is z = z_j.
using Field = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Field make_field(const Grid2D& g, double value = 0.0);
/// Copies interior values of a field into an unknown vector.
Eigen::VectorXd interior_values(const Grid2D& g, const Field& u);
/// Writes an unknown vector into the interior of a field, leaving edges untouched.
void set_interior(const Grid2D& g, const Eigen::VectorXd& v, Field& u);

/// Bilinear interpolation of a field at (x, z). Points outside the box are
/// clamped to it; `clamped` is set when that happens.
double bilinear(const Grid2D& g, const Field& u, double x, double z, bool* clamped = nullptr);

}  // namespace clinewave
