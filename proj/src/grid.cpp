#include "clinewave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clinewave/error.hpp"

namespace clinewave {

Grid1D::Grid1D(double lo, double hi, int n) : lo_(lo), hi_(hi), n_(n) {
    if (!(hi > lo)) throw GridError("grid: hi must exceed lo");
    if (n < 3 || n % 2 == 0) {
        std::ostringstream os;
        os << "grid: node count must be odd and >= 3 (got " << n << ")";
        throw GridError(os.str());
    }
}

Grid1D Grid1D::symmetric(double half_width, int n) {
    if (!(half_width > 0.0)) throw GridError("grid: half-width must be positive");
    return Grid1D(-half_width, half_width, n);
}

Grid1D Grid1D::with_spacing(double half_width, double h) {
    if (!(h > 0.0)) throw GridError("grid: spacing must be positive");
    const int cells_per_side = std::max(1, static_cast<int>(std::ceil(half_width / h - 1e-9)));
    return symmetric(half_width, 2 * cells_per_side + 1);
}

int Grid1D::zero_index() const noexcept {
    const double h = spacing();
    const double pos = -lo_ / h;
    const long k = std::lround(pos);
    if (k < 0 || k >= n_ || std::abs(node(static_cast<int>(k))) > 1e-9 * std::max(1.0, h)) return -1;
    return static_cast<int>(k);
}

Eigen::VectorXd Grid1D::nodes() const {
    Eigen::VectorXd z(n_);
    for (int i = 0; i < n_; ++i) z[i] = node(i);
    return z;
}

Grid2D::Grid2D(double a, double b, int nx, int nz)
    : x_(Grid1D::symmetric(a, nx)), z_(Grid1D::symmetric(b, nz)) {}

Field make_field(const Grid2D& g, double value) { return Field::Constant(g.nx(), g.nz(), value); }

Eigen::VectorXd interior_values(const Grid2D& g, const Field& u) {
    const int mz = g.nz() - 2;
    Eigen::VectorXd v(g.interior_size());
    for (int i = 1; i < g.nx() - 1; ++i) {
        v.segment((i - 1) * mz, mz) = u.row(i).segment(1, mz).transpose();
    }
    return v;
}

void set_interior(const Grid2D& g, const Eigen::VectorXd& v, Field& u) {
    const int mz = g.nz() - 2;
    for (int i = 1; i < g.nx() - 1; ++i) {
        u.row(i).segment(1, mz) = v.segment((i - 1) * mz, mz).transpose();
    }
}

double bilinear(const Grid2D& g, const Field& u, double x, double z, bool* clamped) {
    // Offsets within 1e-9 cells of a node are snapped onto it.
    constexpr double snap = 1e-9;
    auto cell = [](double s) { return std::abs(s - std::round(s)) < snap ? std::round(s) : s; };
    double sx = cell((x - g.x().lo()) / g.x().spacing());
    double sz = cell((z - g.z().lo()) / g.z().spacing());
    const bool out = sx < 0.0 || sx > g.nx() - 1 || sz < 0.0 || sz > g.nz() - 1;
    if (clamped) *clamped = out;
    sx = std::clamp(sx, 0.0, static_cast<double>(g.nx() - 1));
    sz = std::clamp(sz, 0.0, static_cast<double>(g.nz() - 1));
    const int i = std::min(static_cast<int>(sx), g.nx() - 2);
    const int j = std::min(static_cast<int>(sz), g.nz() - 2);
    const double fx = sx - i;
    const double fz = sz - j;
    return (1 - fx) * (1 - fz) * u(i, j) + fx * (1 - fz) * u(i + 1, j) + (1 - fx) * fz * u(i, j + 1) +
           fx * fz * u(i + 1, j + 1);
}

}  // namespace clinewave
