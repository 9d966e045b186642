#include "clinewave/discretize.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "clinewave/error.hpp"

namespace clinewave {

Eigen::VectorXd Tridiagonal::multiply(const Eigen::VectorXd& v) const {
    const int n = size();
    Eigen::VectorXd out = diag.cwiseProduct(v);
    for (int i = 0; i + 1 < n; ++i) {
        out[i] += off[i] * v[i + 1];
        out[i + 1] += off[i] * v[i];
    }
    return out;
}

Operator1D assemble_1d(const Grid1D& g, const GrowthProfile& growth, double B, double nu) {
    if (!(nu >= 0.0)) throw ParameterError("assemble_1d: nu must be nonnegative");
    if (!(nu < growth.delta())) {
        std::ostringstream os;
        os << "assemble_1d: nu=" << nu << " must stay below delta=" << growth.delta();
        throw ParameterError(os.str());
    }
    const int m = g.interior_size();
    const double h = g.spacing();
    const double D = B * B + 1.0;
    Operator1D op{g, B, nu, {Eigen::VectorXd(m), Eigen::VectorXd::Constant(std::max(m - 1, 0), -D / (h * h))},
                  Eigen::VectorXd(m)};
    for (int k = 0; k < m; ++k) {
        const double z = g.node(k + 1);
        op.potential[k] = growth(z) + nu * z * z;
        op.matrix.diag[k] = 2.0 * D / (h * h) - op.potential[k];
    }
    return op;
}

namespace {

struct Assembler {
    const Grid2D& g;
    std::vector<Eigen::Triplet<double>> inner;
    std::vector<Eigen::Triplet<double>> edge;

    void add(int i, int j, int ii, int jj, double v) {
        if (v == 0.0) return;
        const int row = g.interior_index(i, j);
        if (ii == 0 || jj == 0 || ii == g.nx() - 1 || jj == g.nz() - 1) {
            edge.emplace_back(row, ii * g.nz() + jj, v);
        } else {
            inner.emplace_back(row, g.interior_index(ii, jj), v);
        }
    }

    Operator2D finish(double B, double c) {
        Operator2D op{g, B, c, SparseMatrix(g.interior_size(), g.interior_size()),
                      SparseMatrix(g.interior_size(), g.nx() * g.nz())};
        op.interior.setFromTriplets(inner.begin(), inner.end());
        op.boundary.setFromTriplets(edge.begin(), edge.end());
        return op;
    }
};

}  // namespace

Operator2D assemble_2d(const Grid2D& g, double B, double c) {
    const double hx = g.x().spacing();
    const double hz = g.z().spacing();
    if (std::abs(c) * hx / 2.0 >= 1.0) {
        std::ostringstream os;
        os << "assemble_2d: cell Peclet number |c| h_x / 2 = " << std::abs(c) * hx / 2.0
           << " >= 1; refine the x grid";
        throw GridError(os.str());
    }
    const double D = B * B + 1.0;
    const double cxx = 1.0 / (hx * hx);
    const double czz = D / (hz * hz);
    const double cross = B / (2.0 * hx * hz);  // 2B * 1/(4 hx hz)
    const double adv = c / (2.0 * hx);

    Assembler as{g, {}, {}};
    as.inner.reserve(static_cast<std::size_t>(g.interior_size()) * 9);
    for (int i = 1; i < g.nx() - 1; ++i) {
        for (int j = 1; j < g.nz() - 1; ++j) {
            as.add(i, j, i, j, 2.0 * cxx + 2.0 * czz);
            as.add(i, j, i + 1, j, -cxx - adv);
            as.add(i, j, i - 1, j, -cxx + adv);
            as.add(i, j, i, j + 1, -czz);
            as.add(i, j, i, j - 1, -czz);
            as.add(i, j, i + 1, j + 1, cross);
            as.add(i, j, i - 1, j - 1, cross);
            as.add(i, j, i + 1, j - 1, -cross);
            as.add(i, j, i - 1, j + 1, -cross);
        }
    }
    return as.finish(B, c);
}

Operator2D assemble_monotone(const Grid2D& g, double B) {
    const double hx = g.x().spacing();
    const double hz = g.z().spacing();
    const double D = B * B + 1.0;
    const double m = std::abs(B) / (hx * hz);
    const double cxx = 1.0 / (hx * hx);
    const double czz = D / (hz * hz);
    if (cxx < m * (1.0 - 1e-12) || czz < m * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "assemble_monotone: need |B| h_x <= h_z <= (B^2+1) h_x / |B|, got h_x=" << hx << ", h_z=" << hz
           << ", B=" << B;
        throw GridError(os.str());
    }
    // The mixed derivative uses the diagonal pair whose coefficient is then
    // nonpositive: (i+1, j-1), (i-1, j+1) for B > 0, the other pair for B < 0.
    const int dj = B >= 0.0 ? -1 : 1;
    Assembler as{g, {}, {}};
    as.inner.reserve(static_cast<std::size_t>(g.interior_size()) * 7);
    for (int i = 1; i < g.nx() - 1; ++i) {
        for (int j = 1; j < g.nz() - 1; ++j) {
            as.add(i, j, i, j, 2.0 * cxx + 2.0 * czz - 2.0 * m);
            as.add(i, j, i + 1, j, -cxx + m);
            as.add(i, j, i - 1, j, -cxx + m);
            as.add(i, j, i, j + 1, -czz + m);
            as.add(i, j, i, j - 1, -czz + m);
            as.add(i, j, i + 1, j + dj, -m);
            as.add(i, j, i - 1, j - dj, -m);
        }
    }
    return as.finish(B, 0.0);
}

Operator2D assemble_minus_dx(const Grid2D& g) {
    const double adv = 1.0 / (2.0 * g.x().spacing());
    Assembler as{g, {}, {}};
    for (int i = 1; i < g.nx() - 1; ++i) {
        for (int j = 1; j < g.nz() - 1; ++j) {
            as.add(i, j, i + 1, j, -adv);
            as.add(i, j, i - 1, j, adv);
        }
    }
    return as.finish(0.0, 1.0);
}

Eigen::VectorXd Operator2D::apply(const Field& u) const {
    const Eigen::Map<const Eigen::VectorXd> full(u.data(), u.size());
    return interior * interior_values(grid, u) + boundary * full;
}

Eigen::VectorXd Operator2D::dirichlet_rhs(const Field& u) const {
    const Eigen::Map<const Eigen::VectorXd> full(u.data(), u.size());
    return -(boundary * full);
}

Eigen::VectorXd quadrature_weights(const Grid1D& g) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(g.size(), g.spacing());
    w[0] *= 0.5;
    w[g.size() - 1] *= 0.5;
    return w;
}

}  // namespace clinewave
