#include <cmath>

#include "doctest.h"

#include "clinewave/discretize.hpp"
#include "clinewave/error.hpp"
#include "clinewave/grid.hpp"

using namespace clinewave;

namespace {

Field sample(const Grid2D& g, double (*f)(double, double)) {
    Field u = make_field(g);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j) u(i, j) = f(g.x().node(i), g.z().node(j));
    return u;
}


}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid1D(-1.0, 1.0, 4), GridError);
    CHECK_THROWS_AS(Grid1D(1.0, -1.0, 5), GridError);
    const Grid1D g = Grid1D::symmetric(2.0, 5);
    CHECK(g.zero_index() == 2);
    CHECK(g.spacing() == doctest::Approx(1.0));
}

TEST_CASE("1D assembly") {
    const Grid1D g(0.0, 4.0, 5);
    const auto r0 = GrowthProfile::quadratic(1.0, 0.1, 0.1);
    const auto op = assemble_1d(g, r0, 0.0, 0.0);
    // Without the potential the stencil is the standard Laplacian.
    CHECK(op.matrix.diag[0] + op.potential[0] == doctest::Approx(2.0));
    CHECK(op.matrix.off[0] == doctest::Approx(-1.0));
    const auto op1 = assemble_1d(g, r0, 1.0, 0.0);
    CHECK(op1.matrix.diag[1] + op1.potential[1] == doctest::Approx(4.0));
    CHECK(op1.matrix.off[1] == doctest::Approx(-2.0));

    const auto r = GrowthProfile::quadratic(1.0, 0.25, 0.25);
    const Grid1D h = Grid1D::symmetric(3.0, 7);
    const double nu = r.delta() / 3.0;
    const auto q = assemble_1d(h, r, 1.0, nu);
    for (int k = 0; k < h.interior_size(); ++k) {
        const double z = h.node(k + 1);
        CHECK(q.matrix.diag[k] - 2.0 * 2.0 == doctest::Approx(-(r(z) + nu * z * z)));
    }
    CHECK_THROWS_AS(assemble_1d(h, r, 1.0, r.delta()), ParameterError);
}

TEST_CASE("2D stencil polynomial exactness") {
    const Grid2D g(2.0, 3.0, 9, 13);
    for (double B : {0.0, 1.0, 2.5}) {
        const auto op = assemble_2d(g, B, 0.0);
        // -E(xz) = 2B
        const Field xz = sample(g, [](double x, double z) { return x * z; });
        const Eigen::VectorXd r1 = op.apply(xz);
        CHECK(r1.maxCoeff() == doctest::Approx(2.0 * B).epsilon(1e-12));
        CHECK(r1.minCoeff() == doctest::Approx(2.0 * B).epsilon(1e-12));
        // -E(x^2) = -2
        const Field xx = sample(g, [](double x, double) { return x * x; });
        const Eigen::VectorXd r2 = op.apply(xx);
        CHECK(r2.maxCoeff() == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(r2.minCoeff() == doctest::Approx(-2.0).epsilon(1e-12));
    }
}

TEST_CASE("2D operator annihilates constants") {
    const Grid2D g(2.0, 3.0, 9, 13);
    const auto op = assemble_2d(g, 1.3, 0.7);
    const Field one = make_field(g, 1.0);
    CHECK(op.apply(one).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("2D stencil is second order") {
    auto u = [](double x, double z) { return std::sin(x) * std::sin(z); };
    // -E(u) - c u_x for B = 1, c = 0.5
    auto exact = [](double x, double z) {
        const double B = 1.0, c = 0.5;
        return (1.0 + (B * B + 1.0)) * std::sin(x) * std::sin(z) + 2.0 * B * std::cos(x) * std::cos(z) -
               c * std::cos(x) * std::sin(z);
    };
    double errs[3];
    int n = 11;
    for (double& e : errs) {
        const Grid2D g(1.5, 1.5, n, n);
        const auto op = assemble_2d(g, 1.0, 0.5);
        Field f = make_field(g);
        for (int i = 0; i < g.nx(); ++i)
            for (int j = 0; j < g.nz(); ++j) f(i, j) = u(g.x().node(i), g.z().node(j));
        const Eigen::VectorXd got = op.apply(f);
        e = 0.0;
        for (int i = 1; i + 1 < g.nx(); ++i)
            for (int j = 1; j + 1 < g.nz(); ++j)
                e = std::max(e, std::abs(got[g.interior_index(i, j)] - exact(g.x().node(i), g.z().node(j))));
        n = 2 * n - 1;
    }
    CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
    CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("Peclet guard") {
    const Grid2D g(10.0, 1.0, 11, 5);  // h_x = 2
    CHECK_THROWS_AS(assemble_2d(g, 0.0, 1.0), GridError);
    CHECK_NOTHROW(assemble_2d(g, 0.0, 0.9));
}

TEST_CASE("Dirichlet folding matches the full stencil") {
    const Grid2D g(1.0, 1.0, 7, 9);
    const auto op = assemble_2d(g, 0.8, 0.3);
    const Field f = sample(g, [](double x, double z) { return std::exp(x + 0.5 * z); });
    const Eigen::VectorXd lhs = op.interior * interior_values(g, f);
    CHECK((op.apply(f) - (lhs - op.dirichlet_rhs(f))).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("quadrature") {
    const auto w = quadrature_weights(Grid1D(0.0, 2.0, 3));
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(1.0));
    CHECK(w[2] == doctest::Approx(0.5));
    const Grid1D g = Grid1D::symmetric(8.0, 1601);
    const auto v = quadrature_weights(g);
    CHECK(v.sum() == doctest::Approx(16.0).epsilon(1e-14));
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i) s += v[i] * std::exp(-g.node(i) * g.node(i));
    CHECK(std::abs(s - std::sqrt(M_PI) * std::erf(8.0)) < 1e-10);
}
