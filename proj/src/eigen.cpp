#include "clinewave/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "clinewave/banded.hpp"
#include "clinewave/discretize.hpp"
#include "clinewave/error.hpp"

namespace clinewave {

namespace {

using Real = long double;

struct TridiagL {
    std::vector<Real> d;
    std::vector<Real> e;  // off-diagonal, size n-1
};

TridiagL to_long(const Tridiagonal& t) {
    TridiagL out;
    out.d.assign(t.diag.data(), t.diag.data() + t.diag.size());
    out.e.assign(t.off.data(), t.off.data() + t.off.size());
    return out;
}

// Number of eigenvalues strictly below x.
int sturm_count(const TridiagL& t, Real x) {
    const int n = static_cast<int>(t.d.size());
    const Real tiny = std::numeric_limits<Real>::min() * 1e10L;
    int count = 0;
    Real q = t.d[0] - x;
    for (int i = 0;;) {
        if (q == 0.0L) q = -tiny;
        if (q < 0.0L) ++count;
        if (++i == n) break;
        q = t.d[i] - x - t.e[i - 1] * t.e[i - 1] / q;
    }
    return count;
}

Real smallest_eigenvalue(const TridiagL& t, Real& lo_out) {
    const int n = static_cast<int>(t.d.size());
    Real lo = std::numeric_limits<Real>::max();
    Real hi = std::numeric_limits<Real>::max();
    for (int i = 0; i < n; ++i) {
        Real r = 0.0L;
        if (i > 0) r += std::fabs(t.e[i - 1]);
        if (i + 1 < n) r += std::fabs(t.e[i]);
        lo = std::min(lo, t.d[i] - r);
        hi = std::min(hi, t.d[i]);
    }
    const Real scale = std::max({std::fabs(lo), std::fabs(hi), 1.0L});
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (int it = 0; it < 400 && hi - lo > 4.0L * eps * scale; ++it) {
        const Real mid = 0.5L * (lo + hi);
        if (sturm_count(t, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    lo_out = lo;
    return 0.5L * (lo + hi);
}

// Solves (T - sigma) y = rhs by LDL^T; returns false on a nonpositive pivot.
bool shifted_solve(const TridiagL& t, Real sigma, std::vector<Real>& rhs) {
    const int n = static_cast<int>(t.d.size());
    std::vector<Real> piv(n);
    piv[0] = t.d[0] - sigma;
    if (!(piv[0] > 0.0L)) return false;
    for (int i = 1; i < n; ++i) {
        piv[i] = t.d[i] - sigma - t.e[i - 1] * t.e[i - 1] / piv[i - 1];
        if (!(piv[i] > 0.0L)) return false;
        rhs[i] -= t.e[i - 1] / piv[i - 1] * rhs[i - 1];
    }
    rhs[n - 1] /= piv[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - t.e[i] * rhs[i + 1]) / piv[i];
    return true;
}

Real residual_ratio(const TridiagL& t, Real lambda, const std::vector<Real>& v) {
    const int n = static_cast<int>(v.size());
    Real rmax = 0.0L;
    Real vmax = 0.0L;
    for (int i = 0; i < n; ++i) {
        Real r = (t.d[i] - lambda) * v[i];
        if (i > 0) r += t.e[i - 1] * v[i - 1];
        if (i + 1 < n) r += t.e[i] * v[i + 1];
        rmax = std::max(rmax, std::fabs(r));
        vmax = std::max(vmax, std::fabs(v[i]));
    }
    return rmax / vmax;
}

Eigen::VectorXd dump_of(const std::vector<Real>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = static_cast<double>(v[i]);
    return out;
}

}  // namespace

EigenPair make_pair(double lambda, Grid1D grid, Eigen::VectorXd gamma, EigenDomain domain, double nu,
                    double residual) {
    EigenPair p{lambda, grid, std::move(gamma), domain, nu, residual, {}};
    const Eigen::VectorXd z = grid.nodes();
    p.spline = std::make_shared<const CubicSpline>(std::span<const double>(z.data(), z.size()),
                                                    std::span<const double>(p.gamma.data(), p.gamma.size()));
    return p;
}

double EigenPair::operator()(double z) const {
    if (!spline->contains(z)) return 0.0;
    return (*spline)(z);
}

EigenPair solve_interval(const ModelParams& p, double nu, double b, int n) {
    if (!(b > 0.0)) throw ParameterError("solve_interval: b must be positive");
    const Grid1D grid = Grid1D::symmetric(b, n);
    const Operator1D op = assemble_1d(grid, p.growth, p.B, nu);
    const TridiagL t = to_long(op.matrix);
    const int m = op.matrix.size();

    Real lo = 0.0L;
    Real lambda = smallest_eigenvalue(t, lo);

    std::vector<Real> v(m, 1.0L);
    const Real scale = std::max(std::fabs(lambda), 1.0L);
    Real eta = 1e-12L * scale;
    Real res = 0.0L;
    bool converged = false;
    for (int attempt = 0; attempt < 6 && !converged; ++attempt, eta *= 100.0L) {
        const Real sigma = lo - eta;
        std::fill(v.begin(), v.end(), 1.0L);
        for (int it = 0; it < 20; ++it) {
            if (!shifted_solve(t, sigma, v)) break;
            const Real vmax = *std::max_element(v.begin(), v.end(), [](Real x, Real y) {
                return std::fabs(x) < std::fabs(y);
            });
            for (Real& x : v) x /= vmax;
            // Rayleigh quotient; T is symmetric.
            Real num = 0.0L;
            Real den = 0.0L;
            for (int i = 0; i < m; ++i) {
                Real tv = t.d[i] * v[i];
                if (i > 0) tv += t.e[i - 1] * v[i - 1];
                if (i + 1 < m) tv += t.e[i] * v[i + 1];
                num += v[i] * tv;
                den += v[i] * v[i];
            }
            lambda = num / den;
            res = residual_ratio(t, lambda, v);
            // Extra sweeps clean the far tail, which the residual does not see.
            if (it >= 3 && res <= 1e-11L) {
                converged = true;
                break;
            }
        }
    }
    if (!converged || !(res <= 1e-10L)) {
        std::ostringstream os;
        os << "solve_interval: inverse iteration did not converge (residual " << static_cast<double>(res)
           << ", b=" << b << ", n=" << n << ")";
        throw SolverError(os.str(), std::vector<double>(v.begin(), v.end()));
    }

    const int z0 = grid.zero_index() - 1;
    const Real norm = v[z0];
    for (Real& x : v) x /= norm;
    for (int i = 0; i < m; ++i) {
        if (!(v[i] > 0.0L)) {
            std::ostringstream os;
            os << "solve_interval: eigenvector not positive at node " << i + 1;
            throw SolverError(os.str(), std::vector<double>(v.begin(), v.end()));
        }
    }
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
    gamma.segment(1, m) = dump_of(v);
    return make_pair(static_cast<double>(lambda), grid, std::move(gamma), EigenDomain::Interval, nu,
                     static_cast<double>(res));
}

double tail_ratio(const EigenPair& pair) {
    const double b = pair.half_width();
    double tail = 0.0;
    for (int i = 0; i < pair.grid.size(); ++i) {
        if (std::abs(pair.grid.node(i)) >= 0.75 * b) tail = std::max(tail, pair.gamma[i]);
    }
    return tail / pair.gamma.maxCoeff();
}

EigenPair solve_line(const ModelParams& p, double nu, const LineSolveOptions& opt) {
    if (!(opt.h > 0.0) || !(opt.b0 > 0.0)) throw ParameterError("solve_line: h and b0 must be positive");
    double cap = opt.b_cap;
    if (p.growth.as_tabulated()) cap = std::min(cap, std::min(-p.growth.z_min(), p.growth.z_max()));
    auto nodes_for = [&](double b) {
        int n = 2 * static_cast<int>(std::ceil(b / opt.h)) + 1;
        return std::max(n, 5);
    };
    double b = std::min(opt.b0, cap);
    EigenPair prev = solve_interval(p, nu, b, nodes_for(b));
    std::vector<double> history{prev.lambda};
    while (b < cap) {
        b = std::min(2.0 * b, cap);
        EigenPair cur = solve_interval(p, nu, b, nodes_for(b));
        history.push_back(cur.lambda);
        const bool steady = std::abs(cur.lambda - prev.lambda) <= opt.tol * std::max(1.0, std::abs(prev.lambda));
        if (steady && tail_ratio(cur) <= opt.tail_tol) {
            cur.domain = EigenDomain::Line;
            return cur;
        }
        prev = std::move(cur);
    }
    std::ostringstream os;
    os << "solve_line: no convergence up to b=" << cap << " (tail ratio " << tail_ratio(prev) << ")";
    throw SolverError(os.str(), history);
}

BoxEigenPair2D solve_box_2d(const ModelParams& p, double R, int n) {
    if (!(R > 0.0)) throw ParameterError("solve_box_2d: R must be positive");
    const Grid2D g(R, R, n, n);
    const Operator2D op = assemble_2d(g, p.B, 0.0);
    SparseMatrix a = op.interior;
    const int m = g.interior_size();
    for (int i = 1; i + 1 < g.nx(); ++i)
        for (int j = 1; j + 1 < g.nz(); ++j) a.coeffRef(g.interior_index(i, j), g.interior_index(i, j)) -= p.growth(g.z().node(j));

    // The discrete -E is symmetric positive definite, so every eigenvalue
    // exceeds -max r.
    const double floor = -p.growth.max_value() - 1e-3;
    auto factor = [&](double sigma) {
        BandedMatrix bm = BandedMatrix::from_sparse(a);
        for (int k = 0; k < m; ++k) bm.add(k, k, -sigma);
        return BandedLU(std::move(bm));
    };
    auto rayleigh = [&](const Eigen::VectorXd& v) { return v.dot(a * v) / v.squaredNorm(); };

    const int center = g.interior_index(g.nx() / 2, g.nz() / 2);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
    double sigma = floor;
    BandedLU lu = factor(sigma);
    double mu = rayleigh(v);
    double res = 0.0;
    bool reshifted = false;
    bool converged = false;
    for (int it = 0; it < 1000; ++it) {
        lu.solve(v);
        v /= v.cwiseAbs().maxCoeff();
        const double next = rayleigh(v);
        res = (a * v - next * v).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
        const double change = std::abs(next - mu);
        mu = next;
        if (res <= 1e-10) {
            converged = true;
            break;
        }
        if (!reshifted && change < 1e-4 * std::max(1.0, std::abs(mu))) {
            sigma = mu - 1e-3 * std::max(1.0, std::abs(mu));
            lu = factor(sigma);
            reshifted = true;
        }
    }
    // The cross-derivative stencil is not monotone, so the discrete Perron
    // vector may dip below zero by roundoff-sized amounts in the corners.
    // Higher eigenvectors change sign with O(1) amplitude.
    auto positive = [](const Eigen::VectorXd& w) { return w.minCoeff() >= -kSignFloor * w.maxCoeff(); };
    if (!converged || !positive(v)) {
        // Retry from the safe shift without re-shifting.
        v = Eigen::VectorXd::Ones(m);
        BandedLU safe = factor(floor);
        for (int it = 0; it < 5000; ++it) {
            safe.solve(v);
            v /= v.cwiseAbs().maxCoeff();
            mu = rayleigh(v);
            res = (a * v - mu * v).cwiseAbs().maxCoeff();
            if (res <= 1e-10) break;
        }
        if (res > 1e-8 || !positive(v)) {
            std::ostringstream os;
            os << "solve_box_2d: no positive principal eigenvector (residual " << res << ", min " << v.minCoeff() << ")";
            throw SolverError(os.str(), std::vector<double>(v.data(), v.data() + v.size()));
        }
    }
    v /= v[center];
    Field u = make_field(g);
    set_interior(g, v, u);
    return {mu, g, std::move(u), R, res, v.minCoeff() / v.maxCoeff()};
}

std::variant<Extinct, double> minimal_speed(double lambda_inf0, double B) {
    if (lambda_inf0 > 0.0) return Extinct{lambda_inf0};
    return 2.0 * std::sqrt(-lambda_inf0 / (B * B + 1.0));
}

Regime classify(const ModelParams& p, const ClassifyOptions& opt) {
    const EigenPair coarse = solve_line(p, 0.0, opt.line);
    const EigenPair fine = solve_interval(p, 0.0, coarse.half_width(), 2 * coarse.grid.size() - 1);
    const double lambda = (4.0 * fine.lambda - coarse.lambda) / 3.0;
    if (std::abs(lambda) <= opt.marginal_tol) return Marginal{lambda};
    if (lambda > 0.0) return Extinct{lambda};
    return Invading{lambda, std::get<double>(minimal_speed(lambda, p.B))};
}

double regime_lambda(const Regime& r) {
    return std::visit([](const auto& v) { return v.lambda; }, r);
}

PrincipalProfile principal_profile(const ModelParams& p, const LineSolveOptions& opt) {
    if (const auto* q = p.growth.as_quadratic()) {
        const double D = p.diffusion();
        const double s = std::sqrt(q->A / D);
        // Shift by rmax - 1 relative to the unit-rmax closed form.
        const double lambda = std::sqrt(q->A * D) - q->rmax;
        return {lambda, true, [s](double z) { return std::exp(-s * z * z / 2.0); }};
    }
    auto pair = std::make_shared<const EigenPair>(solve_line(p, 0.0, opt));
    return {pair->lambda, false, [pair](double z) { return (*pair)(z); }};
}

const char* regime_name(const Regime& r) {
    if (std::holds_alternative<Extinct>(r)) return "extinct";
    if (std::holds_alternative<Marginal>(r)) return "marginal";
    return "invading";
}

}  // namespace clinewave
