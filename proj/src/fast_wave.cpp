#include <algorithm>
#include <cmath>
#include <sstream>

#include "clinewave/waves.hpp"

namespace clinewave {

ExponentialBarriers::ExponentialBarriers(const ModelParams& p, double c)
    : p_(p), c_(c), c_star_(0.0), mu_(0.0), C_(0.0), sqrtD_(std::sqrt(p.diffusion())), profile_(principal_profile(p)) {
    const double D = p.diffusion();
    if (!(profile_.lambda < 0.0)) {
        std::ostringstream os;
        os << "barriers: lambda=" << profile_.lambda << " >= 0, there is no front";
        throw ParameterError(os.str());
    }
    c_star_ = 2.0 * std::sqrt(-profile_.lambda / D);
    if (!(c > c_star_)) {
        std::ostringstream os;
        os << "barriers: c=" << c << " must exceed c*=" << c_star_;
        throw ParameterError(os.str());
    }
    mu_ = -0.5 * sqrtD_ * (c - std::sqrt(c * c - c_star_ * c_star_));

    // C = k+ int exp(mu B z / sqrt(D)) Gamma(z) dz by the trapezoid rule.
    const double alpha = mu_ * p.B / sqrtD_;
    const double h = 0.01;
    const int n = 12800;
    double sum = 0.0;
    for (int i = -n; i <= n; ++i) {
        const double z = i * h;
        const double wgt = (i == -n || i == n) ? 0.5 : 1.0;
        sum += wgt * std::exp(alpha * z) * profile_(z);
    }
    C_ = p.kernel.upper() * sum * h;
}

double ExponentialBarriers::w(double X, double Y) const { return std::exp(mu_ * X) * profile_(sqrtD_ * Y); }

double ExponentialBarriers::rho(double eps) const {
    const double m = mu_ - eps;
    return -(m * m + c_ * sqrtD_ * m + c_star_ * c_star_ * sqrtD_ * sqrtD_ / 4.0);
}

void ExponentialBarriers::check_eps(double eps) const {
    if (!(eps > 0.0)) throw ParameterError("subsolution: eps must be positive");
    if (!(rho(eps) > 0.0)) {
        std::ostringstream os;
        os << "subsolution: (mu-eps)^2 + c sqrt(B^2+1)(mu-eps) + c*^2 (B^2+1)/4 < 0 fails for eps=" << eps;
        throw ParameterError(os.str());
    }
    if (!(mu_ + eps < 0.0)) {
        std::ostringstream os;
        os << "subsolution: mu + eps < 0 fails for eps=" << eps << " (mu=" << mu_ << ")";
        throw ParameterError(os.str());
    }
}

double ExponentialBarriers::default_eps() const {
    const double gap = sqrtD_ * std::sqrt(c_ * c_ - c_star_ * c_star_);
    return 0.5 * std::min(gap, -mu_);
}

double ExponentialBarriers::admissible_A(double eps, double b) const {
    check_eps(eps);
    const double x0 = std::log(rho(eps) / C_) / mu_ + p_.B * b / sqrtD_;
    return std::max(1.0, std::exp(eps * x0));
}

double ExponentialBarriers::h(double A, double eps, double X, double Y) const {
    if (!(A > 1.0)) throw ParameterError("subsolution: A must exceed 1");
    check_eps(eps);
    return (std::exp(mu_ * X) / A - std::exp((mu_ - eps) * X)) * profile_(sqrtD_ * Y);
}

std::pair<double, double> ExponentialBarriers::to_rotated(double x, double z) const {
    return {sqrtD_ * x + p_.B * z / sqrtD_, z / sqrtD_};
}

double supersolution_w(const ModelParams& p, double c, double X, double Y) {
    return ExponentialBarriers(p, c).w(X, Y);
}

double subsolution_h(const ModelParams& p, double c, double A, double eps, double X, double Y) {
    return ExponentialBarriers(p, c).h(A, eps, X, Y);
}

double supersolution_residual(const ModelParams& p, double c, const Grid2D& g) {
    const ExponentialBarriers bar(p, c);
    Field W = make_field(g);
    for (int i = 0; i < g.nx(); ++i) {
        for (int j = 0; j < g.nz(); ++j) {
            const auto [X, Y] = bar.to_rotated(g.x().node(i), g.z().node(j));
            W(i, j) = bar.w(X, Y);
        }
    }
    const Operator2D op = assemble_2d(g, p.B, c);
    Eigen::VectorXd r = op.apply(W);
    for (int i = 1; i + 1 < g.nx(); ++i)
        for (int j = 1; j + 1 < g.nz(); ++j) r[g.interior_index(i, j)] -= p.growth(g.z().node(j)) * W(i, j);
    return r.cwiseAbs().maxCoeff();
}

FastWaveResult solve_fast_wave(const ModelParams& p, double c, const Grid2D& g, const FastWaveConfig& cfg) {
    const ExponentialBarriers bar(p, c);
    const double eps = cfg.eps.value_or(bar.default_eps());
    bar.check_eps(eps);
    const double A = cfg.A.value_or(bar.admissible_A(eps, g.b()));
    const double A_use = std::max(A, 1.0 + 1e-12);
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw ParameterError("fast wave: damping must lie in (0, 1]");

    Field lower = make_field(g);
    Field upper = make_field(g);
    for (int i = 0; i < g.nx(); ++i) {
        for (int j = 0; j < g.nz(); ++j) {
            const auto [X, Y] = bar.to_rotated(g.x().node(i), g.z().node(j));
            lower(i, j) = std::max(0.0, bar.h(A_use, eps, X, Y));
            upper(i, j) = bar.w(X, Y);
        }
    }

    const Operator2D op = assemble_2d(g, p.B, c);
    BandedMatrix base(g.interior_size(), g.nz() - 1, g.nz() - 1);
    base.add_sparse(op.interior);
    Eigen::VectorXd r(g.nz());
    Eigen::MatrixXd kernel(g.nz(), g.nz());
    const Eigen::VectorXd wz = quadrature_weights(g.z());
    for (int j = 0; j < g.nz(); ++j) {
        r[j] = p.growth(g.z().node(j));
        for (int l = 0; l < g.nz(); ++l) kernel(j, l) = wz[l] * p.kernel(g.z().node(j), g.z().node(l));
    }
    // Boundary data enter through the right-hand side.
    Field edge = lower;
    edge.block(1, 1, g.nx() - 2, g.nz() - 2).setZero();
    const Eigen::VectorXd rhs = op.dirichlet_rhs(edge);

    auto phi = [&](const Field& vstar) {
        const Field kv = vstar * kernel.transpose();
        BandedMatrix m = base;
        for (int i = 1; i + 1 < g.nx(); ++i)
            for (int j = 1; j + 1 < g.nz(); ++j) {
                const int row = g.interior_index(i, j);
                m.add(row, row, kv(i, j) - r[j]);
            }
        BandedLU lu(std::move(m));
        Eigen::VectorXd x = rhs;
        lu.solve(x);
        Field out = edge;
        set_interior(g, x, out);
        return out;
    };

    Field v = lower;
    double max_clip = 0.0;
    int it = 0;
    bool converged = false;
    Eigen::Index bad_i = 0, bad_j = 0;
    double worst = 0.0;
    for (; it < cfg.max_iter; ++it) {
        const Field raw = phi(v);
        const double scale = std::max(raw.cwiseAbs().maxCoeff(), 1e-300);
        const Field below = (lower - raw).cwiseMax(0.0);
        const Field above = (raw - upper).cwiseMax(0.0);
        const double lo_v = below.maxCoeff(&bad_i, &bad_j);
        Eigen::Index ai = 0, aj = 0;
        const double hi_v = above.maxCoeff(&ai, &aj);
        if (hi_v > lo_v) {
            bad_i = ai;
            bad_j = aj;
        }
        worst = std::max(lo_v, hi_v) / scale;
        const Field clipped = raw.cwiseMax(lower).cwiseMin(upper);
        max_clip = worst;
        const Field next = (1.0 - cfg.damping) * v + cfg.damping * clipped;
        const double change = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (change <= cfg.tol * std::max(v.cwiseAbs().maxCoeff(), 1e-300)) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "fast wave: Picard iteration did not converge in " << cfg.max_iter << " sweeps";
        throw SolverError(os.str(), std::vector<double>(v.data(), v.data() + v.size()));
    }
    if (worst > cfg.sandwich_tol) {
        std::ostringstream os;
        os << "fast wave: sandwich violated by " << worst << " (relative) at x=" << g.x().node(static_cast<int>(bad_i))
           << ", z=" << g.z().node(static_cast<int>(bad_j));
        throw SolverError(os.str(), std::vector<double>(v.data(), v.data() + v.size()));
    }

    // Residual of the nonlinear equation at the returned profile.
    const Field kv = v * kernel.transpose();
    Eigen::VectorXd res = op.apply(v);
    for (int i = 1; i + 1 < g.nx(); ++i)
        for (int j = 1; j + 1 < g.nz(); ++j) res[g.interior_index(i, j)] -= (r[j] - kv(i, j)) * v(i, j);

    WaveSolution sol{c, g, v, v(g.nx() / 2, g.nz() / 2), 1.0, res.cwiseAbs().maxCoeff(), it, {}};
    sol.diagnostics.c_star = bar.c_star();
    const Eigen::VectorXd mass = v * wz;
    sol.diagnostics.mass = mass;
    sol.diagnostics.min_value = v.minCoeff();
    // Mass bound for x <= 0.
    const double mass_bound = std::max(2.0 * p.growth.max_value() / p.kernel.lower(), bar.integral_constant());
    double left_mass = 0.0;
    for (int i = 0; i < g.nx(); ++i)
        if (g.x().node(i) <= 0.0) left_mass = std::max(left_mass, mass[i]);
    sol.diagnostics.mass_bound = mass_bound;
    const double sand = std::max((lower - v).maxCoeff(), (v - upper).maxCoeff());
    sol.diagnostics.checks.push_back({"mass_left", left_mass, mass_bound, std::max(0.0, left_mass - mass_bound), 0.0,
                                      left_mass <= mass_bound});
    sol.diagnostics.checks.push_back({"sandwich", sand, 0.0, std::max(0.0, sand), 0.0, sand <= 0.0});
    return FastWaveResult{std::move(sol), bar.mu(), eps, A_use, it, max_clip, std::move(lower), std::move(upper)};
}

Resampled rotate_frame(const Grid2D& source, const Field& u, double B, const Grid2D& target) {
    const double sd = std::sqrt(B * B + 1.0);
    Resampled out{make_field(target), {}, 0};
    out.clamped.setConstant(target.nx(), target.nz(), false);
    for (int i = 0; i < target.nx(); ++i) {
        for (int j = 0; j < target.nz(); ++j) {
            const double X = target.x().node(i);
            const double Y = target.z().node(j);
            bool clamped = false;
            out.values(i, j) = bilinear(source, u, (X - B * Y) / sd, sd * Y, &clamped);
            out.clamped(i, j) = clamped;
            out.clamped_count += clamped;
        }
    }
    return out;
}

Resampled unrotate_frame(const Grid2D& source, const Field& v, double B, const Grid2D& target) {
    const double sd = std::sqrt(B * B + 1.0);
    Resampled out{make_field(target), {}, 0};
    out.clamped.setConstant(target.nx(), target.nz(), false);
    for (int i = 0; i < target.nx(); ++i) {
        for (int j = 0; j < target.nz(); ++j) {
            const double x = target.x().node(i);
            const double z = target.z().node(j);
            bool clamped = false;
            out.values(i, j) = bilinear(source, v, sd * x + B * z / sd, z / sd, &clamped);
            out.clamped(i, j) = clamped;
            out.clamped_count += clamped;
        }
    }
    return out;
}

Grid2D rotated_grid(const Grid2D& source, double B) {
    const double D = B * B + 1.0;
    const double sd = std::sqrt(D);
    const double hx = source.x().spacing();
    const int k = static_cast<int>(std::floor((source.a() - B * source.b() / D) / hx + 1e-9));
    if (k < 1) throw GridError("rotated_grid: box too narrow for its height at this slope");
    return Grid2D(k * hx * sd, source.b() / sd, 2 * k + 1, source.nz());
}

}  // namespace clinewave
