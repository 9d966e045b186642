#include "clinewave/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <gsl/gsl_fit.h>

#include "clinewave/eigen.hpp"
#include "clinewave/error.hpp"

namespace clinewave {

namespace {

constexpr double kBlowUp = 1e6;

// I - dt E_h + dt r^- with r^- = max(0, -r).
BandedLU implicit_factor(const Grid2D& g, double B, const Eigen::VectorXd& r, const StepScheme& s) {
    if (!(s.dt > 0.0)) throw ParameterError("step: dt must be positive");
    const Operator2D op = s.stencil == CrossStencil::monotone ? assemble_monotone(g, B) : assemble_2d(g, B, 0.0);
    BandedMatrix m(g.interior_size(), g.nz() - 1, g.nz() - 1);
    m.add_sparse(op.interior, s.dt);
    for (int i = 1; i + 1 < g.nx(); ++i)
        for (int j = 1; j + 1 < g.nz(); ++j) {
            const int k = g.interior_index(i, j);
            m.add(k, k, 1.0 + s.dt * std::max(0.0, -r[j]));
        }
    return BandedLU(std::move(m));
}

Eigen::VectorXd growth_nodes(const ModelParams& p, const Grid2D& g) {
    Eigen::VectorXd r(g.nz());
    for (int j = 0; j < g.nz(); ++j) r[j] = p.growth(g.z().node(j));
    return r;
}

}  // namespace

SimState initial_state(const Grid2D& g, Field field) {
    if (field.rows() != g.nx() || field.cols() != g.nz()) throw GridError("initial_state: field does not match grid");
    SimState s{0.0, g, std::move(field), {}, 0, 0.0};
    return s;
}

ImexStepper::ImexStepper(const ModelParams& p, const Grid2D& g, const StepScheme& scheme)
    : grid_(g), dt_(scheme.dt), r_(growth_nodes(p, g)), kernel_(g.nz(), g.nz()), wx_(quadrature_weights(g.x())),
      wz_(quadrature_weights(g.z())), lu_(implicit_factor(g, p.B, r_, scheme)) {
    for (int j = 0; j < g.nz(); ++j)
        for (int l = 0; l < g.nz(); ++l) kernel_(j, l) = wz_[l] * p.kernel(g.z().node(j), g.z().node(l));
}

Field ImexStepper::reaction(const Field& n) const {
    Field kn = n * kernel_.transpose();
    Field out(n.rows(), n.cols());
    for (int i = 0; i < n.rows(); ++i)
        for (int j = 0; j < n.cols(); ++j) out(i, j) = (r_[j] - kn(i, j)) * n(i, j);
    return out;
}

double ImexStepper::advance(Field& n) const {
    const Grid2D& g = grid_;
    // The decay part r^- of the growth rate sits in the implicit matrix.
    Field rhs_field = n + dt_ * reaction(n);
    for (int j = 0; j < g.nz(); ++j) rhs_field.col(j) += dt_ * std::max(0.0, -r_[j]) * n.col(j);
    Eigen::VectorXd x = interior_values(g, rhs_field);
    lu_.solve(x);
    n.setZero();
    set_interior(g, x, n);

    double clipped = 0.0, total = 0.0, peak = 0.0;
    bool finite = true;
    for (int i = 1; i + 1 < g.nx(); ++i) {
        for (int j = 1; j + 1 < g.nz(); ++j) {
            double& v = n(i, j);
            if (!std::isfinite(v)) finite = false;
            const double w = wx_[i] * wz_[j];
            if (v < 0.0) {
                clipped -= w * v;
                v = 0.0;
            } else {
                total += w * v;
                peak = std::max(peak, v);
            }
        }
    }
    if (!finite || peak > kBlowUp) {
        std::ostringstream os;
        os << "step: field left [0, " << kBlowUp << "] (sup " << peak << "); reduce dt below " << dt_;
        throw SolverError(os.str());
    }
    return total > 0.0 ? clipped / total : (clipped > 0.0 ? 1.0 : 0.0);
}

void ImexStepper::step(SimState& s) const {
    if (s.field.rows() != grid_.nx() || s.field.cols() != grid_.nz()) throw GridError("step: field does not match grid");
    const double frac = advance(s.field);
    s.max_clip_fraction = std::max(s.max_clip_fraction, frac);
    s.t += dt_;
    ++s.steps;
}

SimState step(const SimState& s, const ModelParams& p, const StepScheme& scheme) {
    if (!s.field.allFinite()) throw ParameterError("step: field is not finite");
    SimState out = s;
    ImexStepper(p, s.grid, scheme).step(out);
    return out;
}

double total_mass(const Grid2D& g, const Field& n) {
    return quadrature_weights(g.x()).dot(n * quadrature_weights(g.z()));
}

double front_position(const Grid2D& g, const Field& n, double theta) {
    const int j0 = g.z().zero_index();
    for (int i = g.nx() - 1; i >= 0; --i) {
        const double v = n(i, j0);
        if (v >= theta) {
            if (i == g.nx() - 1) return g.x().node(i);
            const double next = n(i + 1, j0);
            return g.x().node(i) + (v - theta) / (v - next) * g.x().spacing();
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double simulation_half_height(const ModelParams& p) {
    const EigenPair g23 = solve_line(p, 2.0 * p.growth.delta() / 3.0, LineSolveOptions{.tol = 1e-8, .h = 0.01});
    const double cut = 1e-12 * g23.gamma.maxCoeff();
    double b = 0.0;
    for (int i = 0; i < g23.grid.size(); ++i)
        if (g23.gamma[i] >= cut) b = std::max(b, std::abs(g23.grid.node(i)));
    return b;
}

Grid2D simulation_grid(const ModelParams& p, double a, double h) {
    if (!(a > 0.0 && h > 0.0)) throw GridError("simulation_grid: a and h must be positive");
    const double hz = std::max(1.0, std::abs(p.B)) * h;
    const int kx = static_cast<int>(std::ceil(a / h - 1e-9));
    const int kz = static_cast<int>(std::ceil(simulation_half_height(p) / hz - 1e-9));
    return Grid2D(kx * h, kz * hz, 2 * kx + 1, 2 * std::max(kz, 1) + 1);
}

Eigen::VectorXd discrete_profile(const ModelParams& p, const Grid2D& g) {
    return solve_interval(p, 0.0, g.b(), g.nz()).gamma;
}

double sup_ratio(const Grid2D& g, const Field& n, const Eigen::VectorXd& profile) {
    double m = 0.0;
    for (int i = 1; i + 1 < g.nx(); ++i)
        for (int j = 1; j + 1 < g.nz(); ++j)
            if (profile[j] > 0.0) m = std::max(m, n(i, j) / profile[j]);
    return m;
}

LinearFit fit_tail(const std::vector<double>& t, const std::vector<double>& y, double t_from) {
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < t.size() && k < y.size(); ++k)
        if (t[k] >= t_from && std::isfinite(y[k])) {
            xs.push_back(t[k]);
            ys.push_back(y[k]);
        }
    const int n = static_cast<int>(xs.size());
    if (n < 3) throw SolverError("fit: fewer than three points in the fit window");
    double c0, c1, cov00, cov01, cov11, sumsq;
    gsl_fit_linear(xs.data(), 1, ys.data(), 1, n, &c0, &c1, &cov00, &cov01, &cov11, &sumsq);
    double mean = 0.0;
    for (double v : ys) mean += v;
    mean /= n;
    double tot = 0.0;
    for (double v : ys) tot += (v - mean) * (v - mean);
    const double r2 = tot > 0.0 ? 1.0 - sumsq / tot : 1.0;
    return {c1, c0, r2, n};
}

InvasionResult run_invasion(const ModelParams& p, const Grid2D& g, const StepScheme& scheme,
                            const InvasionConfig& cfg) {
    const Regime regime = classify(p);
    const auto* inv = std::get_if<Invading>(&regime);
    if (!inv) {
        std::ostringstream os;
        os << "run_invasion: model is " << regime_name(regime) << " (lambda=" << regime_lambda(regime) << ")";
        throw ClassificationError(os.str());
    }
    if (!(cfg.T > 0.0 && cfg.output_interval > 0.0)) throw ParameterError("run_invasion: T and output_interval must be positive");

    const PrincipalProfile prof = principal_profile(p);
    const Eigen::VectorXd wz = quadrature_weights(g.z());
    Eigen::VectorXd gz(g.nz());
    for (int j = 0; j < g.nz(); ++j) gz[j] = prof.gamma(g.z().node(j));
    const double mass0 = cfg.amplitude.value_or(-inv->lambda / p.kernel.upper());
    gz *= mass0 / wz.dot(gz);
    Field n0 = make_field(g);
    const double x0 = -g.a() + cfg.plateau_length;
    for (int i = 1; i + 1 < g.nx(); ++i)
        if (g.x().node(i) <= x0) n0.row(i) = gz.transpose();
    n0.col(0).setZero();
    n0.col(g.nz() - 1).setZero();

    const Eigen::VectorXd gh = discrete_profile(p, g);
    SimState s = initial_state(g, std::move(n0));
    const ImexStepper stepper(p, g, scheme);
    const int per_output = std::max(1, static_cast<int>(std::lround(cfg.output_interval / scheme.dt)));
    const long total = std::lround(cfg.T / scheme.dt);
    auto record = [&] {
        s.history.push_back(
            {s.t, front_position(g, s.field, cfg.theta), sup_ratio(g, s.field, gh), total_mass(g, s.field)});
        if (cfg.observer) cfg.observer(s);
    };
    record();
    for (long k = 1; k <= total; ++k) {
        stepper.step(s);
        if (k % per_output == 0 || k == total) {
            record();
            const double xf = s.history.back().front;
            if (std::isfinite(xf) && xf >= g.a() - cfg.edge_margin) {
                std::ostringstream os;
                os << "run_invasion: front reached x=" << xf << " at t=" << s.t << " of T=" << cfg.T
                   << "; the domain is too small (a=" << g.a() << ")";
                throw GridError(os.str());
            }
        }
    }
    std::vector<double> ts, xs;
    for (const Sample& sm : s.history) {
        ts.push_back(sm.t);
        xs.push_back(sm.front);
    }
    const LinearFit fit = fit_tail(ts, xs, 0.5 * cfg.T);
    return {std::move(s), fit.slope, fit.r2, inv->c_star};
}

ExtinctionResult run_extinction(const ModelParams& p, const Grid2D& g, const StepScheme& scheme,
                                const ExtinctionConfig& cfg) {
    const Regime regime = classify(p);
    const auto* ext = std::get_if<Extinct>(&regime);
    if (!ext) {
        std::ostringstream os;
        os << "run_extinction: model is " << regime_name(regime) << " (lambda=" << regime_lambda(regime) << ")";
        throw ClassificationError(os.str());
    }
    if (!(cfg.T > 0.0 && cfg.output_interval > 0.0)) throw ParameterError("run_extinction: T and output_interval must be positive");

    // Against the discrete profile, M exp(-lambda_h t) Gamma_h is an exact
    // discrete supersolution shape.
    const Eigen::VectorXd gh = discrete_profile(p, g);
    const double amp = cfg.amplitude.value_or(p.growth.max_value() / p.kernel.lower());
    Field n0 = make_field(g);
    for (int i = 1; i + 1 < g.nx(); ++i) {
        const double bump = std::cos(0.5 * M_PI * g.x().node(i) / g.a());
        for (int j = 1; j + 1 < g.nz(); ++j) n0(i, j) = amp * bump * gh[j];
    }

    SimState s = initial_state(g, std::move(n0));
    const ImexStepper stepper(p, g, scheme);
    const int per_output = std::max(1, static_cast<int>(std::lround(cfg.output_interval / scheme.dt)));
    const long total = std::lround(cfg.T / scheme.dt);
    auto record = [&] {
        s.history.push_back({s.t, std::numeric_limits<double>::quiet_NaN(), sup_ratio(g, s.field, gh), total_mass(g, s.field)});
        if (cfg.observer) cfg.observer(s);
    };
    record();

    if (!(s.history.front().sup_ratio > 0.0)) {
        // The zero field is a fixed point; still advance to T.
        for (long k = 1; k <= total; ++k) stepper.step(s);
        return {std::move(s), 0.0, 0.0, ext->lambda, false, "zero initial datum; no decay rate", 0.0};
    }
    for (long k = 1; k <= total; ++k) {
        stepper.step(s);
        if (k % per_output == 0 || k == total) {
            record();
            if (!(s.history.back().sup_ratio > std::numeric_limits<double>::min())) {
                std::ostringstream os;
                os << "run_extinction: field underflowed at t=" << s.t << " before the end of the fit window; shorten T (now "
                   << cfg.T << ")";
                throw SolverError(os.str());
            }
        }
    }
    std::vector<double> ts, ys;
    double worst = 0.0;
    for (std::size_t k = 0; k < s.history.size(); ++k) {
        ts.push_back(s.history[k].t);
        ys.push_back(std::log(s.history[k].sup_ratio));
        if (k > 0) worst = std::max(worst, s.history[k].sup_ratio / s.history[k - 1].sup_ratio - 1.0);
    }
    const LinearFit fit = fit_tail(ts, ys, 0.5 * cfg.T);
    return {std::move(s), -fit.slope, fit.r2, ext->lambda, true, {}, worst};
}

}  // namespace clinewave
