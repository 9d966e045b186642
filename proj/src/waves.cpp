#include "clinewave/waves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clinewave {

namespace {

struct BoundConstants {
    EigenPair gamma23;  // Gamma_inf^{2delta/3}
    double c_bar;
    double mass_bar;
    double gamma23_max;
    double beta;
    double gamma23_min_beta;
};

BoundConstants bound_constants(const ModelParams& p, const Grid2D& g, const Eigen::VectorXd& edge) {
    const double delta = p.growth.delta();
    EigenPair g23 = solve_line(p, 2.0 * delta / 3.0, LineSolveOptions{.tol = 1e-8, .h = 0.01});
    double c_bar = 0.0;
    for (int j = 1; j + 1 < g.nz(); ++j) {
        const double den = g23(g.z().node(j));
        if (den > 0.0) c_bar = std::max(c_bar, edge[j] / den);
    }
    const Eigen::VectorXd w = quadrature_weights(g23.grid);
    const double integral = w.dot(g23.gamma);
    const double beta = std::max(1.0 / delta, std::sqrt(std::max(0.0, -3.0 * g23.lambda / (2.0 * delta))));
    double min_beta = 1.0;
    for (int i = 0; i < g23.grid.size(); ++i)
        if (std::abs(g23.grid.node(i)) <= beta) min_beta = std::min(min_beta, g23.gamma[i]);
    min_beta = std::min({min_beta, g23(beta), g23(-beta)});
    const double gmax = g23.gamma.maxCoeff();
    return {std::move(g23), c_bar, c_bar * integral, gmax, beta, min_beta};
}

double sup_level(const ModelParams& p, double gamma, const BoundConstants& bc) {
    return std::max(2.0 * p.growth.max_value() / gamma, bc.c_bar * bc.gamma23_max);
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Field interpolate_onto(const Grid2D& from, const Field& u, const Grid2D& to, double left_clamp) {
    Field out = make_field(to);
    for (int i = 0; i < to.nx(); ++i) {
        const double x = std::max(to.x().node(i), left_clamp);
        for (int j = 0; j < to.nz(); ++j) {
            const double z = to.z().node(j);
            if (x > from.a() || std::abs(z) > from.b()) continue;
            out(i, j) = bilinear(from, u, x, z);
        }
    }
    return out;
}

// Guess on a larger box: the old profile up to x = a_old/2, its exponential
// leading edge beyond, and the old plateau column left of -a_old/2.
Field extend_guess(const Grid2D& from, const Field& u, const Grid2D& to) {
    const double xl = -0.5 * from.a();
    const double xe = 0.5 * from.a();
    const double u1 = bilinear(from, u, xe - 1.0, 0.0);
    const double u2 = bilinear(from, u, xe, 0.0);
    double kappa = (u1 > 0.0 && u2 > 0.0) ? std::log(u1 / u2) : 0.5;
    if (!(kappa > 0.0)) kappa = 0.5;
    Field out = make_field(to);
    for (int i = 1; i + 1 < to.nx(); ++i) {
        const double x = to.x().node(i);
        for (int j = 0; j < to.nz(); ++j) {
            const double z = to.z().node(j);
            if (std::abs(z) > from.b()) continue;
            if (x <= xe)
                out(i, j) = bilinear(from, u, std::max(x, xl), z);
            else
                out(i, j) = bilinear(from, u, xe, z) * std::exp(-kappa * (x - xe));
        }
    }
    return out;
}

// Positivity on |z| <= b/2 up to roundoff. Far-right values can underflow to
// tiny negatives, but a real sign change in the middle of the strip marks an
// oscillating leading edge.
bool middle_positive(const Grid2D& g, const Field& u) {
    const double floor = -1e-12 * u.cwiseAbs().maxCoeff();
    for (int i = 1; i + 1 < g.nx(); ++i)
        for (int j = 1; j + 1 < g.nz(); ++j)
            if (std::abs(g.z().node(j)) <= 0.5 * g.b() && !(u(i, j) > floor)) return false;
    return true;
}

}  // namespace

Eigen::VectorXd boundary_profile(const ModelParams& p, double b, int n) {
    return solve_interval(p, p.growth.delta() / 3.0, b, n).gamma;
}

bool DiagnosticReport::ok() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

const BoundCheck* DiagnosticReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

Grid2D box_grid(double a, double b, double hx, double hz) {
    const int nx = 2 * static_cast<int>(std::ceil(a / hx - 1e-9)) + 1;
    const int nz = 2 * static_cast<int>(std::ceil(b / hz - 1e-9)) + 1;
    return Grid2D(a, b, nx, nz);
}

BoxProblem::BoxProblem(const ModelParams& p, const Grid2D& g, double gamma)
    : p_(p),
      grid_(g),
      gamma_(gamma),
      boundary_(make_field(g)),
      diffusion_(assemble_2d(g, p.B, 0.0)),
      minus_dx_(assemble_minus_dx(g)),
      r_(g.nz()),
      kernel_(g.nz(), g.nz()),
      base_(g.interior_size(), g.nz() - 1, g.nz() - 1),
      center_(g.interior_index(g.nx() / 2, g.nz() / 2)) {
    if (!(gamma > 0.0)) throw ParameterError("box problem: gamma must be positive");
    boundary_.row(0) = boundary_profile(p, g.b(), g.nz()).transpose();
    const Eigen::VectorXd w = quadrature_weights(g.z());
    for (int j = 0; j < g.nz(); ++j) {
        const double z = g.z().node(j);
        r_[j] = p.growth(z);
        for (int l = 0; l < g.nz(); ++l) kernel_(j, l) = w[l] * p.kernel(z, g.z().node(l));
    }
    base_.add_sparse(diffusion_.interior);
}

void BoxProblem::check_peclet(double c) const {
    if (std::abs(c) * grid_.x().spacing() / 2.0 >= 1.0) {
        std::ostringstream os;
        os << "box problem: cell Peclet number " << std::abs(c) * grid_.x().spacing() / 2.0
           << " >= 1 at c=" << c << "; refine the x grid";
        throw GridError(os.str());
    }
}

Field BoxProblem::nonlocal(const Field& u) const { return u * kernel_.transpose(); }

Eigen::VectorXd BoxProblem::residual(const Field& u, double c, double tau) const {
    Eigen::VectorXd f = diffusion_.apply(u) + c * minus_dx_.apply(u);
    const Field ku = tau > 0.0 ? nonlocal(u) : Field();
    for (int i = 1; i + 1 < grid_.nx(); ++i) {
        for (int j = 1; j + 1 < grid_.nz(); ++j) {
            const double v = u(i, j);
            double react = r_[j] - gamma_ * (1.0 - tau) * v;
            if (tau > 0.0) react -= tau * ku(i, j);
            f[grid_.interior_index(i, j)] -= react * v;
        }
    }
    return f;
}

Eigen::VectorXd BoxProblem::dc(const Field& u) const { return minus_dx_.apply(u); }

BandedMatrix BoxProblem::linear(double c) const {
    check_peclet(c);
    BandedMatrix m = base_;
    if (c != 0.0) m.add_sparse(minus_dx_.interior, c);
    return m;
}

BandedMatrix BoxProblem::jacobian(const Field& u, double c, double tau) const {
    BandedMatrix m = linear(c);
    const Field ku = tau > 0.0 ? nonlocal(u) : Field();
    const int nz = grid_.nz();
    for (int i = 1; i + 1 < grid_.nx(); ++i) {
        for (int j = 1; j + 1 < nz; ++j) {
            const int row = grid_.interior_index(i, j);
            const double v = u(i, j);
            double d = r_[j] - 2.0 * gamma_ * (1.0 - tau) * v;
            if (tau > 0.0) d -= tau * ku(i, j);
            m.add(row, row, -d);
            if (tau > 0.0 && v != 0.0) {
                for (int l = 1; l + 1 < nz; ++l) m.add(row, grid_.interior_index(i, l), tau * v * kernel_(j, l));
            }
        }
    }
    return m;
}

double local_supersolution_level(const ModelParams& p, const Grid2D& g, double gamma) {
    const Eigen::VectorXd edge = boundary_profile(p, g.b(), g.nz());
    return sup_level(p, gamma, bound_constants(p, g, edge));
}

namespace {

Field solve_local_impl(const BoxProblem& prob, double c, double level, const Field* start) {
    const Grid2D& g = prob.grid();
    Field u = prob.boundary();
    if (start) {
        u = *start;
        u.row(0) = prob.boundary().row(0);
    } else {
        u.block(1, 1, g.nx() - 2, g.nz() - 2).setConstant(level);
    }
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int sweep = 0; sweep < 500; ++sweep) {
        const Eigen::VectorXd f = prob.residual(u, c, 0.0);
        BandedLU lu(prob.jacobian(u, c, 0.0));
        Eigen::VectorXd du = -f;
        lu.solve(du);
        Eigen::VectorXd v = interior_values(g, u) + du;
        set_interior(g, v, u);
        const double step = max_abs(du);
        if (step <= 1e-13 * std::max(1.0, max_abs(v)) ||
            (step <= 1e-9 && max_abs(prob.residual(u, c, 0.0)) <= 1e-11))
            return u;
        if (step < best) {
            best = step;
            since_best = 0;
        } else if (++since_best >= 50) {
            std::ostringstream os;
            os << "solve_local: iteration stalled at c=" << c << " (update " << step << ")";
            throw SolverError(os.str(), std::vector<double>(v.data(), v.data() + v.size()));
        }
    }
    throw SolverError("solve_local: no convergence in 500 sweeps", {});
}

}  // namespace

Field solve_local(const ModelParams& p, const Grid2D& g, double c, double gamma, const Field* start) {
    const BoxProblem prob(p, g, gamma);
    const double level = sup_level(p, gamma, bound_constants(p, g, prob.boundary().row(0).transpose()));
    return solve_local_impl(prob, c, level, start);
}

bool bordered_newton(const BoxProblem& prob, Field& u, double& c, double tau, double epsilon, double tol,
                     int max_iter, int* iterations, double* residual) {
    const Grid2D& g = prob.grid();
    const int ci = g.nx() / 2;
    const int cj = g.nz() / 2;
    auto measure = [&](const Field& v, double cc) {
        return std::max(max_abs(prob.residual(v, cc, tau)), std::abs(v(ci, cj) - epsilon));
    };
    double res = measure(u, c);
    int it = 0;
    bool ok = false;
    for (; it <= max_iter; ++it) {
        if (!std::isfinite(res)) break;
        if (res <= tol) {
            ok = true;
            break;
        }
        if (it == max_iter) break;
        Eigen::VectorXd y1 = -prob.residual(u, c, tau);
        Eigen::VectorXd y2 = prob.dc(u);
        try {
            BandedLU lu(prob.jacobian(u, c, tau));
            lu.solve(y1);
            lu.solve(y2);
        } catch (const Error&) {
            break;
        }
        const int k = prob.center();
        if (std::abs(y2[k]) < 1e-300) break;
        const double gap = u(ci, cj) - epsilon;
        const double dcv = (y1[k] + gap) / y2[k];
        const Eigen::VectorXd du = y1 - dcv * y2;
        const Eigen::VectorXd base = interior_values(g, u);
        double step = 1.0;
        Field trial = u;
        double trial_res = res;
        for (int ls = 0; ls < 6; ++ls, step *= 0.5) {
            set_interior(g, base + step * du, trial);
            try {
                trial_res = measure(trial, c + step * dcv);
            } catch (const GridError&) {
                trial_res = std::numeric_limits<double>::infinity();
            }
            if (trial_res < res) break;
        }
        if (!(trial_res < res) && !(trial_res < 10.0 * res)) break;
        u = trial;
        c += step * dcv;
        res = trial_res;
    }
    if (iterations) *iterations = it;
    if (residual) *residual = res;
    return ok;
}

namespace {

bool decreasing_in_x(const Field& u) {
    for (int i = 1; i + 1 < u.rows(); ++i)
        for (int j = 1; j + 1 < u.cols(); ++j)
            if (u(i + 1, j) > u(i, j) + 1e-12) return false;
    return true;
}

std::optional<WaveSolution> coarse_resolve(const ModelParams& p, const WaveSolution& s, const HomotopyConfig& cfg) {
    const Grid2D cg = box_grid(s.grid.a(), s.grid.b(), 2.0 * s.grid.x().spacing(), 2.0 * s.grid.z().spacing());
    try {
        const BoxProblem cprob(p, cg, cfg.gamma);
        Field cu = interpolate_onto(s.grid, s.u, cg, -s.grid.a());
        cu.row(0) = cprob.boundary().row(0);
        double cc = s.c;
        if (bordered_newton(cprob, cu, cc, 1.0, s.epsilon, cfg.newton_tol, cfg.newton_max_iter))
            return WaveSolution{cc, cg, cu, s.epsilon, 1.0, max_abs(cprob.residual(cu, cc, 1.0)), 0, {}};
    } catch (const Error&) {
    }
    return std::nullopt;
}

void attach_diagnostics(const ModelParams& p, WaveSolution& s, const HomotopyConfig& cfg) {
    const std::optional<WaveSolution> coarse = coarse_resolve(p, s, cfg);
    s.diagnostics = diagnose(p, s, cfg, coarse ? &*coarse : nullptr);
    if (!coarse) s.diagnostics.warnings.push_back("coarse-grid re-solve failed; no error estimate");
}

WaveSolution homotopy_once(const BoxProblem& prob, double c_star, double eps,
                           double level, const HomotopyConfig& cfg, std::vector<std::string>& warnings) {
    const Grid2D& g = prob.grid();
    const int ci = g.nx() / 2;
    const int cj = g.nz() / 2;
    const double c_max = 0.999 * 2.0 / g.x().spacing();

    // Stage 1: tau = 0, bisection on c.
    double lo = 0.0;
    Field u_lo = solve_local_impl(prob, 0.0, level, nullptr);
    if (!(u_lo(ci, cj) > eps)) {
        std::ostringstream os;
        os << "homotopy: u(0,0)=" << u_lo(ci, cj) << " at c=0 does not exceed epsilon=" << eps;
        throw ContinuationError(os.str(), 0.0, WaveSolution{0.0, g, u_lo, eps, 0.0, 0.0, 0, {}});
    }
    if (!decreasing_in_x(u_lo)) warnings.push_back("tau=0 profile at c=0 is not strictly decreasing in x");
    double hi = std::min(std::max(c_star, 1e-3), c_max);
    Field u_hi = solve_local_impl(prob, hi, level, &u_lo);
    while (u_hi(ci, cj) > eps) {
        if (hi >= c_max) throw ContinuationError("homotopy: cannot bracket c at tau=0", 0.0,
                                                 WaveSolution{hi, g, u_hi, eps, 0.0, 0.0, 0, {}});
        lo = hi;
        u_lo = u_hi;
        hi = std::min(1.5 * hi, c_max);
        u_hi = solve_local_impl(prob, hi, level, &u_lo);
    }
    const double width_tol = cfg.bisection_tol * std::max(c_star, 1e-3);
    while (hi - lo > width_tol) {
        const double mid = 0.5 * (lo + hi);
        Field u_mid = solve_local_impl(prob, mid, level, &u_lo);
        if (u_mid(ci, cj) > eps) {
            lo = mid;
            u_lo = std::move(u_mid);
        } else {
            hi = mid;
            u_hi = std::move(u_mid);
        }
    }
    const double f_lo = u_lo(ci, cj) - eps;
    const double f_hi = u_hi(ci, cj) - eps;
    double c = lo + (hi - lo) * f_lo / (f_lo - f_hi);
    Field u = u_lo + (u_hi - u_lo) * (f_lo / (f_lo - f_hi));
    int its = 0;
    double res = 0.0;
    if (!bordered_newton(prob, u, c, 0.0, eps, cfg.newton_tol, cfg.newton_max_iter, &its, &res)) {
        throw ContinuationError("homotopy: bordered Newton failed at tau=0", 0.0,
                                WaveSolution{c, g, u, eps, 0.0, res, its, {}});
    }
    if (!decreasing_in_x(u)) warnings.push_back("tau=0 profile is not strictly decreasing in x");

    // Stage 2: continuation in tau.
    double tau = 0.0;
    double tau_prev = -1.0;
    Field u_prev;
    double c_prev = 0.0;
    double step = cfg.tau_step;
    int total_its = its;
    while (tau < 1.0) {
        const double next = std::min(1.0, tau + step);
        Field guess = u;
        double cg = c;
        if (tau_prev >= 0.0) {
            const double s = (next - tau) / (tau - tau_prev);
            guess = u + s * (u - u_prev);
            cg = c + s * (c - c_prev);
        }
        bool ok = bordered_newton(prob, guess, cg, next, eps, cfg.newton_tol, cfg.newton_max_iter, &its, &res);
        ok = ok && cg > 0.0 && cg < c_max && middle_positive(g, guess) &&
             guess.minCoeff() >= -kSignFloor * guess.maxCoeff();
        if (ok) {
            total_its += its;
            tau_prev = tau;
            u_prev = std::move(u);
            c_prev = c;
            tau = next;
            u = std::move(guess);
            c = cg;
            step = std::min(1.5 * step, cfg.max_tau_step);
        } else {
            step *= 0.5;
            if (step < cfg.min_tau_step) {
                std::ostringstream os;
                os << "homotopy: continuation stalled at tau=" << tau << " (step below " << cfg.min_tau_step << ")";
                throw ContinuationError(os.str(), tau, WaveSolution{c, g, u, eps, tau, res, total_its, {}});
            }
        }
    }
    const double final_res = max_abs(prob.residual(u, c, 1.0));
    return WaveSolution{c, g, std::move(u), eps, 1.0, final_res, total_its, {}};
}

}  // namespace

WaveSolution solve_box_homotopy(const ModelParams& p, const Grid2D& g, const HomotopyConfig& cfg) {
    if (!(cfg.gamma > 0.0)) throw ParameterError("homotopy: gamma must be positive");
    const Regime regime = classify(p);
    const auto* inv = std::get_if<Invading>(&regime);
    if (!inv) throw ClassificationError(std::string("homotopy: model is ") + regime_name(regime) + ", no front");
    const BoxProblem prob(p, g, cfg.gamma);
    const BoundConstants bc = bound_constants(p, g, prob.boundary().row(0).transpose());
    const double level = sup_level(p, cfg.gamma, bc);
    double eps = cfg.epsilon.value_or(0.01 * level);
    if (!(eps > 0.0) || eps > cfg.epsilon_ceiling * level) {
        std::ostringstream os;
        os << "homotopy: epsilon=" << eps << " must lie in (0, " << cfg.epsilon_ceiling * level << "]";
        throw ParameterError(os.str());
    }
    std::vector<std::string> warnings;
    for (int attempt = 0;; ++attempt) {
        try {
            WaveSolution s = homotopy_once(prob, inv->c_star, eps, level, cfg, warnings);
            if (cfg.diagnostics) attach_diagnostics(p, s, cfg);
            for (auto& w : warnings) s.diagnostics.warnings.push_back(w);
            if (attempt > 0)
                s.diagnostics.warnings.push_back("epsilon halved " + std::to_string(attempt) + " time(s)");
            return s;
        } catch (const ContinuationError&) {
            if (attempt >= cfg.max_epsilon_halvings) throw;
            eps *= 0.5;
        }
    }
}

DiagnosticReport diagnose(const ModelParams& p, const WaveSolution& s, const HomotopyConfig& cfg,
                          const WaveSolution* coarse) {
    const Grid2D& g = s.grid;
    DiagnosticReport r;
    const Eigen::VectorXd edge = s.u.row(0).transpose();
    const BoundConstants bc = bound_constants(p, g, edge);
    const Regime regime = classify(p);
    r.c_star = std::holds_alternative<Invading>(regime) ? std::get<Invading>(regime).c_star : 0.0;
    r.c_bar = bc.c_bar;
    r.mass_bound = std::max(2.0 * p.growth.max_value() / p.kernel.lower(), bc.mass_bar);
    r.sup_bound = sup_level(p, cfg.gamma, bc);
    r.tail_constant = std::max(bc.c_bar, r.sup_bound / bc.gamma23_min_beta);

    struct Values {
        double norm, c, mass, sup, tail, neg, right_sup, right_mass, residual;
        int tail_violations;
        Eigen::VectorXd mass_profile;
    };
    auto evaluate = [&](const WaveSolution& w) {
        const Grid2D& gg = w.grid;
        Values v{};
        const Eigen::VectorXd wz = quadrature_weights(gg.z());
        v.mass_profile = w.u * wz;
        v.norm = std::abs(w.u(gg.nx() / 2, gg.nz() / 2) - w.epsilon);
        v.c = w.c;
        v.mass = v.mass_profile.maxCoeff();
        v.sup = w.u.maxCoeff();
        v.neg = -std::min(0.0, w.u.minCoeff());
        double tail = 0.0;
        int viol = 0;
        for (int j = 0; j < gg.nz(); ++j) {
            const double cap = r.tail_constant * bc.gamma23(gg.z().node(j));
            for (int i = 0; i < gg.nx(); ++i) {
                if (w.u(i, j) <= 0.0) continue;
                const double ratio = cap > 0.0 ? w.u(i, j) / cap : std::numeric_limits<double>::infinity();
                tail = std::max(tail, ratio);
                if (ratio > 1.0) ++viol;
            }
        }
        v.tail = tail;
        v.tail_violations = viol;
        const int i0 = gg.nx() / 2;
        const double sup0 = w.u.row(i0).maxCoeff();
        const double mass0 = v.mass_profile[i0];
        double rs = 0.0, rm = 0.0;
        for (int i = 0; i < gg.nx(); ++i) {
            if (gg.x().node(i) < 0.5 * gg.a()) continue;
            rs = std::max(rs, w.u.row(i).maxCoeff());
            rm = std::max(rm, v.mass_profile[i]);
        }
        v.right_sup = sup0 > 0.0 ? rs / sup0 : 0.0;
        v.right_mass = mass0 > 0.0 ? rm / mass0 : 0.0;
        v.residual = w.residual;
        return v;
    };
    const Values fine = evaluate(s);
    const std::optional<Values> crude = coarse ? std::optional<Values>(evaluate(*coarse)) : std::nullopt;
    r.mass = fine.mass_profile;
    r.tail_violations = fine.tail_violations;
    r.right_sup_ratio = fine.right_sup;
    r.right_mass_ratio = fine.right_mass;
    r.min_value = s.u.minCoeff();

    auto add = [&](const std::string& name, double value, double bound, double coarse_value) {
        const double err = crude ? std::abs(value - coarse_value) : 0.0;
        const double slack = std::max(0.0, value - bound);
        r.checks.push_back({name, value, bound, slack, err, slack <= 2.0 * err});
        r.discretization_error = std::max(r.discretization_error, err);
    };
    const Values& cv = crude ? *crude : fine;
    add("normalization", fine.norm, 1e-8, cv.norm);
    add("residual", fine.residual, 1e-8, cv.residual);
    add("speed_positive", -fine.c, 0.0, -cv.c);
    if (r.checks.back().pass && fine.c <= 0.0) r.checks.back().pass = false;
    add("speed_upper", fine.c, r.c_star, cv.c);
    add("mass", fine.mass, r.mass_bound, cv.mass);
    add("sup", fine.sup, r.sup_bound, cv.sup);
    add("tail", fine.tail, 1.0, cv.tail);
    add("nonnegative", fine.neg, 0.0, cv.neg);

    // Left-state floor: largest nu with u >= nu on (-a,0] x [-nu,nu].
    const int jc = g.nz() / 2;
    double best = 0.0;
    double running = std::numeric_limits<double>::infinity();
    for (int d = 0; jc + d + 1 < g.nz(); ++d) {
        for (int i = 1; i < g.nx() && g.x().node(i) <= 1e-12; ++i)
            running = std::min({running, s.u(i, jc + d), s.u(i, jc - d)});
        const double lo = g.z().node(jc + d);
        const double hi = g.z().node(jc + d + 1);
        const double nu = std::min(running, hi * (1.0 - 1e-12));
        if (nu >= lo && nu > 0.0) best = std::max(best, nu);
    }
    r.left_floor = best;
    if (!(best > 0.0)) r.warnings.push_back("no positive left-state floor");
    return r;
}

StripResult refine_to_strip(const ModelParams& p, const StripConfig& cfg) {
    if (cfg.rungs.empty()) throw ParameterError("refine_to_strip: empty ladder");
    StripResult out{WaveSolution{0.0, Grid2D(1.0, 1.0, 3, 3), Field(), 0.0, 0.0, 0.0, 0, {}}, {}, {}, false};
    HomotopyConfig quiet = cfg.homotopy;
    quiet.diagnostics = false;
    std::optional<WaveSolution> prev;
    for (std::size_t k = 0; k < cfg.rungs.size(); ++k) {
        const StripRung& rung = cfg.rungs[k];
        const Grid2D g = box_grid(rung.a, rung.b, cfg.h, cfg.h);
        std::optional<WaveSolution> cur;
        if (prev) {
            const BoxProblem prob(p, g, quiet.gamma);
            Field u = extend_guess(prev->grid, prev->u, g);
            u.row(0) = prob.boundary().row(0);
            double c = prev->c;
            int its = 0;
            double res = 0.0;
            if (bordered_newton(prob, u, c, 1.0, prev->epsilon, quiet.newton_tol, quiet.newton_max_iter, &its, &res) &&
                middle_positive(g, u) && u.minCoeff() >= -kSignFloor * u.maxCoeff())
                cur = WaveSolution{c, g, std::move(u), prev->epsilon, 1.0, res, its, {}};
        }
        if (!cur) {
            HomotopyConfig h = quiet;
            if (prev) h.epsilon = prev->epsilon;
            cur = solve_box_homotopy(p, g, h);
        }
        out.c_history.push_back(cur->c);
        out.rungs.push_back(rung);
        bool steady = false;
        if (prev) {
            const double dc = std::abs(cur->c - prev->c) / std::max(std::abs(cur->c), 1e-12);
            double du = 0.0, umax = 0.0;
            const int i0 = cur->grid.nx() / 2;
            for (int j = 0; j < cur->grid.nz(); ++j) {
                const double z = cur->grid.z().node(j);
                const double old = std::abs(z) <= prev->grid.b() ? bilinear(prev->grid, prev->u, 0.0, z) : 0.0;
                du = std::max(du, std::abs(cur->u(i0, j) - old));
                umax = std::max(umax, std::abs(cur->u(i0, j)));
            }
            steady = dc < cfg.c_tol && du < cfg.u_tol * umax;
        }
        prev = std::move(cur);
        if (steady) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) {
        std::ostringstream os;
        os << "refine_to_strip: ladder did not settle; c per rung:";
        for (double c : out.c_history) os << ' ' << c;
        throw SolverError(os.str(), out.c_history);
    }
    WaveSolution& s = *prev;
    if (cfg.homotopy.diagnostics) attach_diagnostics(p, s, cfg.homotopy);
    out.solution = std::move(s);
    return out;
}

}  // namespace clinewave
