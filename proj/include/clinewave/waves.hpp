#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clinewave/banded.hpp"
#include "clinewave/discretize.hpp"
#include "clinewave/eigen.hpp"
#include "clinewave/error.hpp"
#include "clinewave/grid.hpp"
#include "clinewave/model.hpp"

namespace clinewave {

/// Left-edge Dirichlet data Gamma_b^{delta/3}, sampled on the z nodes.
Eigen::VectorXd boundary_profile(const ModelParams& p, double b, int n);

/// One a priori bound evaluated on a solution.
struct BoundCheck {
    std::string name;
    double value;     ///< left-hand side
    double bound;     ///< right-hand side
    double slack;     ///< max(0, value - bound)
    double error;     ///< discretization-error estimate for value
    bool pass;        ///< slack <= 2 * error
};

struct DiagnosticReport {
    std::vector<BoundCheck> checks;
    Eigen::VectorXd mass;  ///< m(x_i) = int u(x_i, z) dz
    double mass_bound = 0.0;
    double sup_bound = 0.0;     ///< M
    double tail_constant = 0.0; ///< M bar
    double c_bar = 0.0;         ///< C bar with Gamma_b^{delta/3} <= C bar Gamma_inf^{2delta/3}
    int tail_violations = 0;
    double c_star = 0.0;
    double left_floor = 0.0;       ///< largest nu with u >= nu on (-a,0] x [-nu,nu]
    double right_sup_ratio = 0.0;  ///< max over the right quarter of sup_z u, over sup_z u(0,.)
    double right_mass_ratio = 0.0; ///< same for the mass
    double min_value = 0.0;        ///< min of u over the grid
    double discretization_error = 0.0;
    std::vector<std::string> warnings;

    bool ok() const noexcept;
    const BoundCheck* find(const std::string& name) const;
};

struct WaveSolution {
    double c;
    Grid2D grid;
    Field u;
    double epsilon;
    double tau;
    double residual;  ///< sup norm of the discrete residual over interior nodes
    int newton_iterations = 0;
    DiagnosticReport diagnostics;
};

struct HomotopyConfig {
    double gamma = 1.0;
    /// u(0,0) target; defaults to 0.01 M.
    std::optional<double> epsilon;
    double epsilon_ceiling = 0.1;  ///< epsilon must not exceed this multiple of M
    double tau_step = 0.1;
    double min_tau_step = 1e-4;
    double max_tau_step = 0.25;
    double newton_tol = 1e-10;
    int newton_max_iter = 15;
    int max_epsilon_halvings = 3;
    double bisection_tol = 1e-3;  ///< relative width of the c bracket at tau = 0
    bool diagnostics = true;      ///< fill the report, including a coarse-grid re-solve
};

/// Discrete P_tau(a,b): residual and Jacobian of
/// -E(u) - c u_x - (r - tau K u - gamma (1-tau) u) u on interior nodes.
class BoxProblem {
public:
    BoxProblem(const ModelParams& p, const Grid2D& g, double gamma);

    const Grid2D& grid() const noexcept { return grid_; }
    const ModelParams& params() const noexcept { return p_; }
    double gamma() const noexcept { return gamma_; }
    /// Field holding the Dirichlet data and zero in the interior.
    const Field& boundary() const noexcept { return boundary_; }

    /// K u at every node: sum_l w_l k(z_j, z_l) u(x_i, z_l).
    Field nonlocal(const Field& u) const;
    Eigen::VectorXd residual(const Field& u, double c, double tau) const;
    /// d residual / d c.
    Eigen::VectorXd dc(const Field& u) const;
    BandedMatrix jacobian(const Field& u, double c, double tau) const;
    /// Linear operator -E - c d_x on the interior, as a banded matrix.
    BandedMatrix linear(double c) const;

    /// Interior index of (0,0).
    int center() const noexcept { return center_; }

private:
    void check_peclet(double c) const;

    ModelParams p_;
    Grid2D grid_;
    double gamma_;
    Field boundary_;
    Operator2D diffusion_;
    Operator2D minus_dx_;
    Eigen::VectorXd r_;        // r(z_j), all nodes
    Eigen::MatrixXd kernel_;   // w_l k(z_j, z_l), all nodes
    BandedMatrix base_;
    int center_;
};

/// Supersolution level max(2 max r / gamma, C bar max Gamma_inf^{2delta/3}).
double local_supersolution_level(const ModelParams& p, const Grid2D& g, double gamma);

/// Solves P_0(a,b) at fixed c by monotone (Newton) iteration from the
/// supersolution level, or from `start` when given.
Field solve_local(const ModelParams& p, const Grid2D& g, double c, double gamma,
                  const Field* start = nullptr);

/// Raised when continuation in tau stalls before tau = 1.
class ContinuationError : public SolverError {
public:
    ContinuationError(const std::string& what, double tau, WaveSolution last)
        : SolverError(what, {}), tau_(tau), last_(std::move(last)) {}
    double tau() const noexcept { return tau_; }
    const WaveSolution& last() const noexcept { return last_; }

private:
    double tau_;
    WaveSolution last_;
};

/// Bordered Newton for (u, c) at fixed tau with u(0,0) = epsilon.
/// Returns false when the iteration fails to converge; `u` and `c` are
/// then left at the last iterate.
bool bordered_newton(const BoxProblem& prob, Field& u, double& c, double tau, double epsilon,
                     double tol, int max_iter, int* iterations = nullptr, double* residual = nullptr);

/// Box solution at tau = 1 by bisection in c at tau = 0 and continuation in tau.
WaveSolution solve_box_homotopy(const ModelParams& p, const Grid2D& g, const HomotopyConfig& cfg = {});

/// Fills the a priori bound report for a tau = 1 solution. When `coarse`
/// is given it supplies the discretization-error estimates.
DiagnosticReport diagnose(const ModelParams& p, const WaveSolution& s, const HomotopyConfig& cfg,
                          const WaveSolution* coarse = nullptr);

struct StripRung {
    double a;
    double b;
};

struct StripConfig {
    std::vector<StripRung> rungs{{20.0, 8.0}, {30.0, 9.0}, {40.0, 10.0}};
    double h = 0.2;
    double c_tol = 0.01;  ///< relative change of c between rungs
    double u_tol = 0.01;  ///< relative change of u(0, .) between rungs
    HomotopyConfig homotopy{};
};

struct StripResult {
    WaveSolution solution;
    std::vector<double> c_history;
    std::vector<StripRung> rungs;
    bool converged;
};

/// Re-solves on growing boxes, starting each rung from the interpolated
/// previous solution.
StripResult refine_to_strip(const ModelParams& p, const StripConfig& cfg = {});

/// Grid with spacing at most h in both directions and odd node counts.
Grid2D box_grid(double a, double b, double hx, double hz);

/// Exponential barriers of the c > c* construction, in rotated variables
/// X = sqrt(B^2+1) x + B z / sqrt(B^2+1), Y = z / sqrt(B^2+1).
class ExponentialBarriers {
public:
    /// Throws ParameterError when c <= c*.
    ExponentialBarriers(const ModelParams& p, double c);

    double c() const noexcept { return c_; }
    double c_star() const noexcept { return c_star_; }
    /// Largest root of mu^2 + c sqrt(B^2+1) mu + c*^2 (B^2+1)/4.
    double mu() const noexcept { return mu_; }
    /// C = k+ int exp(mu B z / sqrt(B^2+1)) Gamma_inf^0(z) dz.
    double integral_constant() const noexcept { return C_; }
    double gamma0(double z) const { return profile_(z); }

    /// w(X,Y) = exp(mu X) Gamma_inf^0(sqrt(B^2+1) Y).
    double w(double X, double Y) const;
    /// rho for a given eps; positive when eps is admissible.
    double rho(double eps) const;
    /// Throws ParameterError naming the violated inequality.
    void check_eps(double eps) const;
    /// Smallest A (>= 1) for which {h > 0} lies where h is a subsolution, for
    /// boxes of half-height b in z.
    double admissible_A(double eps, double b) const;
    /// h(X,Y) = (exp(mu X)/A - exp((mu-eps) X)) Gamma_inf^0(sqrt(B^2+1) Y).
    double h(double A, double eps, double X, double Y) const;
    /// Zero of h in X: ln(A)/eps.
    static double h_root(double A, double eps) { return std::log(A) / eps; }
    /// Default eps: half the admissible upper limit.
    double default_eps() const;

    /// Coordinates of (x, z) in the rotated frame.
    std::pair<double, double> to_rotated(double x, double z) const;

private:
    ModelParams p_;
    double c_;
    double c_star_;
    double mu_;
    double C_;
    double sqrtD_;
    PrincipalProfile profile_;
};

double supersolution_w(const ModelParams& p, double c, double X, double Y);
double subsolution_h(const ModelParams& p, double c, double A, double eps, double X, double Y);

/// Sup norm of the discrete -E w - c w_x - r w on the interior of g, with w
/// written in (x, z) variables.
double supersolution_residual(const ModelParams& p, double c, const Grid2D& g);

struct FastWaveConfig {
    double damping = 0.5;  ///< v <- (1 - damping) v + damping Phi(v)
    double tol = 1e-9;     ///< on ||v_{k+1} - v_k||_inf relative to ||v||_inf
    int max_iter = 400;
    std::optional<double> eps;  ///< exponent gap; default ExponentialBarriers::default_eps
    std::optional<double> A;    ///< default admissible_A
    double sandwich_tol = kSignFloor; ///< relative violation of the raw map tolerated by clipping
};

struct FastWaveResult {
    WaveSolution solution;
    double mu;
    double eps;
    double A;
    int iterations;
    double max_clip;  ///< largest clipping correction in the last sweep, relative to max u
    Field lower;      ///< h0 in (x, z) variables
    Field upper;      ///< exp(mu X) Gamma_inf^0(z)
};

FastWaveResult solve_fast_wave(const ModelParams& p, double c, const Grid2D& g, const FastWaveConfig& cfg = {});

/// v(x,y) = u((x - B y)/sqrt(B^2+1), sqrt(B^2+1) y) resampled on `target`.
/// Nodes whose preimage leaves the source box are clamped and flagged.
struct Resampled {
    Field values;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> clamped;
    int clamped_count = 0;
};
Resampled rotate_frame(const Grid2D& source, const Field& u, double B, const Grid2D& target);
Resampled unrotate_frame(const Grid2D& source, const Field& v, double B, const Grid2D& target);

/// Rotated-frame grid whose nodes are images of source nodes when
/// B h_z / (B^2+1) is an integer multiple of h_x; it covers the largest
/// rectangle inside the image of the source box.
Grid2D rotated_grid(const Grid2D& source, double B);

}  // namespace clinewave
