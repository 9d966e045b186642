#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clinewave/banded.hpp"
#include "clinewave/discretize.hpp"
#include "clinewave/grid.hpp"
#include "clinewave/model.hpp"

namespace clinewave {

enum class CrossStencil {
    four_point,  ///< same stencil as the wave solvers
    monotone     ///< seven-point, positivity preserving
};

struct StepScheme {
    double dt = 0.05;
    CrossStencil stencil = CrossStencil::monotone;
};

/// One recorded output time.
struct Sample {
    double t;
    double front;      ///< rightmost x with n(x, 0) >= theta; NaN when absent
    double sup_ratio;  ///< max over interior nodes of n / Gamma_h
    double mass;       ///< int int n dx dz
};

struct SimState {
    double t = 0.0;
    Grid2D grid;
    Field field;
    std::vector<Sample> history;
    long steps = 0;
    double max_clip_fraction = 0.0;  ///< largest clipped mass over total mass, per step
};

SimState initial_state(const Grid2D& g, Field field);

/// Implicit diffusion and decay, explicit growth and competition:
/// (I - dt E_h + dt r^-) n^{k+1} = n^k + dt (r^+ - K_h n^k) n^k with
/// r^+ - r^- = r, then negative values are set to zero. Where r >= 0 this is
/// (I - dt E_h) n^{k+1} = n^k + dt (r - K_h n^k) n^k. The factorization is
/// built once.
class ImexStepper {
public:
    ImexStepper(const ModelParams& p, const Grid2D& g, const StepScheme& scheme);

    const Grid2D& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }

    /// Advances `n` in place and returns the clipped mass over the total mass.
    /// Throws SolverError when the field leaves [0, 1e6] or stops being finite.
    double advance(Field& n) const;
    void step(SimState& s) const;

    /// Explicit reaction term (r - K_h n) n at every node.
    Field reaction(const Field& n) const;

private:
    Grid2D grid_;
    double dt_;
    Eigen::VectorXd r_;
    Eigen::MatrixXd kernel_;  // w_l k(z_j, z_l)
    Eigen::VectorXd wx_, wz_;
    BandedLU lu_;
};

/// Single step with a fresh factorization.
SimState step(const SimState& s, const ModelParams& p, const StepScheme& scheme);

/// Total mass by the trapezoid rule in both directions.
double total_mass(const Grid2D& g, const Field& n);

/// Rightmost x with n(x, 0) >= theta, linearly interpolated between nodes;
/// NaN when no node reaches theta.
double front_position(const Grid2D& g, const Field& n, double theta);

/// Half-height with Gamma_inf^{2delta/3} below 1e-12 of its maximum beyond it.
double simulation_half_height(const ModelParams& p);

/// Box of half-width a and half-height simulation_half_height(p), x spacing
/// h and z spacing max(1, |B|) h, so that the monotone stencil applies.
Grid2D simulation_grid(const ModelParams& p, double a, double h);

struct LinearFit {
    double slope;
    double intercept;
    double r2;
    int points;
};

/// Discrete principal eigenvector of -(B^2+1) d_zz - r on the z nodes of g,
/// with maximum 1. The simulation stencils reduce to this operator on
/// x-independent fields.
Eigen::VectorXd discrete_profile(const ModelParams& p, const Grid2D& g);

/// max over interior nodes of n / profile.
double sup_ratio(const Grid2D& g, const Field& n, const Eigen::VectorXd& profile);

/// Least-squares line through the points with t >= t_from.
LinearFit fit_tail(const std::vector<double>& t, const std::vector<double>& y, double t_from);

struct InvasionConfig {
    double T = 60.0;
    double theta = 0.05;
    double output_interval = 0.5;
    double plateau_length = 10.0;  ///< initial plateau on [-a, -a + plateau_length]
    /// Mass of the plateau per unit x; defaults to -lambda / k+.
    std::optional<double> amplitude;
    double edge_margin = 5.0;  ///< fronts closer than this to x = a stop the run
    std::function<void(const SimState&)> observer;  ///< called at every output time
};

struct InvasionResult {
    SimState state;
    double speed;
    double r2;
    double c_star;
};

/// Throws ClassificationError when the model is not invading and GridError
/// when the front reaches the right edge before T.
InvasionResult run_invasion(const ModelParams& p, const Grid2D& g, const StepScheme& scheme,
                            const InvasionConfig& cfg = {});

struct ExtinctionConfig {
    double T = 40.0;
    double output_interval = 0.5;
    /// Peak of the initial datum; the default is max r / k-. Zero gives the
    /// zero datum.
    std::optional<double> amplitude;
    std::function<void(const SimState&)> observer;  ///< called at every output time
};

struct ExtinctionResult {
    SimState state;
    double rate;    ///< fitted decay rate of sup n / Gamma_h
    double r2;
    double lambda;  ///< lambda_inf^0
    bool fit_ok;
    std::string flag;  ///< reason when fit_ok is false
    double max_ratio_increase;  ///< largest relative increase of sup n / Gamma_h between samples
};

/// Throws ClassificationError when the model is not extinct and SolverError
/// when the field underflows before the fit window.
ExtinctionResult run_extinction(const ModelParams& p, const Grid2D& g, const StepScheme& scheme,
                                const ExtinctionConfig& cfg = {});

}  // namespace clinewave
