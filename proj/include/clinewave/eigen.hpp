#pragma once

#include <functional>
#include <memory>
#include <variant>

#include <Eigen/Core>

#include "clinewave/grid.hpp"
#include "clinewave/interpolant.hpp"
#include "clinewave/model.hpp"

namespace clinewave {

enum class EigenDomain { Interval, Line };

/// Principal eigenpair of -(B^2+1) d_zz - (r(z) + nu z^2) with gamma(0) = 1.
struct EigenPair {
    double lambda;
    Grid1D grid;
    Eigen::VectorXd gamma;  ///< samples at every grid node, zero at both ends
    EigenDomain domain;
    double nu;
    double residual;  ///< ||M g - lambda g||_inf / ||g||_inf of the solver iterate

    double half_width() const noexcept { return grid.hi(); }
    std::shared_ptr<const CubicSpline> spline;  ///< set by make_pair

    /// Cubic interpolation of gamma; zero outside the grid.
    double operator()(double z) const;
};

EigenPair make_pair(double lambda, Grid1D grid, Eigen::VectorXd gamma, EigenDomain domain, double nu,
                    double residual);

/// Dirichlet problem on (-b, b) with n nodes: Sturm bisection for the smallest
/// eigenvalue, inverse iteration for the eigenvector.
EigenPair solve_interval(const ModelParams& p, double nu, double b, int n);

struct LineSolveOptions {
    double tol = 1e-9;        ///< relative change of lambda between doublings
    double h = 0.0025;        ///< node spacing, kept fixed while b doubles
    double b0 = 4.0;          ///< first half-width
    double b_cap = 64.0;      ///< largest half-width tried
    double tail_tol = 1e-10;  ///< max of gamma on the outer quarter, relative to max gamma
};

/// Problem on the whole line, approximated by intervals of doubling width.
EigenPair solve_line(const ModelParams& p, double nu, const LineSolveOptions& opt = {});

/// Largest value of gamma on |z| >= 3b/4 relative to its maximum.
double tail_ratio(const EigenPair& pair);

/// Principal eigenpair of -E - r(z) on the square (-R, R)^2 with Dirichlet data.
struct BoxEigenPair2D {
    double mu;
    Grid2D grid;
    Field upsilon;  ///< upsilon(0,0) = 1
    double R;
    double residual;
    double min_ratio;  ///< min / max of upsilon over interior nodes
};

/// Relative depth of negative values tolerated in a discrete Perron vector.
inline constexpr double kSignFloor = 1e-6;

BoxEigenPair2D solve_box_2d(const ModelParams& p, double R, int n);

struct Extinct {
    double lambda;
};
struct Marginal {
    double lambda;
};
struct Invading {
    double lambda;
    double c_star;
};
using Regime = std::variant<Extinct, Marginal, Invading>;

/// c* = 2 sqrt(-lambda / (B^2+1)); Extinct when lambda > 0, and 0 at lambda = 0.
std::variant<Extinct, double> minimal_speed(double lambda_inf0, double B);

struct ClassifyOptions {
    LineSolveOptions line{.tol = 1e-9, .h = 0.01};
    /// |lambda| at or below this band is reported as Marginal.
    double marginal_tol = 1e-7;
};

/// Sign of the principal eigenvalue on the line; lambda is Richardson
/// extrapolated from spacings h and h/2.
Regime classify(const ModelParams& p, const ClassifyOptions& opt = {});

double regime_lambda(const Regime& r);

/// Gamma_inf^0 as a callable. Quadratic profiles use the closed form
/// exp(-sqrt(A/(B^2+1)) z^2/2); other profiles use solve_line.
struct PrincipalProfile {
    double lambda;
    bool closed_form;
    std::function<double(double)> gamma;

    double operator()(double z) const { return gamma(z); }
};

PrincipalProfile principal_profile(const ModelParams& p, const LineSolveOptions& opt = {});
const char* regime_name(const Regime& r);

}  // namespace clinewave
