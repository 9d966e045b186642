#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clinewave/interpolant.hpp"

namespace clinewave {

/// r(z) = rmax - A z^2.
struct QuadraticGrowth {
    double rmax;
    double A;
};

/// Growth rate sampled at increasing traits and interpolated by a cubic spline.
struct TabulatedGrowth {
    CubicSpline spline;
};

/// Growth profile r together with its confinement constant delta, the
/// constant for which r(z) <= 1/delta - delta z^2 is required.
class GrowthProfile {
public:
    static GrowthProfile quadratic(double rmax, double A, double delta);
    /// Quadratic profile with the largest admissible delta.
    static GrowthProfile quadratic(double rmax, double A);
    static GrowthProfile tabulated(std::vector<double> z, std::vector<double> r, double delta);

    /// Evaluates r(z). Throws RangeError outside the sample range of a
    /// tabulated profile.
    double operator()(double z) const;

    double delta() const noexcept { return delta_; }
    /// Supremum of r over its domain.
    double max_value() const noexcept { return max_value_; }
    /// Interval on which r is defined; the whole line for quadratic profiles.
    double z_min() const noexcept;
    double z_max() const noexcept;

    const QuadraticGrowth* as_quadratic() const noexcept { return std::get_if<QuadraticGrowth>(&kind_); }
    const TabulatedGrowth* as_tabulated() const noexcept { return std::get_if<TabulatedGrowth>(&kind_); }

private:
    GrowthProfile(std::variant<QuadraticGrowth, TabulatedGrowth> kind, double delta, double max_value)
        : kind_(std::move(kind)), delta_(delta), max_value_(max_value) {}

    std::variant<QuadraticGrowth, TabulatedGrowth> kind_;
    double delta_;
    double max_value_;
};

/// Largest delta with rmax - A z^2 <= 1/delta - delta z^2 for all z.
double largest_admissible_delta(double rmax, double A);

/// Competition kernel k(z, z') with bounds 0 < k_lower <= k <= k_upper.
class Kernel {
public:
    static Kernel constant(double value);
    static Kernel function(double lower, double upper, std::function<double(double, double)> eval,
                           std::string description = "function");
    /// k(z,z') = base + amplitude * exp(-(z-z')^2 / (2 width^2)).
    static Kernel gaussian(double base, double amplitude, double width);

    double operator()(double z, double zp) const { return constant_ ? lower_ : eval_(z, zp); }

    bool is_constant() const noexcept { return constant_; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    const std::string& description() const noexcept { return description_; }

private:
    Kernel() = default;

    bool constant_ = true;
    double lower_ = 1.0;
    double upper_ = 1.0;
    std::function<double(double, double)> eval_;
    std::string description_;
};

/// Full coefficient set of the moving-frame equation.
struct ModelParams {
    ModelParams(GrowthProfile growth, Kernel kernel, double B);

    GrowthProfile growth;
    Kernel kernel;
    double B;

    /// Trait diffusion coefficient B^2 + 1 of the moving-frame operator.
    double diffusion() const noexcept { return B * B + 1.0; }
};

/// One line of a validation report.
struct AssumptionCheck {
    std::string name;
    bool pass;
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;

    bool ok() const noexcept;
    std::vector<std::string> failures() const;
};

/// Checks the growth confinement bound and the kernel bounds. Kernel bounds are
/// spot-checked on a 101x101 grid over [-z_extent, z_extent]; by default the
/// extent is sqrt(6)/delta, clipped to the tabulated range.
ValidationReport validate_assumptions(const ModelParams& p,
                                      std::optional<double> z_extent = std::nullopt);

/// Biological parameters of the asexual cline model before rescaling.
struct BioParams {
    double sigma_x;  ///< spatial dispersal rate
    double sigma_m;  ///< mutation rate
    double r_max;    ///< maximal growth rate
    double V_s;      ///< selection strength is 1/(2 V_s)
    double b_cline;  ///< steepness of the environmental cline (may be 0)
    double K_cap;    ///< carrying capacity

    void validate() const;
};

struct RescaledModel {
    ModelParams params;
    double time_scale;   ///< t_rescaled = time_scale * t
    double space_scale;  ///< x_rescaled = space_scale * x
    double trait_scale;  ///< y_rescaled = trait_scale * y
};

/// Maps biological parameters onto the dimensionless model (rmax = 1).
RescaledModel rescale_bio(const BioParams& b);

/// Minimal spreading speed in original units, from the closed form.
/// Throws ClassificationError when the rescaled model is in the extinction regime.
double speed_original_units(const BioParams& b);

/// Converts a dimensionless speed back to original units.
double to_original_speed(const RescaledModel& m, double c_rescaled);

}  // namespace clinewave
