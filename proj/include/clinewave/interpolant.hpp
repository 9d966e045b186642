#pragma once

#include <memory>
#include <span>
#include <vector>

namespace clinewave {

/// Natural cubic spline through strictly increasing abscissae.
///
/// Immutable after construction; evaluation is thread-safe. Evaluation
/// outside [front, back] of the abscissae throws RangeError.
class CubicSpline {
public:
    CubicSpline(std::span<const double> x, std::span<const double> y);

    double operator()(double x) const;
    double lo() const noexcept { return x_.front(); }
    double hi() const noexcept { return x_.back(); }
    bool contains(double x) const noexcept { return x >= lo() && x <= hi(); }

    std::span<const double> abscissae() const noexcept { return x_; }
    std::span<const double> values() const noexcept { return y_; }

private:
    struct Impl;
    std::vector<double> x_;
    std::vector<double> y_;
    std::shared_ptr<const Impl> impl_;
};

}  // namespace clinewave
