#include "clinewave/interpolant.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <sstream>

#include "clinewave/error.hpp"

namespace clinewave {

struct CubicSpline::Impl {
    gsl_spline* spline = nullptr;
    ~Impl() { gsl_spline_free(spline); }
};

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    if (x_.size() != y_.size()) throw ParameterError("spline: abscissae and values differ in length");
    if (x_.size() < 3) throw ParameterError("spline: at least 3 samples are required");
    for (std::size_t i = 1; i < x_.size(); ++i) {
        if (!(x_[i] > x_[i - 1])) throw ParameterError("spline: abscissae must be strictly increasing");
    }
    // GSL aborts by default on errors; inputs are validated above.
    gsl_set_error_handler_off();
    auto impl = std::make_shared<Impl>();
    impl->spline = gsl_spline_alloc(gsl_interp_cspline, x_.size());
    gsl_spline_init(impl->spline, x_.data(), y_.data(), x_.size());
    impl_ = std::move(impl);
}

double CubicSpline::operator()(double x) const {
    if (!contains(x)) {
        std::ostringstream os;
        os << "spline evaluated at " << x << " outside [" << lo() << ", " << hi() << "]";
        throw RangeError(os.str());
    }
    // A null accelerator keeps evaluation free of shared mutable state.
    return gsl_spline_eval(impl_->spline, x, nullptr);
}

}  // namespace clinewave
