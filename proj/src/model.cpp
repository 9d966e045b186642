#include "clinewave/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string_view>

#include "clinewave/error.hpp"

namespace clinewave {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

GrowthProfile GrowthProfile::quadratic(double rmax, double A, double delta) {
    if (!(rmax > 0.0)) throw ParameterError("quadratic growth: rmax must be positive");
    if (!(A > 0.0)) throw ParameterError("quadratic growth: A must be positive");
    if (!(delta > 0.0)) throw ParameterError("growth: delta must be positive");
    return GrowthProfile(QuadraticGrowth{rmax, A}, delta, rmax);
}

GrowthProfile GrowthProfile::quadratic(double rmax, double A) {
    return quadratic(rmax, A, largest_admissible_delta(rmax, A));
}

GrowthProfile GrowthProfile::tabulated(std::vector<double> z, std::vector<double> r, double delta) {
    if (!(delta > 0.0)) throw ParameterError("growth: delta must be positive");
    CubicSpline spline(z, r);
    // The spline can overshoot between samples; sample densely for the maximum.
    double max_value = *std::max_element(r.begin(), r.end());
    const int refine = 16;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        for (int k = 1; k < refine; ++k) {
            const double zz = z[i] + (z[i + 1] - z[i]) * k / refine;
            max_value = std::max(max_value, spline(zz));
        }
    }
    return GrowthProfile(TabulatedGrowth{std::move(spline)}, delta, max_value);
}

double GrowthProfile::operator()(double z) const {
    if (const auto* q = as_quadratic()) return q->rmax - q->A * z * z;
    return std::get<TabulatedGrowth>(kind_).spline(z);
}

double GrowthProfile::z_min() const noexcept {
    if (const auto* t = as_tabulated()) return t->spline.lo();
    return -std::numeric_limits<double>::infinity();
}

double GrowthProfile::z_max() const noexcept {
    if (const auto* t = as_tabulated()) return t->spline.hi();
    return std::numeric_limits<double>::infinity();
}

double largest_admissible_delta(double rmax, double A) {
    if (!(A > 0.0)) throw ParameterError("largest_admissible_delta: A must be positive");
    if (rmax <= 0.0) return A;
    return std::min(A, 1.0 / rmax);
}

Kernel Kernel::constant(double value) {
    if (!(value > 0.0)) throw ParameterError("kernel: constant value must be positive");
    Kernel k;
    k.constant_ = true;
    k.lower_ = k.upper_ = value;
    k.description_ = "constant";
    return k;
}

Kernel Kernel::function(double lower, double upper, std::function<double(double, double)> eval,
                        std::string description) {
    if (!(lower > 0.0) || !(upper >= lower)) {
        throw ParameterError("kernel: bounds must satisfy 0 < lower <= upper");
    }
    if (!eval) throw ParameterError("kernel: empty evaluation function");
    Kernel k;
    k.constant_ = false;
    k.lower_ = lower;
    k.upper_ = upper;
    k.eval_ = std::move(eval);
    k.description_ = std::move(description);
    return k;
}

Kernel Kernel::gaussian(double base, double amplitude, double width) {
    if (!(base > 0.0)) throw ParameterError("gaussian kernel: base must be positive");
    if (!(amplitude >= 0.0)) throw ParameterError("gaussian kernel: amplitude must be nonnegative");
    if (!(width > 0.0)) throw ParameterError("gaussian kernel: width must be positive");
    if (amplitude == 0.0) return constant(base);
    const double inv = 1.0 / (2.0 * width * width);
    return function(
        base, base + amplitude,
        [=](double z, double zp) { return base + amplitude * std::exp(-(z - zp) * (z - zp) * inv); },
        "gaussian");
}

ModelParams::ModelParams(GrowthProfile growth_, Kernel kernel_, double B_)
    : growth(std::move(growth_)), kernel(std::move(kernel_)), B(B_) {
    if (!(B >= 0.0) || !std::isfinite(B)) throw ParameterError("model: cline slope B must be >= 0");
}

bool ValidationReport::ok() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

std::vector<std::string> ValidationReport::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (!c.pass) out.push_back(c.name + ": " + c.detail);
    }
    return out;
}

ValidationReport validate_assumptions(const ModelParams& p, std::optional<double> z_extent) {
    ValidationReport report;
    const double delta = p.growth.delta();

    if (const auto* q = p.growth.as_quadratic()) {
        // rmax - A z^2 <= 1/delta - delta z^2 for all z  <=>  delta <= A and rmax <= 1/delta.
        const bool slope_ok = delta <= q->A;
        const bool level_ok = q->rmax * delta <= 1.0;
        report.checks.push_back({"growth.confinement", slope_ok && level_ok,
                                 "delta=" + fmt(delta) + " requires delta <= A=" + fmt(q->A) +
                                     " and rmax=" + fmt(q->rmax) + " <= 1/delta=" + fmt(1.0 / delta)});
    } else {
        const auto& t = *p.growth.as_tabulated();
        const auto zs = t.spline.abscissae();
        const auto rs = t.spline.values();
        bool ok = true;
        std::string detail = "all samples satisfy r(z) <= 1/delta - delta z^2";
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const double bound = 1.0 / delta - delta * zs[i] * zs[i];
            if (rs[i] > bound) {
                ok = false;
                detail = "sample z=" + fmt(zs[i]) + " has r=" + fmt(rs[i]) + " > " + fmt(bound);
                break;
            }
        }
        report.checks.push_back({"growth.confinement", ok, detail});
    }

    double extent = z_extent.value_or(std::sqrt(6.0) / delta);
    extent = std::min({extent, -p.growth.z_min(), p.growth.z_max()});
    extent = std::max(extent, 0.0);

    bool kernel_ok = true;
    double kmin = std::numeric_limits<double>::infinity();
    double kmax = -kmin;
    const int n = 101;
    for (int i = 0; i < n; ++i) {
        const double z = -extent + 2.0 * extent * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double zp = -extent + 2.0 * extent * j / (n - 1);
            const double v = p.kernel(z, zp);
            kmin = std::min(kmin, v);
            kmax = std::max(kmax, v);
        }
    }
    kernel_ok = kmin >= p.kernel.lower() && kmax <= p.kernel.upper() && p.kernel.lower() > 0.0;
    report.checks.push_back({"kernel.bounds", kernel_ok,
                             "observed [" + fmt(kmin) + ", " + fmt(kmax) + "] within [" +
                                 fmt(p.kernel.lower()) + ", " + fmt(p.kernel.upper()) + "]"});
    report.checks.push_back({"cline.slope", p.B >= 0.0, "B=" + fmt(p.B)});
    return report;
}

void BioParams::validate() const {
    const std::pair<const char*, double> fields[] = {{"sigma_x", sigma_x}, {"sigma_m", sigma_m},
                                                     {"r_max", r_max},     {"V_s", V_s},
                                                     {"b_cline", b_cline}, {"K_cap", K_cap}};
    for (const auto& [name, v] : fields) {
        // A flat environment (b_cline = 0) is allowed.
        const bool zero_ok = std::string_view(name) == "b_cline" && v == 0.0;
        if (!zero_ok && (!(v > 0.0) || !std::isfinite(v))) {
            throw ParameterError(std::string("bio parameter ") + name + " must be positive and finite");
        }
    }
}

RescaledModel rescale_bio(const BioParams& b) {
    b.validate();
    const double A = b.sigma_m * b.sigma_m / (4.0 * b.r_max * b.r_max * b.V_s);
    const double B = b.sigma_x / b.sigma_m * b.b_cline;
    const double k = 1.0 / (b.K_cap * b.r_max);
    const double root = std::sqrt(2.0 * b.r_max);
    return RescaledModel{ModelParams(GrowthProfile::quadratic(1.0, A), Kernel::constant(k), B),
                         b.r_max, root / b.sigma_x, root / b.sigma_m};
}

double speed_original_units(const BioParams& b) {
    b.validate();
    const double slope = b.b_cline * b.sigma_x / b.sigma_m;
    const double D = slope * slope + 1.0;
    const double load = b.sigma_m / (2.0 * b.r_max * std::sqrt(b.V_s)) * std::sqrt(D);
    if (load > 1.0) {
        throw ClassificationError("speed_original_units: A(B^2+1) > 1, the population goes extinct");
    }
    return std::sqrt(2.0 * b.r_max) * b.sigma_x * std::sqrt(1.0 - load) / std::sqrt(D);
}

double to_original_speed(const RescaledModel& m, double c_rescaled) {
    return c_rescaled * m.time_scale / m.space_scale;
}

}  // namespace clinewave
