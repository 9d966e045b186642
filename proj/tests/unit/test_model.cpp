#include <cmath>
#include <random>

#include "doctest.h"

#include "clinewave/eigen.hpp"
#include "clinewave/error.hpp"
#include "clinewave/model.hpp"

using namespace clinewave;

TEST_CASE("quadratic growth evaluation") {
    const auto r = GrowthProfile::quadratic(1.0, 0.25);
    CHECK(r(0.0) == doctest::Approx(1.0));
    CHECK(r(2.0) == doctest::Approx(0.0));
    CHECK(GrowthProfile::quadratic(1.0, 1.0)(1.0) == doctest::Approx(0.0));
    CHECK(r.max_value() == doctest::Approx(1.0));
}

TEST_CASE("tabulated growth interpolates and refuses extrapolation") {
    std::vector<double> z, v;
    for (int i = -40; i <= 40; ++i) {
        z.push_back(0.1 * i);
        v.push_back(1.0 - 0.25 * z.back() * z.back());
    }
    const auto r = GrowthProfile::tabulated(z, v, 0.2);
    CHECK(r(0.05) == doctest::Approx(1.0 - 0.25 * 0.0025).epsilon(1e-5));
    CHECK_THROWS_AS(r(4.5), RangeError);
    CHECK_THROWS_AS(GrowthProfile::tabulated({0.0, -1.0, 2.0}, {0.0, 0.0, 0.0}, 0.2), ParameterError);
}

TEST_CASE("validate_assumptions on quadratic profiles") {
    const Kernel k = Kernel::constant(1.0);
    CHECK(validate_assumptions(ModelParams(GrowthProfile::quadratic(1.0, 0.25, 0.2), k, 1.0)).ok());
    CHECK_FALSE(validate_assumptions(ModelParams(GrowthProfile::quadratic(1.0, 0.25, 0.3), k, 1.0)).ok());
    CHECK(largest_admissible_delta(1.0, 0.25) == doctest::Approx(0.25));
    CHECK(k.lower() == 1.0);
    CHECK(k.upper() == 1.0);
    // Monotone in delta.
    for (double d = 0.25; d > 0.01; d *= 0.7)
        CHECK(validate_assumptions(ModelParams(GrowthProfile::quadratic(1.0, 0.25, d), k, 1.0)).ok());
}

TEST_CASE("kernel bounds are spot checked") {
    const Kernel bad = Kernel::function(1.0, 2.0, [](double z, double) { return 1.0 + z * z; });
    const ModelParams p(GrowthProfile::quadratic(1.0, 0.25, 0.2), bad, 0.0);
    CHECK_FALSE(validate_assumptions(p).ok());
    const Kernel g = Kernel::gaussian(1.0, 0.5, 1.0);
    CHECK(validate_assumptions(ModelParams(GrowthProfile::quadratic(1.0, 0.25, 0.2), g, 0.0)).ok());
}

TEST_CASE("negative cline slope is rejected") {
    CHECK_THROWS_AS(ModelParams(GrowthProfile::quadratic(1.0, 0.25), Kernel::constant(1.0), -1.0), ParameterError);
}

TEST_CASE("rescale_bio") {
    BioParams b{1.0, 2.0, 1.0, 1.0, 0.5, 1.0};
    const auto m = rescale_bio(b);
    CHECK(m.params.growth.as_quadratic()->A == doctest::Approx(1.0));
    CHECK(m.params.growth.as_quadratic()->rmax == doctest::Approx(1.0));
    CHECK(m.params.kernel(0.0, 0.0) == doctest::Approx(1.0));
    BioParams same{1.3, 1.3, 1.0, 1.0, 0.7, 2.0};
    CHECK(rescale_bio(same).params.B == doctest::Approx(0.7));
    CHECK_THROWS_AS(rescale_bio(BioParams{0.0, 1.0, 1.0, 1.0, 1.0, 1.0}), ParameterError);
}

TEST_CASE("speed in original units") {
    // Vanishing selection gives the KPP speed sqrt(2 rmax) sigma_x.
    BioParams kpp{std::sqrt(2.0), std::sqrt(2.0), 1.0, 1e30, 0.0, 1.0};
    CHECK(speed_original_units(kpp) == doctest::Approx(2.0).epsilon(1e-12));

    BioParams one{1.0, 1.0, 1.0, 4.0, 0.0, 1.0};
    const auto m = rescale_bio(one);
    CHECK(m.params.growth.as_quadratic()->A == doctest::Approx(1.0 / 16.0));
    const double lam = std::sqrt(1.0 / 16.0) - 1.0;
    const double c = std::get<double>(minimal_speed(lam, 0.0));
    CHECK(to_original_speed(m, c) == doctest::Approx(speed_original_units(one)).epsilon(1e-12));

    // A (B^2+1) = 1 gives zero speed; beyond it the regime is extinct.
    BioParams edge{1.0, 2.0, 1.0, 1.0, 0.0, 1.0};
    CHECK(speed_original_units(edge) == doctest::Approx(0.0));
    BioParams dead{1.0, 3.0, 1.0, 1.0, 0.0, 1.0};
    CHECK_THROWS_AS(speed_original_units(dead), ClassificationError);
}

TEST_CASE("closed-form speed agrees with minimal_speed on random parameters") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    int checked = 0;
    while (checked < 200) {
        BioParams b{u(rng), u(rng), u(rng), 1.0 + 10.0 * u(rng), u(rng), u(rng)};
        const auto m = rescale_bio(b);
        const double A = m.params.growth.as_quadratic()->A;
        const double D = m.params.diffusion();
        if (A * D >= 1.0) continue;
        const double lam = std::sqrt(A * D) - 1.0;
        const double c = std::get<double>(minimal_speed(lam, m.params.B));
        CHECK(to_original_speed(m, c) == doctest::Approx(speed_original_units(b)).epsilon(1e-10));
        ++checked;
    }
}
