#include "doctest.h"

#include <cmath>

#include "vcrystal/corrections.hpp"
#include "vcrystal/errors.hpp"

using namespace vcrystal;

namespace {

double alpha4(int N, double g)
{
    const CrystalConfig c(N, g, 1.0, 1e-3, 1.0);
    return compute_alpha4(c, build_omega2(c, default_lambda_grid()));
}

} // namespace

TEST_CASE("alpha4 for the plain polygons")
{
    CHECK(alpha4(2, 0.0) == doctest::Approx(8.7362).epsilon(1e-4));
    CHECK(alpha4(3, 0.0) == doctest::Approx(7.7655).epsilon(1e-4));
    CHECK(alpha4(4, 0.0) == doctest::Approx(2.9121).epsilon(1e-4));
    CHECK(std::abs(alpha4(5, 0.0)) < 1e-8);
    CHECK(alpha4(10, 0.0) == doctest::Approx(31.8650).epsilon(1e-4));
}

TEST_CASE("alpha4 with a central vortex")
{
    CHECK(alpha4(6, 10.0) == doctest::Approx(513.496).epsilon(1e-4));
    CHECK(alpha4(6, -10.0) == doctest::Approx(-1011.1373).epsilon(1e-4));
    CHECK(std::abs(alpha4(6, 5.0 / 12.0)) < 1e-8);
}

TEST_CASE("alpha4 vanishes quadratically at the critical circulation")
{
    const double gs = critical_gamma(10);
    CHECK(std::abs(alpha4(10, gs)) < 1e-8);
    const double a1 = alpha4(10, gs + 0.01), a2 = alpha4(10, gs + 0.02), am = alpha4(10, gs - 0.01);
    CHECK(a2 / a1 == doctest::Approx(4.0).epsilon(0.01));
    CHECK(am / a1 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("correction profiles have the expected modes")
{
    const CrystalConfig c(3, 1.0, 1.0, 1e-3, 1.0);
    auto p = build_omega2(c, default_lambda_grid());
    CHECK(p.omega2_E.mode == 2);
    CHECK(p.omega2_E.parity == Parity::cos);
    CHECK(p.omega2_NS.parity == Parity::sin);
    CHECK_FALSE(p.gamma_omega2_hat_E.has_value());
    build_omega3(c, p);
    CHECK(p.has_order3);
    CHECK(p.omega3_E.mode == 3);
    CHECK(p.gamma_omega3_hat_E.has_value());
}

TEST_CASE("non-rotating crystal has no alpha4")
{
    const CrystalConfig c(3, -1.0, 1.0, 1e-3, 1.0);  // S11 + gamma = 0
    CHECK_THROWS_AS(compute_alpha4(c, build_omega2(c, default_lambda_grid())), DegenerateDenominator);
}

TEST_CASE("motion prediction")
{
    const CrystalConfig c(2, 0.0, 1.0, 1e-3, 1.0);
    const auto dc = compute_drift(c, build_omega2(c, default_lambda_grid()));
    const auto m = predict_motion(c, dc, 10.0);
    const double e = eps(c, 10.0);
    const double a = derive_scales(c).omega_rot;
    CHECK(m.radius == doctest::Approx(1.0 + dc.r6 * std::pow(e, 6)));
    CHECK(m.alpha > a * 10.0);
    CHECK_FALSE(m.outside_validity);
    CHECK(predict_motion(c, dc, 400.0).outside_validity);
}
