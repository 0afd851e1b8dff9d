#include "doctest.h"

#include <cmath>

#include "vcrystal/config.hpp"
#include "vcrystal/errors.hpp"

using namespace vcrystal;

TEST_CASE("characteristic distance uses the nearest-neighbour chord")
{
    CHECK(characteristic_distance(2, 1.0) == doctest::Approx(1.0));
    CHECK(characteristic_distance(6, 1.0) == doctest::Approx(1.0));
    CHECK(characteristic_distance(7, 1.0) == doctest::Approx(2.0 * std::sin(M_PI / 7.0)));
    CHECK(characteristic_distance(10, 2.0) == doctest::Approx(2.0 * 0.6180339887).epsilon(1e-9));
}

TEST_CASE("critical gamma")
{
    CHECK(critical_gamma(5) == 0.0);
    CHECK(critical_gamma(10) == doctest::Approx(3.75));
    CHECK(critical_gamma(6) == doctest::Approx(5.0 / 12.0));
}

TEST_CASE("derived scales")
{
    const CrystalConfig c(6, 10.0, 2.0, 1e-3, 1.5);
    const auto s = derive_scales(c);
    CHECK(s.d == doctest::Approx(1.5));
    CHECK(s.delta == doctest::Approx(5e-4));
    CHECK(s.omega_rot == doctest::Approx(2.0 * 25.0 / (4.0 * M_PI * 2.25)));
    CHECK(s.t_adv == doctest::Approx(2.25 / 2.0));
    CHECK(eps(c, 4.0) == doctest::Approx(std::sqrt(4e-3) / 1.5));
}

TEST_CASE("positions form a regular polygon plus centre")
{
    const CrystalConfig c(4, 1.0, 1.0, 1e-3, 2.0);
    const auto z = pv_positions(c, 0.0);
    REQUIRE(z.size() == 5);
    CHECK(z[3].x == doctest::Approx(2.0));
    CHECK(std::abs(z[3].y) < 1e-12);
    CHECK(z[0].y == doctest::Approx(2.0));
    CHECK(norm(z[4]) == 0.0);
    const auto g = pv_circulations(c);
    CHECK(g[4] == doctest::Approx(1.0));
}

TEST_CASE("invalid configurations are rejected")
{
    CHECK_THROWS_AS(CrystalConfig(1, 0.0, 1.0, 1e-3, 1.0), UsageError);
    CHECK_THROWS_AS(CrystalConfig(3, 0.0, 0.0, 1e-3, 1.0), UsageError);
    CHECK_THROWS_AS(CrystalConfig(3, 0.0, 1.0, -1.0, 1.0), UsageError);
    CHECK_THROWS_AS(CrystalConfig(3, 0.0, 1.0, 1e-3, 0.0), UsageError);
    CHECK_THROWS_AS(eps(CrystalConfig(3, 0.0, 1.0, 1e-3, 1.0), -1.0), UsageError);
}
