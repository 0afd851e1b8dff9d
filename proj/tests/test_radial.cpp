#include "doctest.h"

#include <cmath>

#include "vcrystal/errors.hpp"
#include "vcrystal/radial.hpp"

using namespace vcrystal;

TEST_CASE("Ein against reference values")
{
    // Ein(x) = gamma_E + ln x + E1(x)
    CHECK(ein(1e-3) == doctest::Approx(9.997500555e-4).epsilon(1e-9));
    CHECK(ein(1.0) == doctest::Approx(0.7965995992970531).epsilon(1e-13));
    CHECK(ein(5.0) == doctest::Approx(0.5772156649015329 + std::log(5.0) + 0.001148295591275326).epsilon(1e-13));
    CHECK(ein(40.0) == doctest::Approx(0.5772156649015329 + std::log(40.0)).epsilon(1e-13));
}

TEST_CASE("Psi0' is the enclosed-circulation velocity of G")
{
    // (1/r) int_0^r G(s) s ds by Simpson
    for (double r : {0.05, 0.7, 2.0, 6.0}) {
        const int m = 2000;
        const double h = r / m;
        double s = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double x = i * h;
            const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * gaussian_G(x) * x;
        }
        s *= h / 3.0 / r;
        CHECK(streamfunction_Psi0_prime(r) == doctest::Approx(s).epsilon(1e-10));
    }
}

TEST_CASE("r^n G is an eigenfunction of the diffusion operator")
{
    const auto g = RadialGrid::uniform(2048, 20.0);
    for (int n : {0, 1, 2, 3}) {
        const auto p = sample(g, n, Parity::cos, [&](double r) { return std::pow(r, n) * gaussian_G(r); });
        auto lp = diffusion_L(p);
        lp += (0.5 * n) * p;
        CHECK(profile_norm(lp) < 1e-4 * profile_norm(p));
    }
}

TEST_CASE("moments and interpolation")
{
    const auto g = RadialGrid::uniform(4096, 20.0);
    const auto G = sample(g, 0, Parity::cos, gaussian_G);
    // 2 pi int G r dr = 1, the mode-0 moment carries pi int r a dr in this convention
    CHECK(2.0 * radial_moment(G, 1) == doctest::Approx(1.0).epsilon(1e-6));
    const auto lin = sample(g, 2, Parity::sin, [](double r) { return 3.0 * r; });
    CHECK(lin.at(1.23456) == doctest::Approx(3.0 * 1.23456));
    CHECK(lin.at(25.0) == 0.0);
}

TEST_CASE("profile invariants")
{
    const auto g = RadialGrid::uniform(64, 20.0);
    CHECK_THROWS_AS(RadialModeProfile(g, 0, Parity::sin, std::vector<double>(64, 0.0)), UsageError);
    CHECK_THROWS_AS(RadialModeProfile(g, 2, Parity::cos, std::vector<double>(10, 0.0)), UsageError);
    CHECK_THROWS_AS(RadialGrid::uniform(1, 20.0), UsageError);
}
