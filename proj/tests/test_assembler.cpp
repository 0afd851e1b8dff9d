#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "vcrystal/assembler.hpp"
#include "vcrystal/corrections.hpp"
#include "vcrystal/errors.hpp"

using namespace vcrystal;

TEST_CASE("point-vortex field integrates to the total circulation")
{
    const CrystalConfig c(6, 10.0, 1.0, 2e-4, 1.0);
    const CartesianGrid g(8.0, 512);
    const auto f = assemble_pv_nu(c, 1.0, 0.3, 12.5, g);
    CHECK(total_integral(f) == doctest::Approx(16.0).epsilon(1e-10));
}

TEST_CASE("blob peaks sit at the polygon vertices")
{
    const CrystalConfig c(4, 0.0, 1.0, 1e-3, 1.0);
    const CartesianGrid g(8.0, 256);
    // vertex j = 4 at angle 2 pi + alpha; with alpha = 0 it lies on the positive x axis
    const auto f = assemble_pv_nu(c, 1.0, 0.0, 2.5, g);
    const int iy = 128, ix = 128 + 32;  // (1, 0)
    const double peak = f.values[static_cast<std::size_t>(iy) * 256 + ix];
    CHECK(peak == doctest::Approx(1.0 / (4.0 * M_PI * 2.5e-3)).epsilon(1e-9));
}

TEST_CASE("order-2 correction carries no circulation and scales like eps^2")
{
    const CrystalConfig c(6, 10.0, 1.0, 2e-4, 1.0);
    const CartesianGrid g(8.0, 512);
    const auto p = build_omega2(c, default_lambda_grid());
    const auto a = assemble_correction(c, p, 1.0, 0.0, 12.5, g);
    const auto b = assemble_correction(c, p, 1.0, 0.0, 50.0, g);
    CHECK(std::abs(total_integral(a)) < 1e-8);
    double la = 0.0, lb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        la += std::abs(a.values[i]);
        lb += std::abs(b.values[i]);
    }
    // L1 norm of (Gamma/(nu t)) eps^2 Omega(x/sqrt(nu t)) grows like eps^2
    CHECK(lb / la == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("field dump round trip")
{
    const CrystalConfig c(3, 0.0, 1.0, 1e-3, 1.0);
    const CartesianGrid g(8.0, 128);
    const auto f = assemble_pv_nu(c, 1.0, 0.0, 5.0, g);
    const auto path = (std::filesystem::temp_directory_path() / "vcrystal_dump_test.bin").string();
    write_field_dump(path, f);
    const auto h = read_field_dump(path);
    CHECK(h.grid.n_grid == 128);
    CHECK(h.grid.box_size == 8.0);
    CHECK(h.time == 5.0);
    CHECK(h.values == f.values);
    std::remove(path.c_str());
}

TEST_CASE("grid and box validation")
{
    CHECK_THROWS_AS(CartesianGrid(8.0, 100), UsageError);
    CHECK_THROWS_AS(CartesianGrid(8.0, 64), UsageError);
    const CrystalConfig c(3, 0.0, 1.0, 1e-3, 3.0);
    CHECK_THROWS_AS(assemble_pv_nu(c, 3.0, 0.0, 1.0, CartesianGrid(8.0, 128)), UsageError);
}
