#include "doctest.h"

#include <cmath>

#include "vcrystal/errors.hpp"
#include "vcrystal/ns2d.hpp"

using namespace vcrystal;

namespace {

std::vector<double> gaussian(int n, double L, double nut, double x0, double y0, double circ)
{
    std::vector<double> w(static_cast<std::size_t>(n) * n);
    const double dx = L / n;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const double x = -0.5 * L + ix * dx - x0, y = -0.5 * L + iy * dx - y0;
            w[static_cast<std::size_t>(iy) * n + ix] = circ / (4.0 * M_PI * nut) * std::exp(-(x * x + y * y) / (4.0 * nut));
        }
    return w;
}

} // namespace

TEST_CASE("transforms round trip")
{
    SpectralField f(64, 2.0);
    for (int i = 0; i < 64 * 64; ++i)
        f.physical()[i] = std::sin(0.1 * i) + 0.3;
    const auto keep = f.physical();
    f.to_spectral();
    CHECK(std::abs(f.spectral()[0] - std::complex<double>(0.3, 0.0)) < 0.05);
    f.to_physical();
    for (int i = 0; i < 64 * 64; ++i)
        CHECK(f.physical()[i] == doctest::Approx(keep[i]).epsilon(1e-12));
}

TEST_CASE("zero field stays zero")
{
    NSSolver s(64, 4.0, 0.01);
    s.set_vorticity(std::vector<double>(64 * 64, 0.0));
    s.step(0.01);
    for (double v : s.vorticity())
        CHECK(v == 0.0);
}

TEST_CASE("a single Fourier mode decays exactly at the heat rate")
{
    const int n = 64;
    const double L = 2.0 * M_PI, nu = 0.05;
    std::vector<double> w(n * n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            w[iy * n + ix] = std::cos(3.0 * (-0.5 * L + ix * L / n));
    NSSolver s(n, L, nu);
    s.set_vorticity(w);
    for (int k = 0; k < 10; ++k)
        s.step(0.1);
    const auto out = s.vorticity();
    const double f = std::exp(-nu * 9.0 * 1.0);
    for (int i = 0; i < n * n; i += 97)
        CHECK(out[i] == doctest::Approx(f * w[i]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("Lamb-Oseen vortex is reproduced and circulation is exact")
{
    const int n = 256;
    const double L = 8.0, nu = 0.01;
    NSSolver s(n, L, nu);
    s.set_vorticity(gaussian(n, L, nu * 4.0, 0.0, 0.0, 1.0));
    for (int k = 0; k < 40; ++k)
        s.step(0.05);
    const auto w = s.vorticity();
    const auto ex = gaussian(n, L, nu * 6.0, 0.0, 0.0, 1.0);
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        err = std::max(err, std::abs(w[i] - ex[i]));
        peak = std::max(peak, ex[i]);
    }
    CHECK(err < 1e-4 * peak);
    CHECK(integral(w, L / n) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("exact grid rotations are preserved")
{
    const int n = 128;
    const double L = 8.0;
    auto w = gaussian(n, L, 0.02, 1.0, 0.0, 1.0);
    const auto w2 = gaussian(n, L, 0.02, -1.0, 0.0, 1.0);
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] += w2[i];
    NSSolver s(n, L, 1e-3);
    s.set_vorticity(w);
    for (int k = 0; k < 50; ++k)
        s.step(0.02);
    CHECK(symmetry_defect(s.vorticity(), n, 2) < 1e-12);
    CHECK(symmetry_defect(s.vorticity(), n, 4) > 1e-2);
    CHECK_THROWS_AS(symmetry_defect(w, n, 3), UsageError);
}

TEST_CASE("CFL guard")
{
    NSSolver s(64, 1.0, 1e-3);
    s.set_vorticity(gaussian(64, 1.0, 1e-3, 0.0, 0.0, 1.0));
    CHECK_THROWS_AS(s.step(1.0), CFLViolation);
}

TEST_CASE("fit recovers a planted slope")
{
    const CrystalConfig cfg(2, 0.0, 1.0, 1e-3, 1.0);
    const double a = derive_scales(cfg).omega_rot;
    std::vector<DiagRecord> s;
    for (int k = 0; k <= 300; ++k) {
        DiagRecord d{};
        d.t = 45.0 * k / 300.0;
        d.eps = eps(cfg, d.t);
        d.alpha_meas = a * d.t * (1.0 + 5.0 * std::pow(d.eps, 4) / 3.0);
        d.alpha_ref = a * d.t;
        s.push_back(d);
    }
    const auto f = fit_alpha4(s, cfg);
    CHECK(f.slope == doctest::Approx(5.0).epsilon(0.01));
    s.resize(15);  // eps < 0.05 only
    CHECK_THROWS_AS(fit_alpha4(s, cfg), InsufficientWindow);
}

TEST_CASE("short crystal run conserves circulation and keeps the centre fixed")
{
    const CrystalConfig cfg(4, 1.0, 1.0, 1e-3, 1.0);
    SimParams sp;
    sp.n_grid = 128;
    sp.eps0 = 0.1;
    sp.t_end = 1.0;
    sp.output_interval = 0.25;
    const auto r = run_crystal(cfg, sp);
    REQUIRE(r.series.size() == 5);
    for (const auto& d : r.series) {
        CHECK(d.M_total == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(norm(d.diag.blobs[4].centre) < 8.0 / 128);
    }
    CHECK(r.series.back().radius_meas == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(r.events.empty());
}
