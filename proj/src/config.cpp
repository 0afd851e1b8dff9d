#include "vcrystal/config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vcrystal/errors.hpp"

namespace vcrystal {

CrystalConfig::CrystalConfig(int n_vortices, double gamma, double circulation, double viscosity,
                             double radius)
    : n_(n_vortices), gamma_(gamma), circulation_(circulation), viscosity_(viscosity),
      radius_(radius)
{
    if (n_ < 2)
        throw UsageError("n_vortices must be >= 2, got " + std::to_string(n_));
    if (!(radius_ > 0.0))
        throw UsageError("radius must be positive");
    if (!(viscosity_ > 0.0))
        throw UsageError("viscosity must be positive");
    if (circulation_ == 0.0 || !std::isfinite(circulation_))
        throw UsageError("circulation must be finite and nonzero");
    if (!std::isfinite(gamma_))
        throw UsageError("gamma must be finite");
}

CrystalConfig CrystalConfig::with_gamma(double g) const
{
    return {n_, g, circulation_, viscosity_, radius_};
}

CrystalConfig CrystalConfig::with_radius(double r) const
{
    return {n_, gamma_, circulation_, viscosity_, r};
}

CrystalConfig CrystalConfig::with_viscosity(double nu) const
{
    return {n_, gamma_, circulation_, nu, radius_};
}

double characteristic_distance(int n_vortices, double radius)
{
    return std::min(radius, 2.0 * radius * std::sin(std::numbers::pi / n_vortices));
}

double critical_gamma(int n_vortices)
{
    return (n_vortices - 1.0) * (n_vortices - 5.0) / 12.0;
}

DerivedScales derive_scales(const CrystalConfig& cfg)
{
    const double d = characteristic_distance(cfg.n_vortices(), cfg.radius());
    const double G = cfg.circulation();
    const double r = cfg.radius();
    DerivedScales s{};
    s.d = d;
    s.delta = cfg.viscosity() / G;
    s.t_adv = d * d / std::abs(G);
    s.t_diff = d * d / cfg.viscosity();
    s.omega_rot = G * (cfg.n_vortices() - 1.0 + 2.0 * cfg.gamma()) / (4.0 * std::numbers::pi * r * r);
    s.gamma_star = critical_gamma(cfg.n_vortices());
    return s;
}

double eps(const CrystalConfig& cfg, double t)
{
    if (t < 0.0)
        throw UsageError("eps: negative time");
    return std::sqrt(cfg.viscosity() * t) / characteristic_distance(cfg.n_vortices(), cfg.radius());
}

std::vector<Vec2> pv_positions(const CrystalConfig& cfg, double t)
{
    if (t < 0.0)
        throw UsageError("pv_positions: negative time");
    const int N = cfg.n_vortices();
    const double a = derive_scales(cfg).omega_rot;
    std::vector<Vec2> z;
    z.reserve(N + 1);
    for (int j = 1; j <= N; ++j) {
        const double th = 2.0 * std::numbers::pi * j / N + a * t;
        z.push_back({cfg.radius() * std::cos(th), cfg.radius() * std::sin(th)});
    }
    z.push_back({0.0, 0.0});
    return z;
}

std::vector<double> pv_circulations(const CrystalConfig& cfg)
{
    std::vector<double> g(cfg.n_vortices(), cfg.circulation());
    g.push_back(cfg.gamma() * cfg.circulation());
    return g;
}

} // namespace vcrystal
