#pragma once

#include <vector>

#include "vcrystal/vec2.hpp"

namespace vcrystal {

// N equal vortices of circulation Gamma on a regular polygon of radius r,
// plus a central vortex of circulation gamma*Gamma.
class CrystalConfig {
public:
    CrystalConfig(int n_vortices, double gamma, double circulation, double viscosity,
                  double radius);

    int n_vortices() const { return n_; }
    double gamma() const { return gamma_; }
    double circulation() const { return circulation_; }
    double viscosity() const { return viscosity_; }
    double radius() const { return radius_; }

    CrystalConfig with_gamma(double g) const;
    CrystalConfig with_radius(double r) const;
    CrystalConfig with_viscosity(double nu) const;

private:
    int n_;
    double gamma_;
    double circulation_;
    double viscosity_;
    double radius_;
};

struct DerivedScales {
    double d;
    double delta;       // nu/Gamma, signed
    double t_adv;       // d^2/|Gamma|
    double t_diff;      // d^2/nu
    double omega_rot;   // Gamma(N-1+2 gamma)/(4 pi r^2)
    double gamma_star;  // (N-1)(N-5)/12
};

double characteristic_distance(int n_vortices, double radius);
double critical_gamma(int n_vortices);

DerivedScales derive_scales(const CrystalConfig& cfg);

double eps(const CrystalConfig& cfg, double t);

// Exact rigidly rotating point-vortex solution: N polygon vertices then the centre.
std::vector<Vec2> pv_positions(const CrystalConfig& cfg, double t);

// Circulations matching pv_positions ordering.
std::vector<double> pv_circulations(const CrystalConfig& cfg);

} // namespace vcrystal
