#pragma once

#include <optional>

#include "vcrystal/config.hpp"
#include "vcrystal/radial.hpp"

namespace vcrystal {

struct BracketSource {
    RadialModeProfile h;               // prefactor already applied
    double prefactor = 0.0;            // kappa_n
    std::optional<RadialModeProfile> h_hat;  // central-vortex companion, if any
};

struct CorrectionProfiles {
    double kappa2 = 0.0;
    double kappa3 = 0.0;
    RadialModeProfile omega2_E;     // mode 2 cos
    RadialModeProfile omega2_NS;    // mode 2 sin
    // Central-vortex profiles already multiplied by gamma (N = 2 resp. N = 3 only).
    std::optional<RadialModeProfile> gamma_omega2_hat_E;
    std::optional<RadialModeProfile> gamma_omega2_hat_NS;
    bool has_order3 = false;
    RadialModeProfile omega3_E;     // mode 3 cos
    RadialModeProfile omega3_NS;    // mode 3 sin
    std::optional<RadialModeProfile> gamma_omega3_hat_E;
    std::optional<RadialModeProfile> gamma_omega3_hat_NS;
};

struct DriftCoefficients {
    double alpha4 = 0.0;
    double r6 = 0.0;
    double m21_omega2 = 0.0;
    double m22_omega2NS = 0.0;
};

GridPtr default_lambda_grid();

BracketSource build_H2(const CrystalConfig& cfg, GridPtr grid);
BracketSource build_H3(const CrystalConfig& cfg, GridPtr grid);

CorrectionProfiles build_omega2(const CrystalConfig& cfg, GridPtr grid);
// Adds the order-3 slots to an existing set.
void build_omega3(const CrystalConfig& cfg, CorrectionProfiles& profiles);

// pi int r^3 a(r) dr for the matching parity, 0 otherwise.
double m2_cos(const RadialModeProfile& p);
double m2_sin(const RadialModeProfile& p);

double compute_alpha4(const CrystalConfig& cfg, const CorrectionProfiles& profiles);
double compute_r6(const CrystalConfig& cfg, const CorrectionProfiles& profiles);
DriftCoefficients compute_drift(const CrystalConfig& cfg, const CorrectionProfiles& profiles);

struct MotionPrediction {
    double radius;
    double alpha;
    double dephasing_ratio;
    bool outside_validity;  // eps(t) > 0.5
};

MotionPrediction predict_motion(const CrystalConfig& cfg, const DriftCoefficients& coeffs, double t);

} // namespace vcrystal
