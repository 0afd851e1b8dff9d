#pragma once

#include <complex>
#include <string>
#include <vector>

#include "vcrystal/config.hpp"
#include "vcrystal/vec2.hpp"

namespace vcrystal {

struct PVState {
    std::vector<Vec2> positions;
    std::vector<double> circulations;
    double time = 0.0;
};

struct ConservedSet {
    double hamiltonian;
    Vec2 linear_momentum;
    double angular_momentum;
};

// Free plane by default; period > 0 selects the doubly periodic square box of that side,
// including the uniform background that keeps the mean vorticity zero.
struct BiotSavart {
    double period = 0.0;
    double collision_threshold = 1e-6;
};

PVState crystal_state(const CrystalConfig& cfg, double t = 0.0);

std::vector<Vec2> pv_velocity(const PVState& state, const BiotSavart& kernel = {});

// Velocity induced at offset z by a unit-circulation vortex at the origin.
Vec2 unit_vortex_velocity(Vec2 z, const BiotSavart& kernel);

ConservedSet conserved(const PVState& state);

struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<Vec2>> positions;
    std::vector<ConservedSet> conserved;
    std::vector<double> circulations;
};

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
};

// Dormand-Prince 5(4) with output every dt_out.
Trajectory pv_integrate(const PVState& state, double dt_out, double t_end, double tol,
                        const BiotSavart& kernel = {}, IntegratorStats* stats = nullptr);

enum class Stability { stable, unstable, marginal };

std::string to_string(Stability s);

struct StabilityOptions {
    double fd_step = 1e-6;          // times r
    double stability_eps = 1e-6;    // times |omega_rot|
    double degeneracy_eps = 1e-3;   // times |omega_rot|
};

struct StabilityReport {
    std::vector<std::complex<double>> eigenvalues;
    double max_real = 0.0;
    double min_abs_nontrivial = 0.0;
    Stability classification = Stability::stable;
};

StabilityReport pv_linear_stability(const CrystalConfig& cfg, const StabilityOptions& opt = {});

// Closed-form window for the polygon plus centre.
bool stability_theorem_predicts_stable(int n_vortices, double gamma);

} // namespace vcrystal
