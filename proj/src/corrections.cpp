#include "vcrystal/corrections.hpp"

#include <cmath>

#include "vcrystal/constants.hpp"
#include "vcrystal/errors.hpp"
#include "vcrystal/lambda.hpp"

namespace vcrystal {

GridPtr default_lambda_grid()
{
    static const GridPtr g = RadialGrid::uniform(2048, 20.0);
    return g;
}

namespace {

struct Setup {
    double d, r, g;
    const SnkTable& S;
};

Setup setup(const CrystalConfig& cfg)
{
    return {characteristic_distance(cfg.n_vortices(), cfg.radius()), cfg.radius(), cfg.gamma(),
            snk_table(cfg.n_vortices(), 8)};
}

// -Lambda^{-1} h, and the matching viscous slot -Lambda^{-1}(mu - L)(-Lambda^{-1} h).
std::pair<RadialModeProfile, RadialModeProfile> invert_pair(int n, const RadialModeProfile& h, double mu)
{
    RadialModeProfile e = -1.0 * lambda_invert_bracket(n, h);
    RadialModeProfile src = mu * e - diffusion_L(e);
    RadialModeProfile ns = -1.0 * lambda_invert_bracket(n, src);
    return {std::move(e), std::move(ns)};
}

bool all_zero(const RadialModeProfile& p)
{
    for (double v : p.values)
        if (v != 0.0)
            return false;
    return true;
}

} // namespace

BracketSource build_H2(const CrystalConfig& cfg, GridPtr grid)
{
    const auto s = setup(cfg);
    const double c20 = cnk(s.d, 2, 0);
    BracketSource b;
    b.prefactor = c20 / (s.r * s.r) * (s.S(2, 2) + s.g);
    if (cfg.gamma() == critical_gamma(cfg.n_vortices()))
        b.prefactor = 0.0;
    b.h = b.prefactor * bracket_re_xin_G(2, grid);
    if (cfg.n_vortices() == 2)
        b.h_hat = (2.0 * c20 / (s.r * s.r)) * bracket_re_xin_G(2, grid);
    return b;
}

BracketSource build_H3(const CrystalConfig& cfg, GridPtr grid)
{
    const auto s = setup(cfg);
    const double c30 = cnk(s.d, 3, 0);
    BracketSource b;
    b.prefactor = c30 / (s.r * s.r * s.r) * (s.S(3, 3) + s.g);
    b.h = b.prefactor * bracket_re_xin_G(3, grid);
    if (cfg.n_vortices() == 3)
        b.h_hat = (3.0 * c30 / (s.r * s.r * s.r)) * bracket_re_xin_G(3, grid);
    return b;
}

CorrectionProfiles build_omega2(const CrystalConfig& cfg, GridPtr grid)
{
    const auto H = build_H2(cfg, grid);
    CorrectionProfiles p;
    p.kappa2 = H.prefactor;
    if (all_zero(H.h)) {
        p.omega2_E = RadialModeProfile::zero(grid, 2, Parity::cos);
        p.omega2_NS = RadialModeProfile::zero(grid, 2, Parity::sin);
    } else {
        auto [e, ns] = invert_pair(2, H.h, 1.0);
        p.omega2_E = std::move(e);
        p.omega2_NS = std::move(ns);
    }
    // gamma Lambda Omega_hat + H_hat = 0, so gamma Omega_hat needs no division by gamma.
    if (H.h_hat && cfg.gamma() != 0.0) {
        auto e = -1.0 * lambda_invert_bracket(2, *H.h_hat);
        auto src = (1.0 / cfg.gamma()) * (e - diffusion_L(e));
        p.gamma_omega2_hat_E = std::move(e);
        p.gamma_omega2_hat_NS = -1.0 * lambda_invert_bracket(2, src);
    }
    return p;
}

void build_omega3(const CrystalConfig& cfg, CorrectionProfiles& p)
{
    const GridPtr grid = p.omega2_E.grid;
    const auto H = build_H3(cfg, grid);
    p.kappa3 = H.prefactor;
    if (all_zero(H.h)) {
        p.omega3_E = RadialModeProfile::zero(grid, 3, Parity::cos);
        p.omega3_NS = RadialModeProfile::zero(grid, 3, Parity::sin);
    } else {
        auto [e, ns] = invert_pair(3, H.h, 1.5);
        p.omega3_E = std::move(e);
        p.omega3_NS = std::move(ns);
    }
    if (H.h_hat && cfg.gamma() != 0.0) {
        auto e = -1.0 * lambda_invert_bracket(3, *H.h_hat);
        auto src = (1.0 / cfg.gamma()) * (1.5 * e - diffusion_L(e));
        p.gamma_omega3_hat_E = std::move(e);
        p.gamma_omega3_hat_NS = -1.0 * lambda_invert_bracket(3, src);
    }
    p.has_order3 = true;
}

double m2_cos(const RadialModeProfile& p)
{
    return (p.mode == 2 && p.parity == Parity::cos) ? radial_moment(p, 3) : 0.0;
}

double m2_sin(const RadialModeProfile& p)
{
    return (p.mode == 2 && p.parity == Parity::sin) ? radial_moment(p, 3) : 0.0;
}

double compute_alpha4(const CrystalConfig& cfg, const CorrectionProfiles& p)
{
    const auto s = setup(cfg);
    const double denom_s = s.S(1, 1) + s.g;
    if (std::abs(denom_s) <= 1e-14 * (1.0 + std::abs(s.g)))
        throw DegenerateDenominator("compute_alpha4: S11 + gamma = 0 (non-rotating crystal)");
    const double m = m2_cos(p.omega2_E);
    const double gm_hat = p.gamma_omega2_hat_E ? m2_cos(*p.gamma_omega2_hat_E) : 0.0;
    const double num = 3.0 * cnk(s.d, 3, 0) * (s.S(3, 3) + s.g) * m +
                       cnk(s.d, 3, 2) * (s.S(3, 1) * m + gm_hat);
    return num / (s.r * s.r * cnk(s.d, 1, 0) * denom_s);
}

double compute_r6(const CrystalConfig& cfg, const CorrectionProfiles& p)
{
    const auto s = setup(cfg);
    const double m = m2_sin(p.omega2_NS);
    const double gm_hat = p.gamma_omega2_hat_NS ? m2_sin(*p.gamma_omega2_hat_NS) : 0.0;
    const double inner = 3.0 * cnk(s.d, 3, 0) * (s.S(3, 3) + s.g) * m +
                         cnk(s.d, 3, 2) * (s.S(3, 1) * m + gm_hat);
    return -s.d / (3.0 * std::pow(s.r, 4)) * inner;
}

DriftCoefficients compute_drift(const CrystalConfig& cfg, const CorrectionProfiles& p)
{
    DriftCoefficients c;
    c.alpha4 = compute_alpha4(cfg, p);
    c.r6 = compute_r6(cfg, p);
    c.m21_omega2 = m2_cos(p.omega2_E);
    c.m22_omega2NS = m2_sin(p.omega2_NS);
    return c;
}

MotionPrediction predict_motion(const CrystalConfig& cfg, const DriftCoefficients& c, double t)
{
    if (t < 0.0)
        throw UsageError("predict_motion: negative time");
    const auto sc = derive_scales(cfg);
    const double e = eps(cfg, t);
    const double e4 = e * e * e * e;
    const double nu = cfg.viscosity();
    MotionPrediction m;
    m.radius = cfg.radius() * (1.0 + c.r6 * e4 * e * e);
    m.alpha = sc.omega_rot * t + sc.omega_rot * c.alpha4 * nu * nu * t * t * t / (3.0 * std::pow(sc.d, 4));
    m.dephasing_ratio = (t / sc.t_adv) * e4;
    m.outside_validity = e > 0.5;
    return m;
}

} // namespace vcrystal
