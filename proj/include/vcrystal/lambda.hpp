#pragma once

#include <memory>

#include <Eigen/Dense>

#include "vcrystal/radial.hpp"

namespace vcrystal {

// Nystrom matrix of T_n: (1/2n) min(r/s, s/r)^n (A(r)A(s))^{-1/2} s ds.
struct TnOperator {
    int mode;
    GridPtr grid;
    Eigen::MatrixXd matrix;
};

TnOperator build_Tn(int n, GridPtr grid);

// Power-iteration estimate of the spectral radius.
double spectral_radius_estimate(const TnOperator& T, int iterations = 200);

double condition_number_I_minus_T(const TnOperator& T);

// Factorised (I - T_n) for repeated solves; mode 1 is deflated along its eigenvector.
class ModeSolver {
public:
    ModeSolver(int n, GridPtr grid);
    int mode() const { return n_; }
    const GridPtr& grid() const { return grid_; }
    // f with (A + Delta^{-1}) f = phi on the mode.
    RadialModeProfile solve(const RadialModeProfile& phi) const;
    // Neumann series cross-check (n >= 2).
    RadialModeProfile solve_neumann(const RadialModeProfile& phi, int terms = 200) const;

private:
    int n_;
    GridPtr grid_;
    std::vector<double> inv_sqrt_a_;
    Eigen::MatrixXd T_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::VectorXd kernel_;   // mode 1 only: G' A^{1/2}, unit in the r w inner product
};

// Cached per (grid, n).
const ModeSolver& mode_solver(int n, const GridPtr& grid);

RadialModeProfile solve_mode(int n, const RadialModeProfile& phi);

// Mode-n inverse Laplacian: -(1/2n) int min(r/s, s/r)^n F(s) s ds.
std::vector<double> inverse_laplacian_mode(int n, const RadialModeProfile& f);

RadialModeProfile lambda_apply(const RadialModeProfile& f);

RadialModeProfile lambda_invert_bracket(int n, const RadialModeProfile& h);

// {Re xi^n, G} as a mode-n sin profile: -(n/2) r^n G.
RadialModeProfile bracket_re_xin_G(int n, GridPtr grid);

} // namespace vcrystal
