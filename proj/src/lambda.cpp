#include "vcrystal/lambda.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "vcrystal/errors.hpp"

namespace vcrystal {

TnOperator build_Tn(int n, GridPtr grid)
{
    if (n < 1)
        throw UsageError("build_Tn: mode must be >= 1");
    const auto& r = grid->nodes();
    const auto& w = grid->weights();
    const int m = grid->size();
    std::vector<double> la(m), lr(m);
    for (int i = 0; i < m; ++i) {
        la[i] = log_weight_A(r[i]);
        lr[i] = std::log(r[i]);
    }
    Eigen::MatrixXd M(m, m);
    for (int j = 0; j < m; ++j) {
        const double cj = r[j] * w[j] / (2.0 * n);
        for (int i = 0; i < m; ++i)
            M(i, j) = std::exp(-0.5 * (la[i] + la[j]) - n * std::abs(lr[i] - lr[j])) * cj;
    }
    return {n, std::move(grid), std::move(M)};
}

double spectral_radius_estimate(const TnOperator& T, int iterations)
{
    Eigen::VectorXd v = Eigen::VectorXd::Ones(T.matrix.rows());
    double lam = 0.0;
    for (int k = 0; k < iterations; ++k) {
        Eigen::VectorXd u = T.matrix * v;
        lam = u.norm() / v.norm();
        v = u / u.norm();
    }
    return lam;
}

double condition_number_I_minus_T(const TnOperator& T)
{
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(T.matrix.rows(), T.matrix.cols()) - T.matrix;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
    const auto& s = svd.singularValues();
    return s(0) / s(s.size() - 1);
}

ModeSolver::ModeSolver(int n, GridPtr grid) : n_(n), grid_(std::move(grid))
{
    if (n < 1)
        throw UsageError("ModeSolver: mode must be >= 1");
    const auto& r = grid_->nodes();
    const auto& w = grid_->weights();
    const int m = grid_->size();
    inv_sqrt_a_.resize(m);
    for (int i = 0; i < m; ++i)
        inv_sqrt_a_[i] = std::exp(-0.5 * log_weight_A(r[i]));
    T_ = build_Tn(n, grid_).matrix;
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(m, m) - T_;
    if (n == 1) {
        kernel_.resize(m);
        double nrm = 0.0;
        for (int i = 0; i < m; ++i) {
            kernel_[i] = gaussian_G_prime(r[i]) / inv_sqrt_a_[i];
            nrm += kernel_[i] * kernel_[i] * r[i] * w[i];
        }
        kernel_ /= std::sqrt(nrm);
        for (int j = 0; j < m; ++j)
            B.col(j) += kernel_ * (kernel_[j] * r[j] * w[j]);
    }
    lu_.compute(B);
    const double det_scale = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(det_scale > 1e-13))
        throw SingularSystem("ModeSolver: (I - T_" + std::to_string(n) + ") is singular");
}

RadialModeProfile ModeSolver::solve(const RadialModeProfile& phi) const
{
    if (phi.mode != n_ || phi.grid != grid_)
        throw UsageError("ModeSolver::solve: mode or grid mismatch");
    const auto& r = grid_->nodes();
    const auto& w = grid_->weights();
    const int m = grid_->size();
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i)
        rhs[i] = inv_sqrt_a_[i] * phi.values[i];
    if (n_ == 1) {
        // Solvability: <phi, G'> = <A^{-1/2} phi, G' A^{1/2}> = 0.
        double dotp = 0.0, nphi = 0.0;
        for (int i = 0; i < m; ++i) {
            dotp += rhs[i] * kernel_[i] * r[i] * w[i];
            nphi += rhs[i] * rhs[i] * r[i] * w[i];
        }
        if (std::abs(dotp) > 1e-6 * std::sqrt(nphi) + 1e-300)
            throw OrthogonalityViolated("solve_mode: mode-1 input not orthogonal to grad G (ratio " +
                                        std::to_string(dotp / std::sqrt(nphi)) + ")");
        rhs -= dotp * kernel_;
    }
    const Eigen::VectorXd F = lu_.solve(rhs);
    if (!F.allFinite())
        throw SingularSystem("solve_mode: non-finite solution");
    std::vector<double> f(m);
    for (int i = 0; i < m; ++i)
        f[i] = inv_sqrt_a_[i] * F[i];
    return RadialModeProfile(grid_, n_, phi.parity, std::move(f));
}

RadialModeProfile ModeSolver::solve_neumann(const RadialModeProfile& phi, int terms) const
{
    if (n_ < 2)
        throw UsageError("solve_neumann: Neumann series needs mode >= 2");
    const int m = grid_->size();
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i)
        rhs[i] = inv_sqrt_a_[i] * phi.values[i];
    Eigen::VectorXd F = rhs, term = rhs;
    for (int k = 0; k < terms; ++k) {
        term = T_ * term;
        F += term;
        if (term.norm() < 1e-16 * F.norm())
            break;
    }
    std::vector<double> f(m);
    for (int i = 0; i < m; ++i)
        f[i] = inv_sqrt_a_[i] * F[i];
    return RadialModeProfile(grid_, n_, phi.parity, std::move(f));
}

const ModeSolver& mode_solver(int n, const GridPtr& grid)
{
    static std::mutex mu;
    static std::map<std::pair<const RadialGrid*, int>, std::pair<GridPtr, std::unique_ptr<ModeSolver>>>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{grid.get(), n}];
    if (!slot.second) {
        slot.first = grid;
        slot.second = std::make_unique<ModeSolver>(n, grid);
    }
    return *slot.second;
}

RadialModeProfile solve_mode(int n, const RadialModeProfile& phi)
{
    return mode_solver(n, phi.grid).solve(phi);
}

std::vector<double> inverse_laplacian_mode(int n, const RadialModeProfile& f)
{
    const auto& r = f.grid->nodes();
    const auto& w = f.grid->weights();
    const int m = f.grid->size();
    std::vector<double> psi(m, 0.0);
    if (n == 0) {
        // log max(r, s) Green's function
        double inner = 0.0;
        std::vector<double> outer(m + 1, 0.0);
        for (int j = m - 1; j >= 0; --j)
            outer[j] = outer[j + 1] + std::log(r[j]) * f.values[j] * r[j] * w[j];
        for (int i = 0; i < m; ++i) {
            inner += f.values[i] * r[i] * w[i];
            psi[i] = std::log(r[i]) * inner + outer[i + 1];
        }
        return psi;
    }
    // Split sums: j <= i uses (r_j/r_i)^n, j > i uses (r_i/r_j)^n.
    std::vector<double> lo(m), hi(m + 1, 0.0);
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        acc += std::pow(r[j], n + 1) * f.values[j] * w[j];
        lo[j] = acc;
    }
    for (int j = m - 1; j >= 0; --j)
        hi[j] = hi[j + 1] + std::pow(r[j], 1 - n) * f.values[j] * w[j];
    for (int i = 0; i < m; ++i)
        psi[i] = -(std::pow(r[i], -n) * lo[i] + std::pow(r[i], n) * hi[i + 1]) / (2.0 * n);
    return psi;
}

RadialModeProfile lambda_apply(const RadialModeProfile& f)
{
    if (f.mode == 0)
        return RadialModeProfile::zero(f.grid, 0, Parity::cos);
    const int n = f.mode;
    const auto& r = f.grid->nodes();
    const auto psi = inverse_laplacian_mode(n, f);
    const double s = f.parity == Parity::cos ? 1.0 : -1.0;
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        out[i] = s * (n / r[i]) *
                 (-streamfunction_Psi0_prime(r[i]) * f.values[i] + gaussian_G_prime(r[i]) * psi[i]);
    return RadialModeProfile(f.grid, n, swap(f.parity), std::move(out));
}

RadialModeProfile lambda_invert_bracket(int n, const RadialModeProfile& h)
{
    if (n < 1 || h.mode != n)
        throw UsageError("lambda_invert_bracket: mode must be >= 1 and match the input");
    const auto& r = h.grid->nodes();
    const int m = h.grid->size();
    // {P cos, Omega0} = (n/r) P Omega0' sin and {P sin, Omega0} = -(n/r) P Omega0' cos,
    // with Omega0' = -(r/2) G.
    const double s = h.parity == Parity::sin ? 1.0 : -1.0;
    std::vector<double> P(m);
    double scale = 0.0;
    for (int i = 0; i < m; ++i) {
        P[i] = -s * 2.0 * h.values[i] / (n * gaussian_G(r[i]));
        if (r[i] <= 3.0)
            scale = std::max(scale, std::abs(P[i]));
    }
    if (scale == 0.0)
        for (double p : P)
            scale = std::max(scale, std::abs(p));
    for (int i = 0; i < m; ++i) {
        if (!std::isfinite(P[i]) || std::abs(P[i]) > 1e4 * scale * std::pow(1.0 + r[i], 8))
            throw UnboundedQuotient("lambda_invert_bracket: h/Omega0' grows faster than a polynomial near r=" +
                                    std::to_string(r[i]));
    }
    const RadialModeProfile phi(h.grid, n, swap(h.parity), std::move(P));
    return solve_mode(n, phi);
}

RadialModeProfile bracket_re_xin_G(int n, GridPtr grid)
{
    return sample(std::move(grid), n, Parity::sin,
                  [n](double r) { return -0.5 * n * std::pow(r, n) * gaussian_G(r); });
}

} // namespace vcrystal
