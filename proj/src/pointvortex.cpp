#include "vcrystal/pointvortex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "vcrystal/errors.hpp"

namespace vcrystal {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// pi/L sum_m cot(pi (z - i m L)/L) + 2 pi i y / L^2 equals the Weierstrass zeta function of the
// square lattice minus pi zbar/L^2, which is what a zero-mean periodic vortex induces.
std::complex<double> periodic_zeta(std::complex<double> z, double L)
{
    z = {z.real() - L * std::nearbyint(z.real() / L), z.imag() - L * std::nearbyint(z.imag() / L)};
    const std::complex<double> I(0.0, 1.0);
    const double k = std::numbers::pi / L;
    std::complex<double> s = 1.0 / std::tan(k * z);
    for (int m = 1; m <= 10; ++m) {
        const std::complex<double> shift(0.0, m * L);
        s += 1.0 / std::tan(k * (z - shift)) + 1.0 / std::tan(k * (z + shift));
    }
    return k * s + 2.0 * std::numbers::pi * I * z.imag() / (L * L);
}

} // namespace

PVState crystal_state(const CrystalConfig& cfg, double t)
{
    PVState s;
    s.positions = pv_positions(cfg, t);
    s.circulations = pv_circulations(cfg);
    s.time = t;
    return s;
}

Vec2 unit_vortex_velocity(Vec2 z, const BiotSavart& kernel)
{
    if (kernel.period <= 0.0) {
        const double r2 = norm2(z);
        return (1.0 / (two_pi * r2)) * perp(z);
    }
    // u - i v = zeta_p(z)/(2 pi i)
    const std::complex<double> w =
        periodic_zeta({z.x, z.y}, kernel.period) / std::complex<double>(0.0, two_pi);
    return {w.real(), -w.imag()};
}

std::vector<Vec2> pv_velocity(const PVState& state, const BiotSavart& kernel)
{
    const auto& z = state.positions;
    const auto& g = state.circulations;
    if (z.size() != g.size())
        throw UsageError("pv_velocity: positions and circulations differ in length");
    const std::size_t n = z.size();
    std::vector<Vec2> v(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = j + 1; l < n; ++l) {
            Vec2 dz = z[j] - z[l];
            if (kernel.period > 0.0) {
                dz.x -= kernel.period * std::nearbyint(dz.x / kernel.period);
                dz.y -= kernel.period * std::nearbyint(dz.y / kernel.period);
            }
            if (norm(dz) < kernel.collision_threshold)
                throw CollisionError("vortices " + std::to_string(j) + " and " + std::to_string(l) +
                                     " collided");
            const Vec2 k = unit_vortex_velocity(dz, kernel);
            v[j] += g[l] * k;
            v[l] -= g[j] * k;
        }
    }
    return v;
}

ConservedSet conserved(const PVState& state)
{
    const auto& z = state.positions;
    const auto& g = state.circulations;
    ConservedSet c{0.0, {0.0, 0.0}, 0.0};
    for (std::size_t j = 0; j < z.size(); ++j) {
        c.linear_momentum += g[j] * z[j];
        c.angular_momentum += g[j] * norm2(z[j]);
        for (std::size_t l = j + 1; l < z.size(); ++l)
            c.hamiltonian -= 2.0 * g[j] * g[l] * std::log(norm(z[j] - z[l])) / (4.0 * std::numbers::pi);
    }
    return c;
}

Trajectory pv_integrate(const PVState& state, double dt_out, double t_end, double tol,
                        const BiotSavart& kernel, IntegratorStats* stats)
{
    if (!(dt_out > 0.0) || !(tol > 0.0))
        throw UsageError("pv_integrate: dt and tol must be positive");
    // Dormand-Prince tableau.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;

    const std::size_t n = state.positions.size();
    using V = std::vector<Vec2>;
    PVState s = state;
    auto f = [&](const V& z) {
        PVState tmp{z, s.circulations, 0.0};
        return pv_velocity(tmp, kernel);
    };
    auto comb = [&](const V& base, double h, std::initializer_list<std::pair<double, const V*>> terms) {
        V out = base;
        for (auto [a, k] : terms)
            for (std::size_t i = 0; i < n; ++i)
                out[i] += (h * a) * (*k)[i];
        return out;
    };

    double length = 0.0;
    for (auto& p : s.positions)
        length = std::max(length, norm(p));
    if (length == 0.0)
        length = 1.0;

    Trajectory tr;
    tr.circulations = s.circulations;
    tr.t.push_back(s.time);
    tr.positions.push_back(s.positions);
    tr.conserved.push_back(conserved(s));

    const double t0 = s.time;
    double t = t0;
    double h = dt_out / 10.0;
    V k1 = f(s.positions);
    long n_out = 1;
    while (t < t0 + t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
        const double t_next = std::min(t0 + n_out * dt_out, t0 + t_end);
        while (t < t_next) {
            const bool last = t + h >= t_next;
            const double hs = last ? t_next - t : h;
            if (hs < 1e-14 * std::max(1.0, std::abs(t)) && !last)
                throw StepFailure("pv_integrate: step size underflow at t=" + std::to_string(t));
            const V& z = s.positions;
            V k2 = f(comb(z, hs, {{a21, &k1}}));
            V k3 = f(comb(z, hs, {{a31, &k1}, {a32, &k2}}));
            V k4 = f(comb(z, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
            V k5 = f(comb(z, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
            V k6 = f(comb(z, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
            V znew = comb(z, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
            V k7 = f(znew);
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2 e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                    e7 * k7[i]);
                const double sc = tol * (length + norm(z[i]));
                err = std::max(err, norm(e) / sc);
            }
            if (!std::isfinite(err))
                throw StepFailure("pv_integrate: non-finite error estimate");
            if (err <= 1.0) {
                t = last ? t_next : t + h;
                s.positions = std::move(znew);
                k1 = std::move(k7);
                if (stats)
                    ++stats->accepted;
            } else if (stats) {
                ++stats->rejected;
            }
            const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            const double hn = hs * std::clamp(fac, 0.2, 5.0);
            if (!(err <= 1.0) || !last)
                h = hn;
            if (h < 1e-14 * std::max(1.0, std::abs(t)))
                throw StepFailure("pv_integrate: step size underflow at t=" + std::to_string(t));
        }
        s.time = t;
        tr.t.push_back(t);
        tr.positions.push_back(s.positions);
        tr.conserved.push_back(conserved(s));
        ++n_out;
    }
    return tr;
}

std::string to_string(Stability s)
{
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
    }
    return "?";
}

bool stability_theorem_predicts_stable(int N, double gamma)
{
    const double lo = (N % 2 == 0) ? (N * N - 8.0 * N + 8.0) / 16.0 : (N * N - 8.0 * N + 7.0) / 16.0;
    const double hi = (N - 1.0) * (N - 1.0) / 4.0;
    return lo < gamma && gamma < hi;
}

StabilityReport pv_linear_stability(const CrystalConfig& cfg, const StabilityOptions& opt)
{
    PVState s = crystal_state(cfg, 0.0);
    // A zero-circulation centre is a passive tracer and does not belong to the dynamics.
    if (cfg.gamma() == 0.0) {
        s.positions.pop_back();
        s.circulations.pop_back();
    }
    const int m = static_cast<int>(s.positions.size());
    const int dim = 2 * m;
    const double a = derive_scales(cfg).omega_rot;
    const double h = opt.fd_step * cfg.radius();

    auto field = [&](const Eigen::VectorXd& x) {
        PVState p{std::vector<Vec2>(m), s.circulations, 0.0};
        for (int i = 0; i < m; ++i)
            p.positions[i] = {x[2 * i], x[2 * i + 1]};
        const auto v = pv_velocity(p);
        Eigen::VectorXd out(dim);
        for (int i = 0; i < m; ++i) {
            const Vec2 w = v[i] - a * perp(p.positions[i]);
            out[2 * i] = w.x;
            out[2 * i + 1] = w.y;
        }
        return out;
    };

    Eigen::VectorXd x0(dim);
    for (int i = 0; i < m; ++i) {
        x0[2 * i] = s.positions[i].x;
        x0[2 * i + 1] = s.positions[i].y;
    }
    Eigen::MatrixXd J(dim, dim);
    for (int c = 0; c < dim; ++c) {
        Eigen::VectorXd xp = x0, xm = x0;
        xp[c] += h;
        xm[c] -= h;
        J.col(c) = (field(xp) - field(xm)) / (2.0 * h);
    }

    // Rotation and dilation span an invariant block with a double zero eigenvalue
    // (J v_rot = 0, J v_dil = -2a v_rot). Split it off so finite-difference noise cannot
    // turn the Jordan block into a spurious +-sqrt(noise) pair.
    Eigen::MatrixXd S(dim, 2);
    for (int i = 0; i < m; ++i) {
        S(2 * i, 0) = -x0[2 * i + 1];
        S(2 * i + 1, 0) = x0[2 * i];
        S(2 * i, 1) = x0[2 * i];
        S(2 * i + 1, 1) = x0[2 * i + 1];
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(S);
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd Q2 = Q.rightCols(dim - 2);
    const Eigen::MatrixXd D = Q2.transpose() * J * Q2;
    Eigen::EigenSolver<Eigen::MatrixXd> es(D, false);

    StabilityReport rep;
    rep.eigenvalues.push_back(0.0);
    rep.eigenvalues.push_back(0.0);
    rep.max_real = 0.0;
    rep.min_abs_nontrivial = INFINITY;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const std::complex<double> lam = es.eigenvalues()[i];
        rep.eigenvalues.push_back(lam);
        rep.max_real = std::max(rep.max_real, lam.real());
        rep.min_abs_nontrivial = std::min(rep.min_abs_nontrivial, std::abs(lam));
    }
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](auto p, auto q) {
        return p.real() != q.real() ? p.real() > q.real() : p.imag() > q.imag();
    });

    const double scale = std::abs(a) > 0.0 ? std::abs(a) : std::abs(cfg.circulation()) /
                                                               (cfg.radius() * cfg.radius());
    const double eps_s = opt.stability_eps * scale;
    const double eps_d = opt.degeneracy_eps * scale;
    if (rep.min_abs_nontrivial < eps_d || (rep.max_real > eps_s && rep.max_real < eps_d))
        rep.classification = Stability::marginal;
    else if (rep.max_real > eps_s)
        rep.classification = Stability::unstable;
    else
        rep.classification = Stability::stable;
    return rep;
}

} // namespace vcrystal
