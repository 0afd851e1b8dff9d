#include "vcrystal/ns2d.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <fftw3.h>

#include "vcrystal/corrections.hpp"
#include "vcrystal/errors.hpp"
#include "vcrystal/pointvortex.hpp"

namespace vcrystal {

namespace {

constexpr double pi = std::numbers::pi;
using cplx = std::complex<double>;

double wrap_pi(double a)
{
    a = std::fmod(a + pi, 2.0 * pi);
    if (a < 0.0)
        a += 2.0 * pi;
    return a - pi;
}

} // namespace

struct SpectralField::Plans {
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    ~Plans()
    {
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
        fftw_free(rbuf);
        fftw_free(cbuf);
    }
};

SpectralField::SpectralField(int n_grid, double box_size)
    : n_(n_grid), L_(box_size), phys_(static_cast<std::size_t>(n_grid) * n_grid, 0.0),
      spec_(static_cast<std::size_t>(n_grid) * (n_grid / 2 + 1)), plans_(std::make_unique<Plans>())
{
    if (n_grid < 8 || (n_grid & (n_grid - 1)) != 0)
        throw UsageError("SpectralField: n_grid must be a power of two");
    const std::size_t nr = static_cast<std::size_t>(n_) * n_;
    const std::size_t nc = static_cast<std::size_t>(n_) * (n_ / 2 + 1);
    plans_->rbuf = fftw_alloc_real(nr);
    plans_->cbuf = fftw_alloc_complex(nc);
    plans_->r2c = fftw_plan_dft_r2c_2d(n_, n_, plans_->rbuf, plans_->cbuf, FFTW_MEASURE);
    plans_->c2r = fftw_plan_dft_c2r_2d(n_, n_, plans_->cbuf, plans_->rbuf, FFTW_MEASURE);
    mask_.assign(nc, 0);
    const int half = n_ / 2 + 1;
    const int kcut = n_ / 3;
    for (int iy = 0; iy < n_; ++iy) {
        const int jy = iy <= n_ / 2 ? iy : iy - n_;
        for (int ix = 0; ix < half; ++ix)
            mask_[static_cast<std::size_t>(iy) * half + ix] = (ix <= kcut && std::abs(jy) <= kcut) ? 1 : 0;
    }
}

SpectralField::~SpectralField() = default;

double SpectralField::kx(int ix) const { return 2.0 * pi / L_ * ix; }

double SpectralField::ky(int iy) const { return 2.0 * pi / L_ * (iy <= n_ / 2 ? iy : iy - n_); }

void SpectralField::forward(const double* in, cplx* out) const
{
    const std::size_t nr = static_cast<std::size_t>(n_) * n_;
    std::copy(in, in + nr, plans_->rbuf);
    fftw_execute(plans_->r2c);
    const double s = 1.0 / static_cast<double>(nr);
    const cplx* c = reinterpret_cast<const cplx*>(plans_->cbuf);
    for (int i = 0; i < nk(); ++i)
        out[i] = c[i] * s;
}

void SpectralField::backward(const cplx* in, double* out) const
{
    std::copy(in, in + nk(), reinterpret_cast<cplx*>(plans_->cbuf));
    fftw_execute(plans_->c2r);
    std::copy(plans_->rbuf, plans_->rbuf + static_cast<std::size_t>(n_) * n_, out);
}

void SpectralField::to_spectral() { forward(phys_.data(), spec_.data()); }

void SpectralField::to_physical() { backward(spec_.data(), phys_.data()); }

NSSolver::NSSolver(int n_grid, double box_size, double nu)
    : field_(std::make_unique<SpectralField>(n_grid, box_size)), nu_(nu)
{
    if (nu < 0.0)
        throw UsageError("NSSolver: negative viscosity");
    const int n = n_grid, half = n / 2 + 1;
    const std::size_t nc = field_->nk(), nr = static_cast<std::size_t>(n) * n;
    w_.assign(nc, 0.0);
    k2_.resize(nc);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < half; ++ix) {
            const double kx = field_->kx(ix), ky = field_->ky(iy);
            k2_[static_cast<std::size_t>(iy) * half + ix] = kx * kx + ky * ky;
        }
    for (auto* v : {&a_, &b_, &c_, &Nu_, &Na_, &Nb_, &Nc_, &tmp_})
        v->assign(nc, 0.0);
    for (auto* v : {&u_, &v_, &wx_, &wy_})
        v->assign(nr, 0.0);
}

NSSolver::~NSSolver() = default;

void NSSolver::set_vorticity(const std::vector<double>& w)
{
    field_->forward(w.data(), w_.data());
}

std::vector<double> NSSolver::vorticity() const
{
    std::vector<double> out(static_cast<std::size_t>(field_->n()) * field_->n());
    field_->backward(w_.data(), out.data());
    return out;
}

double NSSolver::max_velocity()
{
    const int n = field_->n(), half = n / 2 + 1;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < half; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * half + ix;
            const double k2 = k2_[i];
            tmp_[i] = k2 > 0.0 ? cplx(0.0, field_->ky(iy)) * w_[i] / k2 : 0.0;
        }
    field_->backward(tmp_.data(), u_.data());
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < half; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * half + ix;
            const double k2 = k2_[i];
            tmp_[i] = k2 > 0.0 ? cplx(0.0, -field_->kx(ix)) * w_[i] / k2 : 0.0;
        }
    field_->backward(tmp_.data(), v_.data());
    double m = 0.0;
    for (std::size_t i = 0; i < u_.size(); ++i)
        m = std::max(m, u_[i] * u_[i] + v_[i] * v_[i]);
    return std::sqrt(m);
}

void NSSolver::nonlinear(const cplx* w, cplx* out, double* umax)
{
    const int n = field_->n(), half = n / 2 + 1;
    const auto& mask = field_->dealias_mask();
    const std::size_t nc = field_->nk();
    // u = -d_y psi, v = d_x psi, psi = -w/k^2
    auto fill = [&](auto&& f, std::vector<double>& dst) {
        for (int iy = 0; iy < n; ++iy) {
            const double ky = field_->ky(iy);
            for (int ix = 0; ix < half; ++ix) {
                const std::size_t i = static_cast<std::size_t>(iy) * half + ix;
                tmp_[i] = mask[i] ? f(field_->kx(ix), ky, k2_[i], w[i]) : cplx(0.0);
            }
        }
        field_->backward(tmp_.data(), dst.data());
    };
    fill([](double, double ky, double k2, cplx wk) { return k2 > 0.0 ? cplx(0.0, ky) * wk / k2 : cplx(0.0); }, u_);
    fill([](double kx, double, double k2, cplx wk) { return k2 > 0.0 ? cplx(0.0, -kx) * wk / k2 : cplx(0.0); }, v_);
    fill([](double kx, double, double, cplx wk) { return cplx(0.0, kx) * wk; }, wx_);
    fill([](double, double ky, double, cplx wk) { return cplx(0.0, ky) * wk; }, wy_);
    double m = 0.0;
    for (std::size_t i = 0; i < u_.size(); ++i) {
        m = std::max(m, u_[i] * u_[i] + v_[i] * v_[i]);
        wx_[i] = -(u_[i] * wx_[i] + v_[i] * wy_[i]);
    }
    if (umax)
        *umax = std::sqrt(m);
    field_->forward(wx_.data(), out);
    for (std::size_t i = 0; i < nc; ++i)
        if (!mask[i])
            out[i] = 0.0;
    out[0] = 0.0;
}

void NSSolver::prepare(double dt)
{
    if (dt == dt_cached_)
        return;
    const std::size_t nc = field_->nk();
    for (auto* v : {&E_, &E2_, &Q_, &f1_, &f2_, &f3_})
        v->resize(nc);
    constexpr int M = 32;
    cplx roots[M];
    for (int j = 0; j < M; ++j)
        roots[j] = std::exp(cplx(0.0, pi * (j + 0.5) / M));
    // coefficients depend on k^2 only; memoise by value
    double last_k2 = -1.0;
    double cE = 0, cE2 = 0, cQ = 0, c1 = 0, c2 = 0, c3 = 0;
    for (std::size_t i = 0; i < nc; ++i) {
        const double k2 = k2_[i];
        if (k2 != last_k2) {
            const double z = -nu_ * k2 * dt;
            cE = std::exp(z);
            cE2 = std::exp(0.5 * z);
            cplx q = 0, a1 = 0, a2 = 0, a3 = 0;
            for (int j = 0; j < M; ++j) {
                const cplx lr = z + roots[j];
                const cplx e = std::exp(lr);
                const cplx lr3 = lr * lr * lr;
                q += (std::exp(0.5 * lr) - 1.0) / lr;
                a1 += (-4.0 - lr + e * (4.0 - 3.0 * lr + lr * lr)) / lr3;
                a2 += (2.0 + lr + e * (-2.0 + lr)) / lr3;
                a3 += (-4.0 - 3.0 * lr - lr * lr + e * (4.0 - lr)) / lr3;
            }
            cQ = dt * q.real() / M;
            c1 = dt * a1.real() / M;
            c2 = dt * a2.real() / M;
            c3 = dt * a3.real() / M;
            last_k2 = k2;
        }
        E_[i] = cE;
        E2_[i] = cE2;
        Q_[i] = cQ;
        f1_[i] = c1;
        f2_[i] = c2;
        f3_[i] = c3;
    }
    dt_cached_ = dt;
}

void NSSolver::step(double dt)
{
    if (!(dt > 0.0))
        throw UsageError("NSSolver::step: dt must be positive");
    prepare(dt);
    const std::size_t nc = field_->nk();
    double umax = 0.0;
    nonlinear(w_.data(), Nu_.data(), &umax);
    if (!std::isfinite(umax))
        throw NaNDetected("non-finite velocity at t=" + std::to_string(time_));
    const double cfl = dt * umax / field_->dx();
    if (cfl >= 0.5)
        throw CFLViolation("CFL number " + std::to_string(cfl) + " >= 0.5 at t=" + std::to_string(time_));
    for (std::size_t i = 0; i < nc; ++i)
        a_[i] = E2_[i] * w_[i] + Q_[i] * Nu_[i];
    nonlinear(a_.data(), Na_.data(), nullptr);
    for (std::size_t i = 0; i < nc; ++i)
        b_[i] = E2_[i] * w_[i] + Q_[i] * Na_[i];
    nonlinear(b_.data(), Nb_.data(), nullptr);
    for (std::size_t i = 0; i < nc; ++i)
        c_[i] = E2_[i] * a_[i] + Q_[i] * (2.0 * Nb_[i] - Nu_[i]);
    nonlinear(c_.data(), Nc_.data(), nullptr);
    for (std::size_t i = 0; i < nc; ++i)
        w_[i] = E_[i] * w_[i] + f1_[i] * Nu_[i] + 2.0 * f2_[i] * (Na_[i] + Nb_[i]) + f3_[i] * Nc_[i];
    time_ += dt;
    ++steps_;
}

std::vector<double> ns_step(const std::vector<double>& field, int n_grid, double box_size, double dt,
                            double nu)
{
    NSSolver s(n_grid, box_size, nu);
    s.set_vorticity(field);
    s.step(dt);
    return s.vorticity();
}

double integral(const std::vector<double>& w, double dx)
{
    double s = 0.0;
    for (double v : w)
        s += v;
    return s * dx * dx;
}

double angular_momentum(const std::vector<double>& w, int n, double L)
{
    const double dx = L / n;
    double s = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        const double y = -0.5 * L + iy * dx;
        for (int ix = 0; ix < n; ++ix) {
            const double x = -0.5 * L + ix * dx;
            s += (x * x + y * y) * w[static_cast<std::size_t>(iy) * n + ix];
        }
    }
    return s * dx * dx;
}

double symmetry_defect(const std::vector<double>& w, int n, int N)
{
    if (N != 1 && N != 2 && N != 4)
        throw UsageError("symmetry_defect: only rotations by pi or pi/2 map the square grid to itself");
    if (N == 1)
        return 0.0;
    double num = 0.0, den = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            int sx, sy;
            if (N == 2) {
                sx = (n - ix) % n;
                sy = (n - iy) % n;
            } else {
                // (R w)(x, y) = w(y, -x)
                sx = iy;
                sy = (n - ix) % n;
            }
            const double a = w[static_cast<std::size_t>(iy) * n + ix];
            const double b = w[static_cast<std::size_t>(sy) * n + sx];
            num += (a - b) * (a - b);
            den += a * a;
        }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

namespace {

double taper(double rho)
{
    if (rho <= 0.75)
        return 1.0;
    if (rho >= 1.0)
        return 0.0;
    const double c = std::cos(0.5 * pi * (rho - 0.75) / 0.25);
    return c * c;
}

BlobDiagnostic measure_blob(const SpectralField& g, const std::vector<double>& w, Vec2 guess,
                            double Rm, double circ, bool central)
{
    const int n = g.n();
    const double L = g.box_size(), dx = g.dx();
    Vec2 c = guess;
    const int span = static_cast<int>(std::ceil(Rm / dx)) + 1;
    auto loop = [&](auto&& body) {
        const int cx = static_cast<int>(std::lround((c.x + 0.5 * L) / dx));
        const int cy = static_cast<int>(std::lround((c.y + 0.5 * L) / dx));
        for (int jy = cy - span; jy <= cy + span; ++jy) {
            const int iy = ((jy % n) + n) % n;
            const double y = -0.5 * L + jy * dx - c.y;
            for (int jx = cx - span; jx <= cx + span; ++jx) {
                const int ix = ((jx % n) + n) % n;
                const double x = -0.5 * L + jx * dx - c.x;
                body(x, y, w[static_cast<std::size_t>(iy) * n + ix]);
            }
        }
    };
    for (int it = 0; it < 50; ++it) {
        double W = 0.0, Sx = 0.0, Sy = 0.0;
        loop([&](double x, double y, double v) {
            const double wt = taper(std::hypot(x, y) / Rm) * v;
            W += wt;
            Sx += wt * x;
            Sy += wt * y;
        });
        if (!(W * circ > 0.0))
            throw BlobLost("no vorticity of the expected sign near a blob centre");
        const Vec2 sh{Sx / W, Sy / W};
        c += sh;
        if (norm(sh) < 1e-14 * std::max(1.0, norm(c)))
            break;
    }
    BlobDiagnostic b{};
    b.centre = c;
    double inside = 0.0, W = 0.0, xx = 0.0, xy = 0.0, yy = 0.0;
    loop([&](double x, double y, double v) {
        const double rho = std::hypot(x, y);
        if (rho <= Rm)
            inside += v;
        const double wt = taper(rho / Rm) * v;
        W += wt;
        xx += wt * x * x;
        xy += wt * x * y;
        yy += wt * y * y;
    });
    b.captured = inside * dx * dx / circ;
    b.qxx = xx / W;
    b.qxy = xy / W;
    b.qyy = yy / W;
    const double tr = b.qxx + b.qyy;
    const double dev = std::hypot(b.qxx - b.qyy, 2.0 * b.qxy);
    b.anisotropy = dev / tr;
    const double major = 0.5 * std::atan2(2.0 * b.qxy, b.qxx - b.qyy);
    const double radial = central ? 0.0 : std::atan2(c.y, c.x);
    double rel = major - radial;
    rel = std::remainder(rel, pi);
    if (rel <= -0.5 * pi)
        rel += pi;
    b.orientation = rel;
    // Q_rr - Q_tt in the radial frame
    const double cr = std::cos(2.0 * radial), sr = std::sin(2.0 * radial);
    b.radial_alignment = ((b.qxx - b.qyy) * cr + 2.0 * b.qxy * sr) / tr;
    return b;
}

} // namespace

BlobDiagnostics extract_diagnostics(const CrystalConfig& cfg, const SpectralField& g,
                                    const std::vector<double>& w, const std::vector<Vec2>& guesses,
                                    double Rm)
{
    const int N = cfg.n_vortices();
    BlobDiagnostics d;
    cplx ph = 0.0;
    for (int j = 0; j < N; ++j) {
        auto b = measure_blob(g, w, guesses[j], Rm, cfg.circulation(), false);
        if (b.captured < 0.5)
            throw BlobLost("blob " + std::to_string(j + 1) + " mask captures only " +
                           std::to_string(100.0 * b.captured) + "% of its circulation");
        d.radius_meas += norm(b.centre) / N;
        ph += std::polar(1.0, std::atan2(b.centre.y, b.centre.x) - 2.0 * pi * (j + 1) / N);
        d.blobs.push_back(b);
    }
    d.phase_meas = std::arg(ph);
    if (cfg.gamma() != 0.0 && guesses.size() > static_cast<std::size_t>(N)) {
        auto b = measure_blob(g, w, guesses[N], Rm, cfg.gamma() * cfg.circulation(), true);
        if (b.captured < 0.5)
            throw BlobLost("central blob mask captures only " + std::to_string(100.0 * b.captured) + "%");
        d.blobs.push_back(b);
    }
    return d;
}

namespace {

std::vector<double> gaussian_field(const std::vector<Vec2>& z, const std::vector<double>& g, double nut,
                                   const CartesianGrid& grid)
{
    const int n = grid.n_grid;
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (g[k] == 0.0)
            continue;
        const double amp = g[k] / (4.0 * pi * nut);
        for (int iy = 0; iy < n; ++iy) {
            const double y = grid.coord(iy) - z[k].y;
            for (int ix = 0; ix < n; ++ix) {
                const double x = grid.coord(ix) - z[k].x;
                const double q = (x * x + y * y) / (4.0 * nut);
                if (q < 36.0)
                    w[static_cast<std::size_t>(iy) * n + ix] += amp * std::exp(-q);
            }
        }
    }
    return w;
}

double phase_of(const std::vector<Vec2>& z, int N)
{
    cplx ph = 0.0;
    for (int j = 0; j < N; ++j)
        ph += std::polar(1.0, std::atan2(z[j].y, z[j].x) - 2.0 * pi * (j + 1) / N);
    return std::arg(ph);
}

void dump_state(const std::string& dir, const char* tag, const SpectralField& g,
                const std::vector<double>& w, double t, bool pgm)
{
    if (dir.empty())
        return;
    AssembledField f{CartesianGrid(g.box_size(), g.n()), w, t, 0u};
    write_field_dump(dir + "/" + tag + ".bin", f);
    if (pgm)
        write_pgm(dir + "/" + tag + ".pgm", f);
}

} // namespace

RunResult run_crystal(const CrystalConfig& cfg, const SimParams& sp,
                      const std::vector<double>& snapshot_times)
{
    const auto t_start = std::chrono::steady_clock::now();
    const auto sc = derive_scales(cfg);
    const int N = cfg.n_vortices();
    if (sp.eps0 < 0.02 || sp.eps0 > 0.1)
        throw UsageError("run_crystal: eps0 must lie in [0.02, 0.1]");
    if (sp.dt_policy != "initial" && sp.dt_policy != "adaptive")
        throw UsageError("run_crystal: dt_policy must be 'initial' or 'adaptive'");
    const double nu = cfg.viscosity();
    const double t0 = sp.eps0 * sp.eps0 * sc.d * sc.d / nu;
    const CartesianGrid grid(sp.box_factor * cfg.radius(), sp.n_grid);
    const double t_end = sp.t_end > 0.0 ? sp.t_end : sp.t_end_rotations * 2.0 * pi / std::abs(sc.omega_rot);
    const double interval = sp.output_interval > 0.0 ? sp.output_interval : t_end / 100.0;

    RunResult res;
    res.t0 = t0;

    auto z = pv_positions(cfg, 0.0);
    const auto circ = pv_circulations(cfg);
    if (sp.noise > 0.0) {
        std::mt19937_64 rng(sp.seed);
        std::normal_distribution<double> nd(0.0, sp.noise * cfg.radius());
        for (int j = 0; j < N; ++j)
            z[j] += Vec2{nd(rng), nd(rng)};
    }
    std::vector<double> w0 = gaussian_field(z, circ, nu * t0, grid);
    if (sp.init_order2) {
        auto p = build_omega2(cfg, default_lambda_grid());
        auto corr = assemble_correction(cfg, p, cfg.radius(), 0.0, t0, grid);
        for (std::size_t i = 0; i < w0.size(); ++i)
            w0[i] += corr.values[i];
    }

    NSSolver solver(sp.n_grid, grid.box_size, nu);
    solver.set_vorticity(w0);

    // schedule
    std::vector<double> times;
    for (long k = 1; k * interval < t_end - 1e-12 * t_end; ++k)
        times.push_back(k * interval);
    times.push_back(t_end);
    for (double s : snapshot_times)
        if (s > 0.0 && s <= t_end)
            times.push_back(s);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [&](double a, double b) { return std::abs(a - b) < 1e-12 * t_end; }),
                times.end());

    std::vector<double> ref_t, ref_alpha;
    if (sp.periodic_reference) {
        PVState s{z, circ, 0.0};
        // Tracer centre is harmless for the reference.
        BiotSavart k{grid.box_size, 1e-9};
        double t_prev = 0.0;
        ref_t.push_back(0.0);
        ref_alpha.push_back(phase_of(z, N));
        double unwrapped = ref_alpha.back();
        for (double t : times) {
            auto tr = pv_integrate(s, t - t_prev, t - t_prev, 1e-11, k);
            s.positions = tr.positions.back();
            s.time = t;
            const double ph = phase_of(s.positions, N);
            unwrapped += wrap_pi(ph - unwrapped);
            ref_t.push_back(t);
            ref_alpha.push_back(unwrapped);
            t_prev = t;
        }
    }

    auto mask_radius = [&](double t) { return std::min(0.5 * sc.d, 4.0 * std::sqrt(nu * (t + t0))); };

    std::vector<Vec2> guesses = z;
    double alpha_unwrapped = 0.0;
    double last_t = 0.0;
    auto record = [&](double t, double dt, double umax, std::size_t idx) {
        auto w = solver.vorticity();
        auto diag = extract_diagnostics(cfg, solver.field(), w, guesses, mask_radius(t));
        for (int j = 0; j < N; ++j)
            guesses[j] = diag.blobs[j].centre;
        if (cfg.gamma() != 0.0)
            guesses[N] = diag.blobs[N].centre;
        DiagRecord r{};
        r.t = t;
        r.t_phys = t + t0;
        r.eps = eps(cfg, t + t0);
        r.radius_meas = diag.radius_meas;
        if (res.series.empty())
            alpha_unwrapped = diag.phase_meas;
        else
            alpha_unwrapped += wrap_pi(diag.phase_meas - alpha_unwrapped);
        r.alpha_meas = alpha_unwrapped;
        r.alpha_ref = sp.periodic_reference ? ref_alpha[idx] : sc.omega_rot * t;
        r.L_total = angular_momentum(w, grid.n_grid, grid.box_size);
        r.M_total = integral(w, grid.dx());
        r.max_u = umax;
        r.dt = dt;
        r.diag = std::move(diag);
        res.series.push_back(std::move(r));
        for (double s : snapshot_times)
            if (std::abs(s - t) < 1e-12 * std::max(1.0, t_end)) {
                res.snapshots.push_back(w);
                res.snapshot_times.push_back(t);
            }
        const int k = static_cast<int>(res.series.size()) - 1;
        if ((sp.dump_fields || sp.image_dumps) && sp.dump_every > 0 && k % sp.dump_every == 0) {
            char tag[32];
            std::snprintf(tag, sizeof tag, "field_%05d", k);
            AssembledField f{grid, w, t + t0, 0u};
            if (sp.dump_fields && !sp.out_dir.empty())
                write_field_dump(sp.out_dir + "/" + tag + ".bin", f);
            if (sp.image_dumps && !sp.out_dir.empty())
                write_pgm(sp.out_dir + "/" + tag + ".pgm", f);
        }
    };

    double umax = solver.max_velocity();
    const double dt_initial = sp.dt_safety * grid.dx() / umax;
    try {
        record(0.0, 0.0, umax, 0);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double target = times[k];
            const double span = target - last_t;
            if (span <= 0.0)
                continue;
            double dt_cfl = dt_initial;
            if (sp.dt_policy == "adaptive")
                dt_cfl = sp.dt_safety * grid.dx() / umax;
            const long nsub = std::max(1L, static_cast<long>(std::ceil(span / dt_cfl - 1e-9)));
            const double dt = span / nsub;
            for (long s = 0; s < nsub; ++s)
                solver.step(dt);
            solver.set_time(target);
            // advance mask guesses with the expected rotation
            const double rot = sc.omega_rot * span;
            for (int j = 0; j <= N; ++j)
                guesses[j] = rotate(guesses[j], rot);
            umax = solver.max_velocity();
            if (!std::isfinite(umax)) {
                dump_state(sp.out_dir, "nan_state", solver.field(), solver.vorticity(), target + t0, false);
                throw NaNDetected("non-finite field at t=" + std::to_string(target));
            }
            record(target, dt, umax, k + 1);
            last_t = target;
        }
    } catch (const BlobLost& e) {
        res.events.push_back({"BlobLost", solver.time(), e.what()});
    } catch (const NaNDetected&) {
        dump_state(sp.out_dir, "nan_state", solver.field(), solver.vorticity(), solver.time() + t0, false);
        throw;
    }
    res.steps = solver.steps_taken();
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

FitResult fit_alpha4(const std::vector<DiagRecord>& s, const CrystalConfig& cfg, const FitOptions& opt)
{
    const auto sc = derive_scales(cfg);
    const int n = static_cast<int>(s.size());
    std::vector<double> xs, ys;
    for (int k = 0; k < n; ++k) {
        if (s[k].eps < opt.eps_min || s[k].eps > opt.eps_max)
            continue;
        // local quadratic least squares for d/dt (alpha_meas - alpha_ref)
        const int lo = std::max(0, k - opt.half_window), hi = std::min(n - 1, k + opt.half_window);
        if (hi - lo < 2)
            continue;
        Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
        Eigen::Vector3d b = Eigen::Vector3d::Zero();
        const double tc = s[k].t;
        for (int i = lo; i <= hi; ++i) {
            const double dt = s[i].t - tc;
            const Eigen::Vector3d phi(1.0, dt, dt * dt);
            A += phi * phi.transpose();
            b += phi * (s[i].alpha_meas - s[i].alpha_ref);
        }
        const Eigen::Vector3d c = A.ldlt().solve(b);
        const double e2 = s[k].eps * s[k].eps;
        xs.push_back(e2 * e2);
        ys.push_back(c[1] / sc.omega_rot);
    }
    if (xs.size() < 8)
        throw InsufficientWindow("fit_alpha4: fewer than 8 samples inside the eps window");
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    if (*mx < 10.0 * *mn)
        throw InsufficientWindow("fit_alpha4: eps^4 spans less than a decade");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return {slope, (sy - slope * sx) / m, static_cast<int>(xs.size())};
}

void write_diagnostics_csv(const std::string& path, const CrystalConfig& cfg, const RunResult& r)
{
    std::ofstream out(path);
    if (!out)
        throw UsageError("cannot open " + path);
    const int N = cfg.n_vortices();
    out << "t,eps,R_meas,alpha_meas,L_total,M_total";
    for (int j = 1; j <= N; ++j)
        out << ",orientation_" << j << ",anisotropy_" << j;
    out << ",t_phys,alpha_ref,max_u,dt";
    for (int j = 1; j <= N; ++j)
        out << ",radial_alignment_" << j;
    out << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
    };
    for (const auto& d : r.series) {
        std::snprintf(buf, sizeof buf, "%.17g", d.t);
        out << buf;
        for (double v : {d.eps, d.radius_meas, d.alpha_meas, d.L_total, d.M_total})
            put(v);
        for (int j = 0; j < N; ++j) {
            put(d.diag.blobs[j].orientation);
            put(d.diag.blobs[j].anisotropy);
        }
        for (double v : {d.t_phys, d.alpha_ref, d.max_u, d.dt})
            put(v);
        for (int j = 0; j < N; ++j)
            put(d.diag.blobs[j].radial_alignment);
        out << "\n";
    }
}

} // namespace vcrystal
