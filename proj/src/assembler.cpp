#include "vcrystal/assembler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

#include "vcrystal/errors.hpp"

namespace vcrystal {

namespace {

// exp(-36) < 1e-15 relative to the blob peak
constexpr double gaussian_cut = 36.0;

void check_box(const CrystalConfig& cfg, const CartesianGrid& g)
{
    if (g.box_size < 4.0 * cfg.radius())
        throw UsageError("assembler: box must be at least 4 r");
}

struct Blob {
    Vec2 centre;
    double orientation;  // local xi_1 direction
    double weight;       // circulation factor
    bool central;
};

std::vector<Blob> blobs(const CrystalConfig& cfg, double R, double alpha)
{
    const int N = cfg.n_vortices();
    std::vector<Blob> b;
    for (int j = 1; j <= N; ++j) {
        const double th = 2.0 * std::numbers::pi * j / N + alpha;
        b.push_back({{R * std::cos(th), R * std::sin(th)}, th, 1.0, false});
    }
    b.push_back({{0.0, 0.0}, alpha, cfg.gamma(), true});
    return b;
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

CartesianGrid::CartesianGrid(double box, int n) : box_size(box), n_grid(n)
{
    if (!(box > 0.0))
        throw UsageError("CartesianGrid: box size must be positive");
    if (!is_pow2(n) || n < 128 || n > 4096)
        throw UsageError("CartesianGrid: n_grid must be a power of two in [128, 4096]");
}

AssembledField assemble_pv_nu(const CrystalConfig& cfg, double R, double alpha, double t,
                              const CartesianGrid& grid)
{
    if (!(t > 0.0))
        throw UsageError("assemble_pv_nu: t must be positive");
    check_box(cfg, grid);
    const int n = grid.n_grid;
    const double nut = cfg.viscosity() * t;
    const double amp = cfg.circulation() / (4.0 * std::numbers::pi * nut);
    const double rcut = std::sqrt(4.0 * nut * gaussian_cut);
    AssembledField f{grid, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), t, pv_nu};
    for (const auto& b : blobs(cfg, R, alpha)) {
        if (b.weight == 0.0)
            continue;
        const int i0 = std::max(0, static_cast<int>(std::floor((b.centre.x - rcut + 0.5 * grid.box_size) / grid.dx())));
        const int i1 = std::min(n - 1, static_cast<int>(std::ceil((b.centre.x + rcut + 0.5 * grid.box_size) / grid.dx())));
        const int j0 = std::max(0, static_cast<int>(std::floor((b.centre.y - rcut + 0.5 * grid.box_size) / grid.dx())));
        const int j1 = std::min(n - 1, static_cast<int>(std::ceil((b.centre.y + rcut + 0.5 * grid.box_size) / grid.dx())));
        for (int iy = j0; iy <= j1; ++iy) {
            const double y = grid.coord(iy) - b.centre.y;
            for (int ix = i0; ix <= i1; ++ix) {
                const double x = grid.coord(ix) - b.centre.x;
                const double q = (x * x + y * y) / (4.0 * nut);
                if (q < gaussian_cut)
                    f.values[static_cast<std::size_t>(iy) * n + ix] += b.weight * amp * std::exp(-q);
            }
        }
    }
    return f;
}

AssembledField assemble_correction(const CrystalConfig& cfg, const CorrectionProfiles& p, double R,
                                   double alpha, double t, const CartesianGrid& grid,
                                   const CorrectionOptions& opt, long* clamped)
{
    if (!(t > 0.0))
        throw UsageError("assemble_correction: t must be positive");
    check_box(cfg, grid);
    const int n = grid.n_grid;
    const double nut = cfg.viscosity() * t;
    const double s = std::sqrt(nut);
    const double e = eps(cfg, t);
    const double delta = opt.include_ns ? cfg.viscosity() / cfg.circulation() : 0.0;
    const double amp = cfg.circulation() / nut;
    AssembledField f{grid, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), t, 0u};

    struct Slot {
        int m;
        const RadialModeProfile* e;
        const RadialModeProfile* ns;
        bool central;
    };
    std::vector<Slot> slots;
    slots.push_back({2, &p.omega2_E, &p.omega2_NS, false});
    if (p.gamma_omega2_hat_E)
        slots.push_back({2, &*p.gamma_omega2_hat_E, p.gamma_omega2_hat_NS ? &*p.gamma_omega2_hat_NS : nullptr, true});
    f.components |= order2;
    if (opt.max_order >= 3) {
        if (!p.has_order3)
            throw UsageError("assemble_correction: order-3 profiles not built");
        slots.push_back({3, &p.omega3_E, &p.omega3_NS, false});
        if (p.gamma_omega3_hat_E)
            slots.push_back({3, &*p.gamma_omega3_hat_E, p.gamma_omega3_hat_NS ? &*p.gamma_omega3_hat_NS : nullptr, true});
        f.components |= order3;
    }

    long n_clamped = 0;
    const auto bl = blobs(cfg, R, alpha);
    for (const auto& slot : slots) {
        const double rmax = slot.e->grid->r_max();
        const double c = amp * std::pow(e, slot.m);
        const double reach = rmax * s;
        for (const auto& b : bl) {
            if (b.central != slot.central)
                continue;
            const double ca = std::cos(b.orientation), sa = std::sin(b.orientation);
            for (int iy = 0; iy < n; ++iy) {
                const double y = grid.coord(iy) - b.centre.y;
                if (std::abs(y) > reach + grid.dx())
                    continue;
                for (int ix = 0; ix < n; ++ix) {
                    const double x = grid.coord(ix) - b.centre.x;
                    const double rho = std::hypot(x, y) / s;
                    if (rho > rmax) {
                        if (std::abs(x) <= reach + grid.dx())
                            ++n_clamped;
                        continue;
                    }
                    // local frame: xi_1 along the outward radial direction
                    const double x1 = (ca * x + sa * y) / s, x2 = (-sa * x + ca * y) / s;
                    const double th = std::atan2(x2, x1);
                    const double ang_e = slot.e->parity == Parity::cos ? std::cos(slot.m * th) : std::sin(slot.m * th);
                    double v = slot.e->at(rho) * ang_e;
                    if (slot.ns && delta != 0.0) {
                        const double ang_ns = slot.ns->parity == Parity::cos ? std::cos(slot.m * th) : std::sin(slot.m * th);
                        v += delta * slot.ns->at(rho) * ang_ns;
                    }
                    f.values[static_cast<std::size_t>(iy) * n + ix] += c * v;
                }
            }
        }
    }
    if (opt.strict && n_clamped > 0)
        throw InterpolationOutOfRange("assemble_correction: " + std::to_string(n_clamped) +
                                      " points beyond the profile range");
    if (clamped)
        *clamped = n_clamped;
    return f;
}

AssembledField& operator+=(AssembledField& a, const AssembledField& b)
{
    if (a.grid.n_grid != b.grid.n_grid || a.grid.box_size != b.grid.box_size)
        throw UsageError("AssembledField: grid mismatch");
    for (std::size_t i = 0; i < a.values.size(); ++i)
        a.values[i] += b.values[i];
    a.components |= b.components;
    return a;
}

double total_integral(const AssembledField& f)
{
    double s = 0.0;
    for (double v : f.values)
        s += v;
    return s * f.grid.dx() * f.grid.dx();
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b, double cell_area)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(a[i] - b[i]);
    return s * cell_area;
}

void write_field_dump(const std::string& path, const AssembledField& f)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot open " + path);
    const std::int64_t n = f.grid.n_grid;
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&f.grid.box_size), sizeof(double));
    out.write(reinterpret_cast<const char*>(&f.time), sizeof(double));
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

AssembledField read_field_dump(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open " + path);
    std::int64_t n = 0;
    double L = 0.0, t = 0.0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&L), sizeof L);
    in.read(reinterpret_cast<char*>(&t), sizeof t);
    AssembledField f{CartesianGrid(L, static_cast<int>(n)), std::vector<double>(n * n), t, 0u};
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
    if (!in)
        throw UsageError("truncated field dump " + path);
    return f;
}

void write_pgm(const std::string& path, const AssembledField& f)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot open " + path);
    const int n = f.grid.n_grid;
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    const double span = (*hi > *lo) ? (*hi - *lo) : 1.0;
    out << "P5\n" << n << " " << n << "\n255\n";
    // top row first: highest y
    std::vector<unsigned char> row(n);
    for (int iy = n - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < n; ++ix)
            row[ix] = static_cast<unsigned char>(
                std::lround(255.0 * (f.values[static_cast<std::size_t>(iy) * n + ix] - *lo) / span));
        out.write(reinterpret_cast<const char*>(row.data()), n);
    }
}

} // namespace vcrystal
