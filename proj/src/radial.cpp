#include "vcrystal/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vcrystal/errors.hpp"

namespace vcrystal {

namespace {

constexpr double euler_gamma = std::numbers::egamma;
constexpr double four_pi = 4.0 * std::numbers::pi;

// Fornberg weights for derivatives 0..m at x0 over the given nodes.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& x, int m)
{
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

} // namespace

std::shared_ptr<const RadialGrid> RadialGrid::uniform(int n_nodes, double r_max)
{
    if (n_nodes < 2 || !(r_max > 0.0))
        throw UsageError("RadialGrid::uniform: need >= 2 nodes and r_max > 0");
    const double h = r_max / n_nodes;
    std::vector<double> r(n_nodes), w(n_nodes, h);
    for (int i = 0; i < n_nodes; ++i)
        r[i] = (i + 1) * h;
    r.back() = r_max;
    w.back() = 0.5 * h;
    return std::make_shared<RadialGrid>(std::move(r), std::move(w));
}

RadialGrid::RadialGrid(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights))
{
    if (nodes_.empty() || nodes_.size() != weights_.size())
        throw UsageError("RadialGrid: nodes and weights must be non-empty and equal length");
    if (!(nodes_[0] > 0.0))
        throw UsageError("RadialGrid: nodes must be positive");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
            throw UsageError("RadialGrid: nodes must be strictly increasing");
        if (!(weights_[i] > 0.0))
            throw UsageError("RadialGrid: weights must be positive");
    }
}

RadialModeProfile::RadialModeProfile(GridPtr g, int n, Parity p, std::vector<double> v)
    : grid(std::move(g)), mode(n), parity(p), values(std::move(v))
{
    if (!grid)
        throw UsageError("RadialModeProfile: null grid");
    if (n < 0)
        throw UsageError("RadialModeProfile: negative mode");
    if (static_cast<int>(values.size()) != grid->size())
        throw UsageError("RadialModeProfile: value count does not match grid");
    if (n == 0 && p == Parity::sin)
        throw UsageError("RadialModeProfile: mode 0 must have cos parity");
}

RadialModeProfile RadialModeProfile::zero(GridPtr g, int n, Parity p)
{
    const int sz = g->size();
    return RadialModeProfile(std::move(g), n, p, std::vector<double>(sz, 0.0));
}

RadialModeProfile& RadialModeProfile::operator*=(double s)
{
    for (auto& v : values)
        v *= s;
    return *this;
}

RadialModeProfile& RadialModeProfile::operator+=(const RadialModeProfile& o)
{
    if (o.grid != grid || o.mode != mode || o.parity != parity)
        throw UsageError("RadialModeProfile: adding incompatible profiles");
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] += o.values[i];
    return *this;
}

RadialModeProfile operator*(double s, RadialModeProfile p)
{
    p *= s;
    return p;
}

RadialModeProfile operator+(RadialModeProfile a, const RadialModeProfile& b)
{
    a += b;
    return a;
}

RadialModeProfile operator-(RadialModeProfile a, const RadialModeProfile& b)
{
    a += -1.0 * b;
    return a;
}

double RadialModeProfile::at(double r) const
{
    const auto& x = grid->nodes();
    if (r > x.back())
        return 0.0;
    if (r <= x[0]) {
        if (mode == 0)
            return values[0];
        return values[0] * std::pow(r / x[0], mode);
    }
    // Grids here are uniform or close to it; bisect to stay general.
    const auto it = std::upper_bound(x.begin(), x.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double t = (r - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - t) * values[i - 1] + t * values[i];
}

double gaussian_G(double r) { return std::exp(-0.25 * r * r) / four_pi; }

double gaussian_G_prime(double r) { return -0.5 * r * gaussian_G(r); }

double ein(double x)
{
    if (x < 0.0)
        throw UsageError("ein: negative argument");
    if (x < 1.0) {
        double term = x, sum = x;
        for (int k = 2; k < 40; ++k) {
            term *= -x / k;
            const double add = term / k;
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum))
                break;
        }
        return sum;
    }
    // E_1(x) = -Ei(-x)
    return euler_gamma + std::log(x) - std::expint(-x);
}

double streamfunction_Psi0(double r) { return (ein(0.25 * r * r) - euler_gamma) / four_pi; }

double streamfunction_Psi0_prime(double r)
{
    if (r == 0.0)
        return 0.0;
    return -std::expm1(-0.25 * r * r) / (2.0 * std::numbers::pi * r);
}

double log_weight_A(double r)
{
    const double x = 0.25 * r * r;
    if (x < 1.0)
        return x == 0.0 ? 0.0 : std::log(std::expm1(x) / x);
    return std::log(1.0 / x) + x + std::log(-std::expm1(-x));
}

double weight_A(double r) { return std::exp(log_weight_A(r)); }

void radial_derivatives(const RadialModeProfile& p, std::vector<double>& d1, std::vector<double>& d2)
{
    const auto& r = p.grid->nodes();
    const auto& a = p.values;
    const int n = static_cast<int>(r.size());
    if (n < 5)
        throw GridTooCoarse("diffusion_L: need at least 5 nodes, got " + std::to_string(n));
    d1.assign(n, 0.0);
    d2.assign(n, 0.0);
    // First node: for n >= 1 use the regularity value a(0) = 0 as an extra node; for the radial
    // mode the profile is even, so mirror through the origin.
    for (int i = 0; i < n; ++i) {
        std::vector<double> xs, ys;
        if (i == 0) {
            if (p.mode >= 1) {
                xs = {0.0, r[0], r[1]};
                ys = {0.0, a[0], a[1]};
            } else {
                xs = {-r[0], r[0], r[1]};
                ys = {a[0], a[0], a[1]};
            }
        } else if (i == n - 1) {
            xs = {r[n - 4], r[n - 3], r[n - 2], r[n - 1]};
            ys = {a[n - 4], a[n - 3], a[n - 2], a[n - 1]};
        } else {
            xs = {r[i - 1], r[i], r[i + 1]};
            ys = {a[i - 1], a[i], a[i + 1]};
        }
        const auto w = fd_weights(r[i], xs, 2);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            d1[i] += w[1][k] * ys[k];
            d2[i] += w[2][k] * ys[k];
        }
    }
}

RadialModeProfile diffusion_L(const RadialModeProfile& p)
{
    std::vector<double> d1, d2;
    radial_derivatives(p, d1, d2);
    const auto& r = p.grid->nodes();
    const double n2 = static_cast<double>(p.mode) * p.mode;
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        out[i] = d2[i] + d1[i] / r[i] - n2 * p.values[i] / (r[i] * r[i]) + 0.5 * r[i] * d1[i] +
                 p.values[i];
    return RadialModeProfile(p.grid, p.mode, p.parity, std::move(out));
}

double radial_moment(const RadialModeProfile& p, int power)
{
    const auto& r = p.grid->nodes();
    const auto& w = p.grid->weights();
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        s += w[i] * std::pow(r[i], power) * p.values[i];
    return std::numbers::pi * s;
}

double profile_norm(const RadialModeProfile& p)
{
    const auto& r = p.grid->nodes();
    const auto& w = p.grid->weights();
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        s += w[i] * r[i] * p.values[i] * p.values[i];
    return std::sqrt(s);
}

} // namespace vcrystal
