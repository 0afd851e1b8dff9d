#pragma once

#include <memory>
#include <vector>

namespace vcrystal {

class RadialGrid {
public:
    // r_i = i h, i = 1..n, h = r_max/n, trapezoid weights (last one halved).
    static std::shared_ptr<const RadialGrid> uniform(int n_nodes, double r_max = 20.0);

    RadialGrid(std::vector<double> nodes, std::vector<double> weights);

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    double r_max() const { return nodes_.back(); }
    int size() const { return static_cast<int>(nodes_.size()); }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

enum class Parity { cos, sin };

inline Parity swap(Parity p) { return p == Parity::cos ? Parity::sin : Parity::cos; }

// a(r) times cos(n theta) or sin(n theta).
struct RadialModeProfile {
    GridPtr grid;
    int mode = 0;
    Parity parity = Parity::cos;
    std::vector<double> values;

    RadialModeProfile() = default;
    RadialModeProfile(GridPtr g, int n, Parity p, std::vector<double> v);
    static RadialModeProfile zero(GridPtr g, int n, Parity p);

    RadialModeProfile& operator*=(double s);
    RadialModeProfile& operator+=(const RadialModeProfile& o);
    // Linear interpolation in r; zero beyond r_max, r^n-like ramp below the first node.
    double at(double r) const;
};

RadialModeProfile operator*(double s, RadialModeProfile p);
RadialModeProfile operator+(RadialModeProfile a, const RadialModeProfile& b);
RadialModeProfile operator-(RadialModeProfile a, const RadialModeProfile& b);

double gaussian_G(double r);
double gaussian_G_prime(double r);

// Ein(x) = int_0^x (1 - e^{-s})/s ds
double ein(double x);

double streamfunction_Psi0(double r);
double streamfunction_Psi0_prime(double r);

double weight_A(double r);
double log_weight_A(double r);

// a'' + a'/r - n^2 a/r^2 + r a'/2 + a on the profile's mode.
RadialModeProfile diffusion_L(const RadialModeProfile& profile);

// First and second derivatives on the grid with the regularity conventions of diffusion_L.
void radial_derivatives(const RadialModeProfile& profile, std::vector<double>& d1,
                        std::vector<double>& d2);

// Sample f on the nodes.
template <class F>
RadialModeProfile sample(GridPtr g, int n, Parity p, F&& f)
{
    std::vector<double> v(g->size());
    for (int i = 0; i < g->size(); ++i)
        v[i] = f(g->nodes()[i]);
    return RadialModeProfile(std::move(g), n, p, std::move(v));
}

// pi int r^{k+1} a(r) dr: the angular moment weight for a mode-k profile.
double radial_moment(const RadialModeProfile& p, int power);

// Discrete L^2 norm with weight r dr.
double profile_norm(const RadialModeProfile& p);

} // namespace vcrystal
