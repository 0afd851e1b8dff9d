#include "doctest.h"

#include <cmath>

#include "vcrystal/errors.hpp"
#include "vcrystal/lambda.hpp"

using namespace vcrystal;

namespace {

double wnorm(const RadialGrid& g, const Eigen::VectorXd& v)
{
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i)
        s += g.nodes()[i] * g.weights()[i] * v[i] * v[i];
    return std::sqrt(s);
}

} // namespace

TEST_CASE("T1 has the translation mode as eigenvector")
{
    const auto g = RadialGrid::uniform(1024, 20.0);
    const auto T = build_Tn(1, g);
    Eigen::VectorXd u(g->size());
    for (int i = 0; i < g->size(); ++i)
        u[i] = gaussian_G_prime(g->nodes()[i]) * std::sqrt(weight_A(g->nodes()[i]));
    CHECK(wnorm(*g, T.matrix * u - u) < 1e-4 * wnorm(*g, u));
    CHECK(spectral_radius_estimate(T) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("higher modes are contractions and well conditioned")
{
    const auto g = RadialGrid::uniform(512, 20.0);
    for (int n : {2, 3, 4}) {
        const auto T = build_Tn(n, g);
        CHECK(spectral_radius_estimate(T) < 1.0);
        CHECK(condition_number_I_minus_T(T) < 1e3);
    }
}

TEST_CASE("LU and Neumann series agree")
{
    const auto g = RadialGrid::uniform(512, 20.0);
    const auto phi = sample(g, 2, Parity::cos, [](double r) { return r * r * std::exp(-r * r / 8.0); });
    const ModeSolver s(2, g);
    const auto a = s.solve(phi);
    const auto b = s.solve_neumann(phi, 400);
    CHECK(profile_norm(a - b) < 1e-10 * profile_norm(a));
}

TEST_CASE("mode inverse Laplacian matches the ODE")
{
    // Delta^{-1} of r^2 e^{-r^2} cos 2theta: check psi'' + psi'/r - 4 psi/r^2 = F at interior nodes.
    const auto g = RadialGrid::uniform(4000, 20.0);
    const auto F = sample(g, 2, Parity::cos, [](double r) { return r * r * std::exp(-r * r); });
    const auto psi = inverse_laplacian_mode(2, F);
    const double h = g->nodes()[1] - g->nodes()[0];
    double worst = 0.0;
    for (int i = 50; i < 1000; i += 37) {
        const double r = g->nodes()[i];
        const double d2 = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) / (h * h);
        const double d1 = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
        worst = std::max(worst, std::abs(d2 + d1 / r - 4.0 * psi[i] / (r * r) - F.values[i]));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("Lambda inverts brackets with the right parity")
{
    const auto g = RadialGrid::uniform(1024, 20.0);
    for (int n : {2, 3}) {
        const auto h = bracket_re_xin_G(n, g);
        CHECK(h.parity == Parity::sin);
        const auto f = lambda_invert_bracket(n, h);
        CHECK(f.parity == Parity::cos);
        CHECK(profile_norm(lambda_apply(f) - h) < 1e-10 * profile_norm(h));
    }
}

TEST_CASE("mode-1 right-hand sides must be orthogonal to the kernel")
{
    const auto g = RadialGrid::uniform(512, 20.0);
    const auto bad = sample(g, 1, Parity::cos, [](double r) { return gaussian_G_prime(r); });
    CHECK_THROWS_AS(solve_mode(1, bad), OrthogonalityViolated);
}

TEST_CASE("quotients that are not polynomially bounded are rejected")
{
    const auto g = RadialGrid::uniform(512, 20.0);
    const auto h = sample(g, 2, Parity::sin, [](double r) { return std::exp(-r); });
    CHECK_THROWS_AS(lambda_invert_bracket(2, h), UnboundedQuotient);
}
