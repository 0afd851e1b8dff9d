#include "doctest.h"

#include <cmath>

#include "vcrystal/errors.hpp"
#include "vcrystal/pointvortex.hpp"

using namespace vcrystal;

TEST_CASE("crystal velocities are a rigid rotation")
{
    for (auto [N, g] : std::vector<std::pair<int, double>>{{2, 0.0}, {5, 1.0}, {6, -3.0}, {9, 2.5}}) {
        const CrystalConfig c(N, g, 1.3, 1e-3, 0.8);
        const auto s = crystal_state(c);
        const auto v = pv_velocity(s);
        const double a = derive_scales(c).omega_rot;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Vec2 w = a * perp(s.positions[i]);
            CHECK(norm(v[i] - w) < 1e-12);
        }
    }
}

TEST_CASE("one rotation returns to the start")
{
    const CrystalConfig c(4, 1.0, 1.0, 1e-3, 1.0);
    const double T = 2.0 * M_PI / derive_scales(c).omega_rot;
    const auto s = crystal_state(c);
    IntegratorStats st;
    const auto tr = pv_integrate(s, T / 8.0, T, 1e-12, {}, &st);
    CHECK(tr.t.size() == 9);
    CHECK(tr.t.back() == doctest::Approx(T));
    for (std::size_t i = 0; i < s.positions.size(); ++i)
        CHECK(norm(tr.positions.back()[i] - s.positions[i]) < 1e-9);
    CHECK(st.accepted > 0);
}

TEST_CASE("invariants along a perturbed trajectory")
{
    const CrystalConfig c(3, 0.0, 1.0, 1e-3, 1.0);
    auto s = crystal_state(c);
    s.positions.pop_back();
    s.circulations.pop_back();
    s.positions[0] += Vec2{0.05, -0.02};
    const auto tr = pv_integrate(s, 1.0, 20.0, 1e-11);
    const auto& a = tr.conserved.front();
    const auto& b = tr.conserved.back();
    CHECK(b.hamiltonian == doctest::Approx(a.hamiltonian).epsilon(1e-9));
    CHECK(b.angular_momentum == doctest::Approx(a.angular_momentum).epsilon(1e-9));
    CHECK(norm(b.linear_momentum - a.linear_momentum) < 1e-9);
}

TEST_CASE("collisions are reported")
{
    PVState s{{{0.0, 0.0}, {1e-9, 0.0}}, {1.0, 1.0}, 0.0};
    CHECK_THROWS_AS(pv_velocity(s), CollisionError);
}

TEST_CASE("periodic kernel is doubly periodic and matches the free plane nearby")
{
    const double L = 8.0;
    const BiotSavart per{L, 1e-9};
    auto vel = [&](Vec2 target) {
        PVState s{{{0.3, -0.2}, target}, {1.0, 0.0}, 0.0};
        return pv_velocity(s, per)[1];
    };
    const Vec2 p{1.1, 0.7};
    CHECK(norm(vel(p) - vel(p + Vec2{L, 0.0})) < 1e-12);
    CHECK(norm(vel(p) - vel(p + Vec2{0.0, -L})) < 1e-12);
    // close to the vortex the images only add an O(r/L^2) correction
    const Vec2 q{0.3 + 0.01, -0.2};
    const Vec2 free = pv_velocity(PVState{{{0.3, -0.2}, q}, {1.0, 0.0}, 0.0})[1];
    CHECK(norm(vel(q) - free) < 1e-3 * norm(free));
    // a lone vortex does not move itself
    PVState one{{{0.3, -0.2}}, {1.0}, 0.0};
    CHECK(norm(pv_velocity(one, per)[0]) < 1e-12);
}

TEST_CASE("stability chart cells")
{
    CHECK(pv_linear_stability(CrystalConfig(8, 0.0, 1.0, 1e-3, 1.0)).classification == Stability::unstable);
    CHECK(pv_linear_stability(CrystalConfig(6, 0.0, 1.0, 1e-3, 1.0)).classification == Stability::stable);
    CHECK(pv_linear_stability(CrystalConfig(7, 0.0, 1.0, 1e-3, 1.0)).classification == Stability::marginal);
    CHECK(pv_linear_stability(CrystalConfig(3, 0.0, 1.0, 1e-3, 1.0)).classification == Stability::stable);
    CHECK(pv_linear_stability(CrystalConfig(2, 3.0, 1.0, 1e-3, 1.0)).classification == Stability::unstable);
    CHECK(stability_theorem_predicts_stable(6, 0.0));
    CHECK_FALSE(stability_theorem_predicts_stable(8, 0.0));
    CHECK_FALSE(stability_theorem_predicts_stable(7, 0.0));
}
