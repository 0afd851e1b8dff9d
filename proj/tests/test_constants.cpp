#include "doctest.h"

#include <cmath>

#include "vcrystal/constants.hpp"

using namespace vcrystal;

TEST_CASE("recursive S_nk agrees with the direct root-of-unity sum")
{
    for (int N : {2, 3, 5, 8, 13, 20}) {
        const auto t = snk_recursive(N, 8);
        for (int n = 0; n <= 8; ++n)
            for (int k = 0; k <= n; ++k) {
                const auto b = snk_bruteforce(N, n, k);
                CHECK(std::abs(b.imag()) < 1e-9 * std::max(1.0, std::abs(b.real())));
                CHECK(t(n, k) == doctest::Approx(b.real()).epsilon(1e-10).scale(1.0));
            }
    }
}

TEST_CASE("low-order closed forms")
{
    for (int N = 2; N <= 12; ++N) {
        const auto& t = snk_table(N, 3);
        CHECK(t(0, 0) == N - 1.0);
        CHECK(t(1, 1) == (N - 1.0) / 2.0);
        CHECK(t(2, 1) == (1.0 - N * N) / 12.0);
        CHECK(t(2, 2) == -(N - 1.0) * (N - 5.0) / 12.0);
    }
    CHECK(snk_table(5, 4)(2, 2) == 0.0);
    CHECK(snk_table(7, 3)(1, 1) == 3.0);
}

TEST_CASE("Pascal relation")
{
    const auto t = snk_recursive(9, 8);
    for (int n = 1; n <= 8; ++n)
        for (int k = 1; k <= n; ++k)
            CHECK(t(n, k) == doctest::Approx(t(n - 1, k - 1) + t(n, k - 1)).epsilon(1e-12));
}

TEST_CASE("binomials and c_nk")
{
    CHECK(binomial(8, 3) == 56.0);
    CHECK(binomial(5, 0) == 1.0);
    CHECK(cnk(0.7, 0, 3) == 1.0);
    CHECK(cnk(0.7, 0, 4) == -1.0);
    CHECK(cnk(0.5, 2, 1) == doctest::Approx(2.0 * 0.25 / (4.0 * M_PI)));
}
