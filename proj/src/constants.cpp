#include "vcrystal/constants.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "vcrystal/errors.hpp"

namespace vcrystal {

SnkTable::SnkTable(int n_vortices, int max_order, std::vector<double> values)
    : n_(n_vortices), max_order_(max_order), values_(std::move(values))
{
}

double SnkTable::operator()(int n, int k) const
{
    if (n < 0 || k < 0 || k > n || n > max_order_)
        throw UsageError("SnkTable index out of range");
    return values_[index(n, k)];
}

double binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    double b = 1.0;
    for (int i = 1; i <= k; ++i)
        b = b * (n - k + i) / i;
    return b;
}

double cnk(double d, int n, int k)
{
    if (n < 0 || k < 0)
        throw UsageError("cnk: negative index");
    if (n == 0)
        return (k % 2 == 1) ? 1.0 : -1.0;
    const double sign = ((n + k - 1) % 2 == 0) ? 1.0 : -1.0;
    return binomial(n, k) * sign * std::pow(d, n) / (2.0 * std::numbers::pi * n);
}

CnkTable::CnkTable(double distance, int max_order) : d_(distance), max_order_(max_order)
{
    values_.assign((max_order + 1) * (max_order + 1), 0.0);
    for (int n = 0; n <= max_order; ++n)
        for (int k = 0; k <= max_order; ++k)
            values_[n * (max_order + 1) + k] = cnk(distance, n, k);
}

double CnkTable::operator()(int n, int k) const
{
    if (n < 0 || k < 0 || n > max_order_ || k > max_order_)
        throw UsageError("CnkTable index out of range");
    return values_[n * (max_order_ + 1) + k];
}

std::complex<double> snk_bruteforce(int n_vortices, int n, int k)
{
    std::complex<double> s = 0.0;
    for (int l = 1; l < n_vortices; ++l) {
        const auto q = std::polar(1.0, 2.0 * std::numbers::pi * l / n_vortices);
        s += std::pow(q, k) / std::pow(q - 1.0, n);
    }
    return s;
}

namespace {

// S_{n,0} = -(p'/p)^{(n-1)}(1)/(n-1)!, p(z) = (1-z^N)/(1-z).
// With p(1+h) = sum_j a_j h^j, a_j = C(N, j+1), and log p(1+h) = log N + sum l_n h^n,
// S_{n,0} = -n l_n.
std::vector<double> s_n0(int N, int max_order)
{
    std::vector<double> s(max_order + 1, 0.0);
    s[0] = N - 1.0;
    if (max_order >= 1)
        s[1] = -(N - 1.0) / 2.0;
    if (max_order >= 2)
        s[2] = -(N - 1.0) * (N - 5.0) / 12.0;
    if (max_order < 3)
        return s;

    std::vector<double> a(max_order + 1, 0.0);
    for (int j = 0; j <= max_order; ++j)
        a[j] = binomial(N, j + 1) / N;
    // n l_n = n a_n - sum_{k=1}^{n-1} k l_k a_{n-k}
    std::vector<double> l(max_order + 1, 0.0);
    for (int n = 1; n <= max_order; ++n) {
        double acc = n * a[n];
        for (int k = 1; k < n; ++k)
            acc -= k * l[k] * a[n - k];
        l[n] = acc / n;
    }
    for (int n = 3; n <= max_order; ++n)
        s[n] = -n * l[n];
    return s;
}

} // namespace

SnkTable snk_recursive(int n_vortices, int max_order)
{
    if (n_vortices < 2)
        throw UsageError("snk_recursive: N must be >= 2");
    if (max_order < 0)
        throw UsageError("snk_recursive: max_order must be >= 0, got " + std::to_string(max_order));
    const auto s0 = s_n0(n_vortices, max_order);
    std::vector<double> v((max_order + 1) * (max_order + 2) / 2, 0.0);
    auto at = [&](int n, int k) -> double& { return v[n * (n + 1) / 2 + k]; };
    for (int n = 0; n <= max_order; ++n)
        at(n, 0) = s0[n];
    const double N = n_vortices;
    for (int n = 1; n <= max_order; ++n) {
        for (int k = 1; k <= n; ++k)
            at(n, k) = at(n - 1, k - 1) + at(n, k - 1);
        // pin the closed forms so that they hold bit for bit
        if (n == 1) {
            at(1, 1) = (N - 1.0) / 2.0;
        } else if (n == 2) {
            at(2, 0) = at(2, 2) = -(N - 1.0) * (N - 5.0) / 12.0;
            at(2, 1) = (1.0 - N * N) / 12.0;
        }
    }
    return SnkTable(n_vortices, max_order, std::move(v));
}

const SnkTable& snk_table(int n_vortices, int max_order)
{
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<SnkTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n_vortices, max_order}];
    if (!slot)
        slot = std::make_unique<SnkTable>(snk_recursive(n_vortices, max_order));
    return *slot;
}

} // namespace vcrystal
