#pragma once

#include <complex>
#include <vector>

namespace vcrystal {

// S_{n,k} = sum_{l=1}^{N-1} Q_l^k/(Q_l-1)^n, Q_l = exp(2 pi i l/N), for 0 <= k <= n <= max_order.
class SnkTable {
public:
    SnkTable(int n_vortices, int max_order, std::vector<double> values);

    int n_vortices() const { return n_; }
    int max_order() const { return max_order_; }
    double operator()(int n, int k) const;

private:
    static int index(int n, int k) { return n * (n + 1) / 2 + k; }
    int n_;
    int max_order_;
    std::vector<double> values_;
};

class CnkTable {
public:
    CnkTable(double distance, int max_order);
    double distance() const { return d_; }
    double operator()(int n, int k) const;

private:
    double d_;
    int max_order_;
    std::vector<double> values_;
};

SnkTable snk_recursive(int n_vortices, int max_order);

// Cached per (N, max_order).
const SnkTable& snk_table(int n_vortices, int max_order);

std::complex<double> snk_bruteforce(int n_vortices, int n, int k);

double cnk(double d, int n, int k);

double binomial(int n, int k);

} // namespace vcrystal
