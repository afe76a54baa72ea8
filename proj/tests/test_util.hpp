#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace test_util {

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Fourth-order central approximation of the radial Laplacian u'' + (N-1)/r u'.
template <class F>
double radial_laplacian_fd(const F& u, double r, int dim, double h) {
    const double um2 = u(r - 2 * h), um1 = u(r - h), u0 = u(r), up1 = u(r + h),
                 up2 = u(r + 2 * h);
    const double d2 = (-um2 + 16 * um1 - 30 * u0 + 16 * up1 - up2) / (12 * h * h);
    const double d1 = (um2 - 8 * um1 + 8 * up1 - up2) / (12 * h);
    return d2 + (dim - 1) / r * d1;
}

}  // namespace test_util
