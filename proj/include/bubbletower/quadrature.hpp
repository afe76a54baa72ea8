#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace bubbletower {

/// Outcome of one adaptive integration.
struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    long evaluations = 0;
    bool converged = false;
};

/// Thrown when the partial sums keep growing toward an endpoint, i.e. the
/// integral is divergent rather than merely slow to converge.
struct divergence_error : std::runtime_error {
    explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [lo, hi].
/// hi may be +infinity; the tail is handled by the substitution r = lo + t/(1-t).
/// Breakpoints inside (lo, hi) seed the initial interval list so piecewise
/// integrands with scale changes are split where they change character.
QuadratureResult integrate_radial(const std::function<double(double)>& f,
                                  double lo, double hi,
                                  const std::vector<double>& breakpoints = {},
                                  double rel_tol = 1e-10,
                                  int max_intervals = 6000);

}  // namespace bubbletower
