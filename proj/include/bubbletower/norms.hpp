#pragma once

#include <functional>
#include <vector>

#include "bubbletower/radial_grid.hpp"

namespace bubbletower {

double unit_ball_volume(int dim);
double sphere_measure(int dim);  // N * omega_N, the surface factor of radial integrals

/// (N omega_N int_lo^hi |f|^q r^{N-1} dr)^{1/q} by adaptive quadrature.
double norm_lq(const std::function<double(double)>& f, double q, int dim,
               double lo, double hi,
               const std::vector<double>& breakpoints = {},
               double rel_tol = 1e-10);

/// Same norm for a piecewise-linear field over its whole grid, evaluated with
/// a fixed per-element Gauss rule.
double norm_lq(const RadialField& u, double q);

/// H_0^1 inner product N omega_N int u' v' r^{N-1} dr with the piecewise-linear
/// derivative product integrated exactly against the weight.
double inner_h1(const RadialField& u, const RadialField& v);
double norm_h1(const RadialField& u);

/// N omega_N int u v r^{N-1} dr, exact for piecewise-linear fields.
double inner_l2(const RadialField& u, const RadialField& v);

namespace fem {

/// Exact element integrals against the weight r^{N-1} on [a, b]:
/// mass.ll = w int hat_a^2, mass.lr = w int hat_a hat_b, mass.rr = w int hat_b^2,
/// and stiffness_weight = w int r^{N-1} dr, with w = N omega_N.
/// Stable for a >> b-a (positive binomial sums, N integer).
struct ElementMass {
    double ll = 0.0, lr = 0.0, rr = 0.0;
};
ElementMass element_mass(int dim, double a, double b);
double element_stiffness_weight(int dim, double a, double b);

/// Fixed Gauss-Legendre rule on [0,1] used for per-element loads.  Seven
/// points integrate degree-13 polynomials exactly, which covers the weighted
/// linear mass terms for every supported dimension.
inline constexpr int kQuadPoints = 7;
extern const double kQuadNode[kQuadPoints];
extern const double kQuadWeight[kQuadPoints];

}  // namespace fem

}  // namespace bubbletower
