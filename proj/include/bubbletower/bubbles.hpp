#pragma once

#include <cmath>
#include <stdexcept>

#include "bubbletower/constants.hpp"

namespace bubbletower {

/// Aubin-Talenti instanton at scale delta, centered at the origin.
struct Bubble {
    int dim = 7;
    double delta = 1.0;
};

/// Ball of radius R centered at the origin.  The Green function's regular
/// part from the center is the constant R^{2-N}, so the Robin function at the
/// center and every harmonic correction below are closed forms.
struct BallDomain {
    int dim = 7;
    double radius = 1.0;

    double robin_at_center() const;        // tau(0) = R^{2-N}
    double green_regular_at_center() const { return robin_at_center(); }
};

/// (N, R, eps, d1, d2) with the derived concentration scales
/// delta_j = d_j eps^{alpha_j}.  eta is the box parameter bounding the d_j;
/// it defaults to an effectively unconstrained value because the critical d2
/// on the unit ball is numerically tiny.
struct TowerConfig {
    int dim = 7;
    double radius = 1.0;
    double eps = 0.0;
    double d1 = 1.0;
    double d2 = 1.0;
    double eta = 1e-12;

    double alpha1() const { return 1.0 / (dim - 4.0); }
    double alpha2() const { return (3.0 * dim - 10.0) / ((dim - 4.0) * (dim - 6.0)); }
    double theta1() const { return (dim - 2.0) / (dim - 4.0); }
    double theta2() const { return (dim - 2.0) * (dim - 2.0) / ((dim - 4.0) * (dim - 6.0)); }
    double delta1() const { return d1 * std::pow(eps, alpha1()); }
    double delta2() const { return d2 * std::pow(eps, alpha2()); }
    BallDomain domain() const { return {dim, radius}; }

    void validate() const;  // eta box and basic positivity
    /// Direct-delta mode: specify the concentration scales outright.
    static TowerConfig from_deltas(int dim, double radius, double eps,
                                   double delta1, double delta2);
};

double alpha_constant(int dim);  // [N(N-2)]^{(N-2)/4}

/// U_delta(r) = alpha_N delta^{(N-2)/2} / (delta^2 + r^2)^{(N-2)/2}
double bubble_value(double r, const Bubble& b);

/// d/d(delta) of the bubble: the kernel of the linearized operator.
double bubble_dderiv(double r, const Bubble& b);

/// The constant harmonic function matching the bubble's boundary trace on |x|=R.
double harmonic_correction(const Bubble& b, const BallDomain& dom);

/// PU_delta = U_delta - harmonic correction; vanishes at r = R.
double projected_bubble(double r, const Bubble& b, const BallDomain& dom);

/// PZ = Z - Z(R); the exact correction since Z's boundary trace is constant.
double projected_z(double r, const Bubble& b, const BallDomain& dom);

/// V = PU_{delta1} - PU_{delta2}; requires delta2 < delta1.
double tower_value(double r, const TowerConfig& cfg);

}  // namespace bubbletower
