#pragma once

#include <stdexcept>

namespace bubbletower {

/// Exact fraction, used for the scaling exponents so slope assertions do not
/// inherit floating-point rounding from intermediate arithmetic.
struct Rational {
    long long num = 0;
    long long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Everything dimension-dependent that the energy expansion and the scaling
/// tests need, with the a_i coefficients computed along two independent
/// routes (Beta closed form and adaptive quadrature).
struct DimensionalConstants {
    int dim = 0;
    double p = 0.0;        // critical exponent (N+2)/(N-2)
    double alpha_n = 0.0;  // [N(N-2)]^{(N-2)/4}
    double omega_n = 0.0;  // unit-ball volume
    double surface = 0.0;  // N * omega_n, measure of the unit sphere
    double gamma_n = 0.0;  // 1 / (N(N-2) omega_n)
    double sobolev = 0.0;  // best Sobolev constant S
    double sobolev_pow = 0.0;  // S^{N/2}

    double a1 = 0.0, a2 = 0.0, a3 = 0.0;                 // Beta closed forms
    double a1_quad = 0.0, a2_quad = 0.0, a3_quad = 0.0;  // quadrature route
    double a1_discrepancy = 0.0, a2_discrepancy = 0.0, a3_discrepancy = 0.0;

    Rational theta1, theta2;  // (N-2)/(N-4), (N-2)^2/((N-4)(N-6))
    Rational alpha1, alpha2;  // 1/(N-4), (3N-10)/((N-4)(N-6))
};

/// 1/2 * B((a+1)/2, m-(a+1)/2), the closed form of
/// \int_0^infty r^a (1+r^2)^{-m} dr.  Oracle for every radial power integral.
/// Throws divergence_error-compatible std::domain_error when m-(a+1)/2 <= 0.
double beta_oracle(double a_exp, double m);

/// Populates every field; requires N >= 7 (theta2 is undefined at N = 6).
DimensionalConstants compute_constants(int dim);

}  // namespace bubbletower
