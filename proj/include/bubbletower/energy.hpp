#pragma once

#include <functional>

#include "bubbletower/bubbles.hpp"
#include "bubbletower/constants.hpp"
#include "bubbletower/radial_grid.hpp"

namespace bubbletower {

/// Direct tower energy against its two-term asymptotic model.
struct ExpansionReport {
    double leading = 0.0;   // (2/N) S^{N/2}
    double g1_term = 0.0;   // eps^{theta1} G1(d1)
    double g2_term = 0.0;   // eps^{theta2} G2(d1, d2)
    double direct = 0.0;    // quadrature value of J_eps(V)
    double residual_after_leading = 0.0;
    double residual_after_g1 = 0.0;
    double residual_after_g2 = 0.0;
};

enum class ErrorTag { R1, R2 };

struct ErrorNormReport {
    double eps = 0.0;
    double norm_projected = 0.0;
    double norm_unprojected = 0.0;
    ErrorTag which = ErrorTag::R1;
};

struct SingleBubbleTerms {
    double energy_excess = 0.0;
    double mass_term = 0.0;
    double predicted_excess = 0.0;  // a1 tau(0) delta^{N-2}
    double predicted_mass = 0.0;    // a2 eps delta^2
};

struct InteractionResult {
    double value = 0.0;         // int U_{d1}^p U_{d2}
    double mass_overlap = 0.0;  // int PU_{d1} PU_{d2}
};

/// Energy functional 1/2 ||u||_H1^2 - 1/(p+1) |u|_{p+1}^{p+1} - eps/2 |u|_2^2
/// on a mesh field.
double functional_j(const RadialField& u, double eps);

/// J_eps of the closed-form tower, by adaptive quadrature only (no mesh).
/// The gradient term uses the weak identity int |grad V|^2 = int (U1^p - U2^p) V.
/// delta2 = 0 (d2 = 0) degenerates to the single projected bubble.
double energy_direct(const TowerConfig& cfg, double rel_tol = 1e-8);

/// J_eps(V(d2_alt)) - J_eps(V(d2)) as one quadrature of the pointwise
/// integrand difference, so the eps^{theta2}-scale signal survives in double
/// precision.  Orientation matches G2(d2_alt) - G2(d2).
double energy_diff_d2(const TowerConfig& cfg, double d2_alt, double rel_tol = 1e-10);

double g1_coefficient(double d1, const DimensionalConstants& c, const BallDomain& dom);
double g2_coefficient(double d1, double d2, const DimensionalConstants& c,
                      const BallDomain& dom, double robin_factor = 1.0);

ExpansionReport expansion_terms(const TowerConfig& cfg, const DimensionalConstants& c,
                                double robin_factor = 1.0, double rel_tol = 1e-8);

/// Closed-form minimizer of G1, asserted against a 1D numerical minimization.
double critical_d1(const DimensionalConstants& c, const BallDomain& dom);

struct CriticalD2 {
    double minimizer = 0.0;    // numerical, authoritative
    double closed_form = 0.0;  // first-order-condition candidate, reported alongside
};
CriticalD2 critical_d2(const DimensionalConstants& c, const BallDomain& dom, double d1,
                       double robin_factor = 1.0);

SingleBubbleTerms single_bubble_terms(double delta, double eps, const DimensionalConstants& c,
                                      const BallDomain& dom, double rel_tol = 1e-10);

InteractionResult interaction_integral(double delta1, double delta2, const BallDomain& dom,
                                       double rel_tol = 1e-10);

/// H^1 norms of the first-stage error term, unprojected and with the PZ1
/// component removed.  Computed through the inverse Laplacian on the grid.
ErrorNormReport error_norm_r1(double eps, double d1, const DimensionalConstants& c,
                              const BallDomain& dom, const GridPtr& grid);

/// Same for the second-stage error term (projection removes PZ1 and PZ2).
ErrorNormReport error_norm_r2(double eps, double d1, double d2, const DimensionalConstants& c,
                              const BallDomain& dom, const GridPtr& grid);

/// Mesh-free L^{2N/(N+2)} norm of the second-stage error source; an upper
/// bound surrogate for the H^1 norm through the adjoint estimate.
double error_norm_r2_surrogate(double eps, double d1, double d2, const BallDomain& dom,
                               double rel_tol = 1e-9);

/// Golden-section minimizer on [a, b]; used for the critical parameters and
/// exposed for reuse/self-tests.
double golden_minimize(const std::function<double(double)>& f, double a, double b,
                       double tol);

}  // namespace bubbletower
