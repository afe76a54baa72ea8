#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "bubbletower/bubbles.hpp"
#include "bubbletower/radial_grid.hpp"

namespace bubbletower {

/// f(s) = |s|^{p-1} s and its derivative p |s|^{p-1}; f(0) = f'(0) = 0.
inline double nonlinearity(double s, double p) {
    return std::pow(std::abs(s), p - 1.0) * s;
}
inline double nonlinearity_deriv(double s, double p) {
    return p * std::pow(std::abs(s), p - 1.0);
}

/// One constrained stage of the two-stage remainder solve.
struct StageSolution {
    RadialField phi;
    double norm_h1 = 0.0;
    std::vector<double> multipliers;      // scaled: mu_j * ||PZ_j||_H1
    std::vector<double> multipliers_raw;  // coefficients on the PZ_j force terms
    int iterations = 0;
    bool converged = false;
    double residual_h1 = 0.0;
};

/// Remainder Phi = phi1 + phi2 with its stage norms.
struct AuxiliarySolution {
    StageSolution stage1;
    StageSolution stage2;
    double norm_phi1 = 0.0;
    double norm_phi2 = 0.0;
};

struct BvpSolution {
    RadialField u;
    bool converged = false;
    int newton_iterations = 0;
    double residual_h1 = 0.0;
    double energy = 0.0;
    double nehari_residual = 0.0;
    double nodal_radius = 0.0;  // first interior zero; 0 when none
    int sign_changes = 0;
    double fitted_delta1 = 0.0;  // populated for single-crossing tower profiles
    double fitted_delta2 = 0.0;
};

struct NodalReport {
    int nodal_domain_count = 0;
    int sign_at_sphere1 = 0;  // at r = eps^{1/(N-4)}
    int sign_at_sphere2 = 0;  // at r = eps^{(3N-10)/((N-4)(N-6))}
    bool inner_negative = false;
};

struct Box2 {
    double d1_lo = 0.0, d1_hi = 0.0;
    double d2_lo = 0.0, d2_hi = 0.0;
};

struct MinimizeResult {
    double d1_min = 0.0, d2_min = 0.0;
    bool interior = false;
    std::vector<double> multipliers;  // scaled assembled-equation multipliers at the minimizer
    double reduced_value = 0.0;
    long evaluations = 0;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iterations = 200;
    int max_backtracks = 20;
    /// Stage solves iterate the contraction map (linear operator frozen at
    /// the background) before polishing with full Newton steps.  The frozen
    /// iteration cannot leave the small-remainder branch: if it fails to
    /// contract, the solve reports non-convergence instead of wandering to a
    /// distant solution of the same constrained equation.
    bool contraction_first = false;
};

/// Grid resolving an inner scale delta (innermost node at delta/100).
GridPtr solver_grid(int dim, double radius, double delta_min,
                    int nodes_per_decade = 24, int uniform_nodes = 96);

/// Discrete realizations of the projected bubble and the projected scale
/// kernel: the inverse Laplacian applied to their closed-form sources.  The
/// stage equations below use these instead of nodal interpolants so that the
/// ansatz satisfies its defining equation exactly at the discrete level and
/// the solved remainders carry no first-order interpolation defect.
RadialField discrete_projected_bubble(const GridPtr& grid, const Bubble& b);
RadialField discrete_projected_kernel(const GridPtr& grid, const Bubble& b);

/// Damped Newton on the weak radial equation
///   K(W + phi) - load[f(W+phi) + eps (W+phi)] = sum_j lambda_j K z_j,
///   <phi, z_j>_H1 = 0,
/// through a bordered tridiagonal system with explicit multipliers.
/// `f` / `fp` default to the critical nonlinearity; `homogeneous` subtracts
/// the background residual so that linearized self-tests have the exact
/// solution phi = 0, lambda = 0.
StageSolution constrained_newton(const RadialField& background, double eps,
                                 const std::vector<RadialField>& zbasis,
                                 const RadialField& phi_start, const SolveOptions& opt,
                                 const std::function<double(double, double)>& f = {},
                                 const std::function<double(double, double)>& fp = {},
                                 bool homogeneous = false);

/// First remainder stage: background PU_{delta1}, one orthogonality constraint.
StageSolution solve_stage1(double eps, double d1, const GridPtr& grid, const BallDomain& dom,
                           const SolveOptions& opt = {});

/// Second stage: background V + phi1, constraints against PZ1 and PZ2.  The
/// returned multipliers are those of the assembled full equation.
StageSolution solve_stage2(double eps, double d1, double d2, const StageSolution& stage1,
                           const GridPtr& grid, const BallDomain& dom,
                           const SolveOptions& opt = {});

AuxiliarySolution solve_auxiliary(double eps, double d1, double d2, const GridPtr& grid,
                                  const BallDomain& dom, const SolveOptions& opt = {});

struct ReducedResult {
    double value = 0.0;
    AuxiliarySolution aux;
    RadialField assembled;  // V + phi1 + phi2
};

/// J_eps of the assembled field V + phi1 + phi2.
ReducedResult reduced_j(double eps, double d1, double d2, const GridPtr& grid,
                        const BallDomain& dom, const SolveOptions& opt = {});

/// Derivative-free coordinate minimization (golden section per axis), usable
/// on any objective; the reduced-energy driver below builds on it.
std::pair<double, double> minimize_2d(const std::function<double(double, double)>& f,
                                      const Box2& box, double rel_tol = 1e-10,
                                      int rounds = 6);

struct MinimizeOptions {
    int nodes_per_decade = 20;
    int uniform_nodes = 80;
    double solve_tol = 1e-11;
    int golden_rounds = 3;
    double golden_rel_tol = 1e-4;
};

/// Minimizes the reduced energy over the (d1, d2) box, then refines each
/// coordinate by driving the corresponding assembled multiplier to zero
/// (at a critical point the assembled field solves the full problem, so the
/// multipliers vanish).  All evaluations share one grid so that energy
/// differences are smooth in (d1, d2).
MinimizeResult minimize_reduced(double eps, const Box2& box, int dim, double radius,
                                const MinimizeOptions& opt = {});

/// Damped Newton for the full radial problem from the given initial field.
BvpSolution solve_bvp(double eps, const RadialField& init, const SolveOptions& opt = {});

/// Sign pattern of a converged solution: nodal domain count from the radial
/// profile, signs on the two reference spheres, sign at the center.
NodalReport nodal_analysis(const BvpSolution& sol, double eps);

/// | ||u||^2 - |u|_{p+1}^{p+1} - eps |u|_2^2 | / ||u||^2, evaluated with the
/// same element quadrature the solver uses, so solutions sit on the manifold
/// to solver tolerance.
double nehari_residual(const RadialField& u, double eps);

/// J_eps(u) < 3 J_eps(u_positive), the nodal-domain-count energy gate.
bool nehari_energy_bound(const RadialField& u, double eps, const RadialField& u_positive);

/// Concentration parameters recovered from a sign-changing tower profile:
/// inner scale from the center value, outer scale by least squares on the
/// positive lobe, then a joint relative-residual refinement.
std::pair<double, double> fit_concentration(const RadialField& u);
std::pair<double, double> fit_concentration(const BvpSolution& sol);

}  // namespace bubbletower
