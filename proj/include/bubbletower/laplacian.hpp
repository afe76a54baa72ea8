#pragma once

#include <functional>
#include <vector>

#include "bubbletower/radial_grid.hpp"

namespace bubbletower {

/// Solves -w'' - ((N-1)/r) w' = g on (0, R) with w'(0) = 0 (natural at the
/// origin through the r^{N-1} weight) and w(R) = 0, by P1 finite elements with
/// exact stiffness integration.  Realizes the adjoint i* of the critical
/// embedding on radial functions: inner_h1(w, v) = N omega int g v r^{N-1} dr
/// holds exactly for every discrete test field v.
RadialField inverse_laplacian(const std::function<double(double)>& g, const GridPtr& grid);
RadialField inverse_laplacian(const RadialField& g);

/// f minus its H^1-orthogonal projection onto span(basis).
RadialField project_orthogonal(const RadialField& f, const std::vector<RadialField>& basis,
                               double cond_threshold = 1e12);

}  // namespace bubbletower
