#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace bubbletower {

/// Graded 1D mesh on [0, R].  Nodes are strictly increasing with nodes[0] = 0
/// and nodes.back() = R.  Immutable after construction.
struct RadialGrid {
    enum class Grading { Uniform, GeometricInner };

    int dim = 0;
    double radius = 0.0;
    std::vector<double> nodes;
    Grading grading = Grading::Uniform;

    size_t size() const { return nodes.size(); }
    /// Index i with nodes[i] <= r < nodes[i+1] (clamped to the last element).
    size_t element_of(double r) const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Geometric nodes from inner_scale up to the first uniform spacing, uniform
/// beyond; node 0 always present.  Inner bubbles live many decades below R,
/// so the geometric part carries nodes_per_decade points per decade.
GridPtr build_grid(int dim, double radius, double inner_scale,
                   int nodes_per_decade, int uniform_nodes);

/// Uniform-only mode: intervals of width R/n.
GridPtr build_uniform_grid(int dim, double radius, int intervals);

/// Piecewise-linear radial function on a grid.  All norms refer to the
/// continuous interpolant r -> u(r).
struct RadialField {
    GridPtr grid;
    std::vector<double> values;
    bool dirichlet = true;

    RadialField() = default;
    RadialField(GridPtr g, bool dir = true);

    double operator()(double r) const;  // piecewise-linear evaluation
    size_t size() const { return values.size(); }
    void enforce_dirichlet() { if (dirichlet && !values.empty()) values.back() = 0.0; }
};

/// Nodal interpolant of a radial callable.
RadialField interpolate(const GridPtr& grid, const std::function<double(double)>& f,
                        bool dirichlet = true);

}  // namespace bubbletower
