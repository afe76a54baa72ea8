#include "bubbletower/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bubbletower {

size_t RadialGrid::element_of(double r) const {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
    size_t i = static_cast<size_t>(it - nodes.begin());
    if (i == 0) return 0;
    if (i >= nodes.size()) return nodes.size() - 2;
    return i - 1;
}

namespace {

void validate(const RadialGrid& g, size_t min_nodes) {
    if (g.nodes.size() < min_nodes) throw std::invalid_argument("grid: too few nodes");
    if (g.nodes.front() != 0.0) throw std::invalid_argument("grid: first node must be 0");
    if (g.nodes.back() != g.radius) throw std::invalid_argument("grid: last node must be R");
    for (size_t i = 0; i + 1 < g.nodes.size(); ++i)
        if (!(g.nodes[i] < g.nodes[i + 1]))
            throw std::invalid_argument("grid: nodes must be strictly increasing");
}

}  // namespace

GridPtr build_grid(int dim, double radius, double inner_scale,
                   int nodes_per_decade, int uniform_nodes) {
    if (dim < 7) throw std::invalid_argument("build_grid: dimension must be >= 7");
    if (!(radius > 0.0)) throw std::invalid_argument("build_grid: radius must be > 0");
    if (!(inner_scale > 0.0 && inner_scale < radius))
        throw std::invalid_argument("build_grid: need 0 < inner_scale < radius");
    if (nodes_per_decade < 4) throw std::invalid_argument("build_grid: nodes_per_decade >= 4");
    if (uniform_nodes < 8) throw std::invalid_argument("build_grid: uniform_nodes >= 8");

    auto g = std::make_shared<RadialGrid>();
    g->dim = dim;
    g->radius = radius;
    g->grading = RadialGrid::Grading::GeometricInner;

    const double h = radius / uniform_nodes;  // target spacing of the outer region
    const double growth = std::pow(10.0, 1.0 / nodes_per_decade);
    // switch to uniform where the geometric step r (growth - 1) reaches h, so
    // the local resolution h_loc / r never degrades on the way out
    const double rstar = std::min(h / (growth - 1.0), radius);

    g->nodes.push_back(0.0);
    if (inner_scale * std::sqrt(growth) < rstar) {
        double r = inner_scale;
        // stop at least half a geometric step early so the junction element
        // cannot degenerate
        while (r * std::sqrt(growth) < rstar) {
            g->nodes.push_back(r);
            r *= growth;
        }
    }
    const double rlast = g->nodes.back();
    const int m = std::max(1, static_cast<int>(std::ceil((radius - rlast) / h - 1e-9)));
    for (int k = 1; k <= m; ++k) g->nodes.push_back(rlast + (radius - rlast) * k / m);
    g->nodes.back() = radius;

    validate(*g, 16);
    return g;
}

GridPtr build_uniform_grid(int dim, double radius, int intervals) {
    if (dim < 7) throw std::invalid_argument("build_uniform_grid: dimension must be >= 7");
    if (!(radius > 0.0)) throw std::invalid_argument("build_uniform_grid: radius must be > 0");
    if (intervals < 8) throw std::invalid_argument("build_uniform_grid: intervals >= 8");
    auto g = std::make_shared<RadialGrid>();
    g->dim = dim;
    g->radius = radius;
    g->grading = RadialGrid::Grading::Uniform;
    g->nodes.resize(intervals + 1);
    for (int k = 0; k <= intervals; ++k) g->nodes[k] = radius * k / intervals;
    g->nodes.back() = radius;
    validate(*g, 9);
    return g;
}

RadialField::RadialField(GridPtr g, bool dir) : grid(std::move(g)), dirichlet(dir) {
    values.assign(grid->size(), 0.0);
}

double RadialField::operator()(double r) const {
    const auto& x = grid->nodes;
    if (r <= x.front()) return values.front();
    if (r >= x.back()) return dirichlet ? 0.0 : values.back();
    const size_t i = grid->element_of(r);
    const double t = (r - x[i]) / (x[i + 1] - x[i]);
    return values[i] * (1.0 - t) + values[i + 1] * t;
}

RadialField interpolate(const GridPtr& grid, const std::function<double(double)>& f,
                        bool dirichlet) {
    RadialField u(grid, dirichlet);
    for (size_t i = 0; i < grid->size(); ++i) u.values[i] = f(grid->nodes[i]);
    u.enforce_dirichlet();
    return u;
}

}  // namespace bubbletower
