#include "bubbletower/bubbles.hpp"

#include <cmath>

namespace bubbletower {

double alpha_constant(int dim) {
    const double n = dim;
    return std::pow(n * (n - 2.0), 0.25 * (n - 2.0));
}

double BallDomain::robin_at_center() const {
    return std::pow(radius, 2.0 - dim);
}

void TowerConfig::validate() const {
    if (dim < 7) throw std::invalid_argument("TowerConfig: dimension must be >= 7");
    if (!(radius > 0.0)) throw std::invalid_argument("TowerConfig: radius must be > 0");
    if (!(eps >= 0.0)) throw std::invalid_argument("TowerConfig: eps must be >= 0");
    if (!(d1 > eta && d1 < 1.0 / eta) || !(d2 >= 0.0 && d2 < 1.0 / eta) ||
        (d2 > 0.0 && d2 <= eta))
        throw std::invalid_argument("TowerConfig: d_j outside the (eta, 1/eta) box");
}

TowerConfig TowerConfig::from_deltas(int dim, double radius, double eps,
                                     double delta1, double delta2) {
    TowerConfig cfg;
    cfg.dim = dim;
    cfg.radius = radius;
    cfg.eps = eps;
    if (!(eps > 0.0)) throw std::invalid_argument("from_deltas: eps must be > 0");
    cfg.d1 = delta1 * std::pow(eps, -cfg.alpha1());
    cfg.d2 = delta2 * std::pow(eps, -cfg.alpha2());
    cfg.validate();
    return cfg;
}

double bubble_value(double r, const Bubble& b) {
    const double e = 0.5 * (b.dim - 2.0);
    return alpha_constant(b.dim) * std::pow(b.delta, e) / std::pow(b.delta * b.delta + r * r, e);
}

double bubble_dderiv(double r, const Bubble& b) {
    const double n = b.dim;
    return alpha_constant(b.dim) * 0.5 * (n - 2.0) * std::pow(b.delta, 0.5 * (n - 4.0)) *
           (r * r - b.delta * b.delta) / std::pow(b.delta * b.delta + r * r, 0.5 * n);
}

double harmonic_correction(const Bubble& b, const BallDomain& dom) {
    return bubble_value(dom.radius, b);
}

double projected_bubble(double r, const Bubble& b, const BallDomain& dom) {
    return bubble_value(r, b) - harmonic_correction(b, dom);
}

double projected_z(double r, const Bubble& b, const BallDomain& dom) {
    return bubble_dderiv(r, b) - bubble_dderiv(dom.radius, b);
}

double tower_value(double r, const TowerConfig& cfg) {
    cfg.validate();
    const double del1 = cfg.delta1();
    const double del2 = cfg.delta2();
    if (!(del2 < del1))
        throw std::invalid_argument("tower_value: configuration invalid, needs delta2 < delta1");
    const BallDomain dom = cfg.domain();
    return projected_bubble(r, {cfg.dim, del1}, dom) - projected_bubble(r, {cfg.dim, del2}, dom);
}

}  // namespace bubbletower
