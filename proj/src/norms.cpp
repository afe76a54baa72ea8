#include "bubbletower/norms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bubbletower/quadrature.hpp"

namespace bubbletower {

double unit_ball_volume(int dim) {
    return std::exp(0.5 * dim * std::log(std::numbers::pi) - std::lgamma(0.5 * dim + 1.0));
}

double sphere_measure(int dim) { return dim * unit_ball_volume(dim); }

namespace fem {

// 7-point Gauss-Legendre on [0,1].
const double kQuadNode[kQuadPoints] = {
    0.025446043828620812, 0.129234407200302780, 0.297077424311301417, 0.5,
    0.702922575688698583, 0.870765592799697220, 0.974553956171379188};
const double kQuadWeight[kQuadPoints] = {
    0.064742483084434846, 0.139852695744638334, 0.190915025252559472,
    0.208979591836734694, 0.190915025252559472, 0.139852695744638334,
    0.064742483084434846};

namespace {

// Coefficients of (a + t h)^{N-1} = sum_k c_k t^k, all terms nonnegative.
void power_coeffs(int nm1, double a, double h, double* c) {
    double ap[16];
    ap[0] = 1.0;
    for (int j = 1; j <= nm1; ++j) ap[j] = ap[j - 1] * a;
    double binom = 1.0;
    double hpow = 1.0;
    for (int k = 0; k <= nm1; ++k) {
        c[k] = binom * ap[nm1 - k] * hpow;  // C(N-1,k) a^{N-1-k} h^k
        binom = binom * (nm1 - k) / (k + 1.0);
        hpow *= h;
    }
}

}  // namespace

ElementMass element_mass(int dim, double a, double b) {
    const int nm1 = dim - 1;
    const double h = b - a;
    double c[16];
    power_coeffs(nm1, a, h, c);
    ElementMass m;
    for (int k = 0; k <= nm1; ++k) {
        const double k1 = k + 1.0, k2 = k + 2.0, k3 = k + 3.0;
        m.ll += c[k] * 2.0 / (k1 * k2 * k3);
        m.lr += c[k] / (k2 * k3);
        m.rr += c[k] / k3;
    }
    const double w = sphere_measure(dim) * h;
    m.ll *= w;
    m.lr *= w;
    m.rr *= w;
    return m;
}

double element_stiffness_weight(int dim, double a, double b) {
    // N omega int_a^b r^{N-1} dr = omega (b^N - a^N), written as a stable product
    const double h = b - a;
    double sum = 0.0;
    double bp = 1.0;
    for (int j = 0; j < dim; ++j) {
        sum += std::pow(a, dim - 1 - j) * bp;
        bp *= b;
    }
    return unit_ball_volume(dim) * h * sum;
}

}  // namespace fem

double norm_lq(const std::function<double(double)>& f, double q, int dim,
               double lo, double hi, const std::vector<double>& breakpoints,
               double rel_tol) {
    if (!(q >= 1.0)) throw std::invalid_argument("norm_lq: q must be >= 1");
    auto integrand = [&f, q, dim](double r) {
        return std::pow(std::abs(f(r)), q) * std::pow(r, dim - 1);
    };
    QuadratureResult res = integrate_radial(integrand, lo, hi, breakpoints, rel_tol);
    return std::pow(sphere_measure(dim) * res.value, 1.0 / q);
}

double norm_lq(const RadialField& u, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("norm_lq: q must be >= 1");
    const auto& x = u.grid->nodes;
    const int dim = u.grid->dim;
    double total = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        double acc = 0.0;
        for (int g = 0; g < fem::kQuadPoints; ++g) {
            const double t = fem::kQuadNode[g];
            const double val = u.values[i] * (1.0 - t) + u.values[i + 1] * t;
            acc += fem::kQuadWeight[g] * std::pow(std::abs(val), q) *
                   std::pow(x[i] + t * h, dim - 1);
        }
        total += acc * h;
    }
    return std::pow(sphere_measure(dim) * total, 1.0 / q);
}

double inner_h1(const RadialField& u, const RadialField& v) {
    if (u.grid != v.grid) throw std::invalid_argument("inner_h1: fields on different grids");
    if (!u.dirichlet || !v.dirichlet)
        throw std::invalid_argument("inner_h1: both fields must be dirichlet");
    const auto& x = u.grid->nodes;
    const int dim = u.grid->dim;
    double total = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        const double du = (u.values[i + 1] - u.values[i]) / h;
        const double dv = (v.values[i + 1] - v.values[i]) / h;
        total += du * dv * fem::element_stiffness_weight(dim, x[i], x[i + 1]);
    }
    return total;
}

double norm_h1(const RadialField& u) { return std::sqrt(inner_h1(u, u)); }

double inner_l2(const RadialField& u, const RadialField& v) {
    if (u.grid != v.grid) throw std::invalid_argument("inner_l2: fields on different grids");
    const auto& x = u.grid->nodes;
    const int dim = u.grid->dim;
    double total = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        const fem::ElementMass m = fem::element_mass(dim, x[i], x[i + 1]);
        total += m.ll * u.values[i] * v.values[i] + m.rr * u.values[i + 1] * v.values[i + 1] +
                 m.lr * (u.values[i] * v.values[i + 1] + u.values[i + 1] * v.values[i]);
    }
    return total;
}

}  // namespace bubbletower
