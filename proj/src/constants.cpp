#include "bubbletower/constants.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bubbletower/quadrature.hpp"

namespace bubbletower {

namespace {

double half_beta(double x, double y) {
    return 0.5 * std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

}  // namespace

double beta_oracle(double a_exp, double m) {
    if (!(a_exp > -1.0)) throw std::domain_error("beta_oracle: need a_exp > -1");
    const double x = 0.5 * (a_exp + 1.0);
    const double y = m - x;
    if (!(y > 0.0)) throw std::domain_error("beta_oracle: divergent integral, m - (a+1)/2 <= 0");
    return half_beta(x, y);
}

DimensionalConstants compute_constants(int dim) {
    if (dim < 7) throw std::invalid_argument("compute_constants: dimension must be >= 7");
    const double n = dim;
    DimensionalConstants c;
    c.dim = dim;
    c.p = (n + 2.0) / (n - 2.0);

    const double log_nn2 = std::log(n * (n - 2.0));
    c.alpha_n = std::exp(0.25 * (n - 2.0) * log_nn2);
    const double log_pi = std::log(std::numbers::pi);
    c.omega_n = std::exp(0.5 * n * log_pi - std::lgamma(0.5 * n + 1.0));
    c.surface = n * c.omega_n;
    c.gamma_n = 1.0 / (n * (n - 2.0) * c.omega_n);

    // S = pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}; accumulate in log space.
    const double log_s = log_pi + std::log(n) + std::log(n - 2.0) +
                         (2.0 / n) * (std::lgamma(0.5 * n) - std::lgamma(n));
    c.sobolev = std::exp(log_s);
    c.sobolev_pow = std::exp(0.5 * n * log_s);

    // a1 = 1/2 alpha^{p+1} surface * 1/2 B(N/2, 1)
    // a2 = 1/2 alpha^2     surface * 1/2 B(N/2, (N-4)/2)
    // a3 =     alpha^{p+1} surface * 1/2 B(1, N/2)
    // alpha^{p+1} = (N(N-2))^{N/2} exactly.
    const double log_alpha_pp1 = 0.5 * n * log_nn2;
    const double log_alpha_sq = 0.5 * (n - 2.0) * log_nn2;
    const double log_surface = std::log(c.surface);
    c.a1 = std::exp(std::log(0.5) + log_alpha_pp1 + log_surface + std::log(half_beta(0.5 * n, 1.0)));
    c.a2 = std::exp(std::log(0.5) + log_alpha_sq + log_surface +
                    std::log(half_beta(0.5 * n, 0.5 * (n - 4.0))));
    c.a3 = std::exp(log_alpha_pp1 + log_surface + std::log(half_beta(1.0, 0.5 * n)));

    // Independent route: adaptive quadrature of the defining radial integrals.
    const double alpha_pp1 = std::exp(log_alpha_pp1);
    const double alpha_sq = std::exp(log_alpha_sq);
    const double inf = std::numeric_limits<double>::infinity();
    auto radint = [&](double a_pow, double m_pow) {
        auto f = [a_pow, m_pow](double r) {
            return std::pow(r, a_pow) * std::pow(1.0 + r * r, -m_pow);
        };
        return integrate_radial(f, 0.0, inf, {1.0}, 1e-12).value;
    };
    c.a1_quad = 0.5 * alpha_pp1 * c.surface * radint(n - 1.0, 0.5 * (n + 2.0));
    c.a2_quad = 0.5 * alpha_sq * c.surface * radint(n - 1.0, n - 2.0);
    c.a3_quad = alpha_pp1 * c.surface * radint(1.0, 0.5 * (n + 2.0));
    c.a1_discrepancy = std::abs(c.a1_quad - c.a1) / c.a1;
    c.a2_discrepancy = std::abs(c.a2_quad - c.a2) / c.a2;
    c.a3_discrepancy = std::abs(c.a3_quad - c.a3) / c.a3;

    const long long d = dim;
    c.theta1 = {d - 2, d - 4};
    c.theta2 = {(d - 2) * (d - 2), (d - 4) * (d - 6)};
    c.alpha1 = {1, d - 4};
    c.alpha2 = {3 * d - 10, (d - 4) * (d - 6)};
    return c;
}

}  // namespace bubbletower
