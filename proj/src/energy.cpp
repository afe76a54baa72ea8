#include "bubbletower/energy.hpp"

#include <cmath>
#include <limits>

#include "bubbletower/laplacian.hpp"
#include "bubbletower/norms.hpp"
#include "bubbletower/quadrature.hpp"
#include "bubbletower/reduction.hpp"

namespace bubbletower {

namespace {

std::vector<double> tower_breakpoints(double delta1, double delta2, double radius) {
    std::vector<double> b;
    auto push = [&](double r) {
        if (r > 0.0 && r < radius) b.push_back(r);
    };
    if (delta2 > 0.0) {
        push(delta2);
        push(std::sqrt(delta1 * delta2));
    }
    push(delta1);
    push(std::sqrt(delta1));
    return b;
}

}  // namespace

double functional_j(const RadialField& u, double eps) {
    if (!u.dirichlet) throw std::invalid_argument("functional_j: field must be dirichlet");
    const double p = (u.grid->dim + 2.0) / (u.grid->dim - 2.0);
    const double lq = norm_lq(u, p + 1.0);
    return 0.5 * inner_h1(u, u) - std::pow(lq, p + 1.0) / (p + 1.0) -
           0.5 * eps * inner_l2(u, u);
}

double energy_direct(const TowerConfig& cfg, double rel_tol) {
    cfg.validate();
    const int n = cfg.dim;
    const double p = (n + 2.0) / (n - 2.0);
    const double del1 = cfg.delta1();
    const double del2 = cfg.d2 > 0.0 ? cfg.delta2() : 0.0;
    if (del2 > 0.0 && !(del2 < del1))
        throw std::invalid_argument("energy_direct: needs delta2 < delta1");
    const BallDomain dom = cfg.domain();
    const Bubble b1{n, del1};
    const double w = sphere_measure(n);
    const auto bps = tower_breakpoints(del1, del2, cfg.radius);

    auto V = [&](double r) {
        double v = projected_bubble(r, b1, dom);
        if (del2 > 0.0) v -= projected_bubble(r, {n, del2}, dom);
        return v;
    };
    auto source = [&](double r) {
        double s = std::pow(bubble_value(r, b1), p);
        if (del2 > 0.0) s -= std::pow(bubble_value(r, {n, del2}), p);
        return s;
    };
    auto rpow = [n](double r) { return std::pow(r, n - 1); };

    const double grad =
        w * integrate_radial([&](double r) { return source(r) * V(r) * rpow(r); }, 0.0,
                             cfg.radius, bps, rel_tol)
                .value;
    const double pot =
        w * integrate_radial(
                [&](double r) { return std::pow(std::abs(V(r)), p + 1.0) * rpow(r); }, 0.0,
                cfg.radius, bps, rel_tol)
                .value;
    const double mass =
        w * integrate_radial([&](double r) { const double v = V(r); return v * v * rpow(r); },
                             0.0, cfg.radius, bps, rel_tol)
                .value;
    return 0.5 * grad - pot / (p + 1.0) - 0.5 * cfg.eps * mass;
}

double energy_diff_d2(const TowerConfig& cfg, double d2_alt, double rel_tol) {
    cfg.validate();
    if (!(d2_alt > 0.0)) throw std::invalid_argument("energy_diff_d2: d2_alt must be > 0");
    if (d2_alt == cfg.d2) return 0.0;
    const int n = cfg.dim;
    const double p = (n + 2.0) / (n - 2.0);
    const double del1 = cfg.delta1();
    const double del2 = cfg.delta2();
    const double del2a = d2_alt * std::pow(cfg.eps, cfg.alpha2());
    if (!(del2 < del1) || !(del2a < del1))
        throw std::invalid_argument("energy_diff_d2: needs delta2 < delta1 on both sides");
    const BallDomain dom = cfg.domain();
    const Bubble b1{n, del1}, b2{n, del2}, b2a{n, del2a};
    const double w = sphere_measure(n);

    auto bps = tower_breakpoints(del1, del2, cfg.radius);
    for (double b : tower_breakpoints(del1, del2a, cfg.radius)) bps.push_back(b);

    auto diff_pow = [p](double va, double vb) {
        // |va|^{p+1} - |vb|^{p+1}, switching to the mean-value form when the
        // arguments are too close for direct subtraction to keep digits
        const double d = va - vb;
        const double scale = std::max(std::abs(va), std::abs(vb));
        if (scale > 0.0 && std::abs(d) < 1e-8 * scale) {
            const double m = 0.5 * (va + vb);
            return (p + 1.0) * std::pow(std::abs(m), p - 1.0) * m * d;
        }
        return std::pow(std::abs(va), p + 1.0) - std::pow(std::abs(vb), p + 1.0);
    };

    auto integrand = [&](double r) {
        const double u1p = std::pow(bubble_value(r, b1), p);
        const double u2p = std::pow(bubble_value(r, b2), p);
        const double u2ap = std::pow(bubble_value(r, b2a), p);
        const double pu1 = projected_bubble(r, b1, dom);
        const double pu2 = projected_bubble(r, b2, dom);
        const double pu2a = projected_bubble(r, b2a, dom);
        const double v = pu1 - pu2;
        const double va = pu1 - pu2a;
        const double dv = pu2 - pu2a;  // va - v

        const double dgrad = u1p * dv - (u2ap * va - u2p * v);
        const double dpot = diff_pow(va, v);
        const double dmass = dv * (va + v);
        return (0.5 * dgrad - dpot / (p + 1.0) - 0.5 * cfg.eps * dmass) *
               std::pow(r, n - 1);
    };
    return w * integrate_radial(integrand, 0.0, cfg.radius, bps, rel_tol).value;
}

double g1_coefficient(double d1, const DimensionalConstants& c, const BallDomain& dom) {
    return c.a1 * dom.robin_at_center() * std::pow(d1, c.dim - 2.0) - c.a2 * d1 * d1;
}

double g2_coefficient(double d1, double d2, const DimensionalConstants& c,
                      const BallDomain& dom, double robin_factor) {
    (void)dom;
    return c.a3 * robin_factor * std::pow(d2 / d1, 0.5 * (c.dim - 2.0)) - c.a2 * d2 * d2;
}

ExpansionReport expansion_terms(const TowerConfig& cfg, const DimensionalConstants& c,
                                double robin_factor, double rel_tol) {
    cfg.validate();
    const BallDomain dom = cfg.domain();
    ExpansionReport rep;
    rep.leading = 2.0 / c.dim * c.sobolev_pow;
    rep.g1_term = std::pow(cfg.eps, cfg.theta1()) * g1_coefficient(cfg.d1, c, dom);
    rep.g2_term =
        std::pow(cfg.eps, cfg.theta2()) * g2_coefficient(cfg.d1, cfg.d2, c, dom, robin_factor);
    rep.direct = energy_direct(cfg, rel_tol);
    rep.residual_after_leading = rep.direct - rep.leading;
    rep.residual_after_g1 = rep.residual_after_leading - rep.g1_term;
    rep.residual_after_g2 = rep.residual_after_g1 - rep.g2_term;
    return rep;
}

double golden_minimize(const std::function<double(double)>& f, double a, double b,
                       double tol) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

double critical_d1(const DimensionalConstants& c, const BallDomain& dom) {
    const double n = c.dim;
    const double tau = dom.robin_at_center();
    const double closed = std::pow(2.0 * c.a2 / ((n - 2.0) * c.a1 * tau), 1.0 / (n - 4.0));
    auto G1 = [&](double d) { return g1_coefficient(d, c, dom); };
    const double numeric =
        golden_minimize(G1, closed / 10.0, closed * 10.0, 1e-12 * closed);
    if (std::abs(numeric - closed) > 1e-8 * closed)
        throw std::runtime_error("critical_d1: closed form and numerical minimizer disagree");
    return closed;
}

CriticalD2 critical_d2(const DimensionalConstants& c, const BallDomain& dom, double d1,
                       double robin_factor) {
    const double n = c.dim;
    CriticalD2 out;
    out.closed_form = std::pow(
        4.0 * c.a2 * std::pow(d1, 0.5 * (n - 2.0)) / ((n - 2.0) * c.a3 * robin_factor),
        2.0 / (n - 6.0));

    // Golden section in log d2 around the candidate, then a derivative bisection.
    auto G2hat = [&](double ld) {
        return g2_coefficient(d1, std::exp(ld), c, dom, robin_factor);
    };
    const double l0 = std::log(out.closed_form);
    const double lmin =
        golden_minimize(G2hat, l0 - std::log(50.0), l0 + std::log(50.0), 1e-13);
    auto dG2 = [&](double d2) {
        return c.a3 * robin_factor * 0.5 * (n - 2.0) * std::pow(d2, 0.5 * (n - 4.0)) /
                   std::pow(d1, 0.5 * (n - 2.0)) -
               2.0 * c.a2 * d2;
    };
    double lo = std::exp(lmin) / 1.5, hi = std::exp(lmin) * 1.5;
    if (dG2(lo) < 0.0 && dG2(hi) > 0.0) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (dG2(mid) < 0.0 ? lo : hi) = mid;
        }
        out.minimizer = 0.5 * (lo + hi);
    } else if (dG2(lo) >= 0.0 || dG2(hi) <= 0.0) {
        throw std::runtime_error("critical_d2: no bracketed sign change of the derivative");
    }
    return out;
}

SingleBubbleTerms single_bubble_terms(double delta, double eps, const DimensionalConstants& c,
                                      const BallDomain& dom, double rel_tol) {
    const int n = c.dim;
    const double p = c.p;
    if (!(delta > 0.0 && delta < dom.radius))
        throw std::invalid_argument("single_bubble_terms: need 0 < delta << R");
    const Bubble b{n, delta};
    const double w = sphere_measure(n);
    const std::vector<double> bps = {delta, std::sqrt(delta * dom.radius)};
    auto rpow = [n](double r) { return std::pow(r, n - 1); };
    const double phi = harmonic_correction(b, dom);

    // The excess over S^{N/2}/N is integrated pointwise rather than formed as
    // a difference of O(S^{N/2}) totals, so it keeps full relative precision
    // down to delta^{N-2} scales:
    //   excess = int_0^R [ (U^{p+1} - (U-phi)^{p+1})/(p+1) - U^p phi / 2 ]
    //            - (1/N) int_R^inf U^{p+1}.
    auto bracket = [&](double r) {
        const double u = bubble_value(r, b);
        double dpow;
        if (phi < 1e-8 * u) {
            const double m = u - 0.5 * phi;
            dpow = (p + 1.0) * std::pow(m, p) * phi;
        } else {
            dpow = std::pow(u, p + 1.0) - std::pow(u - phi, p + 1.0);
        }
        return (dpow / (p + 1.0) - 0.5 * std::pow(u, p) * phi) * rpow(r);
    };
    const double inner = w * integrate_radial(bracket, 0.0, dom.radius, bps, rel_tol).value;
    const double tail =
        w * integrate_radial(
                [&](double r) { return std::pow(bubble_value(r, b), p + 1.0) * rpow(r); },
                dom.radius, std::numeric_limits<double>::infinity(), {}, rel_tol)
                .value;

    const double mass = w * integrate_radial(
                                [&](double r) {
                                    const double v = projected_bubble(r, b, dom);
                                    return v * v * rpow(r);
                                },
                                0.0, dom.radius, bps, rel_tol)
                                .value;

    SingleBubbleTerms out;
    out.energy_excess = inner - tail / n;
    out.mass_term = 0.5 * eps * mass;
    out.predicted_excess = c.a1 * dom.robin_at_center() * std::pow(delta, n - 2.0);
    out.predicted_mass = c.a2 * eps * delta * delta;
    return out;
}

InteractionResult interaction_integral(double delta1, double delta2, const BallDomain& dom,
                                       double rel_tol) {
    const int n = dom.dim;
    const double p = (n + 2.0) / (n - 2.0);
    if (delta2 == 0.0) return {};
    if (!(delta2 < delta1)) throw std::invalid_argument("interaction_integral: delta2 < delta1");
    const Bubble b1{n, delta1}, b2{n, delta2};
    const double w = sphere_measure(n);
    const auto bps = tower_breakpoints(delta1, delta2, dom.radius);
    auto rpow = [n](double r) { return std::pow(r, n - 1); };
    InteractionResult out;
    out.value = w * integrate_radial(
                        [&](double r) {
                            return std::pow(bubble_value(r, b1), p) * bubble_value(r, b2) *
                                   rpow(r);
                        },
                        0.0, dom.radius, bps, rel_tol)
                        .value;
    out.mass_overlap = w * integrate_radial(
                               [&](double r) {
                                   return projected_bubble(r, b1, dom) *
                                          projected_bubble(r, b2, dom) * rpow(r);
                               },
                               0.0, dom.radius, bps, rel_tol)
                               .value;
    return out;
}

namespace {

ErrorNormReport error_norm_impl(const std::function<double(double)>& source, ErrorTag tag,
                                double eps, const std::vector<Bubble>& z_bubbles,
                                const BallDomain& dom, const GridPtr& grid) {
    (void)dom;
    RadialField w = inverse_laplacian(source, grid);
    ErrorNormReport rep;
    rep.eps = eps;
    rep.which = tag;
    rep.norm_unprojected = norm_h1(w);
    std::vector<RadialField> basis;
    basis.reserve(z_bubbles.size());
    for (const Bubble& b : z_bubbles) basis.push_back(discrete_projected_kernel(grid, b));
    rep.norm_projected = norm_h1(project_orthogonal(w, basis));
    return rep;
}

}  // namespace

ErrorNormReport error_norm_r1(double eps, double d1, const DimensionalConstants& c,
                              const BallDomain& dom, const GridPtr& grid) {
    const double del1 = d1 * std::pow(eps, 1.0 / (c.dim - 4.0));
    const Bubble b1{c.dim, del1};
    const double p = c.p;
    auto source = [&](double r) {
        const double u = bubble_value(r, b1);
        const double pu = projected_bubble(r, b1, dom);
        return std::pow(u, p) - std::pow(pu, p) - eps * pu;
    };
    return error_norm_impl(source, ErrorTag::R1, eps, {b1}, dom, grid);
}

ErrorNormReport error_norm_r2(double eps, double d1, double d2, const DimensionalConstants& c,
                              const BallDomain& dom, const GridPtr& grid) {
    const double del1 = d1 * std::pow(eps, c.alpha1.value());
    const double del2 = d2 * std::pow(eps, c.alpha2.value());
    double smallest = grid->nodes[1];
    if (del2 < 10.0 * smallest)
        throw std::invalid_argument("error_norm_r2: mesh unresolved, delta2 below 10x innermost node");
    const Bubble b1{c.dim, del1}, b2{c.dim, del2};
    const double p = c.p;
    auto source = [&](double r) {
        const double pu1 = projected_bubble(r, b1, dom);
        const double pu2 = projected_bubble(r, b2, dom);
        return std::pow(bubble_value(r, b2), p) + nonlinearity(pu1 - pu2, p) -
               std::pow(pu1, p) - eps * pu2;
    };
    return error_norm_impl(source, ErrorTag::R2, eps, {b1, b2}, dom, grid);
}

double error_norm_r2_surrogate(double eps, double d1, double d2, const BallDomain& dom,
                               double rel_tol) {
    const int n = dom.dim;
    const double p = (n + 2.0) / (n - 2.0);
    const double a1e = 1.0 / (n - 4.0);
    const double a2e = (3.0 * n - 10.0) / ((n - 4.0) * (n - 6.0));
    const double del1 = d1 * std::pow(eps, a1e);
    const double del2 = d2 * std::pow(eps, a2e);
    const Bubble b1{n, del1}, b2{n, del2};
    auto source = [&](double r) {
        const double pu1 = projected_bubble(r, b1, dom);
        const double pu2 = projected_bubble(r, b2, dom);
        return std::pow(bubble_value(r, b2), p) + nonlinearity(pu1 - pu2, p) -
               std::pow(pu1, p) - eps * pu2;
    };
    return norm_lq(source, 2.0 * n / (n + 2.0), n, 0.0, dom.radius,
                   tower_breakpoints(del1, del2, dom.radius), rel_tol);
}

}  // namespace bubbletower
