#include "bubbletower/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include "bubbletower/energy.hpp"
#include "bubbletower/laplacian.hpp"
#include "bubbletower/norms.hpp"
#include "bubbletower/tridiag.hpp"

namespace bubbletower {

namespace {

using Vec = std::vector<double>;

/// Assembled P1 system on a grid: exact stiffness, Gauss-rule loads, and the
/// factored stiffness for residual dual norms.
class FemSystem {
  public:
    explicit FemSystem(GridPtr grid)
        : grid_(std::move(grid)), dim_(grid_->dim), w_(sphere_measure(dim_)) {
        const auto& x = grid_->nodes;
        m_ = x.size() - 1;  // last node is Dirichlet
        kdl_.assign(m_ - 1, 0.0);
        kd_.assign(m_, 0.0);
        kdu_.assign(m_ - 1, 0.0);
        for (size_t e = 0; e + 1 < x.size(); ++e) {
            const double h = x[e + 1] - x[e];
            const double k = fem::element_stiffness_weight(dim_, x[e], x[e + 1]) / (h * h);
            if (e < m_) kd_[e] += k;
            if (e + 1 < m_) {
                kd_[e + 1] += k;
                kdu_[e] -= k;
                kdl_[e] -= k;
            }
        }
        klu_ = std::make_unique<TridiagLU>(kdl_, kd_, kdu_);
    }

    const GridPtr& grid() const { return grid_; }
    size_t unknowns() const { return m_; }
    int dim() const { return dim_; }

    /// Reduced K times the full nodal vector (boundary value must be 0).
    Vec apply_k(const Vec& vals) const {
        Vec out(m_, 0.0);
        for (size_t i = 0; i < m_; ++i) {
            double s = kd_[i] * vals[i];
            if (i > 0) s += kdl_[i - 1] * vals[i - 1];
            if (i + 1 < m_) s += kdu_[i] * vals[i + 1];
            out[i] = s;
        }
        return out;
    }

    /// L_i = N omega int g(u(r), w(r)) phi_i r^{N-1} dr with u, w the linear
    /// interpolants of the two nodal vectors.
    Vec load(const Vec& uvals, const Vec& wvals,
             const std::function<double(double, double)>& g) const {
        const auto& x = grid_->nodes;
        Vec out(m_, 0.0);
        for (size_t e = 0; e + 1 < x.size(); ++e) {
            const double h = x[e + 1] - x[e];
            double fl = 0.0, fr = 0.0;
            for (int q = 0; q < fem::kQuadPoints; ++q) {
                const double t = fem::kQuadNode[q];
                const double r = x[e] + t * h;
                const double u = uvals[e] * (1.0 - t) + uvals[e + 1] * t;
                const double wv = wvals[e] * (1.0 - t) + wvals[e + 1] * t;
                const double gv =
                    g(u, wv) * std::pow(r, dim_ - 1) * fem::kQuadWeight[q];
                fl += gv * (1.0 - t);
                fr += gv * t;
            }
            if (e < m_) out[e] += w_ * h * fl;
            if (e + 1 < m_) out[e + 1] += w_ * h * fr;
        }
        return out;
    }

    /// Jacobian bands K - N omega int gp(u, w) phi_i phi_j r^{N-1}.
    void jacobian(const Vec& uvals, const Vec& wvals,
                  const std::function<double(double, double)>& gp, Vec& dl, Vec& d,
                  Vec& du) const {
        const auto& x = grid_->nodes;
        dl = kdl_;
        d = kd_;
        du = kdu_;
        for (size_t e = 0; e + 1 < x.size(); ++e) {
            const double h = x[e + 1] - x[e];
            double mll = 0.0, mlr = 0.0, mrr = 0.0;
            for (int q = 0; q < fem::kQuadPoints; ++q) {
                const double t = fem::kQuadNode[q];
                const double r = x[e] + t * h;
                const double u = uvals[e] * (1.0 - t) + uvals[e + 1] * t;
                const double wv = wvals[e] * (1.0 - t) + wvals[e + 1] * t;
                const double gv =
                    gp(u, wv) * std::pow(r, dim_ - 1) * fem::kQuadWeight[q];
                mll += gv * (1.0 - t) * (1.0 - t);
                mlr += gv * (1.0 - t) * t;
                mrr += gv * t * t;
            }
            mll *= w_ * h;
            mlr *= w_ * h;
            mrr *= w_ * h;
            if (e < m_) d[e] -= mll;
            if (e + 1 < m_) {
                d[e + 1] -= mrr;
                du[e] -= mlr;
                dl[e] -= mlr;
            }
        }
    }

    double dual_norm(const Vec& res) const {
        Vec y = klu_->solve(res);
        double s = 0.0;
        for (size_t i = 0; i < m_; ++i) s += res[i] * y[i];
        return std::sqrt(std::max(0.0, s));
    }

  private:
    GridPtr grid_;
    int dim_;
    double w_;
    size_t m_ = 0;
    Vec kdl_, kd_, kdu_;
    std::unique_ptr<TridiagLU> klu_;
};

Vec full_from_reduced(const Vec& red, size_t n) {
    Vec full(n, 0.0);
    std::copy(red.begin(), red.end(), full.begin());
    return full;
}

/// Solve the small symmetric system A x = b (order <= 2 here, kept general).
Vec solve_small(std::vector<Vec> a, Vec b) {
    const size_t m = b.size();
    for (size_t k = 0; k < m; ++k) {
        size_t piv = k;
        for (size_t i = k + 1; i < m; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        if (a[k][k] == 0.0) throw std::runtime_error("constraint system singular");
        for (size_t i = k + 1; i < m; ++i) {
            const double f = a[i][k] / a[k][k];
            for (size_t j = k; j < m; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    for (size_t k = m; k-- > 0;) {
        for (size_t j = k + 1; j < m; ++j) b[k] -= a[k][j] * b[j];
        b[k] /= a[k][k];
    }
    return b;
}

StageSolution constrained_newton_impl(const RadialField& background, double eps,
                                      const std::vector<RadialField>& zbasis,
                                      const RadialField& phi_start, const SolveOptions& opt,
                                      const std::function<double(double, double)>& f,
                                      const std::function<double(double, double)>& fp,
                                      bool homogeneous);

}  // namespace

GridPtr solver_grid(int dim, double radius, double delta_min, int nodes_per_decade,
                    int uniform_nodes) {
    const double inner = std::min(delta_min / 100.0, radius / (4.0 * uniform_nodes));
    return build_grid(dim, radius, inner, nodes_per_decade, uniform_nodes);
}

RadialField discrete_projected_bubble(const GridPtr& grid, const Bubble& b) {
    const double p = (grid->dim + 2.0) / (grid->dim - 2.0);
    return inverse_laplacian(
        [&](double r) { return std::pow(bubble_value(r, b), p); }, grid);
}

RadialField discrete_projected_kernel(const GridPtr& grid, const Bubble& b) {
    const double p = (grid->dim + 2.0) / (grid->dim - 2.0);
    return inverse_laplacian(
        [&](double r) {
            return p * std::pow(bubble_value(r, b), p - 1.0) * bubble_dderiv(r, b);
        },
        grid);
}

StageSolution constrained_newton(const RadialField& background, double eps,
                                 const std::vector<RadialField>& zbasis,
                                 const RadialField& phi_start, const SolveOptions& opt,
                                 const std::function<double(double, double)>& f,
                                 const std::function<double(double, double)>& fp,
                                 bool homogeneous) {
    if (opt.contraction_first) {
        StageSolution s = constrained_newton_impl(background, eps, zbasis, phi_start, opt,
                                                  f, fp, homogeneous);
        if (s.converged) return s;
        // No contraction at these parameters; fall back to the plain damped
        // Newton solve of the same constrained equation.
        SolveOptions plain = opt;
        plain.contraction_first = false;
        return constrained_newton_impl(background, eps, zbasis, phi_start, plain, f, fp,
                                       homogeneous);
    }
    return constrained_newton_impl(background, eps, zbasis, phi_start, opt, f, fp,
                                   homogeneous);
}

namespace {

StageSolution constrained_newton_impl(const RadialField& background, double eps,
                                      const std::vector<RadialField>& zbasis,
                                      const RadialField& phi_start, const SolveOptions& opt,
                                      const std::function<double(double, double)>& f,
                                      const std::function<double(double, double)>& fp,
                                      bool homogeneous) {
    const GridPtr grid = background.grid;
    FemSystem sys(grid);
    const size_t n = grid->size();
    const size_t m = sys.unknowns();
    const double p = (grid->dim + 2.0) / (grid->dim - 2.0);

    std::function<double(double, double)> fv = f;
    std::function<double(double, double)> fd = fp;
    if (!fv) fv = [p](double u, double) { return nonlinearity(u, p); };
    if (!fd) fd = [p](double u, double) { return nonlinearity_deriv(u, p); };
    auto gfun = [&](double u, double w) { return fv(u, w) + eps * u; };
    auto gder = [&](double u, double w) { return fd(u, w) + eps; };

    StageSolution out;
    out.phi = phi_start;
    if (!zbasis.empty()) out.phi = project_orthogonal(out.phi, zbasis);
    out.phi.enforce_dirichlet();

    const size_t nz = zbasis.size();
    std::vector<Vec> kz(nz);
    std::vector<double> znorm(nz);
    std::vector<Vec> gram_rows(nz, Vec(nz, 0.0));
    for (size_t j = 0; j < nz; ++j) {
        kz[j] = sys.apply_k(zbasis[j].values);
        for (size_t k2 = 0; k2 <= j; ++k2) {
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += kz[j][i] * zbasis[k2].values[i];
            gram_rows[j][k2] = gram_rows[k2][j] = s;
        }
        znorm[j] = std::sqrt(gram_rows[j][j]);
    }

    Vec base(m, 0.0);
    if (homogeneous) {
        base = sys.apply_k(background.values);
        const Vec bl = sys.load(background.values, background.values, gfun);
        for (size_t i = 0; i < m; ++i) base[i] -= bl[i];
    }

    Vec uvals(n, 0.0);
    auto assemble_residual = [&](const Vec& phivals, Vec& res, std::vector<double>& lam) {
        for (size_t i = 0; i < n; ++i) uvals[i] = background.values[i] + phivals[i];
        res = sys.apply_k(uvals);
        const Vec L = sys.load(uvals, background.values, gfun);
        for (size_t i = 0; i < m; ++i) res[i] -= L[i] + base[i];
        // Galerkin multipliers: the components of the residual along the z_j
        lam.assign(nz, 0.0);
        if (nz > 0) {
            Vec rhs(nz, 0.0);
            for (size_t j = 0; j < nz; ++j)
                for (size_t i = 0; i < m; ++i) rhs[j] += zbasis[j].values[i] * res[i];
            lam = solve_small(gram_rows, rhs);
            for (size_t j = 0; j < nz; ++j)
                for (size_t i = 0; i < m; ++i) res[i] -= lam[j] * kz[j][i];
        }
    };

    Vec res;
    std::vector<double> lam;
    assemble_residual(out.phi.values, res, lam);
    double merit = sys.dual_norm(res);
    const double scale =
        std::max(1.0, norm_h1(background) + norm_h1(out.phi));
    const double merit0 = merit;

    Vec dl, d, du;

    // Contraction phase: iterate with the operator frozen at the starting
    // background, the discrete analog of the fixed-point map that defines the
    // stage remainders.  Full steps, no line search; failure to contract is
    // reported, not papered over with a branch jump.
    if (opt.contraction_first && merit > opt.tol * scale) {
        sys.jacobian(uvals, background.values, gder, dl, d, du);
        TridiagLU j0(dl, d, du);
        if (j0.singular()) {
            for (size_t i = 0; i < m; ++i) d[i] *= (1.0 + 1e-12);
            j0 = TridiagLU(dl, d, du);
        }
        std::vector<Vec> yj0(nz);
        for (size_t j = 0; j < nz; ++j) yj0[j] = j0.solve(kz[j]);
        const double chord_exit = std::max(opt.tol * scale, 1e-5 * merit0);
        double best = merit;
        int bad = 0;
        Vec trial(n, 0.0);
        while (out.iterations < opt.max_iterations && merit > chord_exit) {
            ++out.iterations;
            Vec raw = res;
            for (size_t j = 0; j < nz; ++j)
                for (size_t i = 0; i < m; ++i) raw[i] += lam[j] * kz[j][i];
            for (size_t i = 0; i < m; ++i) raw[i] = -raw[i];
            const Vec y0 = j0.solve(raw);
            Vec step(m, 0.0);
            if (nz == 0) {
                step = y0;
            } else {
                std::vector<Vec> a(nz, Vec(nz, 0.0));
                Vec b(nz, 0.0);
                for (size_t j = 0; j < nz; ++j) {
                    for (size_t k2 = 0; k2 < nz; ++k2)
                        for (size_t i = 0; i < m; ++i) a[j][k2] += kz[j][i] * yj0[k2][i];
                    for (size_t i = 0; i < m; ++i)
                        b[j] -= kz[j][i] * (out.phi.values[i] + y0[i]);
                }
                const Vec lnew = solve_small(a, b);
                step = y0;
                for (size_t j = 0; j < nz; ++j)
                    for (size_t i = 0; i < m; ++i) step[i] += lnew[j] * yj0[j][i];
            }
            for (size_t i = 0; i < m; ++i) trial[i] = out.phi.values[i] + step[i];
            trial[n - 1] = 0.0;
            Vec res_t;
            std::vector<double> lam_t;
            assemble_residual(trial, res_t, lam_t);
            const double merit_t = sys.dual_norm(res_t);
            if (!std::isfinite(merit_t) || merit_t > 30.0 * merit0) {
                out.residual_h1 = merit;
                out.norm_h1 = norm_h1(out.phi);
                out.multipliers_raw = lam;
                out.multipliers.assign(nz, 0.0);
                for (size_t j = 0; j < nz; ++j) out.multipliers[j] = lam[j] * znorm[j];
                return out;  // diverged; converged stays false
            }
            out.phi.values = trial;
            res = std::move(res_t);
            lam = std::move(lam_t);
            if (merit_t >= best * (1.0 - 1e-3)) {
                if (++bad > 10) {
                    merit = merit_t;
                    out.residual_h1 = merit;
                    out.norm_h1 = norm_h1(out.phi);
                    out.multipliers_raw = lam;
                    out.multipliers.assign(nz, 0.0);
                    for (size_t j = 0; j < nz; ++j)
                        out.multipliers[j] = lam[j] * znorm[j];
                    return out;  // stagnated without contracting
                }
            } else {
                bad = 0;
                best = merit_t;
            }
            merit = merit_t;
            for (size_t i = 0; i < n; ++i)
                uvals[i] = background.values[i] + out.phi.values[i];
        }
    }
    const double anchor_norm = norm_h1(out.phi);

    // Damped Newton (after the contraction phase this is only a polish and is
    // kept on the contracted branch by the drift guard).
    for (; out.iterations < opt.max_iterations; ++out.iterations) {
        if (merit <= opt.tol * scale) {
            out.converged = true;
            break;
        }
        if (opt.contraction_first && norm_h1(out.phi) > 2.0 * anchor_norm + 1e-9 * scale)
            break;  // drifting off the contracted branch
        sys.jacobian(uvals, background.values, gder, dl, d, du);
        TridiagLU jlu(dl, d, du);
        if (jlu.singular()) {
            for (size_t i = 0; i < m; ++i) d[i] *= (1.0 + 1e-12);
            jlu = TridiagLU(dl, d, du);
        }

        // Residual without the multiplier force, for the bordered solve.
        Vec raw = res;
        for (size_t j = 0; j < nz; ++j)
            for (size_t i = 0; i < m; ++i) raw[i] += lam[j] * kz[j][i];
        Vec negraw(m);
        for (size_t i = 0; i < m; ++i) negraw[i] = -raw[i];
        const Vec y0 = jlu.solve(negraw);
        std::vector<Vec> yj(nz);
        for (size_t j = 0; j < nz; ++j) yj[j] = jlu.solve(kz[j]);

        Vec step(m, 0.0);
        if (nz == 0) {
            step = y0;
        } else {
            std::vector<Vec> a(nz, Vec(nz, 0.0));
            Vec b(nz, 0.0);
            for (size_t j = 0; j < nz; ++j) {
                for (size_t k2 = 0; k2 < nz; ++k2)
                    for (size_t i = 0; i < m; ++i) a[j][k2] += kz[j][i] * yj[k2][i];
                for (size_t i = 0; i < m; ++i)
                    b[j] -= kz[j][i] * (out.phi.values[i] + y0[i]);
            }
            const Vec lnew = solve_small(a, b);
            step = y0;
            for (size_t j = 0; j < nz; ++j)
                for (size_t i = 0; i < m; ++i) step[i] += lnew[j] * yj[j][i];
        }

        // Backtracking on the dual-norm merit.
        double alpha = 1.0;
        Vec trial(n, 0.0);
        bool accepted = false;
        for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
            for (size_t i = 0; i < m; ++i)
                trial[i] = out.phi.values[i] + alpha * step[i];
            trial[n - 1] = 0.0;
            Vec res_t;
            std::vector<double> lam_t;
            assemble_residual(trial, res_t, lam_t);
            const double merit_t = sys.dual_norm(res_t);
            if (std::isfinite(merit_t) && merit_t < merit) {
                out.phi.values = trial;
                res = std::move(res_t);
                lam = std::move(lam_t);
                merit = merit_t;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // stalled; report last iterate
        for (size_t i = 0; i < n; ++i)
            uvals[i] = background.values[i] + out.phi.values[i];
    }

    out.residual_h1 = merit;
    if (merit <= opt.tol * scale) out.converged = true;
    out.norm_h1 = norm_h1(out.phi);
    out.multipliers_raw = lam;
    out.multipliers.assign(nz, 0.0);
    for (size_t j = 0; j < nz; ++j) out.multipliers[j] = lam[j] * znorm[j];
    return out;
}

}  // namespace

StageSolution solve_stage1(double eps, double d1, const GridPtr& grid, const BallDomain& dom,
                           const SolveOptions& opt) {
    (void)dom;
    const double del1 = d1 * std::pow(eps, 1.0 / (grid->dim - 4.0));
    const Bubble b1{grid->dim, del1};
    if (del1 <= grid->nodes[1] * 10.0)
        throw std::invalid_argument("solve_stage1: grid does not resolve delta1");
    RadialField w = discrete_projected_bubble(grid, b1);
    std::vector<RadialField> z = {discrete_projected_kernel(grid, b1)};
    SolveOptions sopt = opt;
    sopt.contraction_first = true;
    return constrained_newton(w, eps, z, RadialField(grid), sopt);
}

StageSolution solve_stage2(double eps, double d1, double d2, const StageSolution& stage1,
                           const GridPtr& grid, const BallDomain& dom,
                           const SolveOptions& opt) {
    (void)dom;
    const int n = grid->dim;
    const double a1e = 1.0 / (n - 4.0);
    const double a2e = (3.0 * n - 10.0) / ((n - 4.0) * (n - 6.0));
    const double del1 = d1 * std::pow(eps, a1e);
    const double del2 = d2 * std::pow(eps, a2e);
    if (!(del2 < del1))
        throw std::invalid_argument("solve_stage2: configuration invalid, delta2 >= delta1");
    if (del2 <= grid->nodes[1] * 10.0)
        throw std::invalid_argument("solve_stage2: grid does not resolve delta2");
    const Bubble b1{n, del1}, b2{n, del2};
    RadialField w = discrete_projected_bubble(grid, b1);
    const RadialField pu2 = discrete_projected_bubble(grid, b2);
    for (size_t i = 0; i < w.values.size(); ++i)
        w.values[i] += stage1.phi.values[i] - pu2.values[i];
    w.enforce_dirichlet();
    std::vector<RadialField> z = {discrete_projected_kernel(grid, b1),
                                  discrete_projected_kernel(grid, b2)};
    SolveOptions sopt = opt;
    sopt.contraction_first = true;
    return constrained_newton(w, eps, z, RadialField(grid), sopt);
}

AuxiliarySolution solve_auxiliary(double eps, double d1, double d2, const GridPtr& grid,
                                  const BallDomain& dom, const SolveOptions& opt) {
    AuxiliarySolution aux;
    aux.stage1 = solve_stage1(eps, d1, grid, dom, opt);
    aux.stage2 = solve_stage2(eps, d1, d2, aux.stage1, grid, dom, opt);
    aux.norm_phi1 = aux.stage1.norm_h1;
    aux.norm_phi2 = aux.stage2.norm_h1;
    return aux;
}

ReducedResult reduced_j(double eps, double d1, double d2, const GridPtr& grid,
                        const BallDomain& dom, const SolveOptions& opt) {
    ReducedResult out;
    out.aux = solve_auxiliary(eps, d1, d2, grid, dom, opt);
    const int n = grid->dim;
    const double del1 = d1 * std::pow(eps, 1.0 / (n - 4.0));
    const double del2 = d2 * std::pow(eps, (3.0 * n - 10.0) / ((n - 4.0) * (n - 6.0)));
    out.assembled = discrete_projected_bubble(grid, {n, del1});
    const RadialField pu2 = discrete_projected_bubble(grid, {n, del2});
    for (size_t i = 0; i < out.assembled.values.size(); ++i)
        out.assembled.values[i] += out.aux.stage1.phi.values[i] +
                                   out.aux.stage2.phi.values[i] - pu2.values[i];
    out.assembled.enforce_dirichlet();
    out.value = functional_j(out.assembled, eps);
    return out;
}

std::pair<double, double> minimize_2d(const std::function<double(double, double)>& f,
                                      const Box2& box, double rel_tol, int rounds) {
    double x = 0.5 * (box.d1_lo + box.d1_hi);
    double y = std::sqrt(box.d2_lo * box.d2_hi);
    for (int r = 0; r < rounds; ++r) {
        x = golden_minimize([&](double t) { return f(t, y); }, box.d1_lo, box.d1_hi,
                            rel_tol * (box.d1_hi - box.d1_lo));
        const double ly = golden_minimize(
            [&](double t) { return f(x, std::exp(t)); }, std::log(box.d2_lo),
            std::log(box.d2_hi), rel_tol);
        y = std::exp(ly);
    }
    return {x, y};
}

MinimizeResult minimize_reduced(double eps, const Box2& box, int dim, double radius,
                                const MinimizeOptions& opt) {
    if (!(box.d1_lo < box.d1_hi && box.d2_lo < box.d2_hi && box.d2_lo > 0.0))
        throw std::invalid_argument("minimize_reduced: invalid box");
    const BallDomain dom{dim, radius};
    const double a2e = (3.0 * dim - 10.0) / ((dim - 4.0) * (dim - 6.0));
    const double del2_min = box.d2_lo * std::pow(eps, a2e);
    const GridPtr grid =
        solver_grid(dim, radius, del2_min, opt.nodes_per_decade, opt.uniform_nodes);
    SolveOptions sopt;
    sopt.tol = opt.solve_tol;

    MinimizeResult res;
    std::map<double, StageSolution> s1cache;
    auto stage1_at = [&](double d1) -> const StageSolution& {
        auto it = s1cache.find(d1);
        if (it == s1cache.end())
            it = s1cache.emplace(d1, solve_stage1(eps, d1, grid, dom, sopt)).first;
        return it->second;
    };
    struct Eval {
        double value;
        std::vector<double> multipliers;
    };
    auto eval = [&](double d1, double d2) -> Eval {
        const StageSolution& s1 = stage1_at(d1);
        StageSolution s2 = solve_stage2(eps, d1, d2, s1, grid, dom, sopt);
        const double del1 = d1 * std::pow(eps, 1.0 / (dim - 4.0));
        const double del2 = d2 * std::pow(eps, a2e);
        RadialField u = discrete_projected_bubble(grid, {dim, del1});
        const RadialField pu2 = discrete_projected_bubble(grid, {dim, del2});
        for (size_t i = 0; i < u.values.size(); ++i)
            u.values[i] += s1.phi.values[i] + s2.phi.values[i] - pu2.values[i];
        u.enforce_dirichlet();
        ++res.evaluations;
        return {functional_j(u, eps), s2.multipliers};
    };

    double d1 = 0.5 * (box.d1_lo + box.d1_hi);
    double d2 = std::sqrt(box.d2_lo * box.d2_hi);
    for (int round = 0; round < opt.golden_rounds; ++round) {
        d1 = golden_minimize([&](double t) { return eval(t, d2).value; }, box.d1_lo,
                             box.d1_hi, opt.golden_rel_tol * (box.d1_hi - box.d1_lo));
        const double ld2 = golden_minimize(
            [&](double t) { return eval(d1, std::exp(t)).value; }, std::log(box.d2_lo),
            std::log(box.d2_hi), opt.golden_rel_tol);
        d2 = std::exp(ld2);
    }

    // Refine each coordinate by driving the assembled multiplier through zero;
    // at a critical point the assembled field solves the full problem.
    auto bisect_multiplier = [&](int which, double lo, double hi, double& coord) {
        auto mval = [&](double t) {
            return which == 0 ? eval(t, d2).multipliers[0] : eval(d1, t).multipliers[1];
        };
        double flo = mval(lo), fhi = mval(hi);
        if (!(flo * fhi < 0.0)) return false;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = mval(mid);
            if (fm == 0.0) {
                coord = mid;
                return true;
            }
            if (flo * fm < 0.0) {
                hi = mid;
                fhi = fm;
            } else {
                lo = mid;
                flo = fm;
            }
            if ((hi - lo) < 1e-12 * std::max(1.0, std::abs(hi))) break;
        }
        coord = 0.5 * (lo + hi);
        return true;
    };

    for (int round = 0; round < 2; ++round) {
        // d1 bracket around the current point, expanding toward the box edges
        double w1 = 0.05 * (box.d1_hi - box.d1_lo);
        bool ok = false;
        for (int k = 0; k < 5 && !ok; ++k, w1 *= 2.0) {
            const double lo = std::max(box.d1_lo, d1 - w1);
            const double hi = std::min(box.d1_hi, d1 + w1);
            ok = bisect_multiplier(0, lo, hi, d1);
        }
        double f2 = 0.3;
        ok = false;
        for (int k = 0; k < 5 && !ok; ++k, f2 *= 2.5) {
            const double lo = std::max(box.d2_lo, d2 / (1.0 + f2));
            const double hi = std::min(box.d2_hi, d2 * (1.0 + f2));
            ok = bisect_multiplier(1, lo, hi, d2);
        }
    }

    const Eval fin = eval(d1, d2);
    res.d1_min = d1;
    res.d2_min = d2;
    res.reduced_value = fin.value;
    res.multipliers = fin.multipliers;
    const double m1 = 1e-4 * (box.d1_hi - box.d1_lo);
    res.interior = (d1 > box.d1_lo + m1 && d1 < box.d1_hi - m1 &&
                    d2 > box.d2_lo * 1.001 && d2 < box.d2_hi * 0.999);
    return res;
}

BvpSolution solve_bvp(double eps, const RadialField& init, const SolveOptions& opt) {
    const GridPtr grid = init.grid;
    RadialField zero(grid);
    StageSolution s = constrained_newton(zero, eps, {}, init, opt);

    BvpSolution out;
    out.u = s.phi;
    out.converged = s.converged;
    out.newton_iterations = s.iterations;
    out.residual_h1 = s.residual_h1;
    out.energy = functional_j(out.u, eps);
    out.nehari_residual = nehari_residual(out.u, eps);

    // Zero crossings of the profile.  The dead band is taken relative to the
    // neighboring nodes: tower profiles span twenty-plus orders of magnitude,
    // so a band tied to the global sup would erase the outer lobe entirely.
    const auto& x = grid->nodes;
    auto local_scale = [&](size_t i) {
        double s = std::abs(out.u.values[i]);
        if (i > 0) s = std::max(s, std::abs(out.u.values[i - 1]));
        if (i + 1 < out.u.values.size()) s = std::max(s, std::abs(out.u.values[i + 1]));
        return s;
    };
    int prev = 0;
    out.sign_changes = 0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {  // boundary node excluded
        const double v = out.u.values[i];
        const double band = 1e-10 * local_scale(i);
        const int sgn = v > band ? 1 : (v < -band ? -1 : 0);
        if (sgn == 0) continue;
        if (prev != 0 && sgn != prev) {
            ++out.sign_changes;
            if (out.sign_changes == 1) {
                // linear interpolation between the last nonzero-classified nodes
                size_t j = i;
                while (j > 0 && std::abs(out.u.values[j - 1]) <= band) --j;
                const double r0 = x[j - 1], r1 = x[i];
                const double v0 = out.u.values[j - 1], v1 = v;
                out.nodal_radius = r0 + (r1 - r0) * (-v0) / (v1 - v0);
            }
        }
        prev = sgn;
    }
    if (out.sign_changes == 1 && out.u.values[0] < 0.0) {
        try {
            auto [f1, f2] = fit_concentration(out.u);
            out.fitted_delta1 = f1;
            out.fitted_delta2 = f2;
        } catch (const std::exception&) {
            // leave unset when the lobes do not separate
        }
    }
    return out;
}

NodalReport nodal_analysis(const BvpSolution& sol, double eps) {
    const int n = sol.u.grid->dim;
    const double radius = sol.u.grid->radius;
    const double r1 = std::pow(eps, 1.0 / (n - 4.0));
    const double r2 = std::pow(eps, (3.0 * n - 10.0) / ((n - 4.0) * (n - 6.0)));
    if (r1 >= radius)
        throw std::domain_error("nodal_analysis: sphere radius outside the domain");
    // sphere signs are local statements; band them against the local value scale
    auto sgn_at = [&](double r) {
        const size_t e = sol.u.grid->element_of(r);
        const double band = 1e-10 * std::max(std::abs(sol.u.values[e]),
                                             std::abs(sol.u.values[e + 1]));
        const double v = sol.u(r);
        return v > band ? 1 : (v < -band ? -1 : 0);
    };

    NodalReport rep;
    rep.nodal_domain_count = 1 + sol.sign_changes;
    rep.sign_at_sphere1 = sgn_at(r1);
    rep.sign_at_sphere2 = sgn_at(r2);
    rep.inner_negative = sol.u.values[0] < 0.0 && sgn_at(0.0) < 0;
    return rep;
}

double nehari_residual(const RadialField& u, double eps) {
    if (!u.dirichlet) throw std::invalid_argument("nehari_residual: field must be dirichlet");
    const double p = (u.grid->dim + 2.0) / (u.grid->dim - 2.0);
    const double h1 = inner_h1(u, u);
    const double lpp = std::pow(norm_lq(u, p + 1.0), p + 1.0);
    const double l2 = inner_l2(u, u);
    if (h1 == 0.0) return 0.0;
    return std::abs(h1 - lpp - eps * l2) / h1;
}

bool nehari_energy_bound(const RadialField& u, double eps, const RadialField& u_positive) {
    return functional_j(u, eps) < 3.0 * functional_j(u_positive, eps);
}

std::pair<double, double> fit_concentration(const RadialField& u) {
    const GridPtr grid = u.grid;
    const int n = grid->dim;
    const double alpha_n = alpha_constant(n);
    const auto& x = grid->nodes;
    const double u0 = u.values[0];
    if (!(u0 < 0.0)) throw std::runtime_error("fit_concentration: expected a negative core");

    // Inner scale from the center value.
    double del2 = std::pow(alpha_n / std::abs(u0), 2.0 / (n - 2.0));

    // Crossing radius.
    double r0 = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        if (u.values[i] < 0.0 && u.values[i + 1] >= 0.0) {
            r0 = x[i] + (x[i + 1] - x[i]) * (-u.values[i]) / (u.values[i + 1] - u.values[i]);
            break;
        }
    }
    if (r0 <= 0.0) throw std::runtime_error("fit_concentration: no sign change found");

    const BallDomain dom{n, grid->radius};
    // Outer scale: least squares of the positive lobe against one projected bubble.
    auto outer_ls = [&](double del) {
        const Bubble b{n, del};
        double s = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i] < r0) continue;
            const double d = u.values[i] - projected_bubble(x[i], b, dom);
            s += d * d;
        }
        return s;
    };
    const double ldel1 = golden_minimize([&](double t) { return outer_ls(std::exp(t)); },
                                         std::log(r0 * 0.5), std::log(grid->radius), 1e-12);
    double del1 = std::exp(ldel1);

    // Joint refinement on relative residuals so both lobes carry weight.
    double uscale = 0.0;
    for (double v : u.values) uscale = std::max(uscale, std::abs(v));
    const double floor_w = 1e-12 * uscale;
    auto joint_ls = [&](double da, double db) {
        const Bubble b1{n, da}, b2{n, db};
        double s = 0.0;
        for (size_t i = 0; i + 1 < x.size(); ++i) {
            const double model =
                projected_bubble(x[i], b1, dom) - projected_bubble(x[i], b2, dom);
            const double d = (u.values[i] - model) / (std::abs(u.values[i]) + floor_w);
            s += d * d;
        }
        return s;
    };
    for (int round = 0; round < 3; ++round) {
        const double l1 = golden_minimize(
            [&](double t) { return joint_ls(std::exp(t), del2); }, std::log(del1 / 1.5),
            std::log(del1 * 1.5), 1e-13);
        del1 = std::exp(l1);
        const double l2v = golden_minimize(
            [&](double t) { return joint_ls(del1, std::exp(t)); }, std::log(del2 / 1.5),
            std::log(del2 * 1.5), 1e-13);
        del2 = std::exp(l2v);
    }
    if (del2 / del1 > 0.3)
        throw std::runtime_error("fit_concentration: lobes not separated (fit degenerate)");
    return {del1, del2};
}

std::pair<double, double> fit_concentration(const BvpSolution& sol) {
    return fit_concentration(sol.u);
}

}  // namespace bubbletower
