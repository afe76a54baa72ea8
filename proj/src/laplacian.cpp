#include "bubbletower/laplacian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bubbletower/norms.hpp"
#include "bubbletower/tridiag.hpp"

namespace bubbletower {

TridiagLU::TridiagLU(std::vector<double> lower, std::vector<double> diag,
                     std::vector<double> upper)
    : dl_(std::move(lower)), d_(std::move(diag)), du_(std::move(upper)) {
    const size_t n = d_.size();
    if (dl_.size() != n - 1 || du_.size() != n - 1)
        throw std::invalid_argument("TridiagLU: inconsistent band sizes");

    scale_.assign(n, 1.0);
    for (size_t i = 0; i < n; ++i) {
        double rowmax = std::abs(d_[i]);
        if (i > 0) rowmax = std::max(rowmax, std::abs(dl_[i - 1]));
        if (i + 1 < n) rowmax = std::max(rowmax, std::abs(du_[i]));
        if (rowmax > 0.0 && std::isfinite(rowmax)) scale_[i] = 1.0 / std::sqrt(rowmax);
    }
    for (size_t i = 0; i < n; ++i) d_[i] *= scale_[i] * scale_[i];
    for (size_t i = 0; i + 1 < n; ++i) {
        du_[i] *= scale_[i] * scale_[i + 1];
        dl_[i] *= scale_[i] * scale_[i + 1];
    }

    du2_.assign(n >= 2 ? n - 2 : 0, 0.0);
    ipiv_.assign(n, 0);
    for (size_t i = 0; i < n; ++i) ipiv_[i] = static_cast<int>(i);

    for (size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d_[i]) >= std::abs(dl_[i])) {
            if (d_[i] == 0.0) { singular_ = true; continue; }
            const double fact = dl_[i] / d_[i];
            dl_[i] = fact;
            d_[i + 1] -= fact * du_[i];
            if (i + 2 < n) du2_[i] = 0.0;
        } else {
            const double fact = d_[i] / dl_[i];
            d_[i] = dl_[i];
            dl_[i] = fact;
            const double temp = du_[i];
            du_[i] = d_[i + 1];
            d_[i + 1] = temp - fact * d_[i + 1];
            if (i + 2 < n) {
                du2_[i] = du_[i + 1];
                du_[i + 1] = -fact * du_[i + 1];
            }
            ipiv_[i] = static_cast<int>(i + 1);
        }
    }
    if (n > 0 && d_[n - 1] == 0.0) singular_ = true;
}

std::vector<double> TridiagLU::solve(std::vector<double> b) const {
    const size_t n = d_.size();
    if (b.size() != n) throw std::invalid_argument("TridiagLU::solve: size mismatch");
    if (singular_) throw std::runtime_error("TridiagLU: singular matrix");
    for (size_t i = 0; i < n; ++i) b[i] *= scale_[i];
    for (size_t i = 0; i + 1 < n; ++i) {
        if (ipiv_[i] == static_cast<int>(i)) {
            b[i + 1] -= dl_[i] * b[i];
        } else {
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= dl_[i] * b[i];
        }
    }
    b[n - 1] /= d_[n - 1];
    if (n >= 2) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    for (size_t k = n; k-- > 2;) {
        const size_t i = k - 2;
        b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
    }
    for (size_t i = 0; i < n; ++i) b[i] *= scale_[i];
    return b;
}

namespace {

// Stiffness bands for the Dirichlet-reduced system (unknowns 0 .. n-2).
void assemble_stiffness(const RadialGrid& g, std::vector<double>& dl,
                        std::vector<double>& d, std::vector<double>& du) {
    const auto& x = g.nodes;
    const size_t n = x.size() - 1;  // unknown count
    dl.assign(n - 1, 0.0);
    d.assign(n, 0.0);
    du.assign(n - 1, 0.0);
    for (size_t e = 0; e + 1 < x.size(); ++e) {
        const double h = x[e + 1] - x[e];
        const double k = fem::element_stiffness_weight(g.dim, x[e], x[e + 1]) / (h * h);
        if (e < n) d[e] += k;
        if (e + 1 < n) {
            d[e + 1] += k;
            du[e] -= k;
            dl[e] -= k;
        }
    }
}

RadialField solve_poisson(const GridPtr& grid, const std::vector<double>& load) {
    const size_t n = grid->size() - 1;
    std::vector<double> dl, d, du;
    assemble_stiffness(*grid, dl, d, du);
    TridiagLU lu(std::move(dl), std::move(d), std::move(du));
    std::vector<double> rhs(load.begin(), load.begin() + n);
    std::vector<double> w = lu.solve(std::move(rhs));
    RadialField out(grid, true);
    for (size_t i = 0; i < n; ++i) out.values[i] = w[i];
    out.values[n] = 0.0;
    return out;
}

}  // namespace

RadialField inverse_laplacian(const std::function<double(double)>& g, const GridPtr& grid) {
    const auto& x = grid->nodes;
    const double w = sphere_measure(grid->dim);
    std::vector<double> load(x.size(), 0.0);
    for (size_t e = 0; e + 1 < x.size(); ++e) {
        const double h = x[e + 1] - x[e];
        double fl = 0.0, fr = 0.0;
        for (int q = 0; q < fem::kQuadPoints; ++q) {
            const double t = fem::kQuadNode[q];
            const double r = x[e] + t * h;
            const double gv = g(r) * std::pow(r, grid->dim - 1) * fem::kQuadWeight[q];
            fl += gv * (1.0 - t);
            fr += gv * t;
        }
        load[e] += w * h * fl;
        load[e + 1] += w * h * fr;
    }
    return solve_poisson(grid, load);
}

RadialField inverse_laplacian(const RadialField& g) {
    const auto& x = g.grid->nodes;
    std::vector<double> load(x.size(), 0.0);
    for (size_t e = 0; e + 1 < x.size(); ++e) {
        const fem::ElementMass m = fem::element_mass(g.grid->dim, x[e], x[e + 1]);
        load[e] += m.ll * g.values[e] + m.lr * g.values[e + 1];
        load[e + 1] += m.lr * g.values[e] + m.rr * g.values[e + 1];
    }
    return solve_poisson(g.grid, load);
}

RadialField project_orthogonal(const RadialField& f, const std::vector<RadialField>& basis,
                               double cond_threshold) {
    if (basis.empty()) return f;
    const size_t m = basis.size();
    std::vector<double> gram(m * m, 0.0), rhs(m, 0.0);
    for (size_t i = 0; i < m; ++i) {
        rhs[i] = inner_h1(f, basis[i]);
        for (size_t j = i; j < m; ++j) {
            gram[i * m + j] = gram[j * m + i] = inner_h1(basis[i], basis[j]);
        }
    }
    // Normalize by the diagonal so the condition estimate measures genuine
    // near-collinearity, not the (often enormous) norm spread of the basis.
    std::vector<double> dscale(m);
    for (size_t i = 0; i < m; ++i) {
        if (!(gram[i * m + i] > 0.0))
            throw std::invalid_argument("project_orthogonal: zero basis element");
        dscale[i] = 1.0 / std::sqrt(gram[i * m + i]);
    }
    std::vector<double> chol(m * m);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) chol[i * m + j] = gram[i * m + j] * dscale[i] * dscale[j];

    double max_piv = 0.0, min_piv = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < m; ++k) {
        double s = chol[k * m + k];
        for (size_t j = 0; j < k; ++j) s -= chol[k * m + j] * chol[k * m + j];
        if (!(s > 0.0)) throw std::invalid_argument("project_orthogonal: degenerate basis");
        const double piv = std::sqrt(s);
        max_piv = std::max(max_piv, piv);
        min_piv = std::min(min_piv, piv);
        chol[k * m + k] = piv;
        for (size_t i = k + 1; i < m; ++i) {
            double t = chol[i * m + k];
            for (size_t j = 0; j < k; ++j) t -= chol[i * m + j] * chol[k * m + j];
            chol[i * m + k] = t / piv;
        }
    }
    const double cond_est = (max_piv / min_piv) * (max_piv / min_piv);
    if (cond_est > cond_threshold)
        throw std::invalid_argument("project_orthogonal: degenerate basis (condition too large)");

    std::vector<double> c(rhs);
    for (size_t i = 0; i < m; ++i) c[i] *= dscale[i];
    for (size_t i = 0; i < m; ++i) {  // L y = rhs
        for (size_t j = 0; j < i; ++j) c[i] -= chol[i * m + j] * c[j];
        c[i] /= chol[i * m + i];
    }
    for (size_t k = m; k-- > 0;) {  // L^T c = y
        for (size_t j = k + 1; j < m; ++j) c[k] -= chol[j * m + k] * c[j];
        c[k] /= chol[k * m + k];
    }
    for (size_t i = 0; i < m; ++i) c[i] *= dscale[i];

    RadialField out = f;
    for (size_t j = 0; j < m; ++j)
        for (size_t i = 0; i < out.values.size(); ++i)
            out.values[i] -= c[j] * basis[j].values[i];
    out.enforce_dirichlet();
    return out;
}

}  // namespace bubbletower
