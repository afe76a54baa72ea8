#pragma once

#include <vector>

namespace bubbletower {

/// Tridiagonal LU with partial pivoting (LAPACK gttrf/gttrs layout).
/// Factor once, solve for several right-hand sides.
///
/// Rows of the radial systems scale like r^{N-1} and span dozens of orders of
/// magnitude, so the matrix is symmetrically equilibrated first; plain
/// pivoted LU is only normwise stable and would dump its rounding residual on
/// the innermost rows.
class TridiagLU {
  public:
    /// lower/upper have size n-1, diag has size n.
    TridiagLU(std::vector<double> lower, std::vector<double> diag,
              std::vector<double> upper);

    bool singular() const { return singular_; }
    std::vector<double> solve(std::vector<double> rhs) const;

  private:
    std::vector<double> dl_, d_, du_, du2_, scale_;
    std::vector<int> ipiv_;
    bool singular_ = false;
};

}  // namespace bubbletower
