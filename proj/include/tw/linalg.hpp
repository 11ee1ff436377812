#pragma once

#include <vector>

namespace tw {

// Thomas algorithm for a tridiagonal system. lower[i] couples row i to i-1,
// upper[i] couples row i to i+1 (lower[0] and upper[n-1] are ignored). The
// right-hand side is overwritten with the solution. Meant for the diagonally
// dominant SPD systems that appear in the preconditioners and the implicit
// heat step, so no pivoting is done.
class TridiagonalSolver {
 public:
  TridiagonalSolver() = default;
  TridiagonalSolver(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper);

  int size() const { return static_cast<int>(diag_.size()); }
  // Solves in place; unknown i lives at rhs[i * stride], so one component of
  // node-major R^k data is solved with stride k.
  void solve(double* rhs, int stride = 1) const;

 private:
  std::vector<double> lower_, diag_, cprime_, inv_denom_;
};

}  // namespace tw
