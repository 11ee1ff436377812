#include "tw/linalg.hpp"

#include "tw/errors.hpp"

namespace tw {

TridiagonalSolver::TridiagonalSolver(std::vector<double> lower, std::vector<double> diag,
                                     std::vector<double> upper)
    : lower_(std::move(lower)), diag_(std::move(diag)) {
  const std::size_t n = diag_.size();
  if (lower_.size() != n || upper.size() != n)
    fail(ErrorKind::invalid_argument, "tridiagonal: band sizes differ");
  cprime_.assign(n, 0.0);
  inv_denom_.assign(n, 0.0);
  double prev_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = diag_[i] - (i > 0 ? lower_[i] * prev_c : 0.0);
    if (denom == 0.0) fail(ErrorKind::invalid_argument, "tridiagonal: zero pivot");
    inv_denom_[i] = 1.0 / denom;
    cprime_[i] = (i + 1 < n ? upper[i] : 0.0) * inv_denom_[i];
    prev_c = cprime_[i];
  }
}

void TridiagonalSolver::solve(double* rhs, int stride) const {
  const std::size_t n = diag_.size();
  if (n == 0) return;
  rhs[0] *= inv_denom_[0];
  for (std::size_t i = 1; i < n; ++i)
    rhs[i * stride] = (rhs[i * stride] - lower_[i] * rhs[(i - 1) * stride]) * inv_denom_[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i * stride] -= cprime_[i] * rhs[(i + 1) * stride];
}

}  // namespace tw
