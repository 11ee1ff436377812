#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tw/errors.hpp"
#include "tw/heteroclinic.hpp"

namespace tw {

Eigen::SparseMatrix<double> assemble_spectral_operator(const Curve1D& q, const PotentialSpec& pot) {
  const int n = q.n(), k = q.k();
  const int m = n - 2;
  if (m < 1) fail(ErrorKind::invalid_argument, "spectral operator: need interior nodes");
  const double ih2 = 1.0 / (q.grid.h * q.grid.h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * k * (k + 2));
  std::vector<double> H(k * k);
  for (int i = 0; i < m; ++i) {
    pot.hessian(q.row(i + 1), H.data());
    for (int a = 0; a < k; ++a) {
      const int I = i * k + a;
      for (int b = 0; b < k; ++b) trip.emplace_back(I, i * k + b, H[a * k + b] + (a == b ? 2.0 * ih2 : 0.0));
      if (i > 0) trip.emplace_back(I, I - k, -ih2);
      if (i + 1 < m) trip.emplace_back(I, I + k, -ih2);
    }
  }
  Eigen::SparseMatrix<double> A(m * k, m * k);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

namespace {

// Upper band storage, column major: ab[(kd + i - j) + j * (kd + 1)] = A(i, j).
std::vector<double> band_upper(const Eigen::SparseMatrix<double>& A, int kd, double shift) {
  const int N = static_cast<int>(A.rows());
  std::vector<double> ab(static_cast<std::size_t>(kd + 1) * N, 0.0);
  for (int j = 0; j < A.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it) {
      const int i = static_cast<int>(it.row());
      if (i > j || j - i > kd) continue;
      ab[(kd + i - j) + static_cast<std::size_t>(j) * (kd + 1)] = it.value() - (i == j ? shift : 0.0);
    }
  }
  return ab;
}

}  // namespace

SpectralReport spectral_report(const Curve1D& q, const PotentialSpec& pot, int count) {
  const Eigen::SparseMatrix<double> A = assemble_spectral_operator(q, pot);
  const int N = static_cast<int>(A.rows());
  const int kd = q.k();
  count = std::clamp(count, 2, N);

  std::vector<double> ab = band_upper(A, kd, 0.0);
  std::vector<double> w(N);
  std::vector<lapack_int> ifail(N);
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', N, kd, ab.data(), kd + 1, nullptr, 1, 0.0, 0.0,
                     1, count, 0.0, &found, w.data(), nullptr, 1, ifail.data());
  if (info != 0) fail(ErrorKind::convergence, "banded eigensolver failed (info " + std::to_string(info) + ")");

  SpectralReport rep;
  rep.eigenvalues.assign(w.begin(), w.begin() + found);
  rep.gap = found > 1 ? rep.eigenvalues[1] : 0.0;

  // Lowest eigenvector by inverse iteration on A - s I, s just below lambda_1,
  // which keeps the shifted matrix positive definite for a band Cholesky.
  const double l1 = rep.eigenvalues[0];
  const double sep = found > 1 ? rep.eigenvalues[1] - l1 : 1.0;
  const double s = l1 - std::max(1e-3 * sep, 1e-10 * std::max(1.0, std::abs(l1)));
  std::vector<double> chol = band_upper(A, kd, s);
  if (LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'U', N, kd, chol.data(), kd + 1) != 0)
    fail(ErrorKind::convergence, "shifted band Cholesky failed");
  Vec v = Vec::Ones(N);
  for (int it = 0; it < 6; ++it) {
    LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'U', N, kd, 1, chol.data(), kd + 1, v.data(), N);
    v.normalize();
  }

  // q' at interior nodes by central differences.
  const int k = q.k();
  Vec dq(N);
  for (int i = 0; i < N / k; ++i)
    for (int a = 0; a < k; ++a)
      dq[i * k + a] = (q.values(i + 2, a) - q.values(i, a)) / (2.0 * q.grid.h);
  const double nd = dq.norm();
  rep.kernel_alignment = nd > 0.0 ? std::abs(v.dot(dq)) / nd : 0.0;
  return rep;
}

}  // namespace tw
