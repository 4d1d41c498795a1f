#pragma once

// Cyclic Jacobi eigensolver for complex Hermitian matrices.
//
// Each rotation first removes the phase of the pivot a_pq with a diagonal
// unitary, then applies the classical real Jacobi rotation. Pivots that are
// exactly zero are skipped, so block-diagonal input never mixes blocks and
// eigenvectors stay supported on a single block. The sweep order is fixed,
// which makes the output bitwise reproducible.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "beltrami/core.hpp"

namespace beltrami {

struct JacobiOptions {
  int max_sweeps = 100;
  /// Converged once the off-diagonal Frobenius norm drops below tol * ||A||_F.
  double tol = 1e-15;
};

struct HermitianEigen {
  /// Sorted in descending order; ties keep their original diagonal order.
  Eigen::VectorXd values;
  /// Unit eigenvectors as columns, matching `values`.
  Eigen::MatrixXcd vectors;
  int sweeps = 0;
  double off_norm = 0.0;
};

inline double hermitian_residual(const Eigen::MatrixXcd& A) {
  return (A - A.adjoint()).norm();
}

inline HermitianEigen jacobi_eigen(const Eigen::MatrixXcd& input, const JacobiOptions& opt = {}) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw PreconditionError("jacobi_eigen: matrix must be square");
  if (n == 0) throw PreconditionError("jacobi_eigen: empty matrix");
  const double scale = std::max(input.norm(), 1e-300);
  if (hermitian_residual(input) > 1e-12 * scale) {
    throw PreconditionError("jacobi_eigen: matrix is not Hermitian");
  }
  Eigen::MatrixXcd A = 0.5 * (input + input.adjoint());
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Identity(n, n);

  auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += std::norm(A(i, j));
    return std::sqrt(s);
  };

  HermitianEigen out;
  int sweep = 0;
  for (; sweep < opt.max_sweeps; ++sweep) {
    if (off_norm() <= opt.tol * scale) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = A(p, q);
        const double r = std::abs(apq);
        if (r == 0.0) continue;
        const double app = A(p, p).real();
        const double aqq = A(q, q).real();
        // Below round-off relative to both diagonals: annihilate directly.
        if (r < 1e-300 || (std::abs(app) + 100.0 * r == std::abs(app) &&
                           std::abs(aqq) + 100.0 * r == std::abs(aqq))) {
          A(p, q) = 0.0;
          A(q, p) = 0.0;
          continue;
        }
        const Complex phase = apq / r;  // e^{i phi}
        const double theta = (aqq - app) / (2.0 * r);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // U acts on columns p, q:  U = [[c, s], [-s conj(phase), c conj(phase)]]
        const Complex u_pp = c;
        const Complex u_pq = s;
        const Complex u_qp = -s * std::conj(phase);
        const Complex u_qq = c * std::conj(phase);
        for (Eigen::Index k = 0; k < n; ++k) {  // A <- A U
          const Complex akp = A(k, p);
          const Complex akq = A(k, q);
          A(k, p) = akp * u_pp + akq * u_qp;
          A(k, q) = akp * u_pq + akq * u_qq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {  // A <- U^H A
          const Complex apk = A(p, k);
          const Complex aqk = A(q, k);
          A(p, k) = std::conj(u_pp) * apk + std::conj(u_qp) * aqk;
          A(q, k) = std::conj(u_pq) * apk + std::conj(u_qq) * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {  // V <- V U
          const Complex vkp = V(k, p);
          const Complex vkq = V(k, q);
          V(k, p) = vkp * u_pp + vkq * u_qp;
          V(k, q) = vkp * u_pq + vkq * u_qq;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        A(p, p) = A(p, p).real();
        A(q, q) = A(q, q).real();
      }
    }
  }
  out.sweeps = sweep;
  out.off_norm = off_norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return A(a, a).real() > A(b, b).real();
  });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = A(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]).real();
    out.vectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace beltrami
