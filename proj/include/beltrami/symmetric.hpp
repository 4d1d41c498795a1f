#pragma once

// Symmetric subspaces on the flat 3-torus and the discrete operator pi o curl^{-1}.
//
// For a translation Killing field Y = v, [Y, X] = (v . nabla) X, so X commutes
// with Y exactly when its Fourier support lies in {k : k . v = 0}. The
// orthogonal projection pi onto symmetric fields therefore keeps admitted
// modes and annihilates the rest.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "beltrami/core.hpp"
#include "beltrami/direction.hpp"
#include "beltrami/jacobi.hpp"
#include "beltrami/spectral.hpp"

namespace beltrami {

struct SymmetricSubspace {
  Direction direction;
  int N = 0;
  /// Non-zero wavevectors with k . v = 0, in lexicographic order. Closed under k -> -k.
  std::vector<Wavevector> admitted;

  bool empty() const noexcept { return admitted.empty(); }
  bool admits(const Wavevector& k) const {
    return std::binary_search(admitted.begin(), admitted.end(), k);
  }
};

inline SymmetricSubspace symmetric_mask(const Direction& v, int N) {
  if (N < 0) throw PreconditionError("truncation N must be non-negative");
  SymmetricSubspace sub{v, N, {}};
  for (int a = -N; a <= N; ++a)
    for (int b = -N; b <= N; ++b)
      for (int c = -N; c <= N; ++c) {
        const Wavevector k{a, b, c};
        if (!is_zero(k) && v.orthogonal_to(k)) sub.admitted.push_back(k);
      }
  return sub;
}

/// The orthogonal projection pi: keeps admitted modes, zeroes all others (including k = 0).
template <class Coeff>
FourierSeries<Coeff> project_symmetric(const FourierSeries<Coeff>& X, const SymmetricSubspace& sub) {
  FourierSeries<Coeff> out(X.truncation());
  X.for_each([&](const Wavevector& k, const Coeff& c) {
    if (sub.admits(k)) out.at(k) = c;
  });
  return out;
}

/// Two orthonormal real vectors spanning the plane orthogonal to k, with p1 x p2 = k/|k|.
/// p1 is Gram-Schmidt of the first coordinate axis that is not parallel to k.
inline std::array<Vec3, 2> polarization_basis(const Wavevector& k) {
  if (is_zero(k)) throw PreconditionError("polarization basis undefined at k = 0");
  const Vec3 kh = Vec3(k[0], k[1], k[2]).normalized();
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = Vec3::Unit(j);
    const Vec3 r = e - e.dot(kh) * kh;
    if (r.norm() > 1e-8) {
      const Vec3 p1 = r.normalized();
      return {p1, kh.cross(p1)};
    }
  }
  throw PreconditionError("polarization basis: degenerate wavevector");
}

/// Single-mode complex field with coefficient `polarization` at k.
inline SpectralField unit_mode_field(int N, const Wavevector& k, const Vec3& polarization) {
  SpectralField f(N);
  f.at(k) = polarization.cast<Complex>();
  return f;
}

/// Matrix of pi o curl^{-1} in the orthonormal basis {p_a(k) e^{2 pi i k.x}} over the
/// admitted modes. Row/column index 2 * m + a refers to modes[m], polarization a.
struct OperatorMatrix {
  Eigen::MatrixXcd matrix;
  std::vector<Wavevector> modes;
  std::vector<std::array<Vec3, 2>> basis;
  int N = 0;

  Eigen::Index dimension() const { return matrix.rows(); }
};

inline OperatorMatrix assemble_pi_curlinv(const SymmetricSubspace& sub) {
  if (sub.empty()) {
    throw NoSymmetricFields(
        "no non-zero divergence-free field commutes with Y = " + sub.direction.label() +
        " at truncation N = " + std::to_string(sub.N) +
        ": the symmetric subspace V_n^Y is {0}, so no symmetric Beltrami field with "
        "non-zero eigenvalue exists");
  }
  OperatorMatrix op;
  op.N = sub.N;
  op.modes = sub.admitted;
  for (const auto& k : op.modes) op.basis.push_back(polarization_basis(k));
  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(op.modes.size());
  op.matrix = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t m = 0; m < op.modes.size(); ++m) {
    for (int b = 0; b < 2; ++b) {
      const SpectralField column_field = project_symmetric(
          curl_inv_spec(unit_mode_field(sub.N, op.modes[m], op.basis[m][b])), sub);
      const Eigen::Index col = 2 * static_cast<Eigen::Index>(m) + b;
      for (std::size_t mr = 0; mr < op.modes.size(); ++mr) {
        const Vec3c& w = column_field.at(op.modes[mr]);
        if (w.norm() == 0.0) continue;
        for (int a = 0; a < 2; ++a) {
          op.matrix(2 * static_cast<Eigen::Index>(mr) + a, col) =
              (op.basis[mr][a].cast<Complex>().transpose() * w)(0);
        }
      }
    }
  }
  return op;
}

/// Field whose coefficients at modes[m] are sum_a v[2m + a] p_a(modes[m]).
inline SpectralField field_from_coordinates(const OperatorMatrix& op, const Eigen::VectorXcd& v) {
  SpectralField f(op.N);
  for (std::size_t m = 0; m < op.modes.size(); ++m) {
    const Eigen::Index i = 2 * static_cast<Eigen::Index>(m);
    f.at(op.modes[m]) = v[i] * op.basis[m][0].cast<Complex>() + v[i + 1] * op.basis[m][1].cast<Complex>();
  }
  return f;
}

struct OperatorSpectrum {
  HermitianEigen eigen;
  double max_abs = 0.0;
};

inline OperatorSpectrum operator_spectrum(const OperatorMatrix& op) {
  OperatorSpectrum s{jacobi_eigen(op.matrix), 0.0};
  s.max_abs = s.eigen.values.cwiseAbs().maxCoeff();
  return s;
}

struct TopEigenpair {
  /// Eigenvalue of pi o curl^{-1}; the Beltrami eigenvalue is 1 / mu.
  double mu = 0.0;
  /// Real, unit L^2 norm eigenfield with curl X = X / mu.
  SpectralField X;
  /// Lexicographically smallest mode in the eigenvector's support.
  Wavevector leading_mode{};
  /// Number of eigenvalues equal to mu (within the tie tolerance).
  int multiplicity = 0;
};

/// Largest |mu| eigenpair with deterministic tie-breaking: smallest leading admitted
/// wavevector first, then positive mu before negative.
inline TopEigenpair top_eigenpair(const OperatorMatrix& op, double tie_tol = 1e-10) {
  if (op.dimension() == 0) throw PreconditionError("top_eigenpair: empty operator");
  const OperatorSpectrum spec = operator_spectrum(op);
  const auto& vals = spec.eigen.values;
  const auto& vecs = spec.eigen.vectors;
  const double top = spec.max_abs;

  auto leading = [&](Eigen::Index col) {
    const double vmax = vecs.col(col).cwiseAbs().maxCoeff();
    for (std::size_t m = 0; m < op.modes.size(); ++m) {
      const Eigen::Index i = 2 * static_cast<Eigen::Index>(m);
      if (std::abs(vecs(i, col)) > 1e-8 * vmax || std::abs(vecs(i + 1, col)) > 1e-8 * vmax) {
        return m;
      }
    }
    return op.modes.size();
  };

  std::optional<Eigen::Index> best;
  std::size_t best_mode = 0;
  for (Eigen::Index c = 0; c < vals.size(); ++c) {
    if (std::abs(std::abs(vals[c]) - top) > tie_tol * top) continue;
    const std::size_t m = leading(c);
    if (!best || m < best_mode || (m == best_mode && vals[c] > 0.0 && vals[*best] < 0.0)) {
      best = c;
      best_mode = m;
    }
  }
  const Eigen::Index col = *best;
  TopEigenpair out;
  out.mu = vals[col];
  out.leading_mode = op.modes[best_mode];
  for (Eigen::Index c = 0; c < vals.size(); ++c) {
    if (std::abs(vals[c] - out.mu) <= tie_tol * top) ++out.multiplicity;
  }

  // Fix the phase so the leading coordinate is real positive, then take the real part.
  Eigen::VectorXcd v = vecs.col(col);
  const Eigen::Index lead = 2 * static_cast<Eigen::Index>(best_mode);
  const Complex anchor = std::abs(v[lead]) > 1e-8 ? v[lead] : v[lead + 1];
  v *= std::conj(anchor) / std::abs(anchor);
  SpectralField X = hermitian_part(field_from_coordinates(op, v));
  if (l2_norm(X) < 1e-8) X = hermitian_part(Complex(0.0, 1.0) * field_from_coordinates(op, v));
  out.X = (1.0 / l2_norm(X)) * X;
  return out;
}

}  // namespace beltrami
