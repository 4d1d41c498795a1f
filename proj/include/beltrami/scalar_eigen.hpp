#pragma once

// Symmetry-constrained Laplace eigenfunctions and the Beltrami fields they generate.
//
// Given a Killing field Y with curl Y = kappa Y, g(Y, Y) = 1 and a scalar f with
// Delta f = lambda f (positive Laplacian) and Y(f) = 0,
//     mu = kappa/2 + sqrt(kappa^2/4 + lambda),   X = Y x grad f - mu f Y
// satisfies curl X = mu X and [Y, X] = 0. Conversely every such X comes from
//     f = -g(Y, X) / (c mu)   with   Delta f = mu (mu - kappa) f.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "beltrami/catalog.hpp"
#include "beltrami/chartcalc.hpp"
#include "beltrami/core.hpp"
#include "beltrami/direction.hpp"
#include "beltrami/spectral.hpp"
#include "beltrami/symmetric.hpp"

namespace beltrami {

/// Spectral eigenpair on T^3. `f` is real (Hermitian coefficients) and mean free.
struct ScalarEigenpair {
  SpectralScalar f;
  double lambda = 0.0;
  Direction symmetry;
  bool mean_free = true;
  /// Wavevector whose cosine defines f (the tie-break choice).
  Wavevector mode{};
};

/// Lowest eigenvalue of the positive Laplacian on mean-free, band-limited functions
/// invariant under translation by v: lambda = 4 pi^2 min |k|^2 over admitted k.
/// f = 2 cos(2 pi k*.x) with k* the lexicographically smallest minimiser, so that
/// ||f||_{L^2}^2 = 2.
inline ScalarEigenpair solve_constrained_laplacian(const Direction& v, int N) {
  const SymmetricSubspace sub = symmetric_mask(v, N);
  if (sub.empty()) {
    throw NoFirstIntegral("Y = " + v.label() + " admits no non-constant invariant function at truncation N = " +
                          std::to_string(N) +
                          ": the symmetry-constrained Laplace eigenproblem has no admissible f");
  }
  const Wavevector* best = nullptr;
  for (const auto& k : sub.admitted) {  // lexicographic order, so the first minimiser wins ties
    if (!best || norm_squared(k) < norm_squared(*best)) best = &k;
  }
  ScalarEigenpair pair{SpectralScalar(N), kTwoPi * kTwoPi * norm_squared(*best), v, true, *best};
  pair.f.at(*best) = Complex(1.0, 0.0);
  pair.f.at(negate(*best)) = Complex(1.0, 0.0);
  return pair;
}

/// Checks that `pair` is an admissible eigenpair: Y(f) = 0 exactly on the support,
/// Delta f = lambda f mode by mode, and f is not constant.
inline void validate_pair(const ScalarEigenpair& pair) {
  bool nonconstant = false;
  pair.f.for_each([&](const Wavevector& k, const Complex& c) {
    if (std::abs(c) == 0.0) return;
    if (is_zero(k)) throw PreconditionError("scalar eigenfunction must be mean free");
    nonconstant = true;
    if (!pair.symmetry.orthogonal_to(k)) {
      throw PreconditionError("scalar eigenfunction is not invariant under the symmetry");
    }
    const double lk = angular(k).squaredNorm();
    if (std::abs(lk - pair.lambda) > 1e-12 * std::max(1.0, pair.lambda)) {
      throw PreconditionError("scalar function is not a Laplace eigenfunction with the stated lambda");
    }
  });
  if (!nonconstant) throw DegenerateScalar("scalar function is constant; the construction gives X = 0");
}

/// mu = kappa/2 + sqrt(kappa^2/4 + lambda), the positive root of mu^2 - kappa mu - lambda = 0.
inline double beltrami_eigenvalue(double kappa, double lambda) {
  return 0.5 * kappa + std::sqrt(0.25 * kappa * kappa + lambda);
}

namespace detail {
inline void require_beltrami_killing(const KillingEntry& entry) {
  if (!entry.kappa) {
    throw NotBeltramiKilling("symmetry '" + entry.name +
                             "' is not a curl eigenfield (no kappa with curl Y = kappa Y)");
  }
  if (!entry.c || !(*entry.c > 0.0)) {
    throw NotBeltramiKilling("symmetry '" + entry.name + "' has no constant positive g(Y, Y)");
  }
}
}  // namespace detail

struct SpectralConstruction {
  SpectralField X;
  double mu = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  /// The symmetry actually used, rescaled to g(Y, Y) = 1: Y_used = y_scale * Y_entry.
  double y_scale = 1.0;
  Vec3 Y = Vec3::Zero();
  ScalarEigenpair source;
};

inline SpectralConstruction beltrami_from_scalar(const KillingEntry& entry, const ScalarEigenpair& pair) {
  detail::require_beltrami_killing(entry);
  if (!entry.translation) {
    throw PreconditionError("spectral construction needs a translation symmetry on T^3");
  }
  if (!(*entry.translation == pair.symmetry)) {
    throw PreconditionError("eigenpair symmetry does not match the Killing entry");
  }
  validate_pair(pair);
  SpectralConstruction out{SpectralField(pair.f.truncation()), 0.0, pair.lambda, *entry.kappa,
                           1.0 / std::sqrt(*entry.c), Vec3::Zero(), pair};
  out.Y = out.y_scale * entry.translation->numeric();
  out.mu = beltrami_eigenvalue(out.kappa, out.lambda);
  out.X = cross(out.Y, grad_spec(pair.f)) - out.mu * times(pair.f, out.Y);
  return out;
}

struct SpectralRecovery {
  SpectralScalar f;
  /// Upper bounds (coefficient sums) of ||X - (Y x grad f - mu f Y)||_inf and
  /// ||Delta f - mu (mu - kappa) f||_inf.
  double reconstruction_residual = 0.0;
  double eigen_residual = 0.0;
};

/// f = -g(Y, X) / (c mu) with the entry's own (unrescaled) Y and c.
inline SpectralRecovery recover_scalar(const KillingEntry& entry, const SpectralField& X, double mu) {
  detail::require_beltrami_killing(entry);
  if (mu == 0.0) throw PreconditionError("recover_scalar: mu must be non-zero");
  if (!entry.translation) throw PreconditionError("spectral recovery needs a translation symmetry");
  const Vec3 Y = entry.translation->numeric();
  const double c = *entry.c;
  SpectralRecovery r;
  r.f = (-1.0 / (c * mu)) * dot(Y, X);
  const SpectralField rebuilt = cross(Y, grad_spec(r.f)) - mu * times(r.f, Y);
  r.reconstruction_residual = (X - rebuilt).abs_sum();
  r.eigen_residual = (laplacian_spec(r.f) - (mu * (mu - *entry.kappa)) * r.f).abs_sum();
  return r;
}

// ---------------------------------------------------------------- sphere (analytic)

struct AnalyticScalarPair {
  ChartedScalarField f;
  double lambda = 0.0;
  std::string expression;
};

/// f = x1^2 + x2^2 - 1/2 on S^3, the restriction of the harmonic quadratic
/// (x1^2 + x2^2 - x3^2 - x4^2)/2, with Delta f = 8 f and H(f) = 0 for the Hopf field H.
inline AnalyticScalarPair hopf_golden_pair() {
  return {pullback_to_charts([](const auto& y) { return y[0] * y[0] + y[1] * y[1] - 0.5; }), 8.0,
          "x1^2 + x2^2 - 1/2"};
}

struct AnalyticConstruction {
  ChartedVectorField X;
  double mu = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  double y_scale = 1.0;
  ChartedVectorField Y;
  AnalyticScalarPair source;
};

/// Chart-wise X = Y x grad f - mu f Y. grad f follows `cfg` (closed form or finite
/// differences); derivatives of X itself are always taken numerically.
inline AnalyticConstruction beltrami_from_scalar(const KillingEntry& entry, const AnalyticScalarPair& pair,
                                                 const chartcalc::FDConfig& cfg = {}) {
  detail::require_beltrami_killing(entry);
  if (!(pair.lambda > 0.0)) throw PreconditionError("lambda must be positive");
  AnalyticConstruction out;
  out.lambda = pair.lambda;
  out.kappa = *entry.kappa;
  out.y_scale = 1.0 / std::sqrt(*entry.c);
  out.mu = beltrami_eigenvalue(out.kappa, out.lambda);
  out.source = pair;
  // Invariance of f under Y, checked on samples.
  double max_yf = 0.0;
  double max_f = 0.0;
  for (const auto& p : entry_sample_points(entry, 4)) {
    const ManifoldModel m = entry.model_in(p.chart);
    const Vec3 gf = chartcalc::grad(m, pair.f.in(p.chart), p.x, cfg);
    max_yf = std::max(max_yf, std::abs(chartcalc::inner(m, p.x, entry.field(p.chart).value(p.x), gf)));
    max_f = std::max(max_f, chartcalc::norm(m, p.x, gf));
  }
  if (max_f < 1e-12) throw DegenerateScalar("scalar function is constant; the construction gives X = 0");
  if (max_yf > 1e-6 * std::max(1.0, max_f)) {
    throw PreconditionError("scalar function is not invariant under the symmetry (Y(f) != 0)");
  }
  for (Chart ch : {Chart::north, Chart::south}) {
    const ManifoldModel m = entry.model_in(ch);
    const VectorField Y = entry.field(ch);
    const ScalarField f = pair.f.in(ch);
    const double s = out.y_scale;
    const double mu = out.mu;
    VectorField Ys = numeric_vector_field([Y, s](const Vec3& p) -> Vec3 { return s * Y.value(p); });
    if (Y.analytic()) {
      Ys.jacobian = [Y, s](const Vec3& p) -> Mat3 { return s * Y.jacobian(p); };
    }
    VectorField X = numeric_vector_field([m, Y, f, s, mu, cfg](const Vec3& p) -> Vec3 {
      const Vec3 y = s * Y.value(p);
      return chartcalc::cross(m, p, y, chartcalc::grad(m, f, p, cfg)) - mu * f.value(p) * y;
    });
    (ch == Chart::north ? out.X.north : out.X.south) = X;
    (ch == Chart::north ? out.Y.north : out.Y.south) = Ys;
  }
  return out;
}

struct AnalyticRecovery {
  ChartedScalarField f;
  double reconstruction_residual = 0.0;  ///< max_g |X - (Y x grad f - mu f Y)|
  double eigen_residual = 0.0;           ///< max |Delta f - mu (mu - kappa) f|
};

inline AnalyticRecovery recover_scalar(const KillingEntry& entry, const ChartedVectorField& X, double mu,
                                       const std::vector<ChartPoint>& samples,
                                       const chartcalc::FDConfig& cfg = {}) {
  detail::require_beltrami_killing(entry);
  if (mu == 0.0) throw PreconditionError("recover_scalar: mu must be non-zero");
  const double c = *entry.c;
  AnalyticRecovery r;
  for (Chart ch : {Chart::north, Chart::south}) {
    const ManifoldModel m = entry.model_in(ch);
    const VectorField Y = entry.field(ch);
    const VectorField Xc = X.in(ch);
    ScalarField f = numeric_scalar_field([m, Y, Xc, c, mu](const Vec3& p) {
      return -chartcalc::inner(m, p, Y.value(p), Xc.value(p)) / (c * mu);
    });
    (ch == Chart::north ? r.f.north : r.f.south) = f;
  }
  for (const auto& p : samples) {
    const ManifoldModel m = entry.model_in(p.chart);
    const VectorField& Y = entry.field(p.chart);
    const ScalarField& f = r.f.in(p.chart);
    const Vec3 y = Y.value(p.x);
    const Vec3 rebuilt = chartcalc::cross(m, p.x, y, chartcalc::grad(m, f, p.x, cfg)) - mu * f.value(p.x) * y;
    r.reconstruction_residual =
        std::max(r.reconstruction_residual, chartcalc::norm(m, p.x, X.in(p.chart).value(p.x) - rebuilt));
    const double lap = chartcalc::laplacian(m, f, p.x, cfg);
    r.eigen_residual = std::max(r.eigen_residual, std::abs(lap - mu * (mu - *entry.kappa) * f.value(p.x)));
  }
  return r;
}

}  // namespace beltrami
