#pragma once

// Pointwise Riemannian vector calculus in a chart.
//
// Conventions: vectors are given by their chart-frame components X^i; the
// orientation is eps^{123} = +1 in every chart; the Laplacian is the positive
// operator -div(grad).
//
//   grad f        = g^{-1} df
//   (curl X)^i    = (1/sqrt g) eps^{ijk} d_j (g_kl X^l)
//   div X         = (1/sqrt g) d_i (sqrt g X^i)
//   [X, Y]^i      = X^j d_j Y^i - Y^j d_j X^i
//   (u x v)^i     = g^{il} sqrt g eps_{ljk} u^j v^k
//   (L_Y g)_ij    = Y^k d_k g_ij + g_kj d_i Y^k + g_ik d_j Y^k
//
// Derivatives use closed forms where every ingredient has one and
// DerivativeMode::analytic_if_available is selected; otherwise the whole
// composite expression is differentiated by central differences.

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "beltrami/core.hpp"
#include "beltrami/field.hpp"
#include "beltrami/model.hpp"

namespace beltrami::chartcalc {

enum class DerivativeMode { analytic_if_available, finite_difference };

struct FDConfig {
  double h = 1e-3;
  int order = 2;
  DerivativeMode mode = DerivativeMode::analytic_if_available;

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw PreconditionError("FD step h must be positive");
    if (order != 2 && order != 4) throw PreconditionError("FD stencil order must be 2 or 4");
  }
  bool use_closed_form() const { return mode == DerivativeMode::analytic_if_available; }

  static FDConfig finite_difference(double step, int stencil_order = 2) {
    return FDConfig{step, stencil_order, DerivativeMode::finite_difference};
  }
};

namespace detail {

template <class T>
bool all_finite(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::isfinite(v);
  } else {
    return v.allFinite();
  }
}

/// Central difference of f along coordinate axis `axis` at p.
template <class F>
auto central_difference(const F& f, const Vec3& p, int axis, const FDConfig& cfg) {
  const double h = cfg.h;
  auto at = [&](double s) {
    Vec3 q = p;
    q[axis] += s * h;
    auto v = f(q);
    if (!all_finite(v)) throw DomainError("finite-difference stencil left the chart domain");
    return v;
  };
  if (cfg.order == 2) {
    auto fp = at(1.0);
    auto fm = at(-1.0);
    return decltype(fp)((fp - fm) / (2.0 * h));
  }
  auto f2 = at(2.0);
  auto f1 = at(1.0);
  auto m1 = at(-1.0);
  auto m2 = at(-2.0);
  return decltype(f1)((-f2 + 8.0 * f1 - 8.0 * m1 + m2) / (12.0 * h));
}

}  // namespace detail

// ---------------------------------------------------------------- derivatives

inline Vec3 partials(const ScalarField& f, const Vec3& p, const FDConfig& cfg) {
  cfg.validate();
  ::beltrami::detail::require_finite(p);
  if (cfg.use_closed_form() && f.analytic()) return f.partials(p);
  Vec3 d;
  for (int j = 0; j < 3; ++j) d[j] = detail::central_difference(f.value, p, j, cfg);
  return d;
}

/// J(i, j) = d_j X^i
inline Mat3 jacobian(const VectorField& X, const Vec3& p, const FDConfig& cfg) {
  cfg.validate();
  ::beltrami::detail::require_finite(p);
  if (cfg.use_closed_form() && X.analytic()) return X.jacobian(p);
  Mat3 J;
  for (int j = 0; j < 3; ++j) J.col(j) = detail::central_difference(X.value, p, j, cfg);
  return J;
}

/// d_k g_ij, closed form unless finite differences are forced.
inline std::array<Mat3, 3> metric_partials(const ManifoldModel& model, const Vec3& p,
                                           const FDConfig& cfg) {
  if (cfg.use_closed_form()) return metric_derivative(model, p);
  std::array<Mat3, 3> out;
  auto g = [&](const Vec3& q) -> Mat3 { return metric_at(model, q); };
  for (int k = 0; k < 3; ++k) out[k] = detail::central_difference(g, p, k, cfg);
  return out;
}

// ------------------------------------------------------------------- algebra

inline double inner(const ManifoldModel& model, const Vec3& p, const Vec3& u, const Vec3& v) {
  return u.dot(metric_at(model, p) * v);
}

inline double norm(const ManifoldModel& model, const Vec3& p, const Vec3& u) {
  return std::sqrt(std::max(0.0, inner(model, p, u, u)));
}

inline Vec3 cross(const ManifoldModel& model, const Vec3& p, const Vec3& u, const Vec3& v) {
  return volume_density(model, p) * (inverse_metric_at(model, p) * u.cross(v));
}

// ------------------------------------------------------------------- operators

inline Vec3 grad(const ManifoldModel& model, const ScalarField& f, const Vec3& p,
                 const FDConfig& cfg) {
  return inverse_metric_at(model, p) * partials(f, p, cfg);
}

inline Vec3 curl(const ManifoldModel& model, const VectorField& X, const Vec3& p,
                 const FDConfig& cfg) {
  cfg.validate();
  Mat3 dw;  // dw(k, j) = d_j (g_kl X^l)
  if (cfg.use_closed_form() && X.analytic()) {
    const auto dg = metric_derivative(model, p);
    const Vec3 x = X.value(p);
    dw = metric_at(model, p) * X.jacobian(p);
    for (int j = 0; j < 3; ++j) dw.col(j) += dg[j] * x;
  } else {
    auto lowered = [&](const Vec3& q) -> Vec3 { return metric_at(model, q) * X.value(q); };
    for (int j = 0; j < 3; ++j) dw.col(j) = detail::central_difference(lowered, p, j, cfg);
  }
  const Vec3 c(dw(2, 1) - dw(1, 2), dw(0, 2) - dw(2, 0), dw(1, 0) - dw(0, 1));
  return c / volume_density(model, p);
}

inline double div(const ManifoldModel& model, const VectorField& X, const Vec3& p,
                  const FDConfig& cfg) {
  cfg.validate();
  const double vol = volume_density(model, p);
  if (cfg.use_closed_form() && X.analytic()) {
    return volume_density_gradient(model, p).dot(X.value(p)) / vol + X.jacobian(p).trace();
  }
  auto weighted = [&](const Vec3& q) -> Vec3 { return volume_density(model, q) * X.value(q); };
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += detail::central_difference(weighted, p, i, cfg)[i];
  return s / vol;
}

/// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i. Metric independent; `model` only fixes the chart.
inline Vec3 lie_bracket(const ManifoldModel& /*model*/, const VectorField& X,
                        const VectorField& Y, const Vec3& p, const FDConfig& cfg) {
  return jacobian(Y, p, cfg) * X.value(p) - jacobian(X, p, cfg) * Y.value(p);
}

inline Mat3 killing_residual(const ManifoldModel& model, const VectorField& Y, const Vec3& p,
                             const FDConfig& cfg) {
  const Mat3 g = metric_at(model, p);
  const auto dg = metric_partials(model, p, cfg);
  const Vec3 y = Y.value(p);
  const Mat3 J = jacobian(Y, p, cfg);
  Mat3 r = J.transpose() * g + g * J;
  for (int k = 0; k < 3; ++k) r += y[k] * dg[k];
  return r;
}

// ------------------------------------------------------- composite field builders

/// g(X, Y) as a scalar field; closed-form partials when both inputs have them.
inline ScalarField inner_field(const ManifoldModel& model, const VectorField& X,
                               const VectorField& Y) {
  ScalarField out;
  out.value = [model, X, Y](const Vec3& p) { return inner(model, p, X.value(p), Y.value(p)); };
  if (X.analytic() && Y.analytic()) {
    out.partials = [model, X, Y](const Vec3& p) -> Vec3 {
      const Mat3 g = metric_at(model, p);
      const auto dg = metric_derivative(model, p);
      const Vec3 x = X.value(p);
      const Vec3 y = Y.value(p);
      const Mat3 JX = X.jacobian(p);
      const Mat3 JY = Y.jacobian(p);
      Vec3 d;
      for (int k = 0; k < 3; ++k) {
        d[k] = x.dot(dg[k] * y) + JX.col(k).dot(g * y) + x.dot(g * JY.col(k));
      }
      return d;
    };
  }
  return out;
}

inline VectorField grad_field(const ManifoldModel& model, const ScalarField& f,
                              const FDConfig& cfg) {
  return numeric_vector_field([model, f, cfg](const Vec3& p) { return grad(model, f, p, cfg); });
}

inline VectorField curl_field(const ManifoldModel& model, const VectorField& X,
                              const FDConfig& cfg) {
  return numeric_vector_field([model, X, cfg](const Vec3& p) { return curl(model, X, p, cfg); });
}

inline VectorField cross_field(const ManifoldModel& model, const VectorField& X,
                               const VectorField& Y) {
  return numeric_vector_field(
      [model, X, Y](const Vec3& p) { return cross(model, p, X.value(p), Y.value(p)); });
}

// -------------------------------------------------------- derived quantities

/// Positive Laplacian -div(grad f).
inline double laplacian(const ManifoldModel& model, const ScalarField& f, const Vec3& p,
                        const FDConfig& cfg) {
  return -div(model, grad_field(model, f, cfg), p, cfg);
}

/// nabla_Y Y = (1/2) grad g(Y, Y) - Y x curl Y
inline Vec3 covariant_accel(const ManifoldModel& model, const VectorField& Y, const Vec3& p,
                            const FDConfig& cfg) {
  const Vec3 half_grad = 0.5 * grad(model, inner_field(model, Y, Y), p, cfg);
  return half_grad - cross(model, p, Y.value(p), curl(model, Y, p, cfg));
}

/// grad g(X, Y) - Y x curl X - [Y, X]; vanishes whenever Y is Killing.
inline Vec3 identity_residual(const ManifoldModel& model, const VectorField& X,
                              const VectorField& Y, const Vec3& p, const FDConfig& cfg) {
  const Vec3 g_term = grad(model, inner_field(model, X, Y), p, cfg);
  const Vec3 c_term = cross(model, p, Y.value(p), curl(model, X, p, cfg));
  const Vec3 b_term = lie_bracket(model, Y, X, p, cfg);
  return g_term - c_term - b_term;
}

}  // namespace beltrami::chartcalc
