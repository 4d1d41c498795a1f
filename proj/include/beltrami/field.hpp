#pragma once

// Point-evaluable scalar and vector fields on chart coordinates.
//
// A field carries its value and, when known in closed form, its first
// derivatives. Closed-form derivatives come from forward-mode automatic
// differentiation of a functor templated on the scalar type; fields without
// them are differentiated by central finite differences in chartcalc.

#include <functional>
#include <type_traits>
#include <utility>

#include <unsupported/Eigen/AutoDiff>

#include "beltrami/core.hpp"
#include "beltrami/model.hpp"

namespace beltrami {

struct ScalarField {
  std::function<double(const Vec3&)> value;
  /// Chart partial derivatives d_j f; empty when the field has no closed form.
  std::function<Vec3(const Vec3&)> partials;

  bool analytic() const noexcept { return static_cast<bool>(partials); }
  double operator()(const Vec3& p) const { return value(p); }
};

struct VectorField {
  std::function<Vec3(const Vec3&)> value;
  /// J(i, j) = d_j X^i; empty when the field has no closed form.
  std::function<Mat3(const Vec3&)> jacobian;

  bool analytic() const noexcept { return static_cast<bool>(jacobian); }
  Vec3 operator()(const Vec3& p) const { return value(p); }
};

/// One representation per sphere chart. Torus fields only use `north`.
template <class Field>
struct Charted {
  Field north;
  Field south;
  const Field& in(Chart c) const { return c == Chart::north ? north : south; }
};

using ChartedVectorField = Charted<VectorField>;
using ChartedScalarField = Charted<ScalarField>;

using Dual3 = Eigen::AutoDiffScalar<Eigen::Vector3d>;
using DualVec3 = Eigen::Matrix<Dual3, 3, 1>;

namespace detail {
inline DualVec3 seed_dual(const Vec3& p) {
  DualVec3 x;
  for (int i = 0; i < 3; ++i) x[i] = Dual3(p[i], 3, i);
  return x;
}
}  // namespace detail

/// Wraps a functor `f(const Eigen::Matrix<T,3,1>&) -> Eigen::Matrix<T,3,1>` that is
/// generic in T. The Jacobian is exact (forward-mode AD).
template <class F>
VectorField analytic_vector_field(F f) {
  VectorField out;
  out.value = [f](const Vec3& p) -> Vec3 { return f(p); };
  out.jacobian = [f](const Vec3& p) -> Mat3 {
    const auto y = f(detail::seed_dual(p));
    Mat3 J;
    for (int i = 0; i < 3; ++i) J.row(i) = y[i].derivatives().transpose();
    return J;
  };
  return out;
}

/// Scalar counterpart of analytic_vector_field: `f(const Eigen::Matrix<T,3,1>&) -> T`.
template <class F>
ScalarField analytic_scalar_field(F f) {
  ScalarField out;
  out.value = [f](const Vec3& p) -> double { return f(p); };
  out.partials = [f](const Vec3& p) -> Vec3 {
    const Dual3 y = f(detail::seed_dual(p));
    return y.derivatives();
  };
  return out;
}

inline VectorField numeric_vector_field(std::function<Vec3(const Vec3&)> f) {
  return VectorField{std::move(f), {}};
}

inline ScalarField numeric_scalar_field(std::function<double(const Vec3&)> f) {
  return ScalarField{std::move(f), {}};
}

inline VectorField constant_vector_field(const Vec3& v) {
  return VectorField{[v](const Vec3&) { return v; }, [](const Vec3&) -> Mat3 { return Mat3::Zero(); }};
}

inline ScalarField constant_scalar_field(double c) {
  return ScalarField{[c](const Vec3&) { return c; }, [](const Vec3&) -> Vec3 { return Vec3::Zero(); }};
}

/// Drops closed-form derivatives so every derivative goes through finite differences.
inline VectorField without_derivatives(VectorField f) {
  f.jacobian = nullptr;
  return f;
}

inline ScalarField without_derivatives(ScalarField f) {
  f.partials = nullptr;
  return f;
}

/// Pushes an ambient tangent field on S^3 (functor R^4 -> R^4, generic in T)
/// into the given stereographic chart.
template <class F>
VectorField pushforward_to_chart(Chart chart, F ambient) {
  return analytic_vector_field([chart, ambient](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    const Eigen::Matrix<T, 4, 1> y = chart_to_ambient<T>(chart, x);
    const Eigen::Matrix<T, 4, 1> w = ambient(y);
    return Eigen::Matrix<T, 3, 1>(ambient_pushforward<T>(chart, y, w));
  });
}

template <class F>
ChartedVectorField pushforward_to_charts(F ambient) {
  return {pushforward_to_chart(Chart::north, ambient), pushforward_to_chart(Chart::south, ambient)};
}

/// Pulls an ambient function on S^3 (functor R^4 -> R, generic in T) back to a chart.
template <class F>
ScalarField pullback_to_chart(Chart chart, F ambient) {
  return analytic_scalar_field([chart, ambient](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return T(ambient(chart_to_ambient<T>(chart, x)));
  });
}

template <class F>
ChartedScalarField pullback_to_charts(F ambient) {
  return {pullback_to_chart(Chart::north, ambient), pullback_to_chart(Chart::south, ambient)};
}

}  // namespace beltrami
