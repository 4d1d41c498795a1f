#pragma once

// Chart-described model Riemannian 3-manifolds: the flat 3-torus and the round
// unit 3-sphere in two stereographic charts.
//
// Sphere charts (orientation fixed by eps^{123} = +1 in each chart):
//   north: x = (y1, y2, y3) / (1 - y4)      projection from (0,0,0,1)
//   south: x = (y1, y2, -y3) / (1 + y4)     projection from (0,0,0,-1), x3 reflected
// The reflection in the south chart makes the transition map orientation
// preserving, so curl has the same sign in both charts.

#include <cmath>
#include <string>

#include "beltrami/core.hpp"

namespace beltrami {

enum class ModelKind { flat_torus, round_sphere };
enum class Chart { north, south };

/// Chart points with |x| above this radius are evaluated in the antipodal chart.
inline constexpr double kChartSwitchRadius = 2.0;

inline Chart antipodal(Chart c) { return c == Chart::north ? Chart::south : Chart::north; }

inline const char* to_string(Chart c) { return c == Chart::north ? "north" : "south"; }

struct ChartPoint {
  Chart chart = Chart::north;
  Vec3 x = Vec3::Zero();
};

class ManifoldModel {
 public:
  static ManifoldModel flat_torus(const Vec3& periods = Vec3::Ones()) {
    if (!(periods.array() > 0.0).all() || !periods.allFinite()) {
      throw PreconditionError("flat torus periods must be positive and finite");
    }
    ManifoldModel m;
    m.kind_ = ModelKind::flat_torus;
    m.periods_ = periods;
    return m;
  }

  static ManifoldModel round_sphere(Chart chart = Chart::north) {
    ManifoldModel m;
    m.kind_ = ModelKind::round_sphere;
    m.chart_ = chart;
    return m;
  }

  ModelKind kind() const noexcept { return kind_; }
  Chart chart() const noexcept { return chart_; }
  const Vec3& periods() const noexcept { return periods_; }
  bool is_torus() const noexcept { return kind_ == ModelKind::flat_torus; }
  bool is_sphere() const noexcept { return kind_ == ModelKind::round_sphere; }

  ManifoldModel with_chart(Chart c) const {
    ManifoldModel m = *this;
    m.chart_ = c;
    return m;
  }

  std::string name() const {
    return is_torus() ? "flat_torus" : std::string("round_sphere/") + to_string(chart_);
  }

  friend bool operator==(const ManifoldModel& a, const ManifoldModel& b) {
    return a.kind_ == b.kind_ && a.chart_ == b.chart_ && a.periods_ == b.periods_;
  }

 private:
  ManifoldModel() = default;
  ModelKind kind_ = ModelKind::flat_torus;
  Chart chart_ = Chart::north;
  Vec3 periods_ = Vec3::Ones();
};

namespace detail {
inline void require_finite(const Vec3& p) {
  if (!p.allFinite()) throw DomainError("non-finite chart point");
}
}  // namespace detail

/// Conformal factor 4 / (1 + |x|^2)^2 of the stereographic metric.
inline double conformal_factor(const Vec3& x) {
  const double s = 1.0 + x.squaredNorm();
  return 4.0 / (s * s);
}

inline Mat3 metric_at(const ManifoldModel& model, const Vec3& p) {
  detail::require_finite(p);
  if (model.is_torus()) return Mat3::Identity();
  return conformal_factor(p) * Mat3::Identity();
}

inline Mat3 inverse_metric_at(const ManifoldModel& model, const Vec3& p) {
  detail::require_finite(p);
  if (model.is_torus()) return Mat3::Identity();
  return Mat3::Identity() / conformal_factor(p);
}

/// sqrt(det g)
inline double volume_density(const ManifoldModel& model, const Vec3& p) {
  detail::require_finite(p);
  if (model.is_torus()) return 1.0;
  const double phi2 = conformal_factor(p);
  return phi2 * std::sqrt(phi2);
}

/// Closed-form partial derivatives d_k g_ij, indexed [k](i, j).
inline std::array<Mat3, 3> metric_derivative(const ManifoldModel& model, const Vec3& p) {
  detail::require_finite(p);
  std::array<Mat3, 3> out{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  if (model.is_torus()) return out;
  const double s = 1.0 + p.squaredNorm();
  const double c = -16.0 / (s * s * s);
  for (int k = 0; k < 3; ++k) out[k] = c * p[k] * Mat3::Identity();
  return out;
}

/// d_k sqrt(det g)
inline Vec3 volume_density_gradient(const ManifoldModel& model, const Vec3& p) {
  detail::require_finite(p);
  if (model.is_torus()) return Vec3::Zero();
  // sqrt(det g) = 8 / s^3 with s = 1 + |x|^2
  const double s = 1.0 + p.squaredNorm();
  return (-48.0 / (s * s * s * s)) * p;
}

/// Wraps torus coordinates into [0, L); identity on the sphere.
inline Vec3 wrap(const ManifoldModel& model, const Vec3& p) {
  if (!model.is_torus()) return p;
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    const double L = model.periods()[i];
    out[i] = p[i] - L * std::floor(p[i] / L);
    if (out[i] >= L) out[i] -= L;
  }
  return out;
}

// --- stereographic charts, templated on the scalar type so they can be
//     differentiated with forward-mode automatic differentiation ---

template <class T>
Eigen::Matrix<T, 4, 1> chart_to_ambient(Chart chart, const Eigen::Matrix<T, 3, 1>& x) {
  const T r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  const T inv = T(1.0) / (T(1.0) + r2);
  Eigen::Matrix<T, 4, 1> y;
  y[0] = T(2.0) * x[0] * inv;
  y[1] = T(2.0) * x[1] * inv;
  if (chart == Chart::north) {
    y[2] = T(2.0) * x[2] * inv;
    y[3] = (r2 - T(1.0)) * inv;
  } else {
    y[2] = T(-2.0) * x[2] * inv;
    y[3] = (T(1.0) - r2) * inv;
  }
  return y;
}

template <class T>
Eigen::Matrix<T, 3, 1> ambient_to_chart(Chart chart, const Eigen::Matrix<T, 4, 1>& y) {
  Eigen::Matrix<T, 3, 1> x;
  if (chart == Chart::north) {
    const T d = T(1.0) / (T(1.0) - y[3]);
    x << y[0] * d, y[1] * d, y[2] * d;
  } else {
    const T d = T(1.0) / (T(1.0) + y[3]);
    x << y[0] * d, y[1] * d, -y[2] * d;
  }
  return x;
}

/// Pushforward D(sigma)(y) w of an ambient tangent vector w at y into chart components.
template <class T>
Eigen::Matrix<T, 3, 1> ambient_pushforward(Chart chart, const Eigen::Matrix<T, 4, 1>& y,
                                           const Eigen::Matrix<T, 4, 1>& w) {
  Eigen::Matrix<T, 3, 1> v;
  if (chart == Chart::north) {
    const T d = T(1.0) / (T(1.0) - y[3]);
    const T d2 = d * d;
    v << w[0] * d + y[0] * w[3] * d2, w[1] * d + y[1] * w[3] * d2,
        w[2] * d + y[2] * w[3] * d2;
  } else {
    const T d = T(1.0) / (T(1.0) + y[3]);
    const T d2 = d * d;
    v << w[0] * d - y[0] * w[3] * d2, w[1] * d - y[1] * w[3] * d2,
        -w[2] * d + y[2] * w[3] * d2;
  }
  return v;
}

/// Pullback of a chart vector at chart point x to the ambient tangent vector.
inline Vec4 chart_vector_to_ambient(Chart chart, const Vec3& x, const Vec3& v) {
  // Differentiate chart_to_ambient along v by its closed-form Jacobian.
  const double r2 = x.squaredNorm();
  const double s = 1.0 + r2;
  const double xv = x.dot(v);
  Vec4 w;
  const double sign3 = chart == Chart::north ? 1.0 : -1.0;
  for (int i = 0; i < 3; ++i) {
    const double sgn = (i == 2) ? sign3 : 1.0;
    w[i] = sgn * (2.0 * v[i] / s - 4.0 * x[i] * xv / (s * s));
  }
  // d/dt (r2 - 1)/(1 + r2) = 4 x.v / s^2
  w[3] = sign3 * 4.0 * xv / (s * s);
  return w;
}

inline Vec4 to_ambient(const ChartPoint& p) { return chart_to_ambient<double>(p.chart, p.x); }

inline ChartPoint from_ambient(const Vec4& y, Chart chart) {
  return ChartPoint{chart, ambient_to_chart<double>(chart, y)};
}

inline ChartPoint switch_chart(const ChartPoint& p, Chart to) {
  if (p.chart == to) return p;
  return from_ambient(to_ambient(p), to);
}

/// Moves points beyond the switch radius into the antipodal chart.
inline ChartPoint preferred_chart(const ChartPoint& p) {
  detail::require_finite(p.x);
  if (p.x.norm() > kChartSwitchRadius) return switch_chart(p, antipodal(p.chart));
  return p;
}

}  // namespace beltrami
