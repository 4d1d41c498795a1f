#pragma once

// Closed-form Killing fields on the model manifolds.
//
//   t3_e1, t3_e2, t3_e3   unit translations of T^3           kappa = 0, c = 1
//   t3_irrational         e1 + sqrt2 e2 + sqrt6 e3           kappa = 0, c = 9, no first integral
//   s3_hopf               (x1,x2,x3,x4) -> (-x2,x1,-x4,x3)   kappa = 2, c = 1
//   r3_rotation_patch     (-y, x, 0) on the box (1,2)^2 x (0,1); not Beltrami

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "beltrami/chartcalc.hpp"
#include "beltrami/core.hpp"
#include "beltrami/direction.hpp"
#include "beltrami/field.hpp"
#include "beltrami/model.hpp"
#include "beltrami/symmetric.hpp"

namespace beltrami {

struct FirstIntegral {
  std::string expression;
  ChartedScalarField f;
};

struct KillingEntry {
  std::string name;
  std::string description;
  ManifoldModel model;
  std::string field_expression;
  ChartedVectorField Y;
  /// curl Y = kappa Y, when such a constant exists.
  std::optional<double> kappa;
  /// g(Y, Y), when constant.
  std::optional<double> c;
  std::vector<FirstIntegral> first_integrals;
  /// Set for translation fields on T^3.
  std::optional<Direction> translation;
  /// Sampling box (lower, upper) for entries that only live on a chart patch.
  std::optional<std::array<Vec3, 2>> patch;

  const VectorField& field(Chart ch = Chart::north) const { return Y.in(ch); }
  ManifoldModel model_in(Chart ch) const { return model.is_sphere() ? model.with_chart(ch) : model; }
};

namespace catalog_detail {

inline ChartedScalarField torus_scalar(ScalarField f) { return {f, f}; }

inline std::string axis_letter(int j) { return std::string(1, "xyz"[j]); }

}  // namespace catalog_detail

/// Hopf field pushed into a stereographic chart; the closed form is identical in
/// both charts (pinned against the generic pushforward by a regression test).
template <class T>
Eigen::Matrix<T, 3, 1> hopf_chart_closed_form(const Eigen::Matrix<T, 3, 1>& x) {
  Eigen::Matrix<T, 3, 1> v;
  v << x[0] * x[2] - x[1], x[0] + x[1] * x[2],
      T(0.5) * (T(1.0) + x[2] * x[2] - x[0] * x[0] - x[1] * x[1]);
  return v;
}

template <class T>
Eigen::Matrix<T, 4, 1> hopf_ambient(const Eigen::Matrix<T, 4, 1>& y) {
  Eigen::Matrix<T, 4, 1> w;
  w << -y[1], y[0], -y[3], y[2];
  return w;
}

inline KillingEntry translation_entry(const Direction& v, std::string name = {}) {
  const Vec3 y = v.numeric();
  KillingEntry e{name.empty() ? "t3_" + v.label() : std::move(name),
                 "translation along (" + v.components_string() + ") on the flat 3-torus",
                 ManifoldModel::flat_torus(),
                 "(" + v.components_string() + ")",
                 {constant_vector_field(y), constant_vector_field(y)},
                 0.0,
                 v.norm_squared(),
                 {},
                 v,
                 std::nullopt};
  // Coordinate axes: the periodic coordinate functions transverse to the axis.
  for (int axis = 0; axis < 3; ++axis) {
    if (!(v == Direction::axis(axis))) continue;
    for (int j = 0; j < 3; ++j) {
      if (j == axis) continue;
      ScalarField f = analytic_scalar_field([j](const auto& x) {
        using std::sin;
        return sin(kTwoPi * x[j]);
      });
      e.first_integrals.push_back({"sin(2 pi " + catalog_detail::axis_letter(j) + ")",
                                   catalog_detail::torus_scalar(f)});
    }
  }
  return e;
}

inline std::vector<std::string> catalog_names() {
  return {"t3_e1", "t3_e2", "t3_e3", "t3_irrational", "s3_hopf", "r3_rotation_patch"};
}

inline KillingEntry catalog_get(const std::string& name) {
  if (name == "t3_e1") return translation_entry(Direction::axis(0), name);
  if (name == "t3_e2") return translation_entry(Direction::axis(1), name);
  if (name == "t3_e3") return translation_entry(Direction::axis(2), name);
  if (name == "t3_irrational") {
    KillingEntry e = translation_entry(Direction::irrational(), name);
    e.description = "translation along the rationally independent direction (1, sqrt2, sqrt6)";
    e.c = 9.0;
    return e;
  }
  if (name == "s3_hopf") {
    auto ambient = [](const auto& y) { return hopf_ambient(y); };
    ChartedScalarField fi = pullback_to_charts([](const auto& y) { return y[0] * y[0] + y[1] * y[1]; });
    return KillingEntry{name,
                        "Hopf field on the round unit 3-sphere (Killing and Beltrami)",
                        ManifoldModel::round_sphere(Chart::north),
                        "(x1,x2,x3,x4) -> (-x2,x1,-x4,x3)",
                        pushforward_to_charts(ambient),
                        2.0,
                        1.0,
                        {{"x1^2 + x2^2", fi}},
                        std::nullopt,
                        std::nullopt};
  }
  if (name == "r3_rotation_patch") {
    VectorField rot = analytic_vector_field([](const auto& x) {
      using T = typename std::decay_t<decltype(x)>::Scalar;
      Eigen::Matrix<T, 3, 1> v;
      v << -x[1], x[0], T(0.0);
      return v;
    });
    ScalarField r2 = analytic_scalar_field([](const auto& x) { return x[0] * x[0] + x[1] * x[1]; });
    ScalarField z = analytic_scalar_field([](const auto& x) { return x[2]; });
    return KillingEntry{name,
                        "rotation about the z-axis on a flat chart box off the axis",
                        ManifoldModel::flat_torus(),
                        "(-y, x, 0)",
                        {rot, rot},
                        std::nullopt,
                        std::nullopt,
                        {{"x^2 + y^2", {r2, r2}}, {"z", {z, z}}},
                        std::nullopt,
                        std::array<Vec3, 2>{Vec3(1.0, 1.0, 0.0), Vec3(2.0, 2.0, 1.0)}};
  }
  throw UnknownEntry("unknown catalog entry '" + name + "'");
}

/// Number of non-zero band-limited scalar modes exp(2 pi i k.x) with k . v = 0, |k|_inf <= N.
/// Zero means no non-constant band-limited first integral of Y = v exists at this truncation.
inline std::size_t first_integral_existence(const Direction& v, int N) {
  return symmetric_mask(v, N).admitted.size();
}

/// n^3 sample points for an entry: cell centres of the unit cube (torus), of the
/// patch box (patch entries), or of [-1.5, 1.5]^3 in the north chart with points
/// beyond the switch radius moved to the south chart (sphere).
inline std::vector<ChartPoint> entry_sample_points(const KillingEntry& e, int n) {
  std::vector<ChartPoint> pts;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  if (e.patch) {
    lo = (*e.patch)[0];
    hi = (*e.patch)[1];
  } else if (e.model.is_sphere()) {
    lo = Vec3::Constant(-1.5);
    hi = Vec3::Constant(1.5);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const Vec3 t((i + 0.5) / n, (j + 0.5) / n, (l + 0.5) / n);
        ChartPoint p{Chart::north, lo + t.cwiseProduct(hi - lo)};
        if (e.model.is_sphere()) p = preferred_chart(p);
        pts.push_back(p);
      }
  return pts;
}

struct EntryCheck {
  double killing = 0.0;         ///< max |(L_Y g)_ij|
  double curl = 0.0;            ///< max |curl Y - kappa Y|_g (0 when kappa absent)
  double norm = 0.0;            ///< max |g(Y,Y) - c| (0 when c absent)
  double first_integrals = 0.0; ///< max |g(Y, grad f)| over listed first integrals
  double divergence = 0.0;      ///< max |div Y|
};

inline EntryCheck check_entry(const KillingEntry& e, const std::vector<ChartPoint>& pts,
                              const chartcalc::FDConfig& cfg) {
  EntryCheck r;
  for (const auto& p : pts) {
    const ManifoldModel m = e.model_in(p.chart);
    const VectorField& Y = e.field(p.chart);
    const Vec3 y = Y.value(p.x);
    r.killing = std::max(r.killing, chartcalc::killing_residual(m, Y, p.x, cfg).cwiseAbs().maxCoeff());
    r.divergence = std::max(r.divergence, std::abs(chartcalc::div(m, Y, p.x, cfg)));
    if (e.kappa) {
      const Vec3 d = chartcalc::curl(m, Y, p.x, cfg) - *e.kappa * y;
      r.curl = std::max(r.curl, chartcalc::norm(m, p.x, d));
    }
    if (e.c) r.norm = std::max(r.norm, std::abs(chartcalc::inner(m, p.x, y, y) - *e.c));
    for (const auto& fi : e.first_integrals) {
      const Vec3 gf = chartcalc::grad(m, fi.f.in(p.chart), p.x, cfg);
      r.first_integrals = std::max(r.first_integrals, std::abs(chartcalc::inner(m, p.x, y, gf)));
    }
  }
  return r;
}

}  // namespace beltrami
