#pragma once

// Field-line integration with an adaptive Dormand-Prince 5(4) pair and dense output.
//
// Torus: the state is the unwrapped lift u; samples store u mod L together with
// integer winding counters floor(u / L). Steps that would move any coordinate by
// half a period or more are rejected, so counters change by at most one per step.
// Sphere: the state lives in a stereographic chart and is moved to the other chart
// after any step that ends outside |x| <= 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "beltrami/chartcalc.hpp"
#include "beltrami/core.hpp"
#include "beltrami/field.hpp"
#include "beltrami/model.hpp"

namespace beltrami {

struct IntegrateOptions {
  /// Local error per unit step: max_i |err_i| <= tol * |h|.
  double tol = 1e-10;
  double max_step = 0.1;
  double initial_step = 1e-3;
  /// Stop once the accumulated chord length reaches this value (if finite).
  double max_arc_length = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 100'000'000;
  /// |X| below this at the current point counts as a zero of the field.
  double zero_speed = 1e-12;
  /// Keep every k-th accepted step (the final point is always kept).
  std::size_t record_every = 1;
};

/// One accepted step: endpoints, stage data for dense output, and the error estimate.
struct StepData {
  double t0 = 0.0;
  double h = 0.0;
  Vec3 y0 = Vec3::Zero();
  Vec3 y1 = Vec3::Zero();
  std::array<Vec3, 5> rcont{};
  double error = 0.0;  ///< max_i |err_i| / |h|

  double t1() const { return t0 + h; }
  /// Continuous extension, theta in [0, 1].
  Vec3 dense(double theta) const {
    const double th1 = 1.0 - theta;
    return rcont[0] + theta * (rcont[1] + th1 * (rcont[2] + theta * (rcont[3] + th1 * rcont[4])));
  }
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace dopri

/// Problem description for the generic driver.
struct OdeSystem {
  std::function<Vec3(const Vec3&)> rhs;
  /// Rejects a proposed step (e.g. too large a jump on the torus). Optional.
  std::function<bool(const Vec3& y0, const Vec3& y1)> step_ok;
  /// Called after each accepted step; may rewrite the state (chart change). Returns true
  /// when it did, so the driver re-evaluates the right-hand side.
  std::function<bool(Vec3& y)> post_step;
};

/// Adaptive integration from t0 towards t_end (either direction). `observer` sees each
/// accepted step before post_step runs and returns false to stop. Returns the final time.
inline double integrate_ode(const OdeSystem& sys, Vec3& y, double t0, double t_end, const IntegrateOptions& opt,
                            const std::function<bool(const StepData&)>& observer) {
  using namespace dopri;
  if (!(opt.tol > 0.0) || !(opt.max_step > 0.0) || !(opt.initial_step > 0.0)) {
    throw PreconditionError("integrate: tol, max_step and initial_step must be positive");
  }
  if (!std::isfinite(t0) || std::isnan(t_end)) throw DomainError("integrate: non-finite time span");
  if (t_end == t0) return t0;
  const double dir = t_end > t0 ? 1.0 : -1.0;
  double t = t0;
  Vec3 k1 = sys.rhs(y);
  if (!k1.allFinite()) throw DomainError("integrate: field is not finite at the initial point");
  if (k1.norm() < opt.zero_speed) throw StalledAtZero("field vanishes at the initial point", y);
  double h = std::min(opt.initial_step, opt.max_step);
  std::size_t steps = 0;
  while (dir * (t_end - t) > 0.0) {
    if (++steps > opt.max_steps) throw Error("integrate: step budget exhausted");
    const double remaining = std::abs(t_end - t);
    h = std::min({h, opt.max_step, remaining});
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw StalledAtZero("step size underflow", y);
    const double hs = dir * h;
    const Vec3 k2 = sys.rhs(y + hs * (a21 * k1));
    const Vec3 k3 = sys.rhs(y + hs * (a31 * k1 + a32 * k2));
    const Vec3 k4 = sys.rhs(y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec3 k5 = sys.rhs(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec3 k6 = sys.rhs(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec3 y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vec3 k7 = sys.rhs(y1);
    const Vec3 err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err_unit = err.cwiseAbs().maxCoeff() / h;
    const double ratio = err_unit / opt.tol;
    const bool finite = y1.allFinite() && k7.allFinite() && std::isfinite(ratio);
    if (!finite || ratio > 1.0 || (sys.step_ok && !sys.step_ok(y, y1))) {
      const double shrink = finite && ratio > 1.0 ? std::max(0.2, 0.9 * std::pow(ratio, -0.25)) : 0.5;
      h *= shrink;
      continue;
    }
    StepData sd;
    sd.t0 = t;
    sd.h = hs;
    sd.y0 = y;
    sd.y1 = y1;
    sd.error = err_unit;
    sd.rcont[0] = y;
    sd.rcont[1] = y1 - y;
    sd.rcont[2] = hs * k1 - sd.rcont[1];
    sd.rcont[3] = sd.rcont[1] - hs * k7 - sd.rcont[2];
    sd.rcont[4] = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    // Land exactly on t_end when this step covers the remainder.
    t = (h == remaining) ? t_end : t + hs;
    y = y1;
    k1 = k7;
    const bool keep_going = observer(sd);
    if (sys.post_step && sys.post_step(y)) k1 = sys.rhs(y);
    if (!keep_going) break;
    if (k1.norm() < opt.zero_speed) throw StalledAtZero("field vanishes along the trajectory", y);
    const double grow = ratio > 0.0 ? std::min(5.0, 0.9 * std::pow(ratio, -0.25)) : 5.0;
    h *= std::max(grow, 0.2);
  }
  return t;
}

// ------------------------------------------------------------------ trajectories

struct Trajectory {
  ManifoldModel model = ManifoldModel::flat_torus();
  std::vector<double> t;
  /// Torus: coordinates reduced into [0, L); sphere: chart coordinates.
  std::vector<Vec3> x;
  /// Torus only: floor(u / L) per axis.
  std::vector<Eigen::Vector3i> windings;
  /// Sphere only: chart of each sample.
  std::vector<Chart> charts;
  /// Per-step error estimate (max |err| / |h|); zero for the initial sample.
  std::vector<double> step_error;
  std::size_t steps = 0;
  double arc_length = 0.0;

  std::size_t size() const { return t.size(); }
  Vec3 unwrapped(std::size_t i) const {
    return x[i] + windings[i].cast<double>().cwiseProduct(model.periods());
  }
  ChartPoint chart_point(std::size_t i) const { return {charts[i], x[i]}; }
  Vec4 ambient(std::size_t i) const { return to_ambient(chart_point(i)); }
  double max_step_error() const {
    return step_error.empty() ? 0.0 : *std::max_element(step_error.begin(), step_error.end());
  }
};

namespace detail {

inline void split_lift(const Vec3& u, const Vec3& L, Vec3& x, Eigen::Vector3i& w) {
  for (int i = 0; i < 3; ++i) {
    const double q = std::floor(u[i] / L[i]);
    double r = u[i] - q * L[i];
    int wi = static_cast<int>(q);
    if (r >= L[i]) {  // rounding at the upper edge
      r -= L[i];
      ++wi;
    }
    x[i] = r;
    w[i] = wi;
  }
}

inline OdeSystem torus_system(const ManifoldModel& model, const VectorField& X) {
  if (!model.is_torus()) throw PreconditionError("expected a flat torus model");
  const Vec3 L = model.periods();
  OdeSystem sys;
  sys.rhs = [X](const Vec3& u) { return X.value(u); };
  sys.step_ok = [L](const Vec3& a, const Vec3& b) {
    return ((b - a).cwiseAbs().array() < 0.5 * L.array()).all();
  };
  return sys;
}

}  // namespace detail

/// Integrates dx/dt = X(x) on the torus from x0 for t in [0, t_end] (t_end may be negative).
inline Trajectory integrate(const ManifoldModel& model, const VectorField& X, const Vec3& x0, double t_end,
                            const IntegrateOptions& opt = {}) {
  detail::require_finite(x0);
  const Vec3 L = model.periods();
  OdeSystem sys = detail::torus_system(model, X);
  Trajectory tr;
  tr.model = model;
  auto record = [&](double t, const Vec3& u, double err) {
    Vec3 x;
    Eigen::Vector3i w;
    detail::split_lift(u, L, x, w);
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.windings.push_back(w);
    tr.step_error.push_back(err);
  };
  Vec3 u = x0;
  record(0.0, u, 0.0);
  double pending_err = 0.0;
  const std::size_t every = std::max<std::size_t>(1, opt.record_every);
  std::optional<StepData> last;
  integrate_ode(sys, u, 0.0, t_end, opt, [&](const StepData& sd) {
    ++tr.steps;
    tr.arc_length += (sd.y1 - sd.y0).norm();
    pending_err = std::max(pending_err, sd.error);
    const bool stop = tr.arc_length >= opt.max_arc_length;
    if (tr.steps % every == 0 || stop) {
      record(sd.t1(), sd.y1, pending_err);
      pending_err = 0.0;
    }
    last = sd;
    return !stop;
  });
  if (last && tr.t.back() != last->t1()) record(last->t1(), last->y1, pending_err);
  return tr;
}

/// Integrates on S^3 in stereographic charts starting from `x0`.
inline Trajectory integrate(const ManifoldModel& model, const ChartedVectorField& X, const ChartPoint& x0,
                            double t_end, const IntegrateOptions& opt = {}) {
  if (!model.is_sphere()) throw PreconditionError("expected the round sphere model");
  detail::require_finite(x0.x);
  ChartPoint start = preferred_chart(x0);
  Chart chart = start.chart;
  OdeSystem sys;
  sys.rhs = [&chart, &X](const Vec3& x) { return X.in(chart).value(x); };
  sys.post_step = [&chart](Vec3& x) {
    if (x.norm() <= kChartSwitchRadius) return false;
    const ChartPoint q = switch_chart({chart, x}, antipodal(chart));
    chart = q.chart;
    x = q.x;
    return true;
  };
  Trajectory tr;
  tr.model = model;
  auto record = [&](double t, const Vec3& x, Chart c, double err) {
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.charts.push_back(c);
    tr.step_error.push_back(err);
  };
  Vec3 y = start.x;
  record(0.0, y, chart, 0.0);
  double pending_err = 0.0;
  const std::size_t every = std::max<std::size_t>(1, opt.record_every);
  double last_t = 0.0;
  bool last_recorded = true;
  // Records after post_step has run, so the sample carries the chart it is stored in.
  OdeSystem wrapped = sys;
  wrapped.post_step = [&](Vec3& x) {
    const bool changed = sys.post_step(x);
    if (!last_recorded) {
      record(last_t, x, chart, pending_err);
      pending_err = 0.0;
      last_recorded = true;
    }
    return changed;
  };
  integrate_ode(wrapped, y, 0.0, t_end, opt, [&](const StepData& sd) {
    ++tr.steps;
    const Vec4 a = chart_to_ambient<double>(chart, sd.y0);
    const Vec4 b = chart_to_ambient<double>(chart, sd.y1);
    tr.arc_length += (b - a).norm();
    pending_err = std::max(pending_err, sd.error);
    const bool stop = tr.arc_length >= opt.max_arc_length;
    last_t = sd.t1();
    last_recorded = !(tr.steps % every == 0 || stop);
    return !stop;
  });
  if (tr.t.back() != last_t) record(last_t, y, chart, pending_err);
  return tr;
}

/// max |f(x(t)) - f(x(0))| over the recorded samples.
inline double first_integral_drift(const Trajectory& tr, const ScalarField& f) {
  if (tr.size() == 0) return 0.0;
  const double f0 = f.value(tr.unwrapped(0));
  double d = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) d = std::max(d, std::abs(f.value(tr.unwrapped(i)) - f0));
  return d;
}

inline double first_integral_drift(const Trajectory& tr, const ChartedScalarField& f) {
  if (tr.size() == 0) return 0.0;
  const double f0 = f.in(tr.charts[0]).value(tr.x[0]);
  double d = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    d = std::max(d, std::abs(f.in(tr.charts[i]).value(tr.x[i]) - f0));
  }
  return d;
}

struct ClosestReturn {
  double time = 0.0;
  double distance = std::numeric_limits<double>::infinity();
};

/// Smallest ambient distance to the starting point among samples after the orbit first
/// moves at least `leave` away from it.
inline ClosestReturn closest_return(const Trajectory& tr, double leave = 0.5) {
  ClosestReturn r;
  if (tr.size() == 0) return r;
  auto pos = [&](std::size_t i) -> Vec4 {
    if (tr.model.is_sphere()) return tr.ambient(i);
    Vec4 v;
    v << tr.unwrapped(i), 0.0;
    return v;
  };
  const Vec4 p0 = pos(0);
  bool left = false;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double d = (pos(i) - p0).norm();
    if (!left) {
      left = d >= leave;
      continue;
    }
    if (d < r.distance) {
      r.distance = d;
      r.time = tr.t[i];
    }
  }
  return r;
}

// ------------------------------------------------------------------ Poincare sections

enum class CrossingDirection { positive, negative, both };

/// Plane {x_axis = value} of the torus, counted with the given crossing direction.
struct SectionSpec {
  int axis = 2;
  double value = 0.0;
  CrossingDirection direction = CrossingDirection::both;

  /// Parses "z=0", "x=0.25", optionally followed by ",+" or ",-".
  static SectionSpec parse(const std::string& text) {
    SectionSpec s;
    const auto eq = text.find('=');
    if (eq != 1 || text.empty()) throw PreconditionError("section must look like 'z=0': " + text);
    const char a = text[0];
    if (a < 'x' || a > 'z') throw PreconditionError("section axis must be x, y or z: " + text);
    s.axis = a - 'x';
    std::string rest = text.substr(2);
    const auto comma = rest.find(',');
    if (comma != std::string::npos) {
      const std::string d = rest.substr(comma + 1);
      if (d == "+") s.direction = CrossingDirection::positive;
      else if (d == "-") s.direction = CrossingDirection::negative;
      else throw PreconditionError("section direction must be + or -: " + text);
      rest = rest.substr(0, comma);
    }
    std::size_t used = 0;
    try {
      s.value = std::stod(rest, &used);
    } catch (const std::exception&) {
      throw PreconditionError("section value is not a number: " + text);
    }
    if (used != rest.size() || !std::isfinite(s.value)) {
      throw PreconditionError("section value is not a number: " + text);
    }
    return s;
  }

  std::string to_string() const {
    std::string s(1, static_cast<char>('x' + axis));
    char buf[64];
    std::snprintf(buf, sizeof buf, "=%.17g", value);
    s += buf;
    if (direction == CrossingDirection::positive) s += ",+";
    if (direction == CrossingDirection::negative) s += ",-";
    return s;
  }
};

struct PoincareRecord {
  SectionSpec section;
  Vec3 seed = Vec3::Zero();
  /// Crossing points reduced into the fundamental domain.
  std::vector<Vec3> points;
  std::vector<double> times;
  /// +1 / -1: sign of the normal velocity at the crossing.
  std::vector<int> signs;
  /// First-integral values at the crossings, when a first integral was supplied.
  std::vector<double> f_values;
  /// Crossings dropped because |X . n| was below the transversality threshold.
  std::size_t skipped_tangential = 0;
  /// False if the time budget ran out before the requested number of crossings.
  bool complete = false;
};

struct PoincareOptions {
  IntegrateOptions integrate;
  double t_max = 1e4;
  double transversality = 1e-8;
  double root_tol = 1e-13;
};

namespace detail {

/// theta in [0, 1] with dense(theta)[axis] == level, by safeguarded regula falsi.
inline double locate_crossing(const StepData& sd, int axis, double level, double tol) {
  double a = 0.0;
  double b = 1.0;
  double fa = sd.dense(a)[axis] - level;
  double fb = sd.dense(b)[axis] - level;
  if (fa == 0.0) return 0.0;
  if (fb == 0.0) return 1.0;
  int side = 0;
  double theta = 0.5;
  for (int it = 0; it < 200; ++it) {
    theta = (a * fb - b * fa) / (fb - fa);
    if (!(theta > a && theta < b)) theta = 0.5 * (a + b);
    const double ft = sd.dense(theta)[axis] - level;
    if (std::abs(ft) <= tol || b - a < 1e-16) return theta;
    if ((ft > 0.0) == (fb > 0.0)) {
      b = theta;
      fb = ft;
      if (side == 1) fa *= 0.5;  // Illinois modification
      side = 1;
    } else {
      a = theta;
      fa = ft;
      if (side == -1) fb *= 0.5;
      side = -1;
    }
  }
  return theta;
}

}  // namespace detail

/// Records the first `n_crossings` transversal crossings of each seed's orbit with the
/// section (all periodic copies of the plane count). The starting point itself is not
/// counted even if it lies on the section.
inline std::vector<PoincareRecord> poincare(const ManifoldModel& model, const VectorField& X,
                                            const SectionSpec& section, const std::vector<Vec3>& seeds,
                                            std::size_t n_crossings, const PoincareOptions& opt = {},
                                            const ScalarField* first_integral = nullptr) {
  if (section.axis < 0 || section.axis > 2) throw PreconditionError("section axis out of range");
  if (n_crossings == 0) throw PreconditionError("poincare: need at least one crossing");
  const Vec3 L = model.periods();
  const int ax = section.axis;
  const double period = L[ax];
  std::vector<PoincareRecord> out;
  for (const Vec3& seed : seeds) {
    PoincareRecord rec;
    rec.section = section;
    rec.seed = seed;
    Vec3 u = seed;
    const OdeSystem sys = detail::torus_system(model, X);
    integrate_ode(sys, u, 0.0, opt.t_max, opt.integrate, [&](const StepData& sd) {
      const double s0 = std::floor((sd.y0[ax] - section.value) / period);
      const double s1 = std::floor((sd.y1[ax] - section.value) / period);
      if (s0 == s1) return true;
      const double plane = section.value + std::max(s0, s1) * period;
      const double theta = detail::locate_crossing(sd, ax, plane, opt.root_tol);
      if (sd.t0 == 0.0 && theta == 0.0) return true;  // the seed itself
      const Vec3 p = sd.dense(theta);
      const Vec3 v = X.value(p);
      if (std::abs(v[ax]) < opt.transversality) {
        ++rec.skipped_tangential;
        return true;
      }
      const int sign = v[ax] > 0.0 ? 1 : -1;
      if ((section.direction == CrossingDirection::positive && sign < 0) ||
          (section.direction == CrossingDirection::negative && sign > 0)) {
        return true;
      }
      Vec3 x;
      Eigen::Vector3i w;
      detail::split_lift(p, L, x, w);
      // Keep the interpolation residual visible instead of snapping onto the plane.
      x[ax] = section.value - std::floor(section.value / period) * period + (p[ax] - plane);
      rec.points.push_back(x);
      rec.times.push_back(sd.t0 + theta * sd.h);
      rec.signs.push_back(sign);
      if (first_integral) rec.f_values.push_back(first_integral->value(p));
      if (rec.points.size() >= n_crossings) {
        rec.complete = true;
        return false;
      }
      return true;
    });
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace beltrami
