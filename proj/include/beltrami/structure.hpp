#pragma once

// Global structure of a commuting pair (X, Y) with curl X = lambda X.
//
// f = g(X, Y) / lambda satisfies grad f = Y x X, so X and Y are tangent to the level
// sets of f and span them wherever grad f != 0. The critical set Gamma = {X, Y
// collinear} = {grad f = 0} is located on a grid; away from it the flow of
// grad f / |grad f|^2 moves level sets onto level sets with f(psi_t(p)) = f(p) + t.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "beltrami/chartcalc.hpp"
#include "beltrami/core.hpp"
#include "beltrami/field.hpp"
#include "beltrami/fieldline.hpp"
#include "beltrami/model.hpp"
#include "beltrami/spectral.hpp"

namespace beltrami {

// ------------------------------------------------------------------ first integral

/// f = g(X, Y) / lambda for a spectral X and a constant (translation) Y.
inline SpectralScalar first_integral_of_pair(const SpectralField& X, const Vec3& Y, double lambda) {
  if (lambda == 0.0) throw PreconditionError("first integral needs a non-zero eigenvalue");
  return (1.0 / lambda) * dot(Y, X);
}

/// Coefficient-sum bound of |grad f - Y x X|.
inline double first_integral_residual(const SpectralScalar& f, const SpectralField& X, const Vec3& Y) {
  return (grad_spec(f) - cross(Y, X)).abs_sum();
}

/// Pointwise version for arbitrary fields on one chart.
inline ScalarField first_integral_of_pair(const ManifoldModel& model, const VectorField& X, const VectorField& Y,
                                          double lambda) {
  if (lambda == 0.0) throw PreconditionError("first integral needs a non-zero eigenvalue");
  return numeric_scalar_field(
      [model, X, Y, lambda](const Vec3& p) { return chartcalc::inner(model, p, X.value(p), Y.value(p)) / lambda; });
}

inline double first_integral_residual(const ManifoldModel& model, const ScalarField& f, const VectorField& X,
                                      const VectorField& Y, const std::vector<Vec3>& points,
                                      const chartcalc::FDConfig& cfg = {}) {
  double r = 0.0;
  for (const auto& p : points) {
    const Vec3 d = chartcalc::grad(model, f, p, cfg) - chartcalc::cross(model, p, Y.value(p), X.value(p));
    r = std::max(r, chartcalc::norm(model, p, d));
  }
  return r;
}

// ------------------------------------------------------------------ grids

/// Regular grid. Periodic grids (torus) use x = lo + (hi - lo) * i / n, i < n;
/// box grids (chart boxes) include both endpoints: x = lo + (hi - lo) * i / (n - 1).
struct ScanGrid {
  int n = 64;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  bool periodic = true;

  static ScanGrid torus(int n, const Vec3& periods = Vec3::Ones()) { return {n, Vec3::Zero(), periods, true}; }
  static ScanGrid box(int n, const Vec3& lo, const Vec3& hi) { return {n, lo, hi, false}; }

  std::size_t node_count() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t index(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n + static_cast<std::size_t>(l);
  }
  Eigen::Vector3i node(std::size_t idx) const {
    const int l = static_cast<int>(idx % n);
    const int j = static_cast<int>((idx / n) % n);
    const int i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
    return {i, j, l};
  }
  Vec3 spacing() const { return (hi - lo) / (periodic ? n : n - 1); }
  Vec3 point(int i, int j, int l) const { return lo + Vec3(i, j, l).cwiseProduct(spacing()); }
  Vec3 point(std::size_t idx) const {
    const auto v = node(idx);
    return point(v[0], v[1], v[2]);
  }
  /// Cells per axis: n when periodic (wrapping), n - 1 otherwise.
  int cells() const { return periodic ? n : n - 1; }
  void validate() const {
    if (n < 2) throw PreconditionError("scan grid needs n >= 2");
    if (!((hi - lo).array() > 0.0).all()) throw PreconditionError("scan grid box is empty");
  }
};

// ------------------------------------------------------------------ critical scan

struct ScanThresholds {
  /// Defaults: eps_grad = 1e-3 max|grad f|, delta_level = 1e-3 range(f),
  /// delta_cluster = 1e-2 range(f).
  std::optional<double> eps_grad;
  std::optional<double> delta_level;
  std::optional<double> delta_cluster;
};

struct ResolvedThresholds {
  double eps_grad = 0.0;
  double delta_level = 0.0;
  double delta_cluster = 0.0;
};

struct CriticalScan {
  ScanGrid grid;
  ResolvedThresholds thresholds;
  std::vector<double> f;          ///< node values
  std::vector<double> grad_norm;  ///< |grad f|_g at nodes
  double f_min = 0.0;
  double f_max = 0.0;
  double grad_max = 0.0;
  /// Representative critical values, ascending.
  std::vector<double> critical_values;
  /// Node count per critical value.
  std::vector<std::size_t> critical_counts;
  /// Nodes within delta_level of a critical value (the discretised Gamma).
  std::vector<std::uint8_t> gamma_mask;
  std::size_t gamma_count = 0;
  /// f is constant: X and Y are collinear everywhere and Gamma is the whole domain.
  bool degenerate = false;
  std::vector<std::string> warnings;
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 1024) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  // Static contiguous chunks: each index is written by exactly one thread, so results
  // do not depend on the thread count.
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = chunk * t;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline ResolvedThresholds resolve_thresholds(const ScanThresholds& t, double grad_max, double range) {
  ResolvedThresholds r;
  r.eps_grad = t.eps_grad.value_or(1e-3 * grad_max);
  r.delta_level = t.delta_level.value_or(1e-3 * range);
  r.delta_cluster = t.delta_cluster.value_or(1e-2 * range);
  if (r.eps_grad < 0.0 || r.delta_level < 0.0 || r.delta_cluster < 0.0) {
    throw PreconditionError("scan thresholds must be non-negative");
  }
  return r;
}

/// Recomputes the Gamma mask for new level/cluster thresholds without resampling.
inline void classify_critical(CriticalScan& s) {
  const std::size_t count = s.f.size();
  s.critical_values.clear();
  s.critical_counts.clear();
  s.gamma_mask.assign(count, 0);
  s.gamma_count = 0;
  if (s.degenerate) {
    s.gamma_mask.assign(count, 1);
    s.gamma_count = count;
    s.critical_values = {s.f_min};
    s.critical_counts = {count};
    return;
  }
  std::vector<std::size_t> crit;
  for (std::size_t i = 0; i < count; ++i)
    if (s.grad_norm[i] < s.thresholds.eps_grad) crit.push_back(i);
  std::stable_sort(crit.begin(), crit.end(), [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
  // Single-linkage clustering in f; the representative is the most critical node.
  for (std::size_t a = 0; a < crit.size();) {
    std::size_t b = a + 1;
    while (b < crit.size() && s.f[crit[b]] - s.f[crit[b - 1]] <= s.thresholds.delta_cluster) ++b;
    std::size_t best = crit[a];
    for (std::size_t k = a; k < b; ++k)
      if (s.grad_norm[crit[k]] < s.grad_norm[best]) best = crit[k];
    s.critical_values.push_back(s.f[best]);
    s.critical_counts.push_back(b - a);
    a = b;
  }
  for (std::size_t i = 0; i < count; ++i) {
    for (double c : s.critical_values) {
      if (std::abs(s.f[i] - c) < s.thresholds.delta_level) {
        s.gamma_mask[i] = 1;
        ++s.gamma_count;
        break;
      }
    }
  }
}

/// Samples f and |grad f| on the grid, clusters near-critical values and marks Gamma.
inline CriticalScan critical_scan(const ManifoldModel& model, const ScalarField& f, const ScanGrid& grid,
                                  const ScanThresholds& thresholds = {}, int threads = 1,
                                  const chartcalc::FDConfig& cfg = {}) {
  grid.validate();
  CriticalScan s;
  s.grid = grid;
  const std::size_t count = grid.node_count();
  s.f.resize(count);
  s.grad_norm.resize(count);
  detail::parallel_for(count, threads, [&](std::size_t i) {
    const Vec3 p = grid.point(i);
    s.f[i] = f.value(p);
    s.grad_norm[i] = chartcalc::norm(model, p, chartcalc::grad(model, f, p, cfg));
  });
  s.f_min = *std::min_element(s.f.begin(), s.f.end());
  s.f_max = *std::max_element(s.f.begin(), s.f.end());
  s.grad_max = *std::max_element(s.grad_norm.begin(), s.grad_norm.end());
  const double range = s.f_max - s.f_min;
  s.degenerate = range <= 1e-12 * std::max(1.0, std::abs(s.f_max)) || s.grad_max == 0.0;
  s.thresholds = resolve_thresholds(thresholds, s.grad_max, range);
  if (s.degenerate) {
    s.warnings.push_back(
        "first integral is constant: X and Y are collinear everywhere, so Gamma is the whole domain");
  }
  classify_critical(s);
  return s;
}

inline CriticalScan critical_scan(const SpectralScalar& f, const ScanGrid& grid, const ScanThresholds& t = {},
                                  int threads = 1) {
  return critical_scan(ManifoldModel::flat_torus(grid.hi - grid.lo), to_scalar_field(f), grid, t, threads);
}

// ------------------------------------------------------------------ level components

/// Connected components (6-neighbour, periodic on periodic grids) of the grid cells
/// whose corner values bracket the shell [c - delta, c + delta]. Cell ids use the
/// node index of their lower corner. Components are ordered by their smallest cell id.
inline std::vector<std::vector<std::size_t>> level_components(const CriticalScan& s, double c, double delta) {
  const ScanGrid& g = s.grid;
  const int nc = g.cells();
  auto wrapi = [&](int i) { return g.periodic ? (i % g.n + g.n) % g.n : i; };
  auto cell_id = [&](int i, int j, int l) { return g.index(i, j, l); };
  std::vector<std::uint8_t> on(g.node_count(), 0);
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j)
      for (int l = 0; l < nc; ++l) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int d = 0; d < 8; ++d) {
          const double v = s.f[g.index(wrapi(i + (d & 1)), wrapi(j + ((d >> 1) & 1)), wrapi(l + ((d >> 2) & 1)))];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (lo <= c + delta && hi >= c - delta) on[cell_id(i, j, l)] = 1;
      }
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::uint8_t> seen(g.node_count(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < on.size(); ++start) {
    if (!on[start] || seen[start]) continue;
    std::vector<std::size_t> comp;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t id = stack.back();
      stack.pop_back();
      comp.push_back(id);
      const Eigen::Vector3i v = g.node(id);
      for (int axis = 0; axis < 3; ++axis)
        for (int step : {-1, 1}) {
          Eigen::Vector3i w = v;
          w[axis] += step;
          if (g.periodic) {
            w[axis] = wrapi(w[axis]);
          } else if (w[axis] < 0 || w[axis] >= nc) {
            continue;
          }
          const std::size_t nid = cell_id(w[0], w[1], w[2]);
          if (on[nid] && !seen[nid]) {
            seen[nid] = 1;
            stack.push_back(nid);
          }
        }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

struct ComponentOptions {
  /// Cells sampled (evenly along the sorted cell list) for the tangency checks.
  std::size_t max_samples = 256;
  /// Seeds integrated along X to confirm invariance.
  std::size_t flow_seeds = 5;
  double flow_arc_length = 100.0;
  IntegrateOptions integrate;
};

struct ComponentRecord {
  double level = 0.0;
  Vec3 seed = Vec3::Zero();
  std::size_t cell_count = 0;
  std::vector<std::size_t> cells;
  /// Points of the component projected onto f = level.
  std::vector<Vec3> samples;
  double max_level_error = 0.0;  ///< max |f(sample) - level|
  double min_cross_norm = 0.0;   ///< min |X x Y|_g over samples (> 0: X, Y span the tangent plane)
  double flow_drift = 0.0;       ///< max |f - level| along X-orbits from sampled points
  std::size_t components_at_level = 0;
};

namespace detail {

/// Newton projection onto f = c along grad f.
inline Vec3 project_to_level(const ManifoldModel& model, const ScalarField& f, Vec3 p, double c) {
  for (int it = 0; it < 30; ++it) {
    const double r = f.value(p) - c;
    if (std::abs(r) < 1e-14) break;
    const Vec3 g = chartcalc::grad(model, f, p, {});
    const double g2 = chartcalc::inner(model, p, g, g);
    if (g2 < 1e-24) break;
    p -= (r / g2) * g;
  }
  return p;
}

}  // namespace detail

/// The connected component of {f = c} through `seed` (torus), with tangency and
/// invariance diagnostics.
inline ComponentRecord level_component(const ManifoldModel& model, const ScalarField& f, const VectorField& X,
                                       const VectorField& Y, const CriticalScan& scan, double c, const Vec3& seed,
                                       const ComponentOptions& opt = {}) {
  if (!model.is_torus()) throw PreconditionError("level components are computed on the torus");
  const ResolvedThresholds& th = scan.thresholds;
  const double fs = f.value(seed);
  const Vec3 gs = chartcalc::grad(model, f, seed, {});
  if (std::abs(fs - c) > std::max(th.delta_level, 1e-9)) {
    throw PreconditionError("seed is not on the level f = " + std::to_string(c));
  }
  if (chartcalc::norm(model, seed, gs) <= th.eps_grad) {
    throw PreconditionError("seed lies on the critical set; the level is not regular there");
  }
  const double delta = std::max(th.delta_level, 1e-12);
  const auto comps = level_components(scan, c, delta);
  const ScanGrid& g = scan.grid;
  const Vec3 local = wrap(model, seed);
  const Vec3 h = g.spacing();
  Eigen::Vector3i base;
  for (int a = 0; a < 3; ++a) base[a] = static_cast<int>(std::floor((local[a] - g.lo[a]) / h[a])) % g.n;
  // The seed's cell, or the nearest bracketing neighbour.
  std::optional<std::size_t> which;
  for (int r = 0; r <= 2 && !which; ++r)
    for (int di = -r; di <= r && !which; ++di)
      for (int dj = -r; dj <= r && !which; ++dj)
        for (int dl = -r; dl <= r && !which; ++dl) {
          const auto id = g.index((base[0] + di + g.n) % g.n, (base[1] + dj + g.n) % g.n, (base[2] + dl + g.n) % g.n);
          for (std::size_t k = 0; k < comps.size(); ++k)
            if (std::binary_search(comps[k].begin(), comps[k].end(), id)) {
              which = k;
              break;
            }
        }
  if (!which) throw PreconditionError("seed does not touch any grid cell of the level set");

  ComponentRecord rec;
  rec.level = c;
  rec.seed = seed;
  rec.cells = comps[*which];
  rec.cell_count = rec.cells.size();
  rec.components_at_level = comps.size();
  const std::size_t ns = std::min(opt.max_samples, rec.cells.size());
  rec.min_cross_norm = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ns; ++k) {
    const std::size_t id = rec.cells[k * rec.cells.size() / ns];
    const Vec3 p0 = g.point(id) + 0.5 * h;
    const Vec3 p = detail::project_to_level(model, f, p0, c);
    rec.samples.push_back(p);
    rec.max_level_error = std::max(rec.max_level_error, std::abs(f.value(p) - c));
    rec.min_cross_norm =
        std::min(rec.min_cross_norm, chartcalc::norm(model, p, chartcalc::cross(model, p, X.value(p), Y.value(p))));
  }
  IntegrateOptions io = opt.integrate;
  io.max_arc_length = opt.flow_arc_length;
  io.record_every = 16;
  const std::size_t nf = std::min(opt.flow_seeds, rec.samples.size());
  for (std::size_t k = 0; k < nf; ++k) {
    const Vec3 p = rec.samples[k * rec.samples.size() / nf];
    const Trajectory tr = integrate(model, X, p, std::numeric_limits<double>::infinity(), io);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      rec.flow_drift = std::max(rec.flow_drift, std::abs(f.value(tr.unwrapped(i)) - c));
    }
  }
  return rec;
}

// ------------------------------------------------------------------ chamber fibration

struct ChamberOptions {
  IntegrateOptions integrate{1e-12, 0.01, 1e-4};
  /// Abort once |grad f| drops below this (the flow of grad f / |grad f|^2 blows up at Gamma).
  double eps_grad = 0.0;
  /// Abort if |f(psi_t(p)) - f(p) - t| exceeds this (only reachable through numerical trouble).
  double linearity_break = 1e-4;
};

struct ChamberRecord {
  Vec3 base = Vec3::Zero();
  double f_base = 0.0;
  double t_lo_requested = 0.0;
  double t_hi_requested = 0.0;
  /// The interval actually reached.
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool truncated_lo = false;
  bool truncated_hi = false;
  std::vector<double> t;  ///< ascending
  std::vector<Vec3> points;
  double linearity_residual = 0.0;  ///< max |f(psi_t(p)) - f(p) - t|
  std::string note;
};

/// Flow of V = grad f / |grad f|^2 from `p` over [t_lo, t_hi] (t_lo <= 0 <= t_hi), truncated
/// where |grad f| falls below eps_grad.
inline ChamberRecord chamber_fibration(const ManifoldModel& model, const ScalarField& f, const Vec3& p, double t_lo,
                                       double t_hi, const ChamberOptions& opt = {}) {
  if (!model.is_torus()) throw PreconditionError("chamber fibration is computed on the torus");
  if (!(t_lo <= 0.0 && t_hi >= 0.0)) throw PreconditionError("chamber interval must contain 0");
  ChamberRecord rec;
  rec.base = p;
  rec.f_base = f.value(p);
  rec.t_lo_requested = t_lo;
  rec.t_hi_requested = t_hi;
  const double g0 = chartcalc::norm(model, p, chartcalc::grad(model, f, p, {}));
  if (g0 <= opt.eps_grad) throw PreconditionError("base point lies on the critical set");

  auto gradient_ok = [&](const Vec3& x) {
    return chartcalc::norm(model, x, chartcalc::grad(model, f, x, {})) > opt.eps_grad;
  };
  OdeSystem sys;
  sys.rhs = [&](const Vec3& x) -> Vec3 {
    const Vec3 gr = chartcalc::grad(model, f, x, {});
    const double g2 = chartcalc::inner(model, x, gr, gr);
    if (g2 == 0.0) return Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    return gr / g2;
  };
  const Vec3 L = model.periods();
  sys.step_ok = [L](const Vec3& a, const Vec3& b) { return ((b - a).cwiseAbs().array() < 0.5 * L.array()).all(); };

  auto run = [&](double t_end, std::vector<double>& ts, std::vector<Vec3>& xs, bool& truncated) -> double {
    Vec3 y = p;
    double reached = 0.0;
    if (t_end == 0.0) return 0.0;
    try {
      integrate_ode(sys, y, 0.0, t_end, opt.integrate, [&](const StepData& sd) {
        const bool ok_grad = gradient_ok(sd.y1);
        const double lin = std::abs(f.value(sd.y1) - rec.f_base - sd.t1());
        if (!ok_grad || lin > opt.linearity_break) {
          truncated = true;
          rec.note = ok_grad ? "linearity break" : "reached the critical set";
          return false;
        }
        reached = sd.t1();
        ts.push_back(sd.t1());
        xs.push_back(sd.y1);
        return true;
      });
    } catch (const StalledAtZero&) {
      truncated = true;
      rec.note = "step size underflow near the critical set";
    }
    return reached;
  };
  std::vector<double> tf, tb;
  std::vector<Vec3> xf, xb;
  rec.t_hi = run(t_hi, tf, xf, rec.truncated_hi);
  rec.t_lo = run(t_lo, tb, xb, rec.truncated_lo);
  for (std::size_t i = tb.size(); i-- > 0;) {
    rec.t.push_back(tb[i]);
    rec.points.push_back(xb[i]);
  }
  rec.t.push_back(0.0);
  rec.points.push_back(p);
  rec.t.insert(rec.t.end(), tf.begin(), tf.end());
  rec.points.insert(rec.points.end(), xf.begin(), xf.end());
  for (std::size_t i = 0; i < rec.t.size(); ++i) {
    rec.linearity_residual = std::max(rec.linearity_residual, std::abs(f.value(rec.points[i]) - rec.f_base - rec.t[i]));
  }
  return rec;
}

/// psi_t(p): the endpoint of the chamber flow at exactly time t (throws if Gamma intervenes).
inline Vec3 transport(const ManifoldModel& model, const ScalarField& f, const Vec3& p, double t,
                      const ChamberOptions& opt = {}) {
  const ChamberRecord r = chamber_fibration(model, f, p, std::min(t, 0.0), std::max(t, 0.0), opt);
  if (r.truncated_lo || r.truncated_hi) throw PreconditionError("transport reaches the critical set");
  return t >= 0.0 ? r.points.back() : r.points.front();
}

// ------------------------------------------------------------------ report

struct StructureReport {
  CriticalScan scan;
  std::vector<ComponentRecord> components;
  std::vector<ChamberRecord> chambers;
};

}  // namespace beltrami
