// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "beltrami/catalog.hpp"
#include "beltrami/fieldline.hpp"
#include "beltrami/io.hpp"
#include "beltrami/rotation.hpp"
#include "beltrami/scalar_eigen.hpp"
#include "beltrami/structure.hpp"
#include "beltrami/symmetric.hpp"
#include "cli_support.hpp"
#include "oracles/sphere_values.hpp"
#include "support.hpp"

using namespace beltrami;
using namespace testing_support;
using chartcalc::FDConfig;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "" : "FAILED: ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ManifoldModel kTorus = ManifoldModel::flat_torus();

/// The 2.5D golden solution: f = cos 2 pi x with Y = e3, as produced by `construct --symmetry t3_e3`.
SpectralConstruction golden_solution() {
  ScalarEigenpair pair = solve_constrained_laplacian(Direction::axis(2), 4);
  pair.f *= Complex(0.5, 0.0);
  return beltrami_from_scalar(catalog_get("t3_e3"), pair);
}

// ------------------------------------------------------------------ criteria

Outcome identity_suite() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1);
  const std::vector<Vec3> pts{{0.1, 0.2, 0.3}, {0.77, 0.05, 0.5}, {0.4, 0.9, 0.61}, {0.33, 0.48, 0.02}};
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const VectorField X = to_vector_field(random_field(8, rng));
    for (const char* name : {"t3_e1", "t3_e2", "t3_e3"}) {
      const KillingEntry e = catalog_get(name);
      for (const Vec3& p : pts) {
        const Vec3 r = chartcalc::identity_residual(kTorus, X, e.field(), p, {});
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
    }
  }
  o.check(worst < 1e-10, "torus: max residual " + sci(worst) + " < 1e-10 (50 fields, N = 8, 3 translations)");

  const KillingEntry hopf = catalog_get("s3_hopf");
  const auto samples = entry_sample_points(hopf, 2);
  double sum_h = 0.0, sum_h2 = 0.0;
  for (int n = 0; n < 20; ++n) {
    const VectorField X = random_polynomial_field(rng);
    for (const auto& p : samples) {
      if (p.chart != Chart::north) continue;
      const ManifoldModel m = hopf.model_in(p.chart);
      sum_h += chartcalc::norm(m, p.x, chartcalc::identity_residual(m, X, hopf.field(), p.x,
                                                                    FDConfig::finite_difference(1e-3)));
      sum_h2 += chartcalc::norm(m, p.x, chartcalc::identity_residual(m, X, hopf.field(), p.x,
                                                                     FDConfig::finite_difference(5e-4)));
    }
  }
  const double ratio = sum_h / sum_h2;
  o.check(std::abs(ratio - 4.0) <= 0.5, "sphere: FD convergence ratio " + fmt("%.4f", ratio) + " in 4.0 +- 0.5 (" +
                                            sci(sum_h) + " -> " + sci(sum_h2) + ")");
  const double dt = seconds_since(t0);
  o.check(dt < 30.0, "runtime " + fmt("%.2f", dt) + " s < 30 s");
  return o;
}

Outcome hopf_certificate() {
  Outcome o;
  const KillingEntry hopf = catalog_get("s3_hopf");
  const auto pts = entry_sample_points(hopf, 5);
  double killing = 0.0, curl = 0.0, norm = 0.0, geo = 0.0;
  for (const auto& p : pts) {
    const ManifoldModel m = hopf.model_in(p.chart);
    const VectorField& H = hopf.field(p.chart);
    const Vec3 h = H.value(p.x);
    killing = std::max(killing, chartcalc::killing_residual(m, H, p.x, {}).cwiseAbs().maxCoeff());
    curl = std::max(curl, chartcalc::norm(m, p.x, chartcalc::curl(m, H, p.x, {}) - 2.0 * h));
    norm = std::max(norm, std::abs(chartcalc::inner(m, p.x, h, h) - 1.0));
    geo = std::max(geo, chartcalc::norm(m, p.x, chartcalc::covariant_accel(m, H, p.x, {})));
  }
  o.check(pts.size() == 125, std::to_string(pts.size()) + " sample points");
  o.check(killing < 1e-6, "Killing residual " + sci(killing) + " < 1e-6");
  o.check(curl < 1e-6, "|curl H - 2H| " + sci(curl) + " < 1e-6");
  o.check(norm < 1e-12, "|g(H,H) - 1| " + sci(norm) + " < 1e-12");
  o.check(geo < 1e-6, "|nabla_H H| " + sci(geo) + " < 1e-6");
  return o;
}

Outcome torus_construction() {
  Outcome o;
  ScalarEigenpair pair{SpectralScalar(2), 4 * kPi * kPi, Direction::axis(2), true, {1, 0, 0}};
  pair.f.at({1, 0, 0}) = 0.5;
  pair.f.at({-1, 0, 0}) = 0.5;
  const SpectralConstruction c = beltrami_from_scalar(catalog_get("t3_e3"), pair);
  const double curl = (curl_spec(c.X) - kTwoPi * c.X).abs_sum();
  const double point = (synthesize(c.X, Vec3(0.25, 0, 0)) - Vec3(0, -kTwoPi, 0)).cwiseAbs().maxCoeff();
  const double quad = std::abs(c.mu * c.mu - c.lambda);
  o.check(curl < 1e-12, "spectral |curl X - 2 pi X| " + sci(curl) + " < 1e-12");
  o.check(point < 1e-12, "|X(1/4,0,0) - (0,-2 pi,0)| " + sci(point) + " < 1e-12");
  o.check(quad < 1e-12, "|mu^2 - lambda| " + sci(quad) + " < 1e-12");
  return o;
}

Outcome sphere_construction() {
  Outcome o;
  const KillingEntry hopf = catalog_get("s3_hopf");
  const AnalyticScalarPair pair = hopf_golden_pair();
  const AnalyticConstruction c = beltrami_from_scalar(hopf, pair);
  o.check(pair.lambda == 8.0 && c.mu == 4.0, "lambda = " + fmt("%g", pair.lambda) + ", mu = " + fmt("%g", c.mu));
  // Symbolic oracle: f, grad f and X at fixed chart points.
  double oracle = 0.0;
  for (const auto& pt : oracle::kSpherePoints) {
    const Chart ch = pt.north ? Chart::north : Chart::south;
    const Vec3 x(pt.x[0], pt.x[1], pt.x[2]);
    oracle = std::max(oracle, std::abs(pair.f.in(ch).value(x) - pt.f));
    oracle = std::max(oracle, (c.X.in(ch).value(x) - Vec3(pt.X[0], pt.X[1], pt.X[2])).norm());
  }
  o.check(oracle < 1e-13, "matches the symbolic oracle to " + sci(oracle));
  const auto pts = entry_sample_points(hopf, 3);
  auto residuals = [&](double h) {
    double lap = 0.0, curl = 0.0;
    const FDConfig cfg{h};
    for (const auto& p : pts) {
      const ManifoldModel m = hopf.model_in(p.chart);
      const ScalarField& f = pair.f.in(p.chart);
      lap += std::abs(chartcalc::laplacian(m, f, p.x, cfg) - 8.0 * f.value(p.x));
      const VectorField& X = c.X.in(p.chart);
      curl += chartcalc::norm(m, p.x, chartcalc::curl(m, X, p.x, cfg) - 4.0 * X.value(p.x));
    }
    return std::array<double, 2>{lap, curl};
  };
  const auto a = residuals(1e-3);
  const auto b = residuals(5e-4);
  const double r_lap = a[0] / b[0];
  const double r_curl = a[1] / b[1];
  o.check(std::abs(r_lap - 4.0) <= 0.5,
          "|Laplacian f - 8f| ratio " + fmt("%.4f", r_lap) + " (" + sci(a[0]) + " -> " + sci(b[0]) + ")");
  o.check(std::abs(r_curl - 4.0) <= 0.5,
          "|curl X - 4X| ratio " + fmt("%.4f", r_curl) + " (" + sci(a[1]) + " -> " + sci(b[1]) + ")");
  return o;
}

Outcome operator_route() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Direction v = Direction::axis(2);
  const OperatorMatrix op = assemble_pi_curlinv(symmetric_mask(v, 4));
  const OperatorSpectrum spec = operator_spectrum(op);
  const TopEigenpair top = top_eigenpair(op);
  const double top_err = std::abs(std::abs(top.mu) - 1.0 / kTwoPi);
  o.check(top_err < 1e-8, "top |eigenvalue| " + fmt("%.15f", std::abs(top.mu)) + " vs 1/(2 pi), error " + sci(top_err));
  std::vector<double> vals(spec.eigen.values.data(), spec.eigen.values.data() + spec.eigen.values.size());
  std::vector<double> neg;
  for (double x : vals) neg.push_back(-x);
  std::sort(vals.begin(), vals.end());
  std::sort(neg.begin(), neg.end());
  double sym = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) sym = std::max(sym, std::abs(vals[i] - neg[i]));
  o.check(sym < 1e-12, "spectrum symmetric under negation to " + sci(sym) + " (dimension " +
                           std::to_string(op.dimension()) + ")");
  const double curl = (curl_spec(top.X) - (1.0 / top.mu) * top.X).abs_sum();
  o.check(curl < 1e-10, "eigenfield curl residual " + sci(curl) + " < 1e-10");
  const double mu_scalar = beltrami_eigenvalue(0.0, solve_constrained_laplacian(v, 4).lambda);
  const double cons = std::abs(1.0 / std::abs(top.mu) - mu_scalar);
  o.check(cons < 1e-8, "|1/mu_op - mu_scalar| " + sci(cons) + " < 1e-8");
  const double dt = seconds_since(t0);
  o.check(dt < 60.0, "runtime " + fmt("%.2f", dt) + " s < 60 s");
  return o;
}

Outcome no_go() {
  Outcome o;
  bool empty = true;
  for (int N = 0; N <= 32; ++N) empty = empty && symmetric_mask(Direction::irrational(), N).empty();
  o.check(empty, "symmetric subspace of (1, sqrt2, sqrt6) empty for every N <= 32 (exact arithmetic)");
  const auto dir = scratch_dir("acceptance_nogo");
  const CliResult r = run_cli(dir, {"construct", "--symmetry", "t3_irrational", "--N", "8"});
  o.check(r.code == 2, "CLI exit code " + std::to_string(r.code) + " == 2");
  o.check(r.err.find("hypothesis") != std::string::npos && r.err.find("V_n^Y != {0}") != std::string::npos,
          "hypothesis-failure message printed");
  return o;
}

Outcome helicity_relation() {
  Outcome o;
  double worst = 0.0;
  int count = 0;
  for (const Direction& v : {Direction::axis(0), Direction::axis(1), Direction::axis(2), Direction::integer(1, 1, 0),
                             Direction::integer(1, 2, 3)}) {
    for (int N : {2, 4}) {
      const SpectralConstruction c = beltrami_from_scalar(translation_entry(v), solve_constrained_laplacian(v, N));
      const double expect = l2_inner(c.X, c.X) / c.mu;
      worst = std::max(worst, std::abs(helicity(c.X) - expect) / expect);
      ++count;
      const TopEigenpair top = top_eigenpair(assemble_pi_curlinv(symmetric_mask(v, N)));
      const double e2 = l2_inner(top.X, top.X) * top.mu;
      worst = std::max(worst, std::abs(helicity(top.X) - e2) / std::abs(e2));
      ++count;
    }
  }
  o.check(worst < 1e-10, "max relative error of H(X) = |X|^2/mu " + sci(worst) + " over " + std::to_string(count) +
                             " eigenfields");
  const double h = helicity(golden_solution().X);
  o.check(std::abs(h - kTwoPi) < 1e-10, "2.5D golden helicity " + fmt("%.15f", h) + ", error " + sci(std::abs(h - kTwoPi)));
  return o;
}

Outcome structure_dynamics() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const SpectralConstruction c = golden_solution();
  const VectorField X = to_vector_field(c.X);
  const ScalarField f = to_scalar_field(c.source.f);
  Rng rng(0);
  std::vector<Vec3> seeds;
  for (int i = 0; i < 20; ++i) seeds.push_back(rng.point());
  IntegrateOptions opt;
  opt.tol = 1e-10;
  opt.max_arc_length = 1e3;
  double drift = 0.0;
  for (const Vec3& s : seeds) drift = std::max(drift, first_integral_drift(integrate(kTorus, X, s, 1e9, opt), f));
  o.check(drift < 1e-7, "max first-integral drift " + sci(drift) + " < 1e-7 (20 seeds, arc length 1e3)");

  PoincareOptions popt;
  popt.integrate.tol = 1e-10;
  const auto recs = poincare(kTorus, X, SectionSpec::parse("z=0"), seeds, 200, popt, &f);
  double spread = 0.0;
  std::size_t crossings = 0;
  for (const auto& r : recs) {
    if (r.f_values.empty()) continue;
    const auto [lo, hi] = std::minmax_element(r.f_values.begin(), r.f_values.end());
    spread = std::max(spread, *hi - *lo);
    crossings += r.f_values.size();
  }
  o.check(spread < 1e-8 && crossings > 0,
          "max per-seed f-spread on z=0 " + sci(spread) + " < 1e-8 (" + std::to_string(crossings) + " crossings)");

  IntegrateOptions ropt;
  ropt.tol = 1e-10;
  const RotationEstimate closed = rotation_number(integrate(kTorus, X, Vec3(0.125, 0, 0), 200.0, ropt));
  o.check(closed.verdict == RotationVerdict::closed && closed.match && *closed.match == Fraction{1, 1},
          std::string("x0 = 1/8: ") + to_string(closed.verdict) + " " +
              (closed.match ? closed.match->to_string() : std::string("-")));
  const double x0 = std::atan(std::sqrt(2.0)) / kTwoPi;
  const RotationEstimate irr = rotation_number(integrate(kTorus, X, Vec3(x0, 0, 0), 3500.0, ropt));
  const double err = std::abs(irr.estimate - std::sqrt(2.0));
  o.check(irr.verdict == RotationVerdict::irrational_like && err < 1e-3 && irr.total_windings >= 1e3,
          std::string("tan(2 pi x0) = sqrt2: ") + to_string(irr.verdict) + ", estimate error " + sci(err) +
              " after " + fmt("%.0f", irr.total_windings) + " windings");
  const double dt = seconds_since(t0);
  o.check(dt < 300.0, "runtime " + fmt("%.2f", dt) + " s < 300 s");
  return o;
}

Outcome chamber_fibration_checks() {
  Outcome o;
  const SpectralConstruction c = golden_solution();
  const ScalarField f = to_scalar_field(c.source.f);
  ChamberOptions opt;
  opt.eps_grad = 1e-3 * kTwoPi;
  Rng rng(9);
  std::vector<Vec3> bases;
  while (bases.size() < 10) {
    const Vec3 p = rng.point();
    if (std::abs(f.value(p)) < 0.8) bases.push_back(p);
  }
  double lin = 0.0, ring = 0.0, ends = 0.0;
  bool early_stop = false;
  bool reached = true;
  for (const Vec3& p : bases) {
    const ChamberRecord r = chamber_fibration(kTorus, f, p, -0.1, 0.1, opt);
    lin = std::max(lin, r.linearity_residual);
    early_stop = early_stop || r.truncated_lo || r.truncated_hi;
    // A ring on the level through p, transported by the same t, stays on one level.
    for (double t : {-0.1, 0.1}) {
      std::vector<double> fv;
      for (int k = 0; k < 10; ++k) {
        const double a = kTwoPi * k / 10.0;
        const Vec3 q = p + Vec3(0.0, 0.3 * std::cos(a), 0.3 * std::sin(a));
        fv.push_back(f.value(transport(kTorus, f, q, t, opt)));
      }
      const auto [lo, hi] = std::minmax_element(fv.begin(), fv.end());
      ring = std::max(ring, *hi - *lo);
    }
    // Growing spans: the flow stops at the critical slabs f = +-1 (x = 0 and x = 1/2).
    for (double span : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const ChamberRecord g = chamber_fibration(kTorus, f, p, -span, span, opt);
      const double up = r.f_base + span;
      const double down = r.f_base - span;
      if (up > 1.0 + 1e-2) {
        reached = reached && g.truncated_hi;
        ends = std::max(ends, std::abs(g.f_base + g.t_hi - f.value(Vec3::Zero())));
      } else if (up < 1.0 - 1e-2) {
        reached = reached && !g.truncated_hi;
      }
      if (down < -1.0 - 1e-2) {
        reached = reached && g.truncated_lo;
        ends = std::max(ends, std::abs(g.f_base + g.t_lo - f.value(Vec3(0.5, 0, 0))));
      } else if (down > -1.0 + 1e-2) {
        reached = reached && !g.truncated_lo;
      }
    }
  }
  o.check(lin < 1e-6 && !early_stop, "f-linearity residual " + sci(lin) + " < 1e-6 on t in [-0.1, 0.1] (10 bases)");
  o.check(ring < 1e-6, "transported ring spread " + sci(ring) + " < 1e-6");
  o.check(reached && ends < 1e-2, "growing spans stop exactly at the critical slabs; epsilon-range endpoint error " +
                                      sci(ends) + " < 1e-2");
  return o;
}

Outcome gamma_evidence() {
  Outcome o;
  const SpectralConstruction c = golden_solution();
  ScanThresholds t;
  t.eps_grad = 1e-2 * kTwoPi;
  t.delta_level = 6e-2;
  CriticalScan s = critical_scan(c.source.f, ScanGrid::torus(64), t, 4);
  bool values = s.critical_values.size() == 2;
  double err = 0.0;
  if (values) err = std::max(std::abs(s.critical_values[0] + 1.0), std::abs(s.critical_values[1] - 1.0));
  o.check(values && err < 1e-6, "critical values " + std::to_string(s.critical_values.size()) +
                                    " found, max error vs {-1, +1} " + sci(err));
  const std::size_t comps = level_components(s, 0.0, std::max(s.thresholds.delta_level, 1e-3)).size();
  o.check(comps == 2, std::to_string(comps) + " level components at c = 0");
  std::vector<std::size_t> counts{s.gamma_count};
  for (int i = 0; i < 2; ++i) {
    s.thresholds.eps_grad *= 0.5;
    s.thresholds.delta_level *= 0.5;
    classify_critical(s);
    counts.push_back(s.gamma_count);
  }
  const bool shrink = counts[1] < counts[0] && counts[2] < counts[1];
  o.check(shrink, "Gamma node count " + std::to_string(counts[0]) + " -> " + std::to_string(counts[1]) + " -> " +
                      std::to_string(counts[2]) + " (strictly shrinking)");
  return o;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files[e.path().filename().string()] = read_file(e.path());
  return files;
}

Outcome determinism() {
  Outcome o;
  const auto dir = scratch_dir("acceptance_determinism");
  const std::string sol = (dir / "solution.json").string();
  const std::vector<std::vector<std::string>> runs{
      {"construct", "--symmetry", "t3_e3", "--N", "4", "--route", "operator"},
      {"construct", "--symmetry", "t3_e3", "--N", "4"},
      {"verify", "--solution", sol},
      {"trace", "--solution", sol, "--seeds", "20", "--arc-length", "1000", "--tol", "1e-10"},
      {"poincare", "--solution", sol, "--seeds", "20", "--crossings", "200", "--gnuplot"},
      {"scan", "--solution", sol, "--grid", "64", "--chambers", "10"},
      {"construct", "--symmetry", "s3_hopf"},
  };
  std::vector<std::map<std::string, std::string>> passes(2);
  bool codes = true;
  for (auto& snap : passes) {
    scratch_dir("acceptance_determinism");  // same path, emptied
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const CliResult r = run_cli(dir, runs[i]);
      codes = codes && r.code == 0;
      const std::string tag = std::to_string(i) + "-" + runs[i][0] + "/";
      for (auto& [name, bytes] : snapshot(dir)) snap[tag + name] = bytes;
      snap[tag + "stdout"] = r.out;
    }
  }
  o.check(codes, "all CLI runs exit 0");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : passes[0]) {
    const auto it = passes[1].find(name);
    if (it == passes[1].end() || it->second != bytes) ++differing;
  }
  o.check(differing == 0 && passes[0].size() == passes[1].size(),
          std::to_string(passes[0].size()) + " output files compared, " + std::to_string(differing) + " differ");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"identity suite: grad g(X,Y) = Y x curl X + [Y,X] for Killing Y", identity_suite},
      {"Hopf field certificate", hopf_certificate},
      {"scalar-to-Beltrami construction on the flat torus", torus_construction},
      {"scalar-to-Beltrami construction on the round sphere", sphere_construction},
      {"existence operator route", operator_route},
      {"irrational direction no-go", no_go},
      {"helicity of eigenfields", helicity_relation},
      {"field-line dynamics on the 2.5D solution", structure_dynamics},
      {"chamber fibration", chamber_fibration_checks},
      {"singular set evidence", gamma_evidence},
      {"byte-identical reruns", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("FAILED: exception: ") + e.what());
    }
    const double dt = seconds_since(t0);
    if (!o.pass) ++failures;
    std::printf("[%s] %2zu %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), dt);
    for (const auto& n : o.notes) std::printf("         %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
