// beltrami: command-line front end.
//
//   beltrami catalog list | show NAME
//   beltrami construct --symmetry NAME [--N 4] [--route scalar|operator] [--normalization unit|mp1]
//   beltrami verify   --solution FILE
//   beltrami trace    --solution FILE [--seeds 20] [--arc-length 1000] [--x0 x,y,z ...]
//   beltrami poincare --solution FILE [--section z=0] [--seeds 16] [--crossings 200] [--gnuplot]
//   beltrami scan     --solution FILE [--grid 64] [--eps-grad E] [--delta-level D] [--level c ...]
//
// Exit codes: 0 success, 1 operational error, 2 hypothesis failure (no symmetric
// field / no first integral / symmetry not Beltrami-Killing), 3 verification failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "beltrami/catalog.hpp"
#include "beltrami/fieldline.hpp"
#include "beltrami/io.hpp"
#include "beltrami/rotation.hpp"
#include "beltrami/scalar_eigen.hpp"
#include "beltrami/spectral.hpp"
#include "beltrami/structure.hpp"
#include "beltrami/symmetric.hpp"

namespace fs = std::filesystem;
using namespace beltrami;
using io::json;
using io::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitVerification = 3;

struct VerificationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform doubles in [0, 1) from the top 53 bits; identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  Vec3 point() {
    const double a = uniform();
    const double b = uniform();
    const double c = uniform();
    return {a, b, c};
  }

 private:
  std::mt19937_64 gen_;
};

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------- solutions

/// A constructed field reloaded from disk.
struct Solution {
  json doc;
  KillingEntry entry;
  bool spectral = true;
  double mu = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  Vec3 Y = Vec3::Zero();  // rescaled translation (torus)
  SpectralField X;        // torus
  std::optional<AnalyticConstruction> analytic;  // sphere

  Solution(json d, KillingEntry e) : doc(std::move(d)), entry(std::move(e)) {}
};

Solution load_solution(const RunConfig& cfg) {
  if (cfg.solution.empty()) throw PreconditionError("--solution is required");
  json doc = io::read_json(cfg.solution);
  if (doc.value("schema", "") != io::kSchemaVersion || doc.value("kind", "") != "solution") {
    throw Error("'" + cfg.solution + "' is not a solution file of schema " + io::kSchemaVersion);
  }
  Solution s(doc, catalog_get(doc.at("symmetry").get<std::string>()));
  s.mu = s.doc.at("mu").get<double>();
  s.lambda = s.doc.at("lambda").get<double>();
  s.kappa = s.doc.at("kappa").get<double>();
  const json& field = s.doc.at("field");
  const std::string rep = field.at("representation").get<std::string>();
  if (rep == "spectral") {
    s.spectral = true;
    s.X = io::spectral_field_from_json(field);
    s.Y = io::vec3_from_json(s.doc.at("Y"));
  } else if (rep == "analytic") {
    s.spectral = false;
    const AnalyticScalarPair pair = hopf_golden_pair();
    if (field.at("scalar").get<std::string>() != pair.expression || s.entry.name != "s3_hopf") {
      throw Error("unsupported analytic solution in '" + cfg.solution + "'");
    }
    s.analytic = beltrami_from_scalar(s.entry, pair, chartcalc::FDConfig::finite_difference(cfg.h));
  } else {
    throw Error("unknown field representation '" + rep + "'");
  }
  return s;
}

json spectral_summary(const KillingEntry& entry, const SpectralField& X, double mu, const Vec3& Y) {
  json r;
  const double norm2 = l2_inner(X, X);
  const double H = helicity(X);
  r["curl_residual"] = (curl_spec(X) - mu * X).abs_sum();
  r["divergence_residual"] = divergence_residual(X);
  r["symmetry_residual"] = directional_derivative(Y, X).abs_sum();
  r["reality_residual"] = X.hermitian_residual();
  const SpectralScalar f = first_integral_of_pair(X, Y, mu);
  r["first_integral_residual"] = first_integral_residual(f, X, Y);
  const SpectralRecovery rec = recover_scalar(entry, X, mu);
  r["scalar_reconstruction_residual"] = rec.reconstruction_residual;
  r["scalar_eigen_residual"] = rec.eigen_residual;
  r["helicity_relation_error"] = std::abs(H - norm2 / mu) / std::max(std::abs(H), 1e-300);
  json out;
  out["l2_norm_squared"] = norm2;
  out["helicity"] = H;
  out["residuals"] = r;
  return out;
}

json analytic_summary(const KillingEntry& entry, const AnalyticConstruction& c, const RunConfig& cfg) {
  const auto pts = entry_sample_points(entry, 5);
  const auto fd = chartcalc::FDConfig::finite_difference(cfg.h);
  double curl_res = 0.0, bracket = 0.0, laplace = 0.0, fi = 0.0;
  for (const auto& p : pts) {
    const ManifoldModel m = entry.model_in(p.chart);
    const VectorField& X = c.X.in(p.chart);
    const VectorField& Y = c.Y.in(p.chart);
    const ScalarField& f = c.source.f.in(p.chart);
    curl_res = std::max(curl_res, chartcalc::norm(m, p.x, chartcalc::curl(m, X, p.x, fd) - c.mu * X.value(p.x)));
    bracket = std::max(bracket, chartcalc::norm(m, p.x, chartcalc::lie_bracket(m, Y, X, p.x, fd)));
    laplace = std::max(laplace, std::abs(chartcalc::laplacian(m, f, p.x, fd) - c.lambda * f.value(p.x)));
    const Vec3 d = chartcalc::grad(m, first_integral_of_pair(m, X, Y, c.mu), p.x, fd) -
                   chartcalc::cross(m, p.x, Y.value(p.x), X.value(p.x));
    fi = std::max(fi, chartcalc::norm(m, p.x, d));
  }
  const AnalyticRecovery rec = recover_scalar(entry, c.X, c.mu, pts, fd);
  json r;
  r["curl_residual"] = curl_res;
  r["symmetry_residual"] = bracket;
  r["laplace_residual"] = laplace;
  r["first_integral_residual"] = fi;
  r["scalar_reconstruction_residual"] = rec.reconstruction_residual;
  r["scalar_eigen_residual"] = rec.eigen_residual;
  json out;
  out["sample_points"] = pts.size();
  out["fd_step"] = cfg.h;
  out["residuals"] = r;
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_catalog(const RunConfig& cfg, const std::string& name) {
  json j = io::document("catalog", cfg);
  if (cfg.subcommand == "list") {
    json entries = json::array();
    for (const auto& n : catalog_names()) {
      const KillingEntry e = catalog_get(n);
      entries.push_back({{"name", e.name}, {"model", e.model.name()}, {"description", e.description}});
    }
    j["entries"] = entries;
  } else {
    const KillingEntry e = catalog_get(name);
    j["name"] = e.name;
    j["model"] = e.model.name();
    j["description"] = e.description;
    j["field"] = e.field_expression;
    j["kappa"] = e.kappa ? json(*e.kappa) : json(nullptr);
    j["c"] = e.c ? json(*e.c) : json(nullptr);
    json fis = json::array();
    for (const auto& fi : e.first_integrals) fis.push_back(fi.expression);
    j["first_integrals"] = fis;
    if (e.translation) j["direction"] = e.translation->components_string();
    const EntryCheck chk = check_entry(e, entry_sample_points(e, 3), {});
    j["certificate"] = {{"killing_residual", chk.killing},
                        {"curl_residual", chk.curl},
                        {"norm_residual", chk.norm},
                        {"first_integral_residual", chk.first_integrals},
                        {"divergence", chk.divergence}};
  }
  print(j);
  return kExitOk;
}

int cmd_construct(const RunConfig& cfg) {
  const KillingEntry entry = catalog_get(cfg.symmetry);
  json j = io::document("solution", cfg);
  j["symmetry"] = entry.name;
  j["model"] = entry.model.name();
  j["route"] = cfg.route;
  if (cfg.route != "scalar" && cfg.route != "operator") throw PreconditionError("--route must be scalar or operator");
  if (cfg.normalization != "unit" && cfg.normalization != "mp1") {
    throw PreconditionError("--normalization must be unit or mp1");
  }
  if (!entry.kappa || !entry.c) {
    throw NotBeltramiKilling("symmetry '" + entry.name +
                             "' is not a Beltrami Killing field (curl Y = kappa Y with constant g(Y, Y) fails); "
                             "the construction does not apply");
  }

  if (entry.model.is_sphere()) {
    if (cfg.route != "scalar") throw PreconditionError("the operator route is only available on T^3");
    const AnalyticConstruction c =
        beltrami_from_scalar(entry, hopf_golden_pair(), chartcalc::FDConfig::finite_difference(cfg.h));
    j["mu"] = c.mu;
    j["lambda"] = c.lambda;
    j["kappa"] = c.kappa;
    j["field"] = {{"representation", "analytic"},
                  {"expression", "X = Y x grad f - mu f Y"},
                  {"scalar", c.source.expression},
                  {"charts", "stereographic north/south"}};
    j["summary"] = analytic_summary(entry, c, cfg);
  } else {
    const Direction v = *entry.translation;
    const double y_scale = 1.0 / std::sqrt(*entry.c);
    const Vec3 Y = y_scale * v.numeric();
    SpectralField X;
    double mu = 0.0;
    double lambda = 0.0;
    if (cfg.route == "scalar") {
      ScalarEigenpair pair = solve_constrained_laplacian(v, cfg.N);
      if (cfg.normalization == "unit") pair.f *= Complex(0.5, 0.0);  // amplitude-one cosine
      const SpectralConstruction c = beltrami_from_scalar(entry, pair);
      X = c.X;
      mu = c.mu;
      lambda = c.lambda;
      j["scalar"] = io::to_json(pair.f);
      j["mode"] = json::array({pair.mode[0], pair.mode[1], pair.mode[2]});
    } else {
      const OperatorMatrix op = assemble_pi_curlinv(symmetric_mask(v, cfg.N));
      const TopEigenpair top = top_eigenpair(op);
      const OperatorSpectrum spec = operator_spectrum(op);
      X = top.X;
      mu = 1.0 / top.mu;
      lambda = mu * mu;
      j["operator"] = {{"dimension", op.dimension()},
                       {"top_eigenvalue", top.mu},
                       {"multiplicity", top.multiplicity},
                       {"max_abs_eigenvalue", spec.max_abs},
                       {"jacobi_sweeps", spec.eigen.sweeps}};
      // Cross-route consistency against the scalar eigenproblem.
      const ScalarEigenpair pair = solve_constrained_laplacian(v, cfg.N);
      const double mu_scalar = beltrami_eigenvalue(0.0, pair.lambda);
      j["consistency"] = {{"mu_scalar_route", mu_scalar},
                          {"abs_inverse_top_eigenvalue", 1.0 / std::abs(top.mu)},
                          {"difference", std::abs(1.0 / std::abs(top.mu) - mu_scalar)},
                          {"note", "the largest |eigenvalue| of pi o curl^-1 is the reciprocal of the smallest "
                                   "Beltrami eigenvalue of the scalar route"}};
    }
    j["mu"] = mu;
    j["lambda"] = lambda;
    j["kappa"] = *entry.kappa;
    j["Y"] = io::to_json(Y);
    json field = io::to_json(X);
    field["representation"] = "spectral";
    j["field"] = field;
    j["summary"] = spectral_summary(entry, X, mu, Y);
  }
  const std::string path = out_path(cfg, "solution.json");
  io::write_json(path, j);
  json s = io::document("construct-summary", cfg);
  s["solution_file"] = path;
  s["symmetry"] = j["symmetry"];
  s["mu"] = j["mu"];
  s["lambda"] = j["lambda"];
  s["kappa"] = j["kappa"];
  if (j.contains("consistency")) s["consistency"] = j["consistency"];
  s["summary"] = j["summary"];
  print(s);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  const Solution sol = load_solution(cfg);
  json j = io::document("verification", cfg);
  j["symmetry"] = sol.entry.name;
  json summary;
  double tol = 0.0;
  if (sol.spectral) {
    summary = spectral_summary(sol.entry, sol.X, sol.mu, sol.Y);
    tol = 1e-10 * std::max(1.0, sol.X.abs_sum());
  } else {
    summary = analytic_summary(sol.entry, *sol.analytic, cfg);
    tol = 1e3 * cfg.h * cfg.h;  // second-order differences
  }
  bool ok = true;
  json table = json::array();
  for (const auto& [name, value] : summary["residuals"].items()) {
    const double v = value.get<double>();
    const bool pass = v <= tol;
    ok = ok && pass;
    table.push_back({{"check", name}, {"value", v}, {"tolerance", tol}, {"pass", pass}});
  }
  j["checks"] = table;
  j["pass"] = ok;
  io::write_json(out_path(cfg, "verify.json"), j);
  print(j);
  if (!ok) throw VerificationFailed("one or more residuals exceed tolerance");
  return kExitOk;
}

std::vector<Vec3> seed_points(const RunConfig& cfg, const std::vector<std::string>& explicit_seeds) {
  std::vector<Vec3> seeds;
  for (const auto& s : explicit_seeds) {
    std::stringstream ss(s);
    std::string part;
    std::vector<double> v;
    while (std::getline(ss, part, ',')) v.push_back(std::stod(part));
    if (v.size() != 3) throw PreconditionError("--x0 expects x,y,z: " + s);
    seeds.emplace_back(v[0], v[1], v[2]);
  }
  if (seeds.empty()) {
    Rng rng(cfg.seed);
    for (int i = 0; i < cfg.seeds; ++i) seeds.push_back(rng.point());
  }
  return seeds;
}

int cmd_trace(const RunConfig& cfg, const std::vector<std::string>& x0) {
  const Solution sol = load_solution(cfg);
  IntegrateOptions opt;
  opt.tol = cfg.tol;
  opt.max_arc_length = cfg.arc_length;
  json j = io::document("trace", cfg);
  json per_seed = json::array();
  const std::vector<Vec3> seeds = seed_points(cfg, x0);
  if (sol.spectral) {
    const ManifoldModel m = ManifoldModel::flat_torus();
    const VectorField X = to_vector_field(sol.X);
    const ScalarField f = to_scalar_field(first_integral_of_pair(sol.X, sol.Y, sol.mu));
    io::CsvWriter csv({"seed", "t", "x", "y", "z", "wx", "wy", "wz", "f"}, cfg);
    std::vector<double> levels;
    std::vector<RotationEstimate> estimates;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const Trajectory tr = integrate(m, X, seeds[s], cfg.t_max, opt);
      for (std::size_t i = 0; i < tr.size(); ++i) {
        csv.row(static_cast<int>(s), tr.t[i], tr.x[i][0], tr.x[i][1], tr.x[i][2], tr.windings[i][0],
                tr.windings[i][1], tr.windings[i][2], f.value(tr.x[i]));
      }
      json r = {{"seed", io::to_json(seeds[s])},
                {"steps", tr.steps},
                {"t_end", tr.t.back()},
                {"arc_length", tr.arc_length},
                {"first_integral_drift", first_integral_drift(tr, f)},
                {"max_step_error", tr.max_step_error()}};
      estimates.push_back(rotation_number(tr));
      levels.push_back(f.value(seeds[s]));
      r["rotation"] = io::to_json(estimates.back());
      per_seed.push_back(r);
    }
    csv.save(out_path(cfg, "trace.csv"));
    json groups = json::array();
    for (const auto& g : group_verdicts(levels, estimates)) {
      groups.push_back({{"level", g.level}, {"seeds", g.members}, {"consistent", g.consistent}});
    }
    j["level_groups"] = groups;
  } else {
    const ManifoldModel m = ManifoldModel::round_sphere();
    const AnalyticConstruction& c = *sol.analytic;
    io::CsvWriter csv({"seed", "t", "chart", "x1", "x2", "x3", "y1", "y2", "y3", "y4", "f"}, cfg);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      // Random seeds in the unit cube of the north chart.
      const ChartPoint p0{Chart::north, 2.0 * seeds[s] - Vec3::Ones()};
      const Trajectory tr = integrate(m, c.X, p0, cfg.t_max, opt);
      for (std::size_t i = 0; i < tr.size(); ++i) {
        const Vec4 y = tr.ambient(i);
        csv.row(static_cast<int>(s), tr.t[i], std::string(to_string(tr.charts[i])), tr.x[i][0], tr.x[i][1],
                tr.x[i][2], y[0], y[1], y[2], y[3], c.source.f.in(tr.charts[i]).value(tr.x[i]));
      }
      per_seed.push_back({{"seed", io::to_json(p0.x)},
                          {"steps", tr.steps},
                          {"t_end", tr.t.back()},
                          {"arc_length", tr.arc_length},
                          {"first_integral_drift", first_integral_drift(tr, c.source.f)},
                          {"max_step_error", tr.max_step_error()}});
    }
    csv.save(out_path(cfg, "trace.csv"));
  }
  j["trajectories"] = per_seed;
  io::write_json(out_path(cfg, "trace.json"), j);
  print(j);
  return kExitOk;
}

int cmd_poincare(const RunConfig& cfg, const std::vector<std::string>& x0, bool gnuplot) {
  const Solution sol = load_solution(cfg);
  if (!sol.spectral) throw PreconditionError("Poincare sections are implemented for torus solutions");
  const SectionSpec section = SectionSpec::parse(cfg.section);
  const ManifoldModel m = ManifoldModel::flat_torus();
  const VectorField X = to_vector_field(sol.X);
  const ScalarField f = to_scalar_field(first_integral_of_pair(sol.X, sol.Y, sol.mu));
  std::vector<Vec3> seeds = seed_points(cfg, x0);
  if (x0.empty()) {
    for (auto& s : seeds) s[section.axis] = section.value;  // start on the section
  }
  PoincareOptions opt;
  opt.integrate.tol = cfg.tol;
  opt.t_max = cfg.t_max;
  const auto recs = poincare(m, X, section, seeds, static_cast<std::size_t>(cfg.crossings), opt, &f);
  io::CsvWriter csv({"seed", "k", "t", "x", "y", "z", "sign", "f"}, cfg);
  json per_seed = json::array();
  for (std::size_t s = 0; s < recs.size(); ++s) {
    const auto& r = recs[s];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sec = 0.0;
    for (std::size_t k = 0; k < r.points.size(); ++k) {
      csv.row(static_cast<int>(s), static_cast<int>(k), r.times[k], r.points[k][0], r.points[k][1], r.points[k][2],
              r.signs[k], r.f_values[k]);
      lo = std::min(lo, r.f_values[k]);
      hi = std::max(hi, r.f_values[k]);
      sec = std::max(sec, std::abs(r.points[k][section.axis] - section.value));
    }
    per_seed.push_back({{"seed", io::to_json(r.seed)},
                        {"crossings", r.points.size()},
                        {"complete", r.complete},
                        {"skipped_tangential", r.skipped_tangential},
                        {"f_spread", r.points.empty() ? 0.0 : hi - lo},
                        {"section_residual", sec}});
  }
  csv.save(out_path(cfg, "poincare.csv"));
  if (gnuplot) io::write_text(out_path(cfg, "poincare.gp"), io::poincare_gnuplot(section, "poincare.csv", cfg));
  json j = io::document("poincare", cfg);
  j["section"] = section.to_string();
  j["seeds"] = per_seed;
  io::write_json(out_path(cfg, "poincare.json"), j);
  print(j);
  return kExitOk;
}

int cmd_scan(const RunConfig& cfg, const std::vector<double>& levels, int chambers) {
  const Solution sol = load_solution(cfg);
  ScanThresholds th{cfg.eps_grad, cfg.delta_level, cfg.delta_cluster};
  json j = io::document("scan", cfg);
  j["symmetry"] = sol.entry.name;
  if (!sol.spectral) {
    // North chart box; the rest of S^3 (a neighbourhood of the north pole) lies beyond |x| = 2.
    const AnalyticConstruction& c = *sol.analytic;
    const ManifoldModel m = ManifoldModel::round_sphere(Chart::north);
    const ScalarField f = first_integral_of_pair(m, c.X.north, c.Y.north, c.mu);
    const CriticalScan scan = critical_scan(m, f, ScanGrid::box(cfg.grid + 1, Vec3::Constant(-2), Vec3::Constant(2)),
                                            th, cfg.threads, chartcalc::FDConfig::finite_difference(cfg.h));
    j["first_integral"] = "g(X, Y) / mu";
    j["scan"] = io::to_json(scan);
    j["note"] = "level components are computed on torus solutions only";
    io::write_json(out_path(cfg, "scan.json"), j);
    print(j);
    return kExitOk;
  }
  const ManifoldModel m = ManifoldModel::flat_torus();
  const SpectralScalar fs = first_integral_of_pair(sol.X, sol.Y, sol.mu);
  const ScalarField f = to_scalar_field(fs);
  const VectorField X = to_vector_field(sol.X);
  const VectorField Y = constant_vector_field(sol.Y);
  const CriticalScan scan = critical_scan(m, f, ScanGrid::torus(cfg.grid), th, cfg.threads);
  j["first_integral"] = "g(X, Y) / mu";
  j["scan"] = io::to_json(scan);

  io::CsvWriter gamma({"i", "j", "l", "x", "y", "z", "f"}, cfg);
  for (std::size_t i = 0; i < scan.gamma_mask.size(); ++i) {
    if (!scan.gamma_mask[i]) continue;
    const auto n = scan.grid.node(i);
    const Vec3 p = scan.grid.point(i);
    gamma.row(n[0], n[1], n[2], p[0], p[1], p[2], scan.f[i]);
  }
  gamma.save(out_path(cfg, "gamma.csv"));

  json comps = json::array();
  std::vector<double> lv = levels;
  if (lv.empty()) lv.push_back(0.0);
  for (double c : lv) {
    json entry = {{"level", c}};
    bool regular = !scan.degenerate;
    for (double cv : scan.critical_values) regular = regular && std::abs(c - cv) > scan.thresholds.delta_cluster;
    entry["regular"] = regular;
    if (regular) {
      const auto cc = level_components(scan, c, std::max(scan.thresholds.delta_level, 1e-12));
      entry["component_count"] = cc.size();
      json recs = json::array();
      for (const auto& comp : cc) {
        const Vec3 p = detail::project_to_level(m, f, scan.grid.point(comp.front()) + 0.5 * scan.grid.spacing(), c);
        recs.push_back(io::to_json(level_component(m, f, X, Y, scan, c, p)));
      }
      entry["components"] = recs;
    }
    comps.push_back(entry);
  }
  j["levels"] = comps;

  json ch = json::array();
  Rng rng(cfg.seed);
  ChamberOptions copt;
  copt.eps_grad = scan.thresholds.eps_grad;
  const double span = scan.f_max - scan.f_min;
  for (int k = 0; k < chambers; ++k) {
    Vec3 p = rng.point();
    if (chartcalc::norm(m, p, chartcalc::grad(m, f, p, {})) <= copt.eps_grad) continue;
    ch.push_back(io::to_json(chamber_fibration(m, f, p, -span, span, copt)));
  }
  j["chambers"] = ch;
  io::write_json(out_path(cfg, "scan.json"), j);
  print(j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric Beltrami fields: construction, verification, dynamics and structure scans"};
  app.fallthrough();  // global flags are accepted after the subcommand too
  app.require_subcommand(1);
  RunConfig cfg;
  const char* env_out = std::getenv("BELTRAMI_OUT");
  cfg.out_dir = env_out && *env_out ? env_out : "beltrami_out";
  std::optional<int> threads;
  app.add_option("--out", cfg.out_dir, "Output directory (default: $BELTRAMI_OUT or ./beltrami_out)");
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads for scans (default: all cores; 1 with --deterministic)");
  app.add_flag("--deterministic", cfg.deterministic, "Single-threaded golden-test mode");
  app.add_option("--fd-step", cfg.h, "Finite-difference step")->capture_default_str();
  app.add_option("--tol", cfg.tol, "Integrator tolerance (error per unit step)")->capture_default_str();

  auto* catalog = app.add_subcommand("catalog", "List or show Killing catalog entries");
  catalog->require_subcommand(1);
  auto* cat_list = catalog->add_subcommand("list", "List the catalog");
  auto* cat_show = catalog->add_subcommand("show", "Show one entry");
  std::string show_name;
  cat_show->add_option("name", show_name, "Entry name")->required();

  auto* construct = app.add_subcommand("construct", "Construct a symmetric Beltrami field");
  construct->add_option("--symmetry", cfg.symmetry, "Catalog entry")->required();
  construct->add_option("--N", cfg.N, "Fourier truncation")->capture_default_str();
  construct->add_option("--route", cfg.route, "scalar | operator")->capture_default_str();
  construct->add_option("--normalization", cfg.normalization,
                        "unit (amplitude-one cosine) | mp1 (||f||^2 = 2)")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Recompute residuals of a solution file");
  auto* trace = app.add_subcommand("trace", "Integrate field lines");
  auto* poincare_cmd = app.add_subcommand("poincare", "Poincare section of field lines");
  auto* scan = app.add_subcommand("scan", "Critical set, level components and chambers");
  for (auto* sc : {verify, trace, poincare_cmd, scan}) {
    sc->add_option("--solution", cfg.solution, "Solution JSON from 'construct'")->required();
  }
  std::vector<std::string> x0;
  for (auto* sc : {trace, poincare_cmd}) {
    sc->add_option("--seeds", cfg.seeds, "Number of random seeds")->capture_default_str();
    sc->add_option("--x0", x0, "Explicit seed x,y,z (repeatable)");
    sc->add_option("--t-max", cfg.t_max, "Time limit")->capture_default_str();
  }
  trace->add_option("--arc-length", cfg.arc_length, "Arc length per field line")->capture_default_str();
  poincare_cmd->add_option("--section", cfg.section, "Section plane, e.g. z=0 or z=0,+")->capture_default_str();
  poincare_cmd->add_option("--crossings", cfg.crossings, "Crossings per seed")->capture_default_str();
  bool gnuplot = false;
  poincare_cmd->add_flag("--gnuplot", gnuplot, "Also write a gnuplot script");
  std::vector<double> levels;
  int chambers = 3;
  scan->add_option("--grid", cfg.grid, "Grid points per axis")->capture_default_str();
  scan->add_option("--eps-grad", cfg.eps_grad, "Critical gradient threshold");
  scan->add_option("--delta-level", cfg.delta_level, "Gamma level-shell half width");
  scan->add_option("--delta-cluster", cfg.delta_cluster, "Critical value clustering gap");
  scan->add_option("--level", levels, "Levels for component analysis (default 0)");
  scan->add_option("--chambers", chambers, "Random chamber base points")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  if (threads) {
    cfg.threads = *threads;
  } else {
    cfg.threads = cfg.deterministic ? 1 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }

  try {
    cfg.validate();
    if (*catalog) {
      cfg.command = "catalog";
      cfg.subcommand = *cat_list ? "list" : "show";
      return cmd_catalog(cfg, show_name);
    }
    if (*construct) {
      cfg.command = "construct";
      return cmd_construct(cfg);
    }
    if (*verify) {
      cfg.command = "verify";
      return cmd_verify(cfg);
    }
    if (*trace) {
      cfg.command = "trace";
      return cmd_trace(cfg, x0);
    }
    if (*poincare_cmd) {
      cfg.command = "poincare";
      return cmd_poincare(cfg, x0, gnuplot);
    }
    if (*scan) {
      cfg.command = "scan";
      return cmd_scan(cfg, levels, chambers);
    }
  } catch (const HypothesisFailure& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    if (dynamic_cast<const NoSymmetricFields*>(&e) || dynamic_cast<const NoFirstIntegral*>(&e)) {
      std::cerr << "the existence hypothesis V_n^Y != {0} fails for this symmetry: no non-trivial "
                   "divergence-free field commutes with Y, so no symmetric Beltrami field can be produced\n";
    }
    return kExitHypothesis;
  } catch (const VerificationFailed& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kExitVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
