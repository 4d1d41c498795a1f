#pragma once

// Serialization: JSON for solutions and reports, CSV for point clouds, gnuplot
// scripts for Poincare plots. Needs nlohmann/json ("json.hpp") on the include path.
//
// Every file carries the schema version and the full run configuration. Doubles are
// written in shortest round-trip form, so spectral coefficients survive a round
// trip bit for bit and equal runs produce byte-identical files.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beltrami/core.hpp"
#include "beltrami/fieldline.hpp"
#include "beltrami/rotation.hpp"
#include "beltrami/spectral.hpp"
#include "beltrami/structure.hpp"

namespace beltrami::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "beltrami-1";

struct RunConfig {
  std::string command;
  std::string subcommand;
  std::string symmetry;
  std::string route = "scalar";
  std::string normalization = "unit";
  std::string solution;  ///< input solution file, when the command reads one
  int N = 4;
  double h = 1e-3;
  double tol = 1e-10;
  int grid = 64;
  std::optional<double> eps_grad;
  std::optional<double> delta_level;
  std::optional<double> delta_cluster;
  std::string section = "z=0";
  int seeds = 20;
  int crossings = 200;
  double arc_length = 1000.0;
  double t_max = 1e4;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  bool deterministic = false;

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0)) throw PreconditionError(std::string(what) + " must be positive");
    };
    positive(N, "--N");
    positive(h, "--h");
    positive(tol, "--tol");
    positive(grid, "--grid");
    positive(seeds, "--seeds");
    positive(crossings, "--crossings");
    positive(arc_length, "--arc-length");
    positive(t_max, "--t-max");
    positive(threads, "--threads");
    for (const auto& t : {eps_grad, delta_level, delta_cluster})
      if (t) positive(*t, "scan thresholds");
  }
};

inline json to_json(const RunConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["command"] = c.command;
  j["subcommand"] = c.subcommand;
  j["symmetry"] = c.symmetry;
  j["route"] = c.route;
  j["normalization"] = c.normalization;
  j["solution"] = c.solution;
  j["N"] = c.N;
  j["h"] = c.h;
  j["tol"] = c.tol;
  j["grid"] = c.grid;
  j["eps_grad"] = opt(c.eps_grad);
  j["delta_level"] = opt(c.delta_level);
  j["delta_cluster"] = opt(c.delta_cluster);
  j["section"] = c.section;
  j["seeds"] = c.seeds;
  j["crossings"] = c.crossings;
  j["arc_length"] = c.arc_length;
  j["t_max"] = c.t_max;
  j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["deterministic"] = c.deterministic;
  return j;
}

/// Document skeleton: {"schema": ..., "kind": ..., "run_config": ...}.
inline json document(const std::string& kind, const RunConfig& cfg) {
  json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = kind;
  j["run_config"] = to_json(cfg);
  return j;
}

inline json to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

inline Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

/// Non-zero modes only: {"N": N, "modes": [[k1, k2, k3], [re x3], [im x3]], ...}.
inline json to_json(const SpectralField& X) {
  json modes = json::array();
  X.for_each([&](const Wavevector& k, const Vec3c& c) {
    if (c.norm() == 0.0) return;
    modes.push_back(json::array({json::array({k[0], k[1], k[2]}),
                                 json::array({c[0].real(), c[1].real(), c[2].real()}),
                                 json::array({c[0].imag(), c[1].imag(), c[2].imag()})}));
  });
  json j;
  j["N"] = X.truncation();
  j["modes"] = modes;
  return j;
}

inline SpectralField spectral_field_from_json(const json& j) {
  if (!j.contains("N") || !j.contains("modes")) throw Error("spectral field JSON needs 'N' and 'modes'");
  SpectralField X(j.at("N").get<int>());
  for (const auto& m : j.at("modes")) {
    const Wavevector k{m.at(0).at(0).get<int>(), m.at(0).at(1).get<int>(), m.at(0).at(2).get<int>()};
    if (!X.contains(k)) throw Error("spectral field JSON: wavevector outside the truncation");
    Vec3c c;
    for (int i = 0; i < 3; ++i) c[i] = Complex(m.at(1).at(i).get<double>(), m.at(2).at(i).get<double>());
    X.at(k) = c;
  }
  return X;
}

inline json to_json(const SpectralScalar& f) {
  json modes = json::array();
  f.for_each([&](const Wavevector& k, const Complex& c) {
    if (std::abs(c) == 0.0) return;
    modes.push_back(json::array({json::array({k[0], k[1], k[2]}), c.real(), c.imag()}));
  });
  json j;
  j["N"] = f.truncation();
  j["modes"] = modes;
  return j;
}

inline SpectralScalar spectral_scalar_from_json(const json& j) {
  SpectralScalar f(j.at("N").get<int>());
  for (const auto& m : j.at("modes")) {
    const Wavevector k{m.at(0).at(0).get<int>(), m.at(0).at(1).get<int>(), m.at(0).at(2).get<int>()};
    if (!f.contains(k)) throw Error("spectral scalar JSON: wavevector outside the truncation");
    f.at(k) = Complex(m.at(1).get<double>(), m.at(2).get<double>());
  }
  return f;
}

inline json to_json(const RotationEstimate& r) {
  json j;
  j["axes"] = json::array({r.axis_a, r.axis_b});
  j["windings"] = json::array({r.windings_a, r.windings_b});
  j["estimate"] = r.estimate;
  j["uncertainty"] = r.uncertainty;
  j["window"] = r.window;
  j["q_max"] = r.q_max;
  j["verdict"] = to_string(r.verdict);
  j["match"] = r.match ? json(r.match->to_string()) : json(nullptr);
  json cf = json::array();
  for (const auto& c : r.convergents) cf.push_back(c.to_string());
  j["convergents"] = cf;
  j["reason"] = r.reason;
  return j;
}

inline json to_json(const ResolvedThresholds& t) {
  json j;
  j["eps_grad"] = t.eps_grad;
  j["delta_level"] = t.delta_level;
  j["delta_cluster"] = t.delta_cluster;
  return j;
}

inline json to_json(const CriticalScan& s) {
  json j;
  j["grid"] = {{"n", s.grid.n}, {"lo", to_json(s.grid.lo)}, {"hi", to_json(s.grid.hi)}, {"periodic", s.grid.periodic}};
  j["thresholds"] = to_json(s.thresholds);
  j["f_range"] = json::array({s.f_min, s.f_max});
  j["grad_max"] = s.grad_max;
  j["critical_values"] = s.critical_values;
  j["critical_counts"] = s.critical_counts;
  j["clustering"] = "critical nodes whose f-values lie within delta_cluster are merged into one critical value; "
                    "the separation is an implementation parameter, not a bound";
  j["gamma_count"] = s.gamma_count;
  j["gamma_fraction"] = static_cast<double>(s.gamma_count) / static_cast<double>(s.f.size());
  j["degenerate"] = s.degenerate;
  j["warnings"] = s.warnings;
  return j;
}

inline json to_json(const ComponentRecord& c) {
  json j;
  j["level"] = c.level;
  j["seed"] = to_json(c.seed);
  j["cell_count"] = c.cell_count;
  j["components_at_level"] = c.components_at_level;
  j["max_level_error"] = c.max_level_error;
  j["min_cross_norm"] = c.min_cross_norm;
  j["flow_drift"] = c.flow_drift;
  return j;
}

inline json to_json(const ChamberRecord& c) {
  json j;
  j["base"] = to_json(c.base);
  j["f_base"] = c.f_base;
  j["t_requested"] = json::array({c.t_lo_requested, c.t_hi_requested});
  j["t_reached"] = json::array({c.t_lo, c.t_hi});
  j["epsilon_range"] = json::array({c.f_base + c.t_lo, c.f_base + c.t_hi});
  j["truncated"] = json::array({c.truncated_lo, c.truncated_hi});
  j["linearity_residual"] = c.linearity_residual;
  j["note"] = c.note;
  return j;
}

// ------------------------------------------------------------------ files

inline std::string format_double(double v) {
  // Same shortest round-trip form the JSON writer uses.
  return json(v).dump();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

inline json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// CSV with a provenance comment line: "# schema=...; run_config={...}".
class CsvWriter {
 public:
  CsvWriter(const std::vector<std::string>& columns, const RunConfig& cfg) {
    buf_ << "# schema=" << kSchemaVersion << "; run_config=" << to_json(cfg).dump() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) buf_ << (i ? "," : "") << columns[i];
    buf_ << "\n";
    width_ = columns.size();
  }

  template <class... Ts>
  void row(const Ts&... values) {
    static_assert(sizeof...(Ts) > 0);
    if (sizeof...(Ts) != width_) throw Error("CSV row width mismatch");
    std::size_t i = 0;
    ((buf_ << (i++ ? "," : "") << cell(values)), ...);
    buf_ << "\n";
  }

  std::string str() const { return buf_.str(); }
  void save(const std::string& path) const { write_text(path, str()); }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ostringstream buf_;
  std::size_t width_ = 0;
};

/// gnuplot script plotting the two in-section coordinates of poincare.csv, one colour per seed.
inline std::string poincare_gnuplot(const SectionSpec& s, const std::string& csv_name, const RunConfig& cfg) {
  const char* names[] = {"x", "y", "z"};
  int a = s.axis == 0 ? 1 : 0;
  int b = s.axis == 2 ? 1 : 2;
  std::ostringstream o;
  o << "# schema=" << kSchemaVersion << "; run_config=" << to_json(cfg).dump() << "\n";
  o << "set datafile separator ','\n";
  o << "set datafile commentschars '#'\n";
  o << "set key off\nset size square\n";
  o << "set xrange [0:1]\nset yrange [0:1]\n";
  o << "set xlabel '" << names[a] << "'\nset ylabel '" << names[b] << "'\n";
  o << "set title 'Poincare section " << s.to_string() << "'\n";
  // Columns: seed,k,t,x,y,z,sign,f
  o << "plot '" << csv_name << "' using " << (4 + a) << ":" << (4 + b)
    << ":1 with points pt 7 ps 0.3 lc variable\n";
  return o.str();
}

}  // namespace beltrami::io
