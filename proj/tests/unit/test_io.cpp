#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "beltrami/io.hpp"
#include "cli_support.hpp"
#include "support.hpp"

using namespace beltrami;
using namespace testing_support;
using io::json;

TEST(Json, SpectralFieldRoundTripIsExact) {
  Rng rng(7);
  const SpectralField X = random_field(3, rng);
  const SpectralField back = io::spectral_field_from_json(json::parse(io::to_json(X).dump(2)));
  ASSERT_EQ(back.truncation(), 3);
  X.for_each([&](const Wavevector& k, const Vec3c& c) {
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(back.at(k)[i].real(), c[i].real());
      EXPECT_EQ(back.at(k)[i].imag(), c[i].imag());
    }
  });
}

TEST(Json, ScalarRoundTripIsExact) {
  SpectralScalar f(2);
  f.at({1, -2, 0}) = Complex(0.1, 1.0 / 3.0);
  f.at({-1, 2, 0}) = Complex(0.1, -1.0 / 3.0);
  f.at({0, 0, 1}) = Complex(std::numeric_limits<double>::denorm_min(), 0.0);
  const SpectralScalar back = io::spectral_scalar_from_json(json::parse(io::to_json(f).dump()));
  EXPECT_EQ((back - f).max_abs(), 0.0);
  EXPECT_EQ(io::to_json(f)["modes"].size(), 3u);
}

TEST(Json, RejectsMalformedInput) {
  EXPECT_THROW(io::spectral_field_from_json(json::object()), Error);
  json j = {{"N", 1}, {"modes", json::array({json::array({json::array({2, 0, 0}), json::array({0, 0, 0}),
                                                          json::array({0, 0, 0})})})}};
  EXPECT_THROW(io::spectral_field_from_json(j), Error);
  EXPECT_THROW(io::vec3_from_json(json::array({1, 2})), Error);
  EXPECT_EQ(io::vec3_from_json(json::array({1, 2, 3.5})), Vec3(1, 2, 3.5));
}

TEST(Json, ShortestRoundTripDoubles) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, kPi, 5e-324}) {
    EXPECT_EQ(std::strtod(io::format_double(v).c_str(), nullptr), v) << io::format_double(v);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
}

TEST(Documents, CarrySchemaAndRunConfig) {
  io::RunConfig cfg;
  cfg.command = "scan";
  cfg.delta_level = 0.25;
  const json d = io::document("scan", cfg);
  EXPECT_EQ(d["schema"], io::kSchemaVersion);
  EXPECT_EQ(d["kind"], "scan");
  EXPECT_EQ(d["run_config"]["command"], "scan");
  EXPECT_EQ(d["run_config"]["delta_level"], 0.25);
  EXPECT_TRUE(d["run_config"]["eps_grad"].is_null());
}

TEST(Documents, ConfigValidation) {
  io::RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.grid = 0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg.grid = 8;
  cfg.eps_grad = -1.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
}

TEST(Csv, HeaderRowsAndWidth) {
  io::RunConfig cfg;
  io::CsvWriter csv({"a", "b", "c"}, cfg);
  csv.row(1, 0.5, std::string("x"));
  const std::string s = csv.str();
  EXPECT_EQ(s.rfind("# schema=beltrami-1; run_config={", 0), 0u);
  EXPECT_NE(s.find("\na,b,c\n1,0.5,x\n"), std::string::npos);
  EXPECT_THROW(csv.row(1, 2), Error);
}

TEST(Gnuplot, PlotsInSectionCoordinates) {
  const std::string gp = io::poincare_gnuplot(SectionSpec::parse("z=0"), "poincare.csv", {});
  EXPECT_NE(gp.find("using 4:5"), std::string::npos);
  EXPECT_NE(io::poincare_gnuplot(SectionSpec::parse("x=0.5"), "p.csv", {}).find("using 5:6"), std::string::npos);
}

TEST(Cli, CatalogListsEntries) {
  const auto dir = scratch_dir("catalog");
  const CliResult r = run_cli(dir, {"catalog", "list"});
  EXPECT_EQ(r.code, 0) << r.err;
  for (const char* n : {"t3_e1", "t3_e2", "t3_e3", "t3_irrational", "s3_hopf", "r3_rotation_patch"})
    EXPECT_NE(r.out.find(n), std::string::npos) << n;
  EXPECT_EQ(run_cli(dir, {"catalog", "show", "s3_hopf"}).code, 0);
  EXPECT_EQ(run_cli(dir, {"catalog", "show", "nope"}).code, 1);
}

TEST(Cli, ConstructThenVerify) {
  const auto dir = scratch_dir("construct");
  const CliResult c = run_cli(dir, {"construct", "--symmetry", "t3_e3", "--N", "3"});
  ASSERT_EQ(c.code, 0) << c.err;
  const json sol = json::parse(read_file(dir / "solution.json"));
  EXPECT_EQ(sol["schema"], io::kSchemaVersion);
  EXPECT_EQ(sol["kind"], "solution");
  EXPECT_DOUBLE_EQ(sol["mu"].get<double>(), kTwoPi);
  const CliResult v = run_cli(dir, {"verify", "--solution", (dir / "solution.json").string()});
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_TRUE(json::parse(read_file(dir / "verify.json"))["pass"].get<bool>());
}

TEST(Cli, VerifyFlagsATamperedSolution) {
  const auto dir = scratch_dir("tamper");
  ASSERT_EQ(run_cli(dir, {"construct", "--symmetry", "t3_e1", "--N", "2"}).code, 0);
  json sol = json::parse(read_file(dir / "solution.json"));
  sol["mu"] = sol["mu"].get<double>() * 1.01;
  io::write_json((dir / "bad.json").string(), sol);
  const CliResult v = run_cli(dir, {"verify", "--solution", (dir / "bad.json").string()});
  EXPECT_EQ(v.code, 3);
  EXPECT_FALSE(json::parse(read_file(dir / "verify.json"))["pass"].get<bool>());
}

TEST(Cli, IrrationalSymmetryIsAHypothesisFailure) {
  const auto dir = scratch_dir("irrational");
  const CliResult r = run_cli(dir, {"construct", "--symmetry", "t3_irrational", "--N", "4"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("V_n^Y != {0}"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(dir / "solution.json"));
}

TEST(Cli, RotationPatchIsNotBeltramiKilling) {
  const auto dir = scratch_dir("patch");
  EXPECT_EQ(run_cli(dir, {"construct", "--symmetry", "r3_rotation_patch"}).code, 2);
}

TEST(Cli, UsageErrors) {
  const auto dir = scratch_dir("usage");
  EXPECT_EQ(run_cli(dir, {"construct"}).code, 1);
  EXPECT_EQ(run_cli(dir, {"construct", "--symmetry", "t3_e3", "--N", "0"}).code, 1);
  EXPECT_EQ(run_cli(dir, {"construct", "--symmetry", "t3_e3", "--route", "magic"}).code, 1);
  EXPECT_EQ(run_cli(dir, {"verify", "--solution", (dir / "missing.json").string()}).code, 1);
  EXPECT_EQ(run_cli(dir, {"--help"}).code, 0);
}

TEST(Cli, TracePoincareAndScanWriteTheirFiles) {
  const auto dir = scratch_dir("pipeline");
  ASSERT_EQ(run_cli(dir, {"construct", "--symmetry", "t3_e3", "--N", "2"}).code, 0);
  const std::string sol = (dir / "solution.json").string();
  EXPECT_EQ(run_cli(dir, {"trace", "--solution", sol, "--seeds", "2", "--arc-length", "20"}).code, 0);
  EXPECT_EQ(run_cli(dir, {"poincare", "--solution", sol, "--seeds", "2", "--crossings", "5", "--gnuplot"}).code, 0);
  EXPECT_EQ(run_cli(dir, {"scan", "--solution", sol, "--grid", "16", "--chambers", "2"}).code, 0);
  for (const char* f : {"trace.csv", "trace.json", "poincare.csv", "poincare.json", "poincare.gp", "scan.json",
                        "gamma.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const json scan = json::parse(read_file(dir / "scan.json"));
  EXPECT_EQ(scan["scan"]["critical_values"].size(), 2u) << scan.dump(2).substr(0, 2000);
  EXPECT_EQ(run_cli(dir, {"poincare", "--solution", sol, "--section", "q=1"}).code, 1);
}
