#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>

#include "flexural/driver.hpp"
#include "flexural/errors.hpp"

using namespace flexural;
namespace fs = std::filesystem;

namespace
{

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("flexural_driver_" + name);
  fs::remove_all(p);
  return p;
}

ScatterConfig small_config(const std::string &name)
{
  ScatterConfig c;
  c.mesh.n_radial = 4;
  c.mesh.n_angular = 32;
  c.method = MethodChoice::interior_penalty(kPi * 1e-3);
  c.output = scratch(name).string();
  return c;
}

int run_cli(const std::string &args)
{
  const std::string cmd = std::string(FLEXURAL_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, JsonRoundTrip)
{
  ScatterConfig c;
  c.kappa = 2.5;
  c.alpha = 0.1;
  c.shape = CavityShape::kite(0.3, 0.1, 0.2);
  c.R = 0.8;
  c.N = 20;
  c.method = MethodChoice::boundary_penalty(0.01);
  c.mesh.kind = MeshSource::Kind::import_file;
  c.mesh.path = "m.txt";
  c.oracle.kind = OracleChoice::Kind::none;
  c.output = "somewhere";
  EXPECT_EQ(parse_config(emit_config(c)), c);
  EXPECT_EQ(parse_config("{}"), ScatterConfig());
  EXPECT_EQ(emit_config(parse_config(emit_config(c))), emit_config(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
  EXPECT_THROW(parse_config(R"({"kapa": 1})"), InputError);
  EXPECT_THROW(parse_config(R"({"method": {"kind": "ip", "gama": 1}})"), InputError);
  EXPECT_THROW(parse_config(R"({"shape": {"kind": "square"}})"), InputError);
  EXPECT_THROW(parse_config(R"({"kappa": "fast"})"), InputError);
  EXPECT_THROW(parse_config("{"), InputError);
  EXPECT_THROW(parse_config("[1, 2]"), InputError);
}

TEST(Config, Validation)
{
  auto bad = [](auto edit) {
    ScatterConfig c;
    edit(c);
    return c;
  };
  EXPECT_NO_THROW(ScatterConfig().validate());
  EXPECT_THROW(bad([](ScatterConfig &c) { c.kappa = 0.0; }).validate(), InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.alpha = 2 * kPi; }).validate(), InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.R = 0.3; }).validate(), InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.N = -1; }).validate(), InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.method.kind = MethodChoice::Kind::interior_penalty;
                                          c.method.gamma = -1.0; })
                   .validate(),
               InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.mesh.n_radial = 1; c.mesh.n_angular = 16; }).validate(),
               InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.mesh.h = 0.0; }).validate(), InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.shape = CavityShape::ellipse(0.3, 0.2); }).validate(),
               InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.oracle.kind = OracleChoice::Kind::reference; })
                   .validate(),
               InputError);
  EXPECT_THROW(bad([](ScatterConfig &c) { c.output.clear(); }).validate(), InputError);
}

TEST(RunSolve, WritesArtifactsReproducibly)
{
  const ScatterConfig c = small_config("solve");
  const SolveOutcome o = run_solve(c);
  ASSERT_TRUE(o.errors.has_value());
  EXPECT_LT(o.errors->E_L2_v, 0.2);
  EXPECT_EQ(o.errors->method, "ip");
  for (const char *name :
       {"field.csv", "field.vtk", "trace.csv", "mesh.txt", "errors.csv", "metadata.json"})
  {
    EXPECT_TRUE(fs::exists(fs::path(c.output) / name)) << name;
  }
  const std::string first = read_text_file((fs::path(c.output) / "field.csv").string());
  const std::string meta = read_text_file((fs::path(c.output) / "metadata.json").string());
  run_solve(c);
  EXPECT_EQ(read_text_file((fs::path(c.output) / "field.csv").string()), first);
  EXPECT_EQ(read_text_file((fs::path(c.output) / "metadata.json").string()), meta);

  // The written mesh imports back to the same solve.
  ScatterConfig again = c;
  again.mesh = MeshSource{};
  again.mesh.kind = MeshSource::Kind::import_file;
  again.mesh.path = (fs::path(c.output) / "mesh.txt").string();
  again.output = scratch("solve_import").string();
  const SolveOutcome o2 = run_solve(again);
  EXPECT_NEAR(o2.errors->E_L2_v, o.errors->E_L2_v, 1e-12 * o.errors->E_L2_v);
}

TEST(RunSolve, ReferenceOracleFromEarlierRun)
{
  ScatterConfig fine = small_config("reference_fine");
  fine.mesh.n_radial = 8;
  fine.mesh.n_angular = 64;
  fine.oracle.kind = OracleChoice::Kind::none;
  const SolveOutcome f = run_solve(fine);
  EXPECT_FALSE(f.errors.has_value());
  EXPECT_FALSE(fs::exists(fs::path(fine.output) / "errors.csv"));

  ScatterConfig coarse = small_config("reference_coarse");
  coarse.oracle.kind = OracleChoice::Kind::reference;
  coarse.oracle.path = fine.output;
  const SolveOutcome o = run_solve(coarse);
  ASSERT_TRUE(o.errors.has_value());
  EXPECT_GT(o.errors->E_L2_v, 0.0);
  EXPECT_LT(o.errors->E_L2_v, 0.2);

  coarse.kappa = 2.0;
  EXPECT_THROW(run_solve(coarse), InputError);
}

TEST(RunSolve, MissingMeshFile)
{
  ScatterConfig c = small_config("missing");
  c.mesh.kind = MeshSource::Kind::import_file;
  c.mesh.path = "/nonexistent/mesh.txt";
  EXPECT_THROW(run_solve(c), InputError);
}

TEST(Sweep, RowsAndCsv)
{
  const ScatterConfig c = small_config("sweep");
  const std::vector<double> values = logspace(1e-4, 1e-1, 4);
  const auto rows = run_sweep(c, SweepParameter::gamma, values);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto &r : rows)
  {
    EXPECT_EQ(r.status, "ok");
    ASSERT_TRUE(r.report.has_value());
    EXPECT_EQ(r.report->method, "ip");
    EXPECT_EQ(r.report->gamma, r.value);
    EXPECT_GT(r.trace_variation, 0.0);
  }
  const CsvTable t = parse_csv(read_text_file((fs::path(c.output) / "sweep.csv").string()));
  EXPECT_EQ(t.header.front(), "parameter");
  EXPECT_EQ(t.header.back(), "status");
  EXPECT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0][0], "gamma");

  // A failed value keeps its row with empty error fields.
  std::vector<SweepRow> failed(1);
  failed[0].value = 0.5;
  failed[0].trace_variation = std::nan("");
  failed[0].status = "solver failed, reason\nhere";
  const CsvTable f = parse_csv(sweep_csv(SweepParameter::eta, failed));
  ASSERT_EQ(f.rows.size(), 1u);
  EXPECT_EQ(f.rows[0].size(), f.header.size());
  EXPECT_EQ(f.rows[0][0], "eta");
  EXPECT_EQ(f.rows[0][2], "");
  EXPECT_EQ(f.rows[0].back(), "solver failed; reason here");

  EXPECT_THROW(sweep(c, SweepParameter::gamma, {}), InputError);
  EXPECT_THROW(sweep(c, SweepParameter::gamma, {0.1, 0.01}), InputError);
  EXPECT_THROW(sweep_parameter_from("beta"), InputError);
  EXPECT_EQ(sweep_parameter_from("kappa"), SweepParameter::kappa);
}

TEST(Sweep, KappaReassembles)
{
  const ScatterConfig c = small_config("sweep_kappa");
  const auto rows = sweep(c, SweepParameter::kappa, {2.0, kPi});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].report->kappa, 2.0);
  // The second value is the base config, so it matches a direct solve.
  const SolveOutcome o = solve_config(c, build_mesh(c));
  EXPECT_NEAR(rows[1].report->E_L2_v, o.errors->E_L2_v, 1e-12);
}

TEST(Numerics, LogspaceAndSlope)
{
  const auto v = logspace(1e-4, 1e-1, 25);
  ASSERT_EQ(v.size(), 25u);
  EXPECT_DOUBLE_EQ(v.front(), 1e-4);
  EXPECT_DOUBLE_EQ(v.back(), 1e-1);
  for (std::size_t k = 1; k < v.size(); ++k)
  {
    EXPECT_NEAR(std::log10(v[k] / v[k - 1]), 0.125, 1e-12);
  }
  EXPECT_THROW(logspace(1.0, 0.5, 4), InputError);
  const std::vector<double> h = {0.1, 0.05, 0.025};
  const std::vector<double> e = {3 * 0.01, 3 * 0.0025, 3 * 0.000625};
  EXPECT_NEAR(least_squares_slope(h, e), 2.0, 1e-12);
  EXPECT_THROW(least_squares_slope({1.0}, {1.0}), InputError);
}

TEST(Convergence, CircleInteriorPenalty)
{
  ScatterConfig c = small_config("converge");
  c.mesh.n_radial = 0;
  c.mesh.n_angular = 0;
  c.mesh.h = 0.2;
  const ConvergenceStudy s = run_convergence(c, 3);
  ASSERT_EQ(s.levels.size(), 3u);
  EXPECT_EQ(s.reference, "series");
  for (std::size_t k = 1; k < s.levels.size(); ++k)
  {
    EXPECT_GT(s.levels[k].dofs, s.levels[k - 1].dofs);
    EXPECT_LT(s.levels[k].h, s.levels[k - 1].h);
  }
  EXPECT_GT(s.orders[0], 1.5);
  EXPECT_GT(s.orders[1], 0.8);
  const CsvTable orders = parse_csv(read_text_file((fs::path(c.output) / "orders.csv").string()));
  EXPECT_EQ(orders.rows.size(), 4u);
  EXPECT_THROW(convergence(c, 2), InputError);
}

TEST(Convergence, FineReferenceForNonCircle)
{
  ScatterConfig c = small_config("converge_ellipse");
  c.shape = CavityShape::ellipse(0.3, 0.2);
  c.oracle.kind = OracleChoice::Kind::none;
  c.mesh.n_radial = 2;
  c.mesh.n_angular = 16;
  const ConvergenceStudy s = convergence(c, 3);
  EXPECT_NE(s.reference.find("ip gamma"), std::string::npos);
  EXPECT_GT(s.reference_dofs, s.levels.back().dofs);
  EXPECT_LT(s.levels.back().E_H1_v, s.levels.front().E_H1_v);
}

TEST(Analytic, GridFiles)
{
  ScatterConfig c = small_config("analytic");
  run_analytic(c, 20);
  const CsvTable t = parse_csv(read_text_file((fs::path(c.output) / "analytic.csv").string()));
  EXPECT_FALSE(t.rows.empty());
  for (const auto &row : t.rows)
  {
    const double r = std::hypot(std::stod(row[0]), std::stod(row[1]));
    EXPECT_GE(r, 0.3 - 1e-12);
    EXPECT_LE(r, 0.6 + 1e-12);
  }
  EXPECT_TRUE(fs::exists(fs::path(c.output) / "coefficients.csv"));
  c.shape = CavityShape::ellipse(0.3, 0.2);
  c.oracle.kind = OracleChoice::Kind::none;
  EXPECT_THROW(run_analytic(c, 20), InputError);
}

TEST(Cli, ExitCodes)
{
  const std::string out = scratch("cli").string();
  EXPECT_EQ(run_cli("solve --n-radial 3 --n-angular 16 --out " + out), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "field.csv"));
  EXPECT_EQ(run_cli("mesh --shape kite --a 0.3 --b 0.2 --c 0.1 --h 0.2 --out " + out), 0);
  EXPECT_EQ(run_cli("solve --kappa -1 --out " + out), 1);
  EXPECT_EQ(run_cli("solve --mesh-file /nonexistent/mesh.txt --out " + out), 1);
  EXPECT_EQ(run_cli("solve --set method.gama=1 --out " + out), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Sweep, OptimalGammaScalesWithKappa)
{
  const std::vector<double> values = logspace(1e-4, 1e-1, 25);
  double previous = 0.0;
  for (const double kappa : {0.5 * kPi, kPi, 1.5 * kPi, 2.0 * kPi})
  {
    ScatterConfig c;
    c.kappa = kappa;
    c.mesh.h = 0.08;
    const auto rows = sweep(c, SweepParameter::gamma, values);
    std::size_t best = 0;
    for (std::size_t k = 1; k < rows.size(); ++k)
    {
      if (rows[k].report->E_L2_w < rows[best].report->E_L2_w)
      {
        best = k;
      }
    }
    EXPECT_GT(best, 0u);
    EXPECT_LT(best + 1, rows.size());
    EXPECT_GT(values[best], kappa * 1e-3 / 2) << kappa;
    EXPECT_LT(values[best], kappa * 1e-3 * 2) << kappa;
    EXPECT_GE(values[best], previous);
    previous = values[best];
  }
}
