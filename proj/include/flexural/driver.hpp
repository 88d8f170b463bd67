#ifndef FLEXURAL_DRIVER_HPP
#define FLEXURAL_DRIVER_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flexural/assembly.hpp"
#include "flexural/geometry.hpp"
#include "flexural/postproc.hpp"
#include "flexural/solve.hpp"

namespace flexural
{

struct MeshSource
{
  enum class Kind
  {
    generate,
    import_file
  };

  Kind kind = Kind::generate;
  // generate: explicit counts when both are positive, otherwise the coarsest
  // mesh with mesh_size() <= h.
  double h = 0.05;
  int n_radial = 0;
  int n_angular = 0;
  std::string path;  // import_file

  friend bool operator==(const MeshSource &, const MeshSource &) = default;
};

struct OracleChoice
{
  enum class Kind
  {
    series,
    reference,
    none
  };

  Kind kind = Kind::series;
  int modes = 25;    // series
  std::string path;  // reference: output directory of an earlier solve

  friend bool operator==(const OracleChoice &, const OracleChoice &) = default;
};

struct ScatterConfig
{
  double kappa = 3.141592653589793;
  double alpha = 3.141592653589793 / 3.0;
  CavityShape shape = CavityShape::circle(0.3);
  double R = 0.6;
  int N = 15;
  MethodChoice method;
  MeshSource mesh;
  OracleChoice oracle;
  std::string output = "out";

  // Throws InputError on any out-of-range field.
  void validate() const;

  friend bool operator==(const ScatterConfig &, const ScatterConfig &) = default;
};

nlohmann::json config_to_json(const ScatterConfig &config);
// Missing keys take their defaults; unknown keys are rejected.
ScatterConfig config_from_json(const nlohmann::json &j);
std::string emit_config(const ScatterConfig &config);
ScatterConfig parse_config(std::string_view text);

Mesh build_mesh(const ScatterConfig &config);

// Oracle for the config on the given mesh, or nullopt for oracle none.
std::optional<ExactEvaluator> make_oracle(const ScatterConfig &config, const Mesh &mesh);

struct SolveOutcome
{
  Mesh mesh;
  SolutionField field;
  BoundaryTrace trace;
  std::optional<ErrorReport> errors;
};

// Assembles and solves without touching the file system.
SolveOutcome solve_config(const ScatterConfig &config, const Mesh &mesh,
                          bool estimate_condition = false);

// field.csv, field.vtk, trace.csv, mesh.txt, metadata.json and, with an
// oracle, errors.csv under config.output.
SolveOutcome run_solve(const ScatterConfig &config);

enum class SweepParameter
{
  gamma,
  eta,
  kappa
};

SweepParameter sweep_parameter_from(std::string_view name);
std::string sweep_parameter_name(SweepParameter p);

struct SweepRow
{
  double value = 0.0;
  std::optional<ErrorReport> report;  // empty when the solve failed
  double trace_variation = 0.0;
  std::string status = "ok";
};

// One solve per value on a fixed mesh. gamma and eta sweeps switch the method
// to IP and BP. A failing value is recorded in its row and the sweep goes on.
std::vector<SweepRow> sweep(const ScatterConfig &config, SweepParameter parameter,
                            const std::vector<double> &values);
// Writes sweep.csv and metadata.json.
std::vector<SweepRow> run_sweep(const ScatterConfig &config, SweepParameter parameter,
                                const std::vector<double> &values);

std::vector<double> logspace(double lo, double hi, int count);

struct ConvergenceStudy
{
  std::vector<ErrorReport> levels;
  // Least-squares slopes of log error against log h: L2 v, H1 v, L2 w, H1 w.
  std::array<double, 4> orders{};
  std::string reference;  // "series" or a description of the fine mesh
  int reference_dofs = 0;
};

// Circle with a series oracle: errors against the series. Otherwise against
// IP-FEM two refinements beyond the finest level.
ConvergenceStudy convergence(const ScatterConfig &config, int levels);
// Writes convergence.csv, orders.csv and metadata.json.
ConvergenceStudy run_convergence(const ScatterConfig &config, int levels);

double least_squares_slope(const std::vector<double> &x, const std::vector<double> &y);

// Series fields on a (grid + 1)^2 Cartesian grid over [-R, R]^2; points
// inside the cavity or beyond R are omitted. Writes analytic.csv and
// coefficients.csv.
void run_analytic(const ScatterConfig &config, int grid);

// Writes mesh.txt and metadata.json.
Mesh run_mesh(const ScatterConfig &config);

std::string convergence_csv(const ConvergenceStudy &study);
std::string orders_csv(const ConvergenceStudy &study);
std::string sweep_csv(SweepParameter parameter, const std::vector<SweepRow> &rows);

}  // namespace flexural

#endif  // FLEXURAL_DRIVER_HPP
