#ifndef FLEXURAL_POSTPROC_HPP
#define FLEXURAL_POSTPROC_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flexural/assembly.hpp"
#include "flexural/geometry.hpp"
#include "flexural/solve.hpp"

namespace flexural
{

// Symmetric quadrature on the reference triangle; weights sum to 1.
struct TriangleRule
{
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;
  int degree;

  static const TriangleRule &degree4();  // 6 points
  static const TriangleRule &degree7();  // 13 points
};

struct FieldSample
{
  Complex v;
  Complex w;
  std::array<Complex, 2> grad_v;
  std::array<Complex, 2> grad_w;
};

using ExactEvaluator = std::function<FieldSample(Vec2)>;

// Exact values at every quadrature point of every element, element-major. Lets
// sweeps on a fixed mesh evaluate the oracle once.
struct QuadratureSamples
{
  const TriangleRule *rule;
  std::vector<FieldSample> values;
};

QuadratureSamples sample_exact(const Mesh &mesh, const ExactEvaluator &exact,
                               const TriangleRule &rule = TriangleRule::degree4());

struct ErrorReport
{
  std::string method;
  double kappa = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  int N = 0;
  double h = 0.0;
  int dofs = 0;
  double E_L2_v = 0.0;
  double E_H1_v = 0.0;
  double E_L2_w = 0.0;
  double E_H1_w = 0.0;
};

// Relative errors only; the caller fills in the descriptive fields.
ErrorReport compute_errors(const SolutionField &field, const Mesh &mesh,
                           const QuadratureSamples &exact);
ErrorReport compute_errors(const SolutionField &field, const Mesh &mesh,
                           const ExactEvaluator &exact,
                           const TriangleRule &rule = TriangleRule::degree4());

struct BoundaryTrace
{
  std::vector<double> param;
  std::vector<Complex> w;

  // Cyclic sum of |Re w_{j+1} - Re w_j|.
  double total_variation() const;
};

BoundaryTrace boundary_trace(const SolutionField &field, const Mesh &mesh);

struct Location
{
  int triangle;
  std::array<double, 3> barycentric;
  double outside_distance;  // 0 inside
};

//
// Point location by walking across neighbors, with a bucket grid to seed the
// walk and a scan fallback.
//
class PointLocator
{
public:
  explicit PointLocator(const Mesh &mesh);

  // Containing triangle within tolerance, or nullopt.
  std::optional<Location> locate(Vec2 x, double tolerance = 1e-10) const;
  // Closest triangle; barycentric coordinates may be negative outside the mesh.
  Location nearest(Vec2 x) const;

private:
  std::array<double, 3> barycentric(int t, Vec2 x) const;
  double distance_to(int t, Vec2 x) const;
  int seed(Vec2 x) const;

  const Mesh *mesh_;
  double x0_ = 0.0;
  double y0_ = 0.0;
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

enum class Outside
{
  reject,
  // Linear extension of the nearest triangle for points up to `reach` away.
  extrapolate
};

// v, w and their gradients of the FE field at the given points.
std::vector<FieldSample> evaluate_at_points(const SolutionField &field, const Mesh &mesh,
                                            const std::vector<Vec2> &points,
                                            Outside mode = Outside::reject, double reach = 0.0);

// Evaluator backed by an FE field; usable as the reference for compute_errors.
ExactEvaluator field_evaluator(const SolutionField &field, const Mesh &mesh,
                               Outside mode = Outside::reject, double reach = 0.0);

// Document writers. Numbers use %.17g so parsed values round-trip exactly.
std::string field_csv(const SolutionField &field, const Mesh &mesh);
std::string trace_csv(const BoundaryTrace &trace);
std::string error_csv_header();
std::string error_csv_row(const ErrorReport &report);
std::string field_vtk(const SolutionField &field, const Mesh &mesh);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string &text);

void write_text_file(const std::string &path, const std::string &text);
std::string read_text_file(const std::string &path);

}  // namespace flexural

#endif  // FLEXURAL_POSTPROC_HPP
