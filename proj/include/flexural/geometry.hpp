#ifndef FLEXURAL_GEOMETRY_HPP
#define FLEXURAL_GEOMETRY_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flexural
{

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

double norm(Vec2 a);
double dot(Vec2 a, Vec2 b);
double cross(Vec2 a, Vec2 b);

// Positive for counter-clockwise vertex order.
double signed_area(Vec2 a, Vec2 b, Vec2 c);

//
// Star-shaped cavity boundary curves, parametrized by t in [0, 2*pi).
//
class CavityShape
{
public:
  enum class Kind
  {
    circle,
    ellipse,
    kite
  };

  static CavityShape circle(double radius);
  static CavityShape ellipse(double a, double b);
  static CavityShape kite(double a, double b, double c);

  Kind kind() const { return kind_; }
  // circle: {radius}; ellipse: {a, b}; kite: {a, b, c}.
  const std::vector<double> &parameters() const { return params_; }
  std::string name() const;

  Vec2 point(double t) const;

  // Largest |x| over the curve, from dense sampling.
  double max_extent() const;
  // Area of the polygon through `samples` equally spaced points.
  double polygon_area(int samples) const;

  // Throws InputError unless the curve is star-shaped about the origin and
  // strictly inside the circle of radius R.
  void validate_inside(double R) const;

  friend bool operator==(const CavityShape &, const CavityShape &) = default;

private:
  CavityShape(Kind kind, std::vector<double> params);

  Kind kind_;
  std::vector<double> params_;
};

enum class NodeClass
{
  interior,    // I
  truncation,  // T, on Gamma_R
  cavity       // D, on the cavity boundary
};

char class_letter(NodeClass c);

struct Triangle
{
  std::array<int, 3> nodes;  // counter-clockwise
};

// Edge shared by two triangles. `left` has the edge in its own orientation; the
// element index i_K of a triangle is its position in the triangle list plus 1.
struct InteriorEdge
{
  std::array<int, 2> nodes;
  int left;
  int right;
  double length;
};

// Boundary segment, oriented so that its triangle lies on the left.
struct BoundaryEdge
{
  std::array<int, 2> nodes;
  int element;
  double length;
};

// How a generated quad is split when both diagonals have the same length, as
// happens for every cell of a circular cavity. `alternate` flips the split in a
// checkerboard pattern; `fixed` always uses the diagonal from (i, j) to (i+1, j+1).
enum class DiagonalTie
{
  alternate,
  fixed
};

// Where ring nodes sit between cavity node gamma(t_j) and Gamma_R. `linear`
// pairs it with R (cos t_j, sin t_j); `ray` with the point of Gamma_R on the ray
// through gamma(t_j), which cannot fold for a star-shaped cavity.
enum class RadialBlend
{
  linear,
  ray
};

struct StructuredLayout
{
  CavityShape shape;
  double R;
  int n_radial;
  int n_angular;
  DiagonalTie tie = DiagonalTie::alternate;
  RadialBlend blend = RadialBlend::linear;
};

//
// Triangulation of the annulus between the cavity and Gamma_R with the node and
// edge classification used by the penalized FEM. Immutable once built.
//
class Mesh
{
public:
  // Builds adjacency and checks every invariant; throws MeshError on
  // violation. Clockwise triangles are reoriented and reported in warnings().
  Mesh(std::vector<Vec2> nodes, std::vector<NodeClass> classes, std::vector<Triangle> triangles,
       std::optional<StructuredLayout> layout = std::nullopt,
       std::vector<double> cavity_parameters = {});

  const std::vector<Vec2> &nodes() const { return nodes_; }
  const std::vector<NodeClass> &classes() const { return classes_; }
  const std::vector<Triangle> &triangles() const { return triangles_; }
  const std::vector<InteriorEdge> &interior_edges() const { return interior_edges_; }
  // Closed loops in traversal order.
  const std::vector<BoundaryEdge> &cavity_edges() const { return cavity_edges_; }
  const std::vector<BoundaryEdge> &truncation_edges() const { return truncation_edges_; }

  // I nodes by id, T nodes by increasing polar angle, D nodes by increasing
  // boundary parameter.
  const std::vector<int> &interior_nodes() const { return interior_nodes_; }
  const std::vector<int> &truncation_nodes() const { return truncation_nodes_; }
  const std::vector<int> &cavity_nodes() const { return cavity_nodes_; }
  // Aligned with truncation_nodes(): polar angle in [0, 2*pi).
  const std::vector<double> &truncation_angles() const { return truncation_angles_; }
  // Aligned with cavity_nodes(): curve parameter for generated meshes, polar
  // angle for imported ones.
  const std::vector<double> &cavity_parameters() const { return cavity_params_; }

  int count(NodeClass c) const;
  // 2 N_I + 2 N_T + N_D
  int unknown_dimension() const;
  // Maximum edge length.
  double mesh_size() const { return mesh_size_; }
  // Mean radius of the T nodes.
  double truncation_radius() const { return truncation_radius_; }
  double total_area() const;
  double element_area(int t) const;

  // Neighbor across the edge opposite local vertex k, or -1 on the boundary.
  int neighbor(int t, int k) const { return neighbors_[3 * t + k]; }

  const std::optional<StructuredLayout> &layout() const { return layout_; }
  const std::vector<std::string> &warnings() const { return warnings_; }

private:
  void build_edges();
  void classify_nodes(const std::vector<double> &cavity_parameters);
  void check_invariants() const;

  std::vector<Vec2> nodes_;
  std::vector<NodeClass> classes_;
  std::vector<Triangle> triangles_;
  std::vector<InteriorEdge> interior_edges_;
  std::vector<BoundaryEdge> cavity_edges_;
  std::vector<BoundaryEdge> truncation_edges_;
  std::vector<int> interior_nodes_;
  std::vector<int> truncation_nodes_;
  std::vector<int> cavity_nodes_;
  std::vector<double> truncation_angles_;
  std::vector<double> cavity_params_;
  std::vector<int> neighbors_;
  double mesh_size_ = 0.0;
  double truncation_radius_ = 0.0;
  std::optional<StructuredLayout> layout_;
  std::vector<std::string> warnings_;
};

// Structured blend between the cavity curve and Gamma_R with t_j = 2 pi j / n_angular:
// node(i, j) = (1 - i/n_radial) gamma(t_j) + (i/n_radial) outer_j. Without an explicit
// blend the linear one is used unless it folds, then the ray one. Both coincide for
// a circle centred at the origin.
Mesh generate_mesh(const CavityShape &shape, double R, int n_radial, int n_angular,
                   DiagonalTie tie = DiagonalTie::alternate,
                   std::optional<RadialBlend> blend = std::nullopt);

// Chooses n_radial from n_angular so cells are roughly square, then searches
// n_angular for the coarsest mesh with mesh_size() <= h.
Mesh generate_mesh_for_size(const CavityShape &shape, double R, double h,
                            DiagonalTie tie = DiagonalTie::alternate);

// Doubles n_radial and n_angular of a generated mesh.
Mesh refine(const Mesh &mesh);

Mesh import_mesh(std::string_view text);
std::string export_mesh(const Mesh &mesh);

Mesh read_mesh_file(const std::string &path);
void write_mesh_file(const Mesh &mesh, const std::string &path);

}  // namespace flexural

#endif  // FLEXURAL_GEOMETRY_HPP
