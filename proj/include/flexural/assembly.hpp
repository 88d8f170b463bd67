#ifndef FLEXURAL_ASSEMBLY_HPP
#define FLEXURAL_ASSEMBLY_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "flexural/geometry.hpp"

namespace flexural
{

using Complex = std::complex<double>;
using SparseReal = Eigen::SparseMatrix<double>;
using SparseComplex = Eigen::SparseMatrix<Complex>;
using VectorC = Eigen::VectorXcd;

struct TbcMatrix;

enum class Field
{
  p,
  q
};

//
// Row layout of the unknown vector W = (P_I, Q_I, P_T, Q_T, P_D). Within each
// block, nodes follow the mesh ordering (I by id, T by angle, D by parameter).
// On D nodes p and q share the single unknown P_D.
//
class DofMap
{
public:
  explicit DofMap(const Mesh &mesh);

  struct Entry
  {
    Field field;
    NodeClass node_class;
    int node;
  };

  int size() const { return static_cast<int>(entries_.size()); }
  int row(Field f, int node) const;
  // Inverse of row(); D rows report Field::p.
  const Entry &entry(int row) const { return entries_[row]; }

  int block_offset(Field f, NodeClass c) const;
  int position(int node) const { return position_[node]; }  // index within its class list

private:
  std::vector<Entry> entries_;
  std::vector<int> p_row_;
  std::vector<int> q_row_;
  std::vector<int> position_;
  int n_i_ = 0;
  int n_t_ = 0;
};

//
// Node-level FE matrices before any block arrangement. The penalty matrices
// carry unit weights; gamma and eta are applied in build_system.
//
struct ScalarMatrices
{
  SparseReal stiffness;          // K-bar, all nodes
  SparseReal mass;               // M-bar, all nodes
  SparseReal interior_penalty;   // K-bar_J, all nodes
  SparseReal boundary_penalty;   // K_G, D nodes in cavity_nodes() order
};

struct MethodChoice
{
  enum class Kind
  {
    regular,
    interior_penalty,
    boundary_penalty
  };

  Kind kind = Kind::regular;
  double gamma = 0.0;
  double eta = 0.0;

  static MethodChoice regular() { return {}; }
  static MethodChoice interior_penalty(double gamma);
  static MethodChoice boundary_penalty(double eta);

  std::string name() const;
  friend bool operator==(const MethodChoice &, const MethodChoice &) = default;
};

// Row convention of the assembled system. `symmetric` negates the q-field rows
// of the displayed block form, which leaves the solution unchanged and makes A
// complex symmetric. `as_displayed` keeps the block signs exactly as printed.
enum class RowConvention
{
  symmetric,
  as_displayed
};

struct BlockSystem
{
  SparseComplex A;
  VectorC F;
  DofMap dofs;
};

struct LocalMatrices
{
  std::array<std::array<double, 3>, 3> stiffness;
  std::array<std::array<double, 3>, 3> mass;
};

inline constexpr double kDegenerateArea = 1e-14;

// Exact P1 element matrices; throws MeshError for area <= kDegenerateArea.
LocalMatrices local_matrices(Vec2 a, Vec2 b, Vec2 c);

// Gradients of the three barycentric coordinates (constant on the element).
std::array<Vec2, 3> barycentric_gradients(Vec2 a, Vec2 b, Vec2 c);

// Jump of the normal derivative across an interior edge as a linear functional
// of the nodal values: [d_nu phi] = sum_k weights[k] * phi[nodes[k]].
struct JumpStencil
{
  std::array<int, 4> nodes;
  std::array<double, 4> weights;
};
JumpStencil jump_stencil(const Mesh &mesh, const InteriorEdge &edge);

ScalarMatrices assemble_scalar(const Mesh &mesh);
SparseReal assemble_interior_penalty(const Mesh &mesh);
SparseReal assemble_boundary_penalty(const Mesh &mesh);

// Global system for the regular, IP and BP methods. `load` is a full-length
// vector from incident_load().
BlockSystem build_system(const Mesh &mesh, const ScalarMatrices &scalars, const TbcMatrix &tbc,
                         const VectorC &load, double kappa, const MethodChoice &method,
                         RowConvention convention = RowConvention::symmetric);

// Unchecked form of build_system: kappa^2, gamma and eta may carry any sign and
// the two TBC blocks are given explicitly (N_T x N_T, T nodes in mesh order).
struct SystemCoefficients
{
  double kappa2;
  double gamma;
  double eta;
};
SparseComplex assemble_global(const Mesh &mesh, const DofMap &dofs, const ScalarMatrices &scalars,
                              const SystemCoefficients &coef, const Eigen::MatrixXcd &p_tbc,
                              const Eigen::MatrixXcd &q_tbc, RowConvention convention);

// Triplet accumulator whose duplicate summation order is the insertion order,
// so assembly is bit-reproducible and (i, j) / (j, i) sums match exactly.
template <typename Scalar>
class TripletAccumulator
{
public:
  void add(int row, int col, Scalar v) { entries_.push_back({row, col, v}); }
  void reserve(std::size_t n) { entries_.reserve(n); }
  Eigen::SparseMatrix<Scalar> build(int rows, int cols) const;

private:
  struct Item
  {
    int row;
    int col;
    Scalar value;
  };
  std::vector<Item> entries_;
};

// Matrix Market coordinate dump (complex general) for debugging.
std::string matrix_market(const SparseComplex &A);
std::string matrix_market(const VectorC &F);

}  // namespace flexural

#endif  // FLEXURAL_ASSEMBLY_HPP
