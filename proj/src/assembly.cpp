#include "flexural/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "flexural/dtn.hpp"
#include "flexural/errors.hpp"

namespace flexural
{

DofMap::DofMap(const Mesh &mesh)
{
  const std::size_t n = mesh.nodes().size();
  p_row_.assign(n, -1);
  q_row_.assign(n, -1);
  position_.assign(n, -1);
  n_i_ = static_cast<int>(mesh.interior_nodes().size());
  n_t_ = static_cast<int>(mesh.truncation_nodes().size());

  auto place = [&](const std::vector<int> &list, Field f, NodeClass c) {
    for (std::size_t k = 0; k < list.size(); ++k)
    {
      const int node = list[k];
      position_[node] = static_cast<int>(k);
      const int row = static_cast<int>(entries_.size());
      entries_.push_back({f, c, node});
      if (f == Field::p)
      {
        p_row_[node] = row;
      }
      else
      {
        q_row_[node] = row;
      }
    }
  };
  place(mesh.interior_nodes(), Field::p, NodeClass::interior);
  place(mesh.interior_nodes(), Field::q, NodeClass::interior);
  place(mesh.truncation_nodes(), Field::p, NodeClass::truncation);
  place(mesh.truncation_nodes(), Field::q, NodeClass::truncation);
  place(mesh.cavity_nodes(), Field::p, NodeClass::cavity);
  for (int node : mesh.cavity_nodes())
  {
    q_row_[node] = p_row_[node];
  }
}

int DofMap::row(Field f, int node) const
{
  if (node < 0 || node >= static_cast<int>(p_row_.size()))
  {
    throw DimensionError("node " + std::to_string(node) + " outside the mesh");
  }
  return f == Field::p ? p_row_[node] : q_row_[node];
}

int DofMap::block_offset(Field f, NodeClass c) const
{
  switch (c)
  {
  case NodeClass::interior:
    return f == Field::p ? 0 : n_i_;
  case NodeClass::truncation:
    return 2 * n_i_ + (f == Field::p ? 0 : n_t_);
  case NodeClass::cavity:
    return 2 * n_i_ + 2 * n_t_;
  }
  return -1;
}

MethodChoice MethodChoice::interior_penalty(double gamma)
{
  if (!(gamma > 0.0) || !std::isfinite(gamma))
  {
    throw InputError("interior penalty requires gamma > 0, got " + std::to_string(gamma));
  }
  MethodChoice m;
  m.kind = Kind::interior_penalty;
  m.gamma = gamma;
  return m;
}

MethodChoice MethodChoice::boundary_penalty(double eta)
{
  if (!(eta > 0.0) || !std::isfinite(eta))
  {
    throw InputError("boundary penalty requires eta > 0, got " + std::to_string(eta));
  }
  MethodChoice m;
  m.kind = Kind::boundary_penalty;
  m.eta = eta;
  return m;
}

std::string MethodChoice::name() const
{
  switch (kind)
  {
  case Kind::regular:
    return "regular";
  case Kind::interior_penalty:
    return "ip";
  case Kind::boundary_penalty:
    return "bp";
  }
  return "unknown";
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> TripletAccumulator<Scalar>::build(int rows, int cols) const
{
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [this](std::size_t x, std::size_t y) {
    const Item &a = entries_[x];
    const Item &b = entries_[y];
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });

  Eigen::SparseMatrix<Scalar> m(rows, cols);
  std::vector<int> nnz_per_col(static_cast<std::size_t>(cols), 0);
  for (std::size_t k = 0; k < order.size(); ++k)
  {
    const Item &it = entries_[order[k]];
    if (it.row < 0 || it.row >= rows || it.col < 0 || it.col >= cols)
    {
      throw DimensionError("triplet (" + std::to_string(it.row) + ", " + std::to_string(it.col) +
                           ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (k == 0 || it.row != entries_[order[k - 1]].row || it.col != entries_[order[k - 1]].col)
    {
      ++nnz_per_col[it.col];
    }
  }
  m.reserve(nnz_per_col);
  std::size_t k = 0;
  while (k < order.size())
  {
    const Item &first = entries_[order[k]];
    Scalar sum = first.value;
    std::size_t l = k + 1;
    while (l < order.size() && entries_[order[l]].row == first.row &&
           entries_[order[l]].col == first.col)
    {
      sum += entries_[order[l]].value;
      ++l;
    }
    m.insert(first.row, first.col) = sum;
    k = l;
  }
  m.makeCompressed();
  return m;
}

template class TripletAccumulator<double>;
template class TripletAccumulator<Complex>;

std::array<Vec2, 3> barycentric_gradients(Vec2 a, Vec2 b, Vec2 c)
{
  const double twice = cross(b - a, c - a);
  const std::array<Vec2, 3> p{a, b, c};
  std::array<Vec2, 3> g;
  for (int k = 0; k < 3; ++k)
  {
    const Vec2 e = p[(k + 2) % 3] - p[(k + 1) % 3];
    // Opposite edge turned a quarter counter-clockwise points towards vertex k.
    g[k] = {-e.y / twice, e.x / twice};
  }
  return g;
}

LocalMatrices local_matrices(Vec2 a, Vec2 b, Vec2 c)
{
  const double area = signed_area(a, b, c);
  if (std::abs(area) <= kDegenerateArea)
  {
    throw MeshError("degenerate triangle with area " + std::to_string(area));
  }
  const auto g = barycentric_gradients(a, b, c);
  const double abs_area = std::abs(area);
  LocalMatrices out{};
  for (int j = 0; j < 3; ++j)
  {
    for (int l = 0; l < 3; ++l)
    {
      out.stiffness[j][l] = abs_area * dot(g[j], g[l]);
      out.mass[j][l] = abs_area / 12.0 * (j == l ? 2.0 : 1.0);
    }
  }
  return out;
}

JumpStencil jump_stencil(const Mesh &mesh, const InteriorEdge &edge)
{
  if (edge.left < 0 || edge.right < 0)
  {
    throw MeshError("interior edge without two adjacent elements");
  }
  const auto &nodes = mesh.nodes();
  // The outward normal of the element with the larger index orients the jump.
  const int hi = std::max(edge.left, edge.right);
  const int lo = std::min(edge.left, edge.right);
  const auto &th = mesh.triangles()[hi].nodes;
  const auto &tl = mesh.triangles()[lo].nodes;

  int opposite_hi = -1;
  for (int k = 0; k < 3; ++k)
  {
    if (th[k] != edge.nodes[0] && th[k] != edge.nodes[1])
    {
      opposite_hi = k;
    }
  }
  const Vec2 ea = nodes[th[(opposite_hi + 1) % 3]];
  const Vec2 eb = nodes[th[(opposite_hi + 2) % 3]];
  const Vec2 t = eb - ea;
  const double len = norm(t);
  // Counter-clockwise element: the outward normal is the edge tangent rotated clockwise.
  const Vec2 nu{t.y / len, -t.x / len};

  JumpStencil s{};
  int used = 0;
  auto add = [&](int node, double w) {
    for (int k = 0; k < used; ++k)
    {
      if (s.nodes[k] == node)
      {
        s.weights[k] += w;
        return;
      }
    }
    s.nodes[used] = node;
    s.weights[used] = w;
    ++used;
  };
  const auto gh = barycentric_gradients(nodes[th[0]], nodes[th[1]], nodes[th[2]]);
  const auto gl = barycentric_gradients(nodes[tl[0]], nodes[tl[1]], nodes[tl[2]]);
  for (int k = 0; k < 3; ++k)
  {
    add(th[k], dot(gh[k], nu));
  }
  for (int k = 0; k < 3; ++k)
  {
    add(tl[k], -dot(gl[k], nu));
  }
  if (used != 4)
  {
    throw MeshError("interior edge stencil does not span four nodes");
  }
  return s;
}

ScalarMatrices assemble_scalar(const Mesh &mesh)
{
  const int n = static_cast<int>(mesh.nodes().size());
  TripletAccumulator<double> k_acc;
  TripletAccumulator<double> m_acc;
  k_acc.reserve(9 * mesh.triangles().size());
  m_acc.reserve(9 * mesh.triangles().size());
  const auto &nodes = mesh.nodes();
  for (const Triangle &t : mesh.triangles())
  {
    const auto &v = t.nodes;
    const LocalMatrices loc = local_matrices(nodes[v[0]], nodes[v[1]], nodes[v[2]]);
    for (int j = 0; j < 3; ++j)
    {
      for (int l = 0; l < 3; ++l)
      {
        k_acc.add(v[j], v[l], loc.stiffness[j][l]);
        m_acc.add(v[j], v[l], loc.mass[j][l]);
      }
    }
  }
  ScalarMatrices s;
  s.stiffness = k_acc.build(n, n);
  s.mass = m_acc.build(n, n);
  s.interior_penalty = assemble_interior_penalty(mesh);
  s.boundary_penalty = assemble_boundary_penalty(mesh);
  return s;
}

SparseReal assemble_interior_penalty(const Mesh &mesh)
{
  const int n = static_cast<int>(mesh.nodes().size());
  TripletAccumulator<double> acc;
  acc.reserve(16 * mesh.interior_edges().size());
  for (const InteriorEdge &e : mesh.interior_edges())
  {
    const JumpStencil s = jump_stencil(mesh, e);
    const double h2 = e.length * e.length;
    for (int j = 0; j < 4; ++j)
    {
      for (int l = 0; l < 4; ++l)
      {
        acc.add(s.nodes[j], s.nodes[l], h2 * (s.weights[j] * s.weights[l]));
      }
    }
  }
  return acc.build(n, n);
}

SparseReal assemble_boundary_penalty(const Mesh &mesh)
{
  std::vector<int> position(mesh.nodes().size(), -1);
  const auto &d = mesh.cavity_nodes();
  for (std::size_t k = 0; k < d.size(); ++k)
  {
    position[d[k]] = static_cast<int>(k);
  }
  const int nd = static_cast<int>(d.size());
  TripletAccumulator<double> acc;
  for (const BoundaryEdge &e : mesh.cavity_edges())
  {
    const int a = position[e.nodes[0]];
    const int b = position[e.nodes[1]];
    acc.add(a, a, 1.0);
    acc.add(a, b, -1.0);
    acc.add(b, a, -1.0);
    acc.add(b, b, 1.0);
  }
  return acc.build(nd, nd);
}

namespace
{

void check_square(const SparseReal &m, int n, const char *name)
{
  if (m.rows() != n || m.cols() != n)
  {
    throw DimensionError(std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(n) + "x" +
                         std::to_string(n));
  }
}

}  // namespace

SparseComplex assemble_global(const Mesh &mesh, const DofMap &dofs, const ScalarMatrices &scalars,
                              const SystemCoefficients &coef, const Eigen::MatrixXcd &p_tbc,
                              const Eigen::MatrixXcd &q_tbc, RowConvention convention)
{
  const int n_nodes = static_cast<int>(mesh.nodes().size());
  const int nt = static_cast<int>(mesh.truncation_nodes().size());
  const int nd = static_cast<int>(mesh.cavity_nodes().size());
  check_square(scalars.stiffness, n_nodes, "stiffness matrix");
  check_square(scalars.mass, n_nodes, "mass matrix");
  check_square(scalars.interior_penalty, n_nodes, "interior penalty matrix");
  check_square(scalars.boundary_penalty, nd, "boundary penalty matrix");
  if (p_tbc.rows() != nt || p_tbc.cols() != nt || q_tbc.rows() != nt || q_tbc.cols() != nt)
  {
    throw DimensionError("TBC blocks do not match the " + std::to_string(nt) +
                         " truncation nodes");
  }

  // Merge K, M and K_J onto one pattern so each (i, j) entry is formed once.
  const SparseReal jw = coef.gamma == 0.0 ? SparseReal(n_nodes, n_nodes)
                                          : SparseReal(coef.gamma * scalars.interior_penalty);
  const SparseReal helm = scalars.stiffness - coef.kappa2 * scalars.mass - jw;
  const SparseReal mod = scalars.stiffness + coef.kappa2 * scalars.mass + jw;
  const SparseReal low = coef.kappa2 * scalars.mass + jw;
  const double q_sign = convention == RowConvention::symmetric ? -1.0 : 1.0;

  const auto &classes = mesh.classes();
  TripletAccumulator<Complex> acc;
  acc.reserve(static_cast<std::size_t>(2 * helm.nonZeros() + 2 * nt * nt));

  for (int col = 0; col < n_nodes; ++col)
  {
    SparseReal::InnerIterator ih(helm, col);
    SparseReal::InnerIterator im(mod, col);
    SparseReal::InnerIterator il(low, col);
    for (; ih; ++ih, ++im, ++il)
    {
      const int row = static_cast<int>(ih.row());
      if (im.row() != row || il.row() != row)
      {
        throw DimensionError("scalar matrices do not share a sparsity pattern");
      }
      const bool row_d = classes[row] == NodeClass::cavity;
      const bool col_d = classes[col] == NodeClass::cavity;
      const double h = ih.value();
      const double m = im.value();
      if (!row_d)
      {
        // p-row (Helmholtz) and q-row (modified Helmholtz); a D column is the
        // shared unknown p = q.
        acc.add(dofs.row(Field::p, row), dofs.row(Field::p, col), h);
        acc.add(dofs.row(Field::q, row), dofs.row(Field::q, col), q_sign * m);
      }
      else if (!col_d)
      {
        // Coupling equation tested with a D hat: (grad(p - q), grad z) - l(p + q, z).
        acc.add(dofs.row(Field::p, row), dofs.row(Field::p, col), h);
        acc.add(dofs.row(Field::p, row), dofs.row(Field::q, col), -m);
      }
      else
      {
        acc.add(dofs.row(Field::p, row), dofs.row(Field::p, col), -2.0 * il.value());
      }
    }
  }

  if (coef.eta != 0.0)
  {
    const auto &d = mesh.cavity_nodes();
    for (int col = 0; col < nd; ++col)
    {
      for (SparseReal::InnerIterator it(scalars.boundary_penalty, col); it; ++it)
      {
        acc.add(dofs.row(Field::p, d[it.row()]), dofs.row(Field::p, d[col]),
                -coef.eta * it.value());
      }
    }
  }

  const auto &t = mesh.truncation_nodes();
  for (int l = 0; l < nt; ++l)
  {
    for (int j = 0; j < nt; ++j)
    {
      acc.add(dofs.row(Field::p, t[j]), dofs.row(Field::p, t[l]), -p_tbc(j, l));
      acc.add(dofs.row(Field::q, t[j]), dofs.row(Field::q, t[l]), -q_sign * q_tbc(j, l));
    }
  }

  return acc.build(dofs.size(), dofs.size());
}

BlockSystem build_system(const Mesh &mesh, const ScalarMatrices &scalars, const TbcMatrix &tbc,
                         const VectorC &load, double kappa, const MethodChoice &method,
                         RowConvention convention)
{
  DofMap dofs(mesh);
  if (load.size() != dofs.size())
  {
    throw DimensionError("load vector has " + std::to_string(load.size()) + " entries, expected " +
                         std::to_string(dofs.size()));
  }
  SystemCoefficients coef{kappa * kappa, 0.0, 0.0};
  if (method.kind == MethodChoice::Kind::interior_penalty)
  {
    coef.gamma = method.gamma;
  }
  else if (method.kind == MethodChoice::Kind::boundary_penalty)
  {
    coef.eta = method.eta;
  }
  SparseComplex A =
      assemble_global(mesh, dofs, scalars, coef, tbc.p_block, tbc.q_block, convention);
  return {std::move(A), load, std::move(dofs)};
}

std::string matrix_market(const SparseComplex &A)
{
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[96];
  for (int col = 0; col < A.outerSize(); ++col)
  {
    for (SparseComplex::InnerIterator it(A, col); it; ++it)
    {
      std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", static_cast<int>(it.row()) + 1,
                    col + 1, it.value().real(), it.value().imag());
      out << buf;
    }
  }
  return out.str();
}

std::string matrix_market(const VectorC &F)
{
  std::ostringstream out;
  out << "%%MatrixMarket matrix array complex general\n";
  out << F.size() << " 1\n";
  char buf[64];
  for (Eigen::Index k = 0; k < F.size(); ++k)
  {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", F[k].real(), F[k].imag());
    out << buf;
  }
  return out.str();
}

}  // namespace flexural
