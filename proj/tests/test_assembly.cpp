#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "flexural/assembly.hpp"
#include "flexural/dtn.hpp"
#include "flexural/errors.hpp"
#include "flexural/solve.hpp"

using namespace flexural;

namespace
{

constexpr double kKappa = std::numbers::pi;

Mesh small_mesh() { return generate_mesh(CavityShape::circle(0.3), 0.6, 3, 12); }

Eigen::MatrixXd dense(const SparseReal &m) { return Eigen::MatrixXd(m); }

double min_eigenvalue(const SparseReal &m)
{
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(m));
  return es.eigenvalues().minCoeff();
}

double max_abs(const SparseComplex &m)
{
  double best = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
  {
    for (SparseComplex::InnerIterator it(m, k); it; ++it)
    {
      best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

BlockSystem system_for(const Mesh &m, const MethodChoice &method,
                       RowConvention convention = RowConvention::symmetric)
{
  const ScalarMatrices s = assemble_scalar(m);
  const TbcMatrix tbc = assemble_tbc(m, kKappa, 0.6, 15);
  const VectorC F = incident_load(m, kKappa, std::numbers::pi / 3, 0.6, 15);
  return build_system(m, s, tbc, F, kKappa, method, convention);
}

}  // namespace

TEST(LocalMatrices, ReferenceTriangle)
{
  const LocalMatrices lm = local_matrices({0, 0}, {1, 0}, {0, 1});
  const double K[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
  for (int i = 0; i < 3; ++i)
  {
    for (int j = 0; j < 3; ++j)
    {
      EXPECT_NEAR(lm.stiffness[i][j], K[i][j], 1e-15);
      EXPECT_NEAR(lm.mass[i][j], (i == j ? 2.0 : 1.0) / 24.0, 1e-15);
    }
  }
}

TEST(LocalMatrices, InvariantUnderRigidMotion)
{
  const LocalMatrices a = local_matrices({0.1, 0.2}, {0.5, 0.1}, {0.3, 0.6});
  const double c = std::cos(0.7);
  const double s = std::sin(0.7);
  auto move = [&](Vec2 p) { return Vec2{c * p.x - s * p.y + 2.0, s * p.x + c * p.y - 1.0}; };
  const LocalMatrices b = local_matrices(move({0.1, 0.2}), move({0.5, 0.1}), move({0.3, 0.6}));
  for (int i = 0; i < 3; ++i)
  {
    double row = 0.0;
    for (int j = 0; j < 3; ++j)
    {
      EXPECT_NEAR(a.stiffness[i][j], b.stiffness[i][j], 1e-13);
      EXPECT_NEAR(a.mass[i][j], b.mass[i][j], 1e-15);
      row += a.stiffness[i][j];
    }
    EXPECT_NEAR(row, 0.0, 1e-14);
  }
}

TEST(LocalMatrices, DegenerateThrows)
{
  EXPECT_THROW(local_matrices({0, 0}, {1, 0}, {2, 0}), MeshError);
}

TEST(AssembleScalar, ConstantsAndArea)
{
  const Mesh m = small_mesh();
  const ScalarMatrices s = assemble_scalar(m);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m.nodes().size()));
  EXPECT_LE((s.stiffness * one).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(one.dot(s.mass * one), m.total_area(), 1e-13);
  EXPECT_EQ(dense(s.stiffness), dense(SparseReal(s.stiffness.transpose())));
  EXPECT_EQ(dense(s.mass), dense(SparseReal(s.mass.transpose())));
  EXPECT_GT(min_eigenvalue(s.mass), 0.0);
}

TEST(AssembleScalar, StiffnessEnergyOfLinearFunction)
{
  // (grad x, grad x) over the mesh is its area.
  const Mesh m = small_mesh();
  const ScalarMatrices s = assemble_scalar(m);
  Eigen::VectorXd x(static_cast<Eigen::Index>(m.nodes().size()));
  for (std::size_t k = 0; k < m.nodes().size(); ++k)
  {
    x[static_cast<Eigen::Index>(k)] = m.nodes()[k].x;
  }
  EXPECT_NEAR(x.dot(s.stiffness * x), m.total_area(), 1e-13);
}

TEST(Penalties, PositiveSemidefinite)
{
  for (const auto &shape : {CavityShape::circle(0.3), CavityShape::kite(0.3, 0.2, 0.1)})
  {
    const Mesh m = generate_mesh(shape, 0.6, 3, 16);
    const SparseReal J = assemble_interior_penalty(m);
    const SparseReal G = assemble_boundary_penalty(m);
    EXPECT_GE(min_eigenvalue(J), -1e-12 * dense(J).norm()) << shape.name();
    EXPECT_GE(min_eigenvalue(G), -1e-12 * dense(G).norm()) << shape.name();
    EXPECT_EQ(dense(J), dense(SparseReal(J.transpose())));
    EXPECT_EQ(G.rows(), m.count(NodeClass::cavity));
  }
}

TEST(Penalties, LinearFunctionsHaveNoJumps)
{
  const Mesh m = generate_mesh(CavityShape::ellipse(0.4, 0.2), 0.6, 3, 16);
  const SparseReal J = assemble_interior_penalty(m);
  Eigen::VectorXd lin(static_cast<Eigen::Index>(m.nodes().size()));
  for (std::size_t k = 0; k < m.nodes().size(); ++k)
  {
    lin[static_cast<Eigen::Index>(k)] = 1.0 + 2.0 * m.nodes()[k].x - 3.0 * m.nodes()[k].y;
  }
  EXPECT_LE((J * lin).cwiseAbs().maxCoeff(), 1e-12 * dense(J).norm());
  for (const auto &e : m.interior_edges())
  {
    const JumpStencil st = jump_stencil(m, e);
    double jump = 0.0;
    for (int k = 0; k < 4; ++k)
    {
      jump += st.weights[k] * lin[st.nodes[k]];
    }
    EXPECT_NEAR(jump, 0.0, 1e-11);
  }
  const SparseReal G = assemble_boundary_penalty(m);
  EXPECT_LE((G * Eigen::VectorXd::Ones(G.rows())).cwiseAbs().maxCoeff(), 1e-14);
}


TEST(DofMap, LayoutAndSharedCavityRows)
{
  const Mesh m = small_mesh();
  const DofMap d(m);
  EXPECT_EQ(d.size(), m.unknown_dimension());
  for (int node : m.cavity_nodes())
  {
    EXPECT_EQ(d.row(Field::p, node), d.row(Field::q, node));
    EXPECT_GE(d.row(Field::p, node), d.block_offset(Field::p, NodeClass::cavity));
  }
  for (int r = 0; r < d.size(); ++r)
  {
    const auto &e = d.entry(r);
    EXPECT_EQ(d.row(e.field, e.node), r);
  }
  EXPECT_EQ(d.block_offset(Field::q, NodeClass::interior), m.count(NodeClass::interior));
  EXPECT_THROW(d.row(Field::p, -1), DimensionError);
}

TEST(BuildSystem, ExactlySymmetric)
{
  const Mesh m = small_mesh();
  for (const auto &method :
       {MethodChoice::regular(), MethodChoice::interior_penalty(kKappa * 1e-3),
        MethodChoice::boundary_penalty(2.5 * kKappa * 1e-3)})
  {
    const BlockSystem sys = system_for(m, method);
    const SparseComplex At = sys.A.transpose();
    EXPECT_EQ(max_abs(sys.A - At), 0.0) << method.name();
    EXPECT_EQ(sys.A.rows(), m.unknown_dimension());
  }
}

TEST(BuildSystem, RowConventionsGiveSameSolution)
{
  const Mesh m = small_mesh();
  const auto method = MethodChoice::interior_penalty(kKappa * 1e-3);
  const BlockSystem a = system_for(m, method);
  const BlockSystem b = system_for(m, method, RowConvention::as_displayed);
  const VectorC xa = solve_system(a).W;
  const VectorC xb = solve_system(b).W;
  EXPECT_LE((xa - xb).norm(), 1e-10 * xa.norm());
}

TEST(BuildSystem, PCouplesToQOnlyThroughCavity)
{
  const Mesh m = small_mesh();
  const BlockSystem sys = system_for(m, MethodChoice::interior_penalty(0.01));
  for (int k = 0; k < sys.A.outerSize(); ++k)
  {
    for (SparseComplex::InnerIterator it(sys.A, k); it; ++it)
    {
      const auto &r = sys.dofs.entry(static_cast<int>(it.row()));
      const auto &c = sys.dofs.entry(static_cast<int>(it.col()));
      if (r.node_class != NodeClass::cavity && c.node_class != NodeClass::cavity)
      {
        EXPECT_EQ(r.field, c.field) << it.row() << "," << it.col();
      }
    }
  }
}

TEST(BuildSystem, RejectsBadParameters)
{
  EXPECT_THROW(MethodChoice::interior_penalty(0.0), InputError);
  EXPECT_THROW(MethodChoice::boundary_penalty(-1.0), InputError);
  const Mesh m = small_mesh();
  const ScalarMatrices s = assemble_scalar(m);
  const TbcMatrix tbc = assemble_tbc(m, kKappa, 0.6, 15);
  const VectorC F = VectorC::Zero(3);
  EXPECT_THROW(build_system(m, s, tbc, F, kKappa, MethodChoice::regular()), Error);
}

TEST(BuildSystem, BitReproducible)
{
  const Mesh m = small_mesh();
  const BlockSystem a = system_for(m, MethodChoice::boundary_penalty(0.01));
  const BlockSystem b = system_for(m, MethodChoice::boundary_penalty(0.01));
  EXPECT_EQ(matrix_market(a.A), matrix_market(b.A));
  EXPECT_EQ(matrix_market(a.F), matrix_market(b.F));
  EXPECT_EQ(matrix_market(a.A).rfind("%%MatrixMarket matrix coordinate complex general", 0), 0u);
}

TEST(TripletAccumulator, SumsDuplicatesInOrder)
{
  TripletAccumulator<double> acc;
  acc.add(0, 1, 0.1);
  acc.add(1, 0, 0.1);
  acc.add(0, 1, 0.2);
  acc.add(1, 0, 0.2);
  const SparseReal m = acc.build(2, 2);
  EXPECT_EQ(m.coeff(0, 1), m.coeff(1, 0));
  EXPECT_EQ(m.coeff(0, 1), 0.1 + 0.2);
}
