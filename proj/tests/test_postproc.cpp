#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "flexural/assembly.hpp"
#include "flexural/dtn.hpp"
#include "flexural/errors.hpp"
#include "flexural/postproc.hpp"
#include "flexural/series.hpp"
#include "flexural/solve.hpp"

using namespace flexural;

namespace
{

constexpr double kPi = std::numbers::pi;

double factorial(int n) { return std::tgamma(n + 1.0); }

// Nodal field whose v and w are the given functions.
SolutionField field_from(const Mesh &m, const std::function<Complex(Vec2)> &v,
                         const std::function<Complex(Vec2)> &w)
{
  const auto n = static_cast<Eigen::Index>(m.nodes().size());
  SolutionField f;
  for (VectorC *x : {&f.p, &f.q, &f.u, &f.v, &f.w, &f.ps, &f.qs})
  {
    x->setZero(n);
  }
  for (Eigen::Index k = 0; k < n; ++k)
  {
    f.v[k] = v(m.nodes()[k]);
    f.w[k] = w(m.nodes()[k]);
  }
  return f;
}

SolutionField solve_circle(const Mesh &m, const MethodChoice &method)
{
  const BlockSystem sys = build_system(m, assemble_scalar(m), assemble_tbc(m, kPi, 0.6, 15),
                                       incident_load(m, kPi, kPi / 3, 0.6, 15), kPi, method);
  return recover_fields(solve_system(sys).W, m, IncidentField(kPi, kPi / 3));
}

ExactEvaluator series_oracle()
{
  auto s = std::make_shared<SeriesSolution>(0.3, kPi, kPi / 3, 25);
  return [s](Vec2 x) {
    const SeriesPoint p = s->eval(x, 0.9);
    return FieldSample{p.v, p.w, p.grad_v, p.grad_w};
  };
}

}  // namespace

TEST(TriangleRule, IntegratesMonomialsExactly)
{
  for (const TriangleRule *rule : {&TriangleRule::degree4(), &TriangleRule::degree7()})
  {
    const double sum = std::accumulate(rule->weights.begin(), rule->weights.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-14);
    for (int a = 0; a <= rule->degree; ++a)
    {
      for (int b = 0; a + b <= rule->degree; ++b)
      {
        double q = 0.0;
        for (std::size_t k = 0; k < rule->weights.size(); ++k)
        {
          const auto &l = rule->barycentric[k];
          q += rule->weights[k] * std::pow(l[1], a) * std::pow(l[2], b);
        }
        // Integral over the reference triangle divided by its area 1/2.
        const double exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2);
        EXPECT_NEAR(q, exact, 1e-14) << "degree " << rule->degree << " x^" << a << " y^" << b;
      }
    }
  }
  EXPECT_EQ(TriangleRule::degree4().weights.size(), 6u);
  EXPECT_EQ(TriangleRule::degree7().weights.size(), 13u);
}

TEST(ComputeErrors, ZeroAgainstItself)
{
  const Mesh m = generate_mesh(CavityShape::ellipse(0.4, 0.2), 0.6, 4, 24);
  const SolutionField f = field_from(
      m, [](Vec2 x) { return Complex(std::sin(3 * x.x), x.y * x.y); },
      [](Vec2 x) { return Complex(x.x * x.y, 1.0); });
  const ErrorReport r = compute_errors(f, m, field_evaluator(f, m));
  EXPECT_LE(r.E_L2_v, 1e-14);
  EXPECT_LE(r.E_H1_v, 1e-14);
  EXPECT_LE(r.E_L2_w, 1e-14);
  EXPECT_LE(r.E_H1_w, 1e-14);
}

TEST(ComputeErrors, KnownRelativeError)
{
  // Constant fields: v = 1 against exact 2 gives relative L2 error 1/2.
  const Mesh m = generate_mesh(CavityShape::circle(0.3), 0.6, 3, 16);
  const SolutionField f =
      field_from(m, [](Vec2) { return Complex(1.0); }, [](Vec2) { return Complex(0.0, 3.0); });
  const ExactEvaluator exact = [](Vec2) {
    return FieldSample{Complex(2.0), Complex(0.0, 4.0), {Complex(0.0), Complex(0.0)},
                       {Complex(0.0), Complex(0.0)}};
  };
  const ErrorReport r = compute_errors(f, m, exact);
  EXPECT_NEAR(r.E_L2_v, 0.5, 1e-14);
  EXPECT_NEAR(r.E_L2_w, 0.25, 1e-14);
}

TEST(ComputeErrors, QuadratureCrossCheck)
{
  const Mesh m = generate_mesh_for_size(CavityShape::circle(0.3), 0.6, 0.1);
  const SolutionField f = solve_circle(m, MethodChoice::interior_penalty(kPi * 1e-3));
  const ExactEvaluator exact = series_oracle();
  const ErrorReport a = compute_errors(f, m, exact, TriangleRule::degree4());
  const ErrorReport b = compute_errors(f, m, exact, TriangleRule::degree7());
  EXPECT_NEAR(a.E_L2_v, b.E_L2_v, 0.05 * b.E_L2_v);
  EXPECT_NEAR(a.E_H1_v, b.E_H1_v, 0.05 * b.E_H1_v);
  EXPECT_NEAR(a.E_L2_w, b.E_L2_w, 0.05 * b.E_L2_w);
  EXPECT_NEAR(a.E_H1_w, b.E_H1_w, 0.05 * b.E_H1_w);
}

TEST(ComputeErrors, InvariantUnderRenumbering)
{
  const Mesh m = generate_mesh(CavityShape::kite(0.3, 0.2, 0.1), 0.6, 4, 32);
  const SolutionField f = field_from(
      m, [](Vec2 x) { return Complex(std::cos(4 * x.x), x.y); },
      [](Vec2 x) { return Complex(x.x, std::sin(5 * x.y)); });
  const ExactEvaluator exact = [](Vec2 x) {
    return FieldSample{Complex(std::cos(4 * x.x), x.y),
                       Complex(x.x, std::sin(5 * x.y)),
                       {Complex(-4 * std::sin(4 * x.x)), Complex(0.0, 1.0)},
                       {Complex(1.0), Complex(0.0, 5 * std::cos(5 * x.y))}};
  };
  const ErrorReport a = compute_errors(f, m, exact);

  // Reverse node ids and triangle order in the exported text.
  const int n = static_cast<int>(m.nodes().size());
  std::ostringstream text;
  text.precision(17);
  text << "nodes " << n << "\n";
  for (int k = 0; k < n; ++k)
  {
    const int old = n - 1 - k;
    text << k + 1 << " " << m.nodes()[old].x << " " << m.nodes()[old].y << " "
         << class_letter(m.classes()[old]) << "\n";
  }
  const int t = static_cast<int>(m.triangles().size());
  text << "triangles " << t << "\n";
  for (int k = 0; k < t; ++k)
  {
    const auto &tri = m.triangles()[t - 1 - k].nodes;
    text << k + 1 << " " << n - tri[0] << " " << n - tri[1] << " " << n - tri[2] << "\n";
  }
  const Mesh r = import_mesh(text.str());
  SolutionField g = f;
  for (int k = 0; k < n; ++k)
  {
    g.v[k] = f.v[n - 1 - k];
    g.w[k] = f.w[n - 1 - k];
  }
  const ErrorReport b = compute_errors(g, r, exact);
  EXPECT_NEAR(a.E_L2_v, b.E_L2_v, 1e-12 * a.E_L2_v);
  EXPECT_NEAR(a.E_H1_v, b.E_H1_v, 1e-12 * a.E_H1_v);
  EXPECT_NEAR(a.E_L2_w, b.E_L2_w, 1e-12 * a.E_L2_w);
  EXPECT_NEAR(a.E_H1_w, b.E_H1_w, 1e-12 * a.E_H1_w);
}

TEST(ComputeErrors, DecreaseUnderRefinement)
{
  Mesh m = generate_mesh_for_size(CavityShape::circle(0.3), 0.6, 0.1);
  const ExactEvaluator exact = series_oracle();
  ErrorReport prev;
  for (int level = 0; level < 4; ++level)
  {
    const ErrorReport r =
        compute_errors(solve_circle(m, MethodChoice::interior_penalty(kPi * 1e-3)), m, exact);
    if (level > 0)
    {
      EXPECT_LT(r.E_L2_v, 1.1 * prev.E_L2_v);
      EXPECT_LT(r.E_H1_v, 1.1 * prev.E_H1_v);
      EXPECT_LT(r.E_L2_w, 1.1 * prev.E_L2_w);
      EXPECT_LT(r.E_H1_w, 1.1 * prev.E_H1_w);
      // First order in H1: halving h halves the error, within 25%.
      EXPECT_NEAR(r.E_H1_v / prev.E_H1_v, 0.5, 0.125);
    }
    prev = r;
    m = refine(m);
  }
}

TEST(BoundaryTrace, TotalVariation)
{
  BoundaryTrace t;
  t.param = {0.0, 1.0, 2.0, 3.0};
  t.w = {Complex(0.0), Complex(1.0, 5.0), Complex(-1.0), Complex(0.5)};
  EXPECT_DOUBLE_EQ(t.total_variation(), 1.0 + 2.0 + 1.5 + 0.5);
  BoundaryTrace shifted = t;
  std::rotate(shifted.w.begin(), shifted.w.begin() + 1, shifted.w.end());
  EXPECT_DOUBLE_EQ(shifted.total_variation(), t.total_variation());
}

TEST(BoundaryTrace, FollowsCavityParameter)
{
  const Mesh m = generate_mesh(CavityShape::ellipse(0.4, 0.2), 0.6, 3, 16);
  const SolutionField f = field_from(
      m, [](Vec2) { return Complex(0.0); }, [](Vec2 x) { return Complex(x.x, x.y); });
  const BoundaryTrace t = boundary_trace(f, m);
  ASSERT_EQ(t.w.size(), 16u);
  EXPECT_TRUE(std::is_sorted(t.param.begin(), t.param.end()));
  for (std::size_t k = 0; k < t.w.size(); ++k)
  {
    const Vec2 p = CavityShape::ellipse(0.4, 0.2).point(t.param[k]);
    EXPECT_NEAR(t.w[k].real(), p.x, 1e-15);
    EXPECT_NEAR(t.w[k].imag(), p.y, 1e-15);
  }
}

TEST(PointLocator, LocateAndExtrapolate)
{
  const Mesh m = generate_mesh(CavityShape::kite(0.3, 0.2, 0.1), 0.6, 4, 32);
  const PointLocator loc(m);
  for (std::size_t t = 0; t < m.triangles().size(); t += 7)
  {
    const auto &v = m.triangles()[t].nodes;
    const Vec2 c = (1.0 / 3.0) * (m.nodes()[v[0]] + m.nodes()[v[1]] + m.nodes()[v[2]]);
    const auto hit = loc.locate(c);
    ASSERT_TRUE(hit.has_value());
    EXPECT_EQ(hit->triangle, static_cast<int>(t));
    EXPECT_NEAR(hit->barycentric[0], 1.0 / 3.0, 1e-12);
  }
  EXPECT_FALSE(loc.locate({0.0, 0.0}).has_value());
  EXPECT_FALSE(loc.locate({0.7, 0.0}).has_value());
  const Location near = loc.nearest({0.61, 0.0});
  EXPECT_NEAR(near.outside_distance, 0.01, 2e-3);
}

TEST(EvaluateAtPoints, ExactForLinearFields)
{
  const Mesh m = generate_mesh(CavityShape::circle(0.3), 0.6, 4, 32);
  auto lin = [](Vec2 x) { return Complex(1.0 + 2.0 * x.x, -x.y); };
  const SolutionField f = field_from(m, lin, lin);
  const std::vector<Vec2> pts = {{0.4, 0.1}, {-0.35, 0.2}, {0.0, -0.5}};
  const auto s = evaluate_at_points(f, m, pts);
  for (std::size_t k = 0; k < pts.size(); ++k)
  {
    EXPECT_LE(std::abs(s[k].v - lin(pts[k])), 1e-14);
    EXPECT_LE(std::abs(s[k].grad_v[0] - 2.0), 1e-13);
    EXPECT_LE(std::abs(s[k].grad_v[1] + Complex(0.0, 1.0)), 1e-13);
  }
  EXPECT_THROW(evaluate_at_points(f, m, {{0.0, 0.0}}), DomainError);
  // Beyond Gamma_R by less than the reach, the nearest element is extended linearly.
  const auto e = evaluate_at_points(f, m, {{0.605, 0.0}}, Outside::extrapolate, 0.01);
  EXPECT_LE(std::abs(e[0].v - lin({0.605, 0.0})), 1e-13);
}

TEST(Writers, CsvColumnsAndRoundTrip)
{
  const Mesh m = generate_mesh(CavityShape::circle(0.3), 0.6, 2, 8);
  const SolutionField f = field_from(
      m, [](Vec2 x) { return Complex(x.x / 3.0, 0.1); }, [](Vec2 x) { return Complex(x.y, 1e-300); });
  const CsvTable t = parse_csv(field_csv(f, m));
  const std::vector<std::string> want = {"node_id", "x",    "y",    "class", "Re_p", "Im_p",
                                         "Re_q",    "Im_q", "Re_v", "Im_v",  "Re_w", "Im_w"};
  EXPECT_EQ(t.header, want);
  ASSERT_EQ(t.rows.size(), m.nodes().size());
  for (std::size_t k = 0; k < t.rows.size(); ++k)
  {
    EXPECT_EQ(std::stod(t.rows[k][1]), m.nodes()[k].x);
    EXPECT_EQ(std::stod(t.rows[k][8]), f.v[static_cast<Eigen::Index>(k)].real());
    EXPECT_EQ(std::stod(t.rows[k][11]), 1e-300);
  }
  EXPECT_EQ(parse_csv(trace_csv(boundary_trace(f, m))).header,
            (std::vector<std::string>{"param", "Re_w", "Im_w", "abs_w"}));
  EXPECT_EQ(parse_csv(error_csv_header()).header.size(), 11u);
  ErrorReport r;
  r.method = "ip";
  r.E_L2_v = 0.1 + 0.2;
  const CsvTable e = parse_csv(error_csv_header() + error_csv_row(r));
  EXPECT_EQ(std::stod(e.rows[0][7]), 0.1 + 0.2);
}

TEST(Writers, Vtk)
{
  const Mesh m = generate_mesh(CavityShape::circle(0.3), 0.6, 2, 8);
  const SolutionField f = field_from(
      m, [](Vec2) { return Complex(1.0); }, [](Vec2) { return Complex(2.0); });
  const std::string vtk = field_vtk(f, m);
  EXPECT_EQ(vtk.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(vtk.find("ASCII"), std::string::npos);
  EXPECT_NE(vtk.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(vtk.find("POINTS 24"), std::string::npos);
  EXPECT_NE(vtk.find("CELLS 32 128"), std::string::npos);
  EXPECT_NE(vtk.find("CELL_TYPES 32"), std::string::npos);
}

TEST(Writers, ParseCsvRejectsRaggedRows)
{
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), ParseError);
}
