#include "flexural/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "flexural/errors.hpp"

namespace flexural
{

namespace
{

TriangleRule make_degree4()
{
  TriangleRule r;
  r.degree = 4;
  const double a1 = 0.445948490915965;
  const double w1 = 0.223381589678011;
  const double a2 = 0.091576213509771;
  const double w2 = 0.109951743655322;
  for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}})
  {
    const double b = 1.0 - 2.0 * a;
    r.barycentric.push_back({b, a, a});
    r.barycentric.push_back({a, b, a});
    r.barycentric.push_back({a, a, b});
    r.weights.insert(r.weights.end(), {w, w, w});
  }
  return r;
}

TriangleRule make_degree7()
{
  TriangleRule r;
  r.degree = 7;
  r.barycentric.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(-0.149570044467682);
  for (auto [a, w] : {std::pair{0.260345966079040, 0.175615257433208},
                      std::pair{0.065130102902216, 0.053347235608838}})
  {
    const double b = 1.0 - 2.0 * a;
    r.barycentric.push_back({b, a, a});
    r.barycentric.push_back({a, b, a});
    r.barycentric.push_back({a, a, b});
    r.weights.insert(r.weights.end(), {w, w, w});
  }
  const double p = 0.048690315425316;
  const double q = 0.312865496004874;
  const double s = 1.0 - p - q;
  const double w = 0.077113760890257;
  for (const auto &bc : {std::array{p, q, s}, std::array{q, p, s}, std::array{p, s, q},
                         std::array{s, p, q}, std::array{q, s, p}, std::array{s, q, p}})
  {
    r.barycentric.push_back(bc);
    r.weights.push_back(w);
  }
  return r;
}

std::string fmt(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct ElementField
{
  std::array<Complex, 3> v;
  std::array<Complex, 3> w;
  std::array<Complex, 2> grad_v;
  std::array<Complex, 2> grad_w;
};

ElementField element_field(const SolutionField &field, const Mesh &mesh, int t)
{
  const auto &n = mesh.triangles()[t].nodes;
  const auto &x = mesh.nodes();
  const auto g = barycentric_gradients(x[n[0]], x[n[1]], x[n[2]]);
  ElementField e{};
  for (int k = 0; k < 3; ++k)
  {
    e.v[k] = field.v[n[k]];
    e.w[k] = field.w[n[k]];
    e.grad_v[0] += g[k].x * e.v[k];
    e.grad_v[1] += g[k].y * e.v[k];
    e.grad_w[0] += g[k].x * e.w[k];
    e.grad_w[1] += g[k].y * e.w[k];
  }
  return e;
}

Vec2 map_point(const Mesh &mesh, int t, const std::array<double, 3> &bc)
{
  const auto &n = mesh.triangles()[t].nodes;
  const auto &x = mesh.nodes();
  return bc[0] * x[n[0]] + bc[1] * x[n[1]] + bc[2] * x[n[2]];
}

double segment_distance(Vec2 x, Vec2 a, Vec2 b)
{
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  double s = len2 > 0.0 ? dot(x - a, d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(x - (a + s * d));
}

}  // namespace

const TriangleRule &TriangleRule::degree4()
{
  static const TriangleRule rule = make_degree4();
  return rule;
}

const TriangleRule &TriangleRule::degree7()
{
  static const TriangleRule rule = make_degree7();
  return rule;
}

QuadratureSamples sample_exact(const Mesh &mesh, const ExactEvaluator &exact,
                               const TriangleRule &rule)
{
  QuadratureSamples s{&rule, {}};
  s.values.reserve(mesh.triangles().size() * rule.weights.size());
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t)
  {
    for (const auto &bc : rule.barycentric)
    {
      const Vec2 x = map_point(mesh, static_cast<int>(t), bc);
      try
      {
        s.values.push_back(exact(x));
      }
      catch (const DomainError &e)
      {
        throw DomainError("element " + std::to_string(t + 1) + ": " + e.what());
      }
    }
  }
  return s;
}

ErrorReport compute_errors(const SolutionField &field, const Mesh &mesh,
                           const QuadratureSamples &exact)
{
  const TriangleRule &rule = *exact.rule;
  const std::size_t np = rule.weights.size();
  if (exact.values.size() != mesh.triangles().size() * np)
  {
    throw DimensionError("quadrature samples do not match the mesh");
  }
  if (field.v.size() != static_cast<Eigen::Index>(mesh.nodes().size()))
  {
    throw DimensionError("field does not match the mesh");
  }
  double ev = 0.0, nv = 0.0, egv = 0.0, ngv = 0.0;
  double ew = 0.0, nw = 0.0, egw = 0.0, ngw = 0.0;
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t)
  {
    const ElementField e = element_field(field, mesh, static_cast<int>(t));
    const double area = mesh.element_area(static_cast<int>(t));
    for (std::size_t k = 0; k < np; ++k)
    {
      const auto &bc = rule.barycentric[k];
      const double wt = rule.weights[k] * area;
      const FieldSample &x = exact.values[t * np + k];
      const Complex vh = bc[0] * e.v[0] + bc[1] * e.v[1] + bc[2] * e.v[2];
      const Complex wh = bc[0] * e.w[0] + bc[1] * e.w[1] + bc[2] * e.w[2];
      ev += wt * std::norm(x.v - vh);
      nv += wt * std::norm(x.v);
      ew += wt * std::norm(x.w - wh);
      nw += wt * std::norm(x.w);
      for (int d = 0; d < 2; ++d)
      {
        egv += wt * std::norm(x.grad_v[d] - e.grad_v[d]);
        ngv += wt * std::norm(x.grad_v[d]);
        egw += wt * std::norm(x.grad_w[d] - e.grad_w[d]);
        ngw += wt * std::norm(x.grad_w[d]);
      }
    }
  }
  auto rel = [](double err, double ref) { return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err); };
  ErrorReport r;
  r.h = mesh.mesh_size();
  r.dofs = mesh.unknown_dimension();
  r.E_L2_v = rel(ev, nv);
  r.E_H1_v = rel(egv, ngv);
  r.E_L2_w = rel(ew, nw);
  r.E_H1_w = rel(egw, ngw);
  for (double x : {r.E_L2_v, r.E_H1_v, r.E_L2_w, r.E_H1_w})
  {
    if (!std::isfinite(x))
    {
      throw NumericalError("error norm is not finite");
    }
  }
  return r;
}

ErrorReport compute_errors(const SolutionField &field, const Mesh &mesh,
                           const ExactEvaluator &exact, const TriangleRule &rule)
{
  return compute_errors(field, mesh, sample_exact(mesh, exact, rule));
}

double BoundaryTrace::total_variation() const
{
  const std::size_t n = w.size();
  double tv = 0.0;
  for (std::size_t j = 0; j < n; ++j)
  {
    tv += std::abs(w[(j + 1) % n].real() - w[j].real());
  }
  return tv;
}

BoundaryTrace boundary_trace(const SolutionField &field, const Mesh &mesh)
{
  BoundaryTrace t;
  t.param = mesh.cavity_parameters();
  for (int node : mesh.cavity_nodes())
  {
    t.w.push_back(field.w[node]);
  }
  return t;
}

PointLocator::PointLocator(const Mesh &mesh) : mesh_(&mesh)
{
  const auto &x = mesh.nodes();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = x1;
  x0_ = std::numeric_limits<double>::infinity();
  y0_ = x0_;
  for (const Vec2 &p : x)
  {
    x0_ = std::min(x0_, p.x);
    y0_ = std::min(y0_, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  const double span = std::max(x1 - x0_, y1 - y0_);
  const double target = std::sqrt(static_cast<double>(mesh.triangles().size()));
  cell_ = std::max(span / std::max(1.0, target), 1e-12);
  nx_ = std::max(1, static_cast<int>(std::ceil((x1 - x0_) / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::ceil((y1 - y0_) / cell_)) + 1);
  buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t)
  {
    const auto &n = mesh.triangles()[t].nodes;
    double bx0 = x[n[0]].x, bx1 = bx0, by0 = x[n[0]].y, by1 = by0;
    for (int k = 1; k < 3; ++k)
    {
      bx0 = std::min(bx0, x[n[k]].x);
      bx1 = std::max(bx1, x[n[k]].x);
      by0 = std::min(by0, x[n[k]].y);
      by1 = std::max(by1, x[n[k]].y);
    }
    const int i0 = std::clamp(static_cast<int>((bx0 - x0_) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((bx1 - x0_) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((by0 - y0_) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((by1 - y0_) / cell_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
    {
      for (int i = i0; i <= i1; ++i)
      {
        buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
      }
    }
  }
}

std::array<double, 3> PointLocator::barycentric(int t, Vec2 x) const
{
  const auto &n = mesh_->triangles()[t].nodes;
  const auto &p = mesh_->nodes();
  const double area = signed_area(p[n[0]], p[n[1]], p[n[2]]);
  return {signed_area(x, p[n[1]], p[n[2]]) / area, signed_area(p[n[0]], x, p[n[2]]) / area,
          signed_area(p[n[0]], p[n[1]], x) / area};
}

double PointLocator::distance_to(int t, Vec2 x) const
{
  const auto bc = barycentric(t, x);
  if (bc[0] >= 0.0 && bc[1] >= 0.0 && bc[2] >= 0.0)
  {
    return 0.0;
  }
  const auto &n = mesh_->triangles()[t].nodes;
  const auto &p = mesh_->nodes();
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k)
  {
    d = std::min(d, segment_distance(x, p[n[k]], p[n[(k + 1) % 3]]));
  }
  return d;
}

int PointLocator::seed(Vec2 x) const
{
  const int i = std::clamp(static_cast<int>((x.x - x0_) / cell_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((x.y - y0_) / cell_), 0, ny_ - 1);
  const auto &b = buckets_[static_cast<std::size_t>(j) * nx_ + i];
  return b.empty() ? 0 : b.front();
}

std::optional<Location> PointLocator::locate(Vec2 x, double tolerance) const
{
  const auto &tris = mesh_->triangles();
  if (tris.empty())
  {
    return std::nullopt;
  }
  int t = seed(x);
  const int max_steps = static_cast<int>(tris.size());
  for (int step = 0; step < max_steps; ++step)
  {
    const auto bc = barycentric(t, x);
    int worst = 0;
    for (int k = 1; k < 3; ++k)
    {
      if (bc[k] < bc[worst])
      {
        worst = k;
      }
    }
    if (bc[worst] >= 0.0)
    {
      return Location{t, bc, 0.0};
    }
    const int next = mesh_->neighbor(t, worst);
    if (next < 0)
    {
      break;
    }
    t = next;
  }

  // Walk left the mesh or stalled. A triangle containing x has x inside its
  // bounding box, so the buckets around x hold every candidate.
  const int ci = static_cast<int>(std::floor((x.x - x0_) / cell_));
  const int cj = static_cast<int>(std::floor((x.y - y0_) / cell_));
  std::optional<Location> best;
  for (int j = std::max(cj - 1, 0); j <= std::min(cj + 1, ny_ - 1); ++j)
  {
    for (int i = std::max(ci - 1, 0); i <= std::min(ci + 1, nx_ - 1); ++i)
    {
      for (int c : buckets_[static_cast<std::size_t>(j) * nx_ + i])
      {
        const double d = distance_to(c, x);
        if (d <= tolerance && (!best || d < best->outside_distance ||
                               (d == best->outside_distance && c < best->triangle)))
        {
          best = Location{c, barycentric(c, x), d};
        }
      }
    }
  }
  return best;
}

Location PointLocator::nearest(Vec2 x) const
{
  if (auto inside = locate(x, 0.0))
  {
    return *inside;
  }
  const int ci = static_cast<int>(std::floor((x.x - x0_) / cell_));
  const int cj = static_cast<int>(std::floor((x.y - y0_) / cell_));
  Location best{-1, {}, std::numeric_limits<double>::infinity()};
  const int max_ring = std::max(nx_, ny_) + std::abs(ci) + std::abs(cj) + 1;
  for (int ring = 0; ring <= max_ring; ++ring)
  {
    // Every triangle in later rings is at least (ring - 1) cells away.
    if (best.triangle >= 0 && (ring - 1) * cell_ > best.outside_distance)
    {
      break;
    }
    for (int j = cj - ring; j <= cj + ring; ++j)
    {
      for (int i = ci - ring; i <= ci + ring; ++i)
      {
        if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring || i < 0 || j < 0 || i >= nx_ ||
            j >= ny_)
        {
          continue;
        }
        for (int c : buckets_[static_cast<std::size_t>(j) * nx_ + i])
        {
          const double d = distance_to(c, x);
          if (d < best.outside_distance || (d == best.outside_distance && c < best.triangle))
          {
            best = Location{c, barycentric(c, x), d};
          }
        }
      }
    }
  }
  return best;
}

std::vector<FieldSample> evaluate_at_points(const SolutionField &field, const Mesh &mesh,
                                            const std::vector<Vec2> &points, Outside mode,
                                            double reach)
{
  const PointLocator locator(mesh);
  std::vector<FieldSample> out;
  out.reserve(points.size());
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < points.size(); ++k)
  {
    std::optional<Location> loc = locator.locate(points[k]);
    if (!loc && mode == Outside::extrapolate)
    {
      const Location near = locator.nearest(points[k]);
      if (near.outside_distance <= reach)
      {
        loc = near;
      }
    }
    if (!loc)
    {
      bad.push_back(k);
      out.push_back({});
      continue;
    }
    const ElementField e = element_field(field, mesh, loc->triangle);
    const auto &bc = loc->barycentric;
    out.push_back({bc[0] * e.v[0] + bc[1] * e.v[1] + bc[2] * e.v[2],
                   bc[0] * e.w[0] + bc[1] * e.w[1] + bc[2] * e.w[2], e.grad_v, e.grad_w});
  }
  if (!bad.empty())
  {
    std::string msg = std::to_string(bad.size()) + " point(s) outside the mesh:";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 10); ++k)
    {
      msg += " (" + fmt(points[bad[k]].x) + ", " + fmt(points[bad[k]].y) + ")";
    }
    throw DomainError(msg);
  }
  return out;
}

ExactEvaluator field_evaluator(const SolutionField &field, const Mesh &mesh, Outside mode,
                               double reach)
{
  auto locator = std::make_shared<PointLocator>(mesh);
  return [locator, &field, &mesh, mode, reach](Vec2 x) -> FieldSample {
    std::optional<Location> loc = locator->locate(x);
    if (!loc && mode == Outside::extrapolate)
    {
      const Location near = locator->nearest(x);
      if (near.outside_distance <= reach)
      {
        loc = near;
      }
    }
    if (!loc)
    {
      throw DomainError("point (" + fmt(x.x) + ", " + fmt(x.y) + ") outside the reference mesh");
    }
    const ElementField e = element_field(field, mesh, loc->triangle);
    const auto &bc = loc->barycentric;
    return {bc[0] * e.v[0] + bc[1] * e.v[1] + bc[2] * e.v[2],
            bc[0] * e.w[0] + bc[1] * e.w[1] + bc[2] * e.w[2], e.grad_v, e.grad_w};
  };
}

std::string field_csv(const SolutionField &field, const Mesh &mesh)
{
  std::string out = "node_id,x,y,class,Re_p,Im_p,Re_q,Im_q,Re_v,Im_v,Re_w,Im_w\n";
  const auto &x = mesh.nodes();
  for (std::size_t k = 0; k < x.size(); ++k)
  {
    const auto i = static_cast<Eigen::Index>(k);
    out += std::to_string(k + 1) + ',' + fmt(x[k].x) + ',' + fmt(x[k].y) + ',' +
           class_letter(mesh.classes()[k]);
    for (const Complex c : {field.p[i], field.q[i], field.v[i], field.w[i]})
    {
      out += ',' + fmt(c.real()) + ',' + fmt(c.imag());
    }
    out += '\n';
  }
  return out;
}

std::string trace_csv(const BoundaryTrace &trace)
{
  std::string out = "param,Re_w,Im_w,abs_w\n";
  for (std::size_t k = 0; k < trace.w.size(); ++k)
  {
    out += fmt(trace.param[k]) + ',' + fmt(trace.w[k].real()) + ',' + fmt(trace.w[k].imag()) +
           ',' + fmt(std::abs(trace.w[k])) + '\n';
  }
  return out;
}

std::string error_csv_header()
{
  return "method,kappa,gamma,eta,N,h,dofs,E_L2_v,E_H1_v,E_L2_w,E_H1_w\n";
}

std::string error_csv_row(const ErrorReport &r)
{
  return r.method + ',' + fmt(r.kappa) + ',' + fmt(r.gamma) + ',' + fmt(r.eta) + ',' +
         std::to_string(r.N) + ',' + fmt(r.h) + ',' + std::to_string(r.dofs) + ',' +
         fmt(r.E_L2_v) + ',' + fmt(r.E_H1_v) + ',' + fmt(r.E_L2_w) + ',' + fmt(r.E_H1_w) + '\n';
}

std::string field_vtk(const SolutionField &field, const Mesh &mesh)
{
  std::ostringstream out;
  const auto &x = mesh.nodes();
  const auto &tris = mesh.triangles();
  out << "# vtk DataFile Version 3.0\n";
  out << "flexural scattering field\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << x.size() << " double\n";
  for (const Vec2 &p : x)
  {
    out << fmt(p.x) << ' ' << fmt(p.y) << " 0\n";
  }
  out << "CELLS " << tris.size() << ' ' << 4 * tris.size() << '\n';
  for (const Triangle &t : tris)
  {
    out << "3 " << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << '\n';
  }
  out << "CELL_TYPES " << tris.size() << '\n';
  for (std::size_t k = 0; k < tris.size(); ++k)
  {
    out << "5\n";
  }
  out << "POINT_DATA " << x.size() << '\n';
  auto scalars = [&](const char *name, const VectorC &f, bool imag) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index k = 0; k < f.size(); ++k)
    {
      out << fmt(imag ? f[k].imag() : f[k].real()) << '\n';
    }
  };
  scalars("Re_v", field.v, false);
  scalars("Im_v", field.v, true);
  scalars("Re_w", field.w, false);
  scalars("Im_w", field.w, true);
  return out.str();
}

CsvTable parse_csv(const std::string &text)
{
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string &s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ','))
    {
      cells.push_back(cell);
    }
    if (!s.empty() && s.back() == ',')
    {
      cells.emplace_back();
    }
    return cells;
  };
  int line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
    {
      line.pop_back();
    }
    if (line.empty())
    {
      continue;
    }
    if (table.header.empty())
    {
      table.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != table.header.size())
    {
      throw ParseError("expected " + std::to_string(table.header.size()) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

void write_text_file(const std::string &path, const std::string &text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw InputError("cannot open " + path + " for writing");
  }
  out << text;
  if (!out)
  {
    throw InputError("failed writing " + path);
  }
}

std::string read_text_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw InputError("cannot open " + path);
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace flexural
