#include "flexural/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "flexural/errors.hpp"

namespace flexural
{

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAreaEpsilon = 1e-14;
constexpr double kOnCircleTol = 1e-12;
constexpr int kCurveSamples = 4096;

double polar_angle(Vec2 p)
{
  double a = std::atan2(p.y, p.x);
  if (a < 0.0)
  {
    a += kTwoPi;
  }
  if (a >= kTwoPi)
  {
    a -= kTwoPi;
  }
  return a;
}

std::string describe(Vec2 p)
{
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(%.6g, %.6g)", p.x, p.y);
  return buf;
}

}  // namespace

double norm(Vec2 a) { return std::hypot(a.x, a.y); }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

char class_letter(NodeClass c)
{
  switch (c)
  {
    case NodeClass::interior:
      return 'I';
    case NodeClass::truncation:
      return 'T';
    case NodeClass::cavity:
      return 'D';
  }
  return '?';
}

// ---------------------------------------------------------------------------
// CavityShape

CavityShape::CavityShape(Kind kind, std::vector<double> params)
  : kind_(kind), params_(std::move(params))
{
  for (double p : params_)
  {
    if (!(p > 0.0) || !std::isfinite(p))
    {
      throw InputError("cavity shape parameters must be positive, got " + std::to_string(p) +
                       " for " + name());
    }
  }
}

CavityShape CavityShape::circle(double radius) { return {Kind::circle, {radius}}; }
CavityShape CavityShape::ellipse(double a, double b) { return {Kind::ellipse, {a, b}}; }
CavityShape CavityShape::kite(double a, double b, double c) { return {Kind::kite, {a, b, c}}; }

std::string CavityShape::name() const
{
  switch (kind_)
  {
    case Kind::circle:
      return "circle";
    case Kind::ellipse:
      return "ellipse";
    case Kind::kite:
      return "kite";
  }
  return "unknown";
}

Vec2 CavityShape::point(double t) const
{
  t = std::fmod(t, kTwoPi);
  switch (kind_)
  {
    case Kind::circle:
      return {params_[0] * std::cos(t), params_[0] * std::sin(t)};
    case Kind::ellipse:
      return {params_[0] * std::cos(t), params_[1] * std::sin(t)};
    case Kind::kite:
      return {params_[0] * std::cos(t) + params_[1] * std::cos(2.0 * t) - params_[2],
              params_[0] * std::sin(t)};
  }
  return {};
}

double CavityShape::max_extent() const
{
  double r = 0.0;
  for (int k = 0; k < kCurveSamples; ++k)
  {
    r = std::max(r, norm(point(kTwoPi * k / kCurveSamples)));
  }
  return r;
}

double CavityShape::polygon_area(int samples) const
{
  double twice = 0.0;
  for (int k = 0; k < samples; ++k)
  {
    twice += cross(point(kTwoPi * k / samples), point(kTwoPi * (k + 1) / samples));
  }
  return 0.5 * std::abs(twice);
}

void CavityShape::validate_inside(double R) const
{
  double unwrapped = 0.0;
  double previous = polar_angle(point(0.0));
  for (int k = 0; k <= kCurveSamples; ++k)
  {
    const Vec2 p = point(kTwoPi * k / kCurveSamples);
    const double r = norm(p);
    if (!(r > 0.0))
    {
      throw InputError(name() + " cavity passes through the origin");
    }
    if (!(r < R * (1.0 - kOnCircleTol)))
    {
      throw InputError(name() + " cavity leaves the truncation disc of radius " +
                       std::to_string(R) + " at " + describe(p));
    }
    if (k > 0)
    {
      const double a = polar_angle(p);
      double step = a - previous;
      if (step < -std::numbers::pi)
      {
        step += kTwoPi;
      }
      if (step > std::numbers::pi)
      {
        step -= kTwoPi;
      }
      if (!(step > 0.0))
      {
        throw InputError(name() + " cavity is not star-shaped about the origin near " +
                         describe(p));
      }
      unwrapped += step;
      previous = a;
    }
  }
  if (std::abs(unwrapped - kTwoPi) > 1e-6)
  {
    throw InputError(name() + " cavity does not wind once around the origin");
  }
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<NodeClass> classes, std::vector<Triangle> triangles,
           std::optional<StructuredLayout> layout, std::vector<double> cavity_parameters)
  : nodes_(std::move(nodes)),
    classes_(std::move(classes)),
    triangles_(std::move(triangles)),
    layout_(std::move(layout))
{
  if (classes_.size() != nodes_.size())
  {
    throw MeshError("node class list does not match node count");
  }
  if (triangles_.empty())
  {
    throw MeshError("mesh has no triangles");
  }
  const int n = static_cast<int>(nodes_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t)
  {
    auto &tri = triangles_[t];
    for (int v : tri.nodes)
    {
      if (v < 0 || v >= n)
      {
        throw MeshError("triangle " + std::to_string(t + 1) + " references missing node " +
                        std::to_string(v + 1));
      }
    }
    const double area =
      signed_area(nodes_[tri.nodes[0]], nodes_[tri.nodes[1]], nodes_[tri.nodes[2]]);
    if (std::abs(area) <= kAreaEpsilon)
    {
      throw MeshError("triangle " + std::to_string(t + 1) + " is degenerate");
    }
    if (area < 0.0)
    {
      std::swap(tri.nodes[1], tri.nodes[2]);
      warnings_.push_back("triangle " + std::to_string(t + 1) +
                          " was clockwise and has been reoriented");
    }
  }
  build_edges();
  classify_nodes(cavity_parameters);
  check_invariants();
}

void Mesh::build_edges()
{
  const auto n = static_cast<long long>(nodes_.size());
  struct Incidence
  {
    int tri;
    int local;  // opposite vertex
  };
  std::unordered_map<long long, int> lookup;
  std::vector<std::array<int, 2>> keys;
  std::vector<std::vector<Incidence>> incid;
  lookup.reserve(triangles_.size() * 2);
  neighbors_.assign(3 * triangles_.size(), -1);

  for (std::size_t t = 0; t < triangles_.size(); ++t)
  {
    const auto &v = triangles_[t].nodes;
    for (int k = 0; k < 3; ++k)
    {
      const int a = v[(k + 1) % 3];
      const int b = v[(k + 2) % 3];
      const long long key = std::min(a, b) * n + std::max(a, b);
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(keys.size()));
      if (inserted)
      {
        keys.push_back({a, b});
        incid.emplace_back();
      }
      incid[it->second].push_back({static_cast<int>(t), k});
    }
  }

  std::vector<BoundaryEdge> boundary;
  for (std::size_t e = 0; e < keys.size(); ++e)
  {
    const auto &inc = incid[e];
    const auto &tri = triangles_[inc[0].tri].nodes;
    const int a = tri[(inc[0].local + 1) % 3];
    const int b = tri[(inc[0].local + 2) % 3];
    const double length = norm(nodes_[b] - nodes_[a]);
    mesh_size_ = std::max(mesh_size_, length);
    if (inc.size() > 2)
    {
      throw MeshError("edge " + std::to_string(a + 1) + "-" + std::to_string(b + 1) +
                      " is shared by more than two triangles");
    }
    if (inc.size() == 2)
    {
      neighbors_[3 * inc[0].tri + inc[0].local] = inc[1].tri;
      neighbors_[3 * inc[1].tri + inc[1].local] = inc[0].tri;
      interior_edges_.push_back({{a, b}, inc[0].tri, inc[1].tri, length});
    }
    else
    {
      boundary.push_back({{a, b}, inc[0].tri, length});
    }
  }

  std::vector<BoundaryEdge> cavity;
  std::vector<BoundaryEdge> truncation;
  for (const auto &e : boundary)
  {
    const NodeClass ca = classes_[e.nodes[0]];
    const NodeClass cb = classes_[e.nodes[1]];
    if (ca != cb || ca == NodeClass::interior)
    {
      throw MeshError(std::string("boundary edge ") + std::to_string(e.nodes[0] + 1) + "-" +
                      std::to_string(e.nodes[1] + 1) + " joins nodes of classes " +
                      class_letter(ca) + " and " + class_letter(cb));
    }
    (ca == NodeClass::cavity ? cavity : truncation).push_back(e);
  }

  // Order each boundary into a single closed loop.
  auto order_loop = [this](std::vector<BoundaryEdge> edges, const char *name) {
    if (edges.empty())
    {
      throw MeshError(std::string("mesh has no ") + name + " boundary");
    }
    std::unordered_map<int, int> outgoing;
    for (std::size_t k = 0; k < edges.size(); ++k)
    {
      if (!outgoing.emplace(edges[k].nodes[0], static_cast<int>(k)).second)
      {
        throw MeshError(std::string(name) + " boundary is not a simple loop at node " +
                        std::to_string(edges[k].nodes[0] + 1));
      }
    }
    std::vector<BoundaryEdge> loop;
    loop.reserve(edges.size());
    int current = 0;
    for (std::size_t step = 0; step < edges.size(); ++step)
    {
      loop.push_back(edges[current]);
      auto it = outgoing.find(edges[current].nodes[1]);
      if (it == outgoing.end())
      {
        throw MeshError(std::string(name) + " boundary is not closed");
      }
      current = it->second;
    }
    if (current != 0)
    {
      throw MeshError(std::string(name) + " boundary does not form a single closed loop");
    }
    return loop;
  };
  cavity_edges_ = order_loop(std::move(cavity), "cavity");
  truncation_edges_ = order_loop(std::move(truncation), "truncation");
}

void Mesh::classify_nodes(const std::vector<double> &cavity_parameters)
{
  std::vector<char> on_boundary(nodes_.size(), 0);
  for (const auto &e : cavity_edges_)
  {
    on_boundary[e.nodes[0]] = 1;
  }
  for (const auto &e : truncation_edges_)
  {
    on_boundary[e.nodes[0]] = 1;
  }
  std::vector<std::pair<double, int>> tnodes;
  std::vector<std::pair<double, int>> dnodes;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
  {
    const int id = static_cast<int>(i);
    switch (classes_[i])
    {
      case NodeClass::interior:
        interior_nodes_.push_back(id);
        break;
      case NodeClass::truncation:
        tnodes.emplace_back(polar_angle(nodes_[i]), id);
        break;
      case NodeClass::cavity:
        dnodes.emplace_back(cavity_parameters.empty() ? polar_angle(nodes_[i])
                                                      : cavity_parameters[i],
                            id);
        break;
    }
    if (classes_[i] != NodeClass::interior && !on_boundary[i])
    {
      throw MeshError(std::string("node ") + std::to_string(id + 1) + " has class " +
                      class_letter(classes_[i]) + " but lies on no boundary edge");
    }
  }
  auto sort_strict = [](std::vector<std::pair<double, int>> &v, const char *name) {
    std::sort(v.begin(), v.end());
    for (std::size_t k = 1; k < v.size(); ++k)
    {
      if (!(v[k].first > v[k - 1].first))
      {
        throw MeshError(std::string(name) + " node parameters are not strictly increasing");
      }
    }
  };
  sort_strict(tnodes, "truncation");
  sort_strict(dnodes, "cavity");
  for (const auto &[a, id] : tnodes)
  {
    truncation_angles_.push_back(a);
    truncation_nodes_.push_back(id);
  }
  for (const auto &[t, id] : dnodes)
  {
    cavity_params_.push_back(t);
    cavity_nodes_.push_back(id);
  }
  double sum = 0.0;
  for (int id : truncation_nodes_)
  {
    sum += norm(nodes_[id]);
  }
  truncation_radius_ = sum / static_cast<double>(truncation_nodes_.size());
}

void Mesh::check_invariants() const
{
  for (int id : truncation_nodes_)
  {
    const double r = norm(nodes_[id]);
    if (std::abs(r - truncation_radius_) > kOnCircleTol * truncation_radius_)
    {
      throw MeshError("truncation node " + std::to_string(id + 1) + " at " +
                      describe(nodes_[id]) + " is not on the circle |x| = " +
                      std::to_string(truncation_radius_));
    }
  }
  if (layout_)
  {
    const double R = layout_->R;
    if (std::abs(truncation_radius_ - R) > kOnCircleTol * R)
    {
      throw MeshError("truncation radius does not match the generator layout");
    }
    for (std::size_t k = 0; k < cavity_nodes_.size(); ++k)
    {
      const Vec2 exact = layout_->shape.point(cavity_params_[k]);
      const Vec2 p = nodes_[cavity_nodes_[k]];
      if (norm(p - exact) > kOnCircleTol * std::max(1.0, norm(exact)))
      {
        throw MeshError("cavity node " + std::to_string(cavity_nodes_[k] + 1) +
                        " is off the cavity curve");
      }
    }
  }
  if (cavity_edges_.size() != cavity_nodes_.size() ||
      truncation_edges_.size() != truncation_nodes_.size())
  {
    throw MeshError("boundary loops do not visit every boundary node once");
  }
}

int Mesh::count(NodeClass c) const
{
  switch (c)
  {
    case NodeClass::interior:
      return static_cast<int>(interior_nodes_.size());
    case NodeClass::truncation:
      return static_cast<int>(truncation_nodes_.size());
    case NodeClass::cavity:
      return static_cast<int>(cavity_nodes_.size());
  }
  return 0;
}

int Mesh::unknown_dimension() const
{
  return 2 * count(NodeClass::interior) + 2 * count(NodeClass::truncation) +
         count(NodeClass::cavity);
}

double Mesh::element_area(int t) const
{
  const auto &v = triangles_[t].nodes;
  return signed_area(nodes_[v[0]], nodes_[v[1]], nodes_[v[2]]);
}

double Mesh::total_area() const
{
  double a = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t)
  {
    a += element_area(static_cast<int>(t));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Generation

namespace
{

// Nodes, classes and cavity parameters of the (n_radial + 1) x n_angular grid.
struct Grid
{
  std::vector<Vec2> nodes;
  std::vector<NodeClass> classes;
  std::vector<double> params;
};

Grid blend_nodes(const CavityShape &shape, double R, int n_radial, int n_angular, RadialBlend blend)
{
  Grid g;
  g.nodes.reserve(static_cast<std::size_t>(n_radial + 1) * n_angular);
  for (int i = 0; i <= n_radial; ++i)
  {
    const double s = static_cast<double>(i) / n_radial;
    for (int j = 0; j < n_angular; ++j)
    {
      const double t = kTwoPi * j / n_angular;
      const Vec2 p = shape.point(t);
      const Vec2 outer = blend == RadialBlend::linear
                             ? Vec2{R * std::cos(t), R * std::sin(t)}
                             : (R / norm(p)) * p;
      g.nodes.push_back(i == 0 ? p : i == n_radial ? outer : (1.0 - s) * p + s * outer);
      g.classes.push_back(i == 0          ? NodeClass::cavity
                          : i == n_radial ? NodeClass::truncation
                                          : NodeClass::interior);
      g.params.push_back(i == 0 ? t : 0.0);
    }
  }
  return g;
}

// Splits every cell into two triangles. Returns nullopt, with the failing cell
// in `where`, if some cell cannot be split into positive triangles.
std::optional<std::vector<Triangle>> split_cells(const std::vector<Vec2> &nodes, int n_radial,
                                                 int n_angular, DiagonalTie tie,
                                                 std::string &where)
{
  auto id = [n_angular](int i, int j) { return i * n_angular + (j % n_angular); };
  std::vector<Triangle> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(n_radial) * n_angular);
  for (int i = 0; i < n_radial; ++i)
  {
    for (int j = 0; j < n_angular; ++j)
    {
      const int a = id(i, j);
      const int b = id(i + 1, j);
      const int c = id(i + 1, j + 1);
      const int d = id(i, j + 1);
      const double ac = norm(nodes[c] - nodes[a]);
      const double bd = norm(nodes[d] - nodes[b]);
      const bool tied = std::abs(ac - bd) <= 1e-12 * std::max(ac, bd);
      const std::array<Triangle, 2> along_ac{Triangle{{a, b, c}}, Triangle{{a, c, d}}};
      const std::array<Triangle, 2> along_bd{Triangle{{a, b, d}}, Triangle{{b, c, d}}};
      auto min_area = [&](const std::array<Triangle, 2> &pair) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto &tri : pair)
        {
          m = std::min(m, signed_area(nodes[tri.nodes[0]], nodes[tri.nodes[1]],
                                      nodes[tri.nodes[2]]));
        }
        return m;
      };
      const double area_ac = min_area(along_ac);
      const double area_bd = min_area(along_bd);
      bool split_ac = tied ? (tie == DiagonalTie::fixed || (i + j) % 2 == 0) : ac < bd;
      // A non-convex cell admits only one split.
      if (split_ac && !(area_ac > kAreaEpsilon))
      {
        split_ac = false;
      }
      else if (!split_ac && !(area_bd > kAreaEpsilon))
      {
        split_ac = true;
      }
      const double area = split_ac ? area_ac : area_bd;
      if (!(area > kAreaEpsilon))
      {
        where = "ring " + std::to_string(i) + ", sector " + std::to_string(j) + " (area " +
                std::to_string(area) + ")";
        return std::nullopt;
      }
      for (const auto &tri : split_ac ? along_ac : along_bd)
      {
        triangles.push_back(tri);
      }
    }
  }
  return triangles;
}

}  // namespace

Mesh generate_mesh(const CavityShape &shape, double R, int n_radial, int n_angular,
                   DiagonalTie tie, std::optional<RadialBlend> blend)
{
  if (n_radial < 2 || n_angular < 8)
  {
    throw InputError("structured mesh needs n_radial >= 2 and n_angular >= 8, got " +
                     std::to_string(n_radial) + " x " + std::to_string(n_angular));
  }
  if (!(R > 0.0))
  {
    throw InputError("truncation radius must be positive");
  }
  shape.validate_inside(R);

  std::string where;
  for (const RadialBlend b : {RadialBlend::linear, RadialBlend::ray})
  {
    if (blend && *blend != b)
    {
      continue;
    }
    Grid g = blend_nodes(shape, R, n_radial, n_angular, b);
    auto triangles = split_cells(g.nodes, n_radial, n_angular, tie, where);
    if (triangles)
    {
      return Mesh(std::move(g.nodes), std::move(g.classes), std::move(*triangles),
                  StructuredLayout{shape, R, n_radial, n_angular, tie, b}, std::move(g.params));
    }
  }
  throw MeshError("inverted element in radial blend at " + where);
}

namespace
{

int radial_count_for(const CavityShape &shape, double R, int n_angular)
{
  double span = 0.0;
  double inner = 0.0;
  constexpr int kSamples = 256;
  for (int k = 0; k < kSamples; ++k)
  {
    const double theta = kTwoPi * k / kSamples;
    const Vec2 p = shape.point(theta);
    span += norm(Vec2{R * std::cos(theta), R * std::sin(theta)} - p);
    inner += norm(p);
  }
  span /= kSamples;
  inner /= kSamples;
  const double spacing = std::numbers::pi * (R + inner) / n_angular;
  return std::max(2, static_cast<int>(std::lround(span / spacing)));
}

}  // namespace

Mesh generate_mesh_for_size(const CavityShape &shape, double R, double h, DiagonalTie tie)
{
  if (!(h > 0.0))
  {
    throw InputError("target mesh size must be positive");
  }
  // A blend too coarse to resolve the cavity may fold; that counts as too coarse.
  auto build = [&](int n_angular) -> std::optional<Mesh> {
    try
    {
      Mesh m = generate_mesh(shape, R, radial_count_for(shape, R, n_angular), n_angular, tie);
      if (m.mesh_size() <= h)
      {
        return m;
      }
    }
    catch (const MeshError &)
    {
    }
    return std::nullopt;
  };
  int lo = 4;
  int hi = 8;
  std::optional<Mesh> best;
  for (;; hi *= 2)
  {
    if (hi > (1 << 16))
    {
      throw InputError("cannot reach mesh size " + std::to_string(h));
    }
    best = build(hi);
    if (best)
    {
      break;
    }
    lo = hi;
  }
  // Invariant: build(lo) is too coarse, `best` == build(hi) is fine enough.
  while (hi - lo > 1)
  {
    const int mid = lo + (hi - lo) / 2;
    if (auto m = build(mid))
    {
      hi = mid;
      best = std::move(m);
    }
    else
    {
      lo = mid;
    }
  }
  return std::move(*best);
}

Mesh refine(const Mesh &mesh)
{
  if (!mesh.layout())
  {
    throw InputError("refine needs a mesh produced by the structured generator");
  }
  const auto &l = *mesh.layout();
  return generate_mesh(l.shape, l.R, 2 * l.n_radial, 2 * l.n_angular, l.tie, l.blend);
}

// ---------------------------------------------------------------------------
// ASCII format

Mesh import_mesh(std::string_view text)
{
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;

  auto next_line = [&](std::string &out) {
    while (std::getline(in, out))
    {
      ++lineno;
      const auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos || out[first] == '#')
      {
        continue;
      }
      return true;
    }
    return false;
  };
  auto header = [&](const char *keyword) {
    if (!next_line(line))
    {
      throw ParseError(std::string("expected '") + keyword + " <count>', found end of file",
                       lineno);
    }
    std::istringstream ls(line);
    std::string word;
    long long count = -1;
    std::string rest;
    if (!(ls >> word >> count) || word != keyword || count < 0 || (ls >> rest))
    {
      throw ParseError(std::string("expected '") + keyword + " <count>'", lineno);
    }
    return static_cast<int>(count);
  };

  const int n = header("nodes");
  std::vector<Vec2> nodes(n);
  std::vector<NodeClass> classes(n);
  std::vector<char> seen(n, 0);
  for (int k = 0; k < n; ++k)
  {
    if (!next_line(line))
    {
      throw ParseError("expected " + std::to_string(n) + " node lines", lineno);
    }
    std::istringstream ls(line);
    long long id = 0;
    double x = 0.0;
    double y = 0.0;
    std::string cls;
    std::string rest;
    if (!(ls >> id >> x >> y >> cls) || (ls >> rest))
    {
      throw ParseError("malformed node line, expected '<id> <x> <y> <I|T|D>'", lineno);
    }
    if (id < 1 || id > n || seen[id - 1])
    {
      throw ParseError("node id " + std::to_string(id) + " is out of range or repeated", lineno);
    }
    seen[id - 1] = 1;
    if (cls == "I")
    {
      classes[id - 1] = NodeClass::interior;
    }
    else if (cls == "T")
    {
      classes[id - 1] = NodeClass::truncation;
    }
    else if (cls == "D")
    {
      classes[id - 1] = NodeClass::cavity;
    }
    else
    {
      throw ParseError("unknown node class '" + cls + "'", lineno);
    }
    nodes[id - 1] = {x, y};
  }

  const int m = header("triangles");
  std::vector<Triangle> triangles(m);
  std::vector<char> tseen(m, 0);
  for (int k = 0; k < m; ++k)
  {
    if (!next_line(line))
    {
      throw ParseError("expected " + std::to_string(m) + " triangle lines", lineno);
    }
    std::istringstream ls(line);
    long long id = 0;
    std::array<long long, 3> v{};
    std::string rest;
    if (!(ls >> id >> v[0] >> v[1] >> v[2]) || (ls >> rest))
    {
      throw ParseError("malformed triangle line, expected '<id> <n1> <n2> <n3>'", lineno);
    }
    if (id < 1 || id > m || tseen[id - 1])
    {
      throw ParseError("triangle id " + std::to_string(id) + " is out of range or repeated",
                       lineno);
    }
    tseen[id - 1] = 1;
    for (int c = 0; c < 3; ++c)
    {
      if (v[c] < 1 || v[c] > n)
      {
        throw ParseError("triangle " + std::to_string(id) + " references nonexistent node " +
                         std::to_string(v[c]),
                         lineno);
      }
      triangles[id - 1].nodes[c] = static_cast<int>(v[c] - 1);
    }
  }
  if (next_line(line))
  {
    throw ParseError("unexpected content after the triangle block", lineno);
  }
  try
  {
    return Mesh(std::move(nodes), std::move(classes), std::move(triangles));
  }
  catch (const MeshError &e)
  {
    throw InputError(std::string("mesh invariant violated: ") + e.what());
  }
}

std::string export_mesh(const Mesh &mesh)
{
  std::string out = "# flexural mesh: nodes <id> <x> <y> <class>, triangles <id> <n1> <n2> <n3>\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "nodes %zu\n", mesh.nodes().size());
  out += buf;
  for (std::size_t i = 0; i < mesh.nodes().size(); ++i)
  {
    const Vec2 p = mesh.nodes()[i];
    std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g %c\n", i + 1, p.x, p.y,
                  class_letter(mesh.classes()[i]));
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "triangles %zu\n", mesh.triangles().size());
  out += buf;
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t)
  {
    const auto &v = mesh.triangles()[t].nodes;
    std::snprintf(buf, sizeof(buf), "%zu %d %d %d\n", t + 1, v[0] + 1, v[1] + 1, v[2] + 1);
    out += buf;
  }
  return out;
}

Mesh read_mesh_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw InputError("cannot open mesh file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try
  {
    return import_mesh(ss.str());
  }
  catch (const ParseError &e)
  {
    throw ParseError(e.message(), e.line(), path);
  }
}

void write_mesh_file(const Mesh &mesh, const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw InputError("cannot write mesh file '" + path + "'");
  }
  out << export_mesh(mesh);
}

}  // namespace flexural
