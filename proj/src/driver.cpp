#include "flexural/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <numbers>
#include <set>

#include "flexural/dtn.hpp"
#include "flexural/errors.hpp"
#include "flexural/series.hpp"
#include "flexural/specfun.hpp"

namespace flexural
{

using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Polygonal cavities cut inside the circle; the series is analytic there.
constexpr double kSeriesSag = 0.9;

std::string fmt(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where)
{
  if (!j.is_object())
  {
    throw InputError(where + " must be a JSON object");
  }
  for (const auto &item : j.items())
  {
    if (!allowed.count(item.key()))
    {
      throw InputError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json &j, const char *key, T fallback, const std::string &where)
{
  if (!j.contains(key))
  {
    return fallback;
  }
  try
  {
    return j.at(key).get<T>();
  }
  catch (const json::exception &)
  {
    throw InputError("bad value for '" + std::string(key) + "' in " + where + ": " +
                     j.at(key).dump());
  }
}

json shape_to_json(const CavityShape &s)
{
  const auto &p = s.parameters();
  switch (s.kind())
  {
    case CavityShape::Kind::circle:
      return {{"kind", "circle"}, {"radius", p[0]}};
    case CavityShape::Kind::ellipse:
      return {{"kind", "ellipse"}, {"a", p[0]}, {"b", p[1]}};
    case CavityShape::Kind::kite:
      return {{"kind", "kite"}, {"a", p[0]}, {"b", p[1]}, {"c", p[2]}};
  }
  return {};
}

CavityShape shape_from_json(const json &j)
{
  reject_unknown(j, {"kind", "radius", "a", "b", "c"}, "shape");
  const auto kind = get_or<std::string>(j, "kind", "circle", "shape");
  if (kind == "circle")
  {
    return CavityShape::circle(get_or(j, "radius", 0.3, "shape"));
  }
  if (kind == "ellipse")
  {
    return CavityShape::ellipse(get_or(j, "a", 0.4, "shape"), get_or(j, "b", 0.2, "shape"));
  }
  if (kind == "kite")
  {
    return CavityShape::kite(get_or(j, "a", 0.3, "shape"), get_or(j, "b", 0.2, "shape"),
                             get_or(j, "c", 0.1, "shape"));
  }
  throw InputError("unknown shape kind '" + kind + "' (circle, ellipse, kite)");
}

json method_to_json(const MethodChoice &m)
{
  return {{"kind", m.name()}, {"gamma", m.gamma}, {"eta", m.eta}};
}

MethodChoice method_from_json(const json &j)
{
  reject_unknown(j, {"kind", "gamma", "eta"}, "method");
  const auto kind = get_or<std::string>(j, "kind", "regular", "method");
  MethodChoice m;
  m.gamma = get_or(j, "gamma", 0.0, "method");
  m.eta = get_or(j, "eta", 0.0, "method");
  if (kind == "regular")
  {
    m.kind = MethodChoice::Kind::regular;
  }
  else if (kind == "ip")
  {
    m.kind = MethodChoice::Kind::interior_penalty;
  }
  else if (kind == "bp")
  {
    m.kind = MethodChoice::Kind::boundary_penalty;
  }
  else
  {
    throw InputError("unknown method kind '" + kind + "' (regular, ip, bp)");
  }
  return m;
}

json mesh_to_json(const MeshSource &m)
{
  return {{"source", m.kind == MeshSource::Kind::generate ? "generate" : "import"},
          {"h", m.h},
          {"n_radial", m.n_radial},
          {"n_angular", m.n_angular},
          {"path", m.path}};
}

MeshSource mesh_from_json(const json &j)
{
  reject_unknown(j, {"source", "h", "n_radial", "n_angular", "path"}, "mesh");
  MeshSource m;
  const auto source = get_or<std::string>(j, "source", "generate", "mesh");
  if (source == "generate")
  {
    m.kind = MeshSource::Kind::generate;
  }
  else if (source == "import")
  {
    m.kind = MeshSource::Kind::import_file;
  }
  else
  {
    throw InputError("unknown mesh source '" + source + "' (generate, import)");
  }
  m.h = get_or(j, "h", m.h, "mesh");
  m.n_radial = get_or(j, "n_radial", 0, "mesh");
  m.n_angular = get_or(j, "n_angular", 0, "mesh");
  m.path = get_or<std::string>(j, "path", "", "mesh");
  return m;
}

const char *oracle_name(OracleChoice::Kind k)
{
  switch (k)
  {
    case OracleChoice::Kind::series:
      return "series";
    case OracleChoice::Kind::reference:
      return "reference";
    case OracleChoice::Kind::none:
      return "none";
  }
  return "none";
}

json oracle_to_json(const OracleChoice &o)
{
  return {{"kind", oracle_name(o.kind)}, {"modes", o.modes}, {"path", o.path}};
}

OracleChoice oracle_from_json(const json &j)
{
  reject_unknown(j, {"kind", "modes", "path"}, "oracle");
  OracleChoice o;
  const auto kind = get_or<std::string>(j, "kind", "series", "oracle");
  if (kind == "series")
  {
    o.kind = OracleChoice::Kind::series;
  }
  else if (kind == "reference")
  {
    o.kind = OracleChoice::Kind::reference;
  }
  else if (kind == "none")
  {
    o.kind = OracleChoice::Kind::none;
  }
  else
  {
    throw InputError("unknown oracle kind '" + kind + "' (series, reference, none)");
  }
  o.modes = get_or(j, "modes", o.modes, "oracle");
  o.path = get_or<std::string>(j, "path", "", "oracle");
  return o;
}

std::filesystem::path out_path(const ScatterConfig &c, const char *name)
{
  return std::filesystem::path(c.output) / name;
}

void prepare_output(const ScatterConfig &c)
{
  std::error_code ec;
  std::filesystem::create_directories(c.output, ec);
  if (ec)
  {
    throw InputError("cannot create output directory '" + c.output + "': " + ec.message());
  }
}

void write_json(const std::filesystem::path &path, const json &j)
{
  write_text_file(path.string(), j.dump(2) + "\n");
}

json mesh_summary(const Mesh &mesh)
{
  json j = {{"nodes", mesh.nodes().size()},
            {"triangles", mesh.triangles().size()},
            {"interior_nodes", mesh.count(NodeClass::interior)},
            {"truncation_nodes", mesh.count(NodeClass::truncation)},
            {"cavity_nodes", mesh.count(NodeClass::cavity)},
            {"h", mesh.mesh_size()},
            {"dofs", mesh.unknown_dimension()},
            {"warnings", mesh.warnings()}};
  if (mesh.layout())
  {
    j["n_radial"] = mesh.layout()->n_radial;
    j["n_angular"] = mesh.layout()->n_angular;
    j["blend"] = mesh.layout()->blend == RadialBlend::linear ? "linear" : "ray";
  }
  return j;
}

// Everything that does not depend on the method.
struct Assembled
{
  ScalarMatrices scalars;
  TbcMatrix tbc;
  VectorC load;
};

Assembled assemble(const Mesh &mesh, double kappa, double alpha, double R, int N)
{
  return {assemble_scalar(mesh), assemble_tbc(mesh, kappa, R, N),
          incident_load(mesh, kappa, alpha, R, N)};
}

SolutionField solve_assembled(const Mesh &mesh, const Assembled &a, double kappa, double alpha,
                              const MethodChoice &method, bool estimate_condition)
{
  const BlockSystem sys = build_system(mesh, a.scalars, a.tbc, a.load, kappa, method);
  const SolveResult r = solve_system(sys, estimate_condition);
  return recover_fields(r.W, mesh, IncidentField(kappa, alpha), r.diagnostics);
}

ErrorReport describe(ErrorReport r, const ScatterConfig &c, const MethodChoice &m,
                     const Mesh &mesh, double kappa)
{
  r.method = m.name();
  r.kappa = kappa;
  r.gamma = m.gamma;
  r.eta = m.eta;
  r.N = c.N;
  r.h = mesh.mesh_size();
  r.dofs = mesh.unknown_dimension();
  return r;
}

ExactEvaluator series_evaluator(std::shared_ptr<const SeriesSolution> s)
{
  return [s](Vec2 x) -> FieldSample {
    const SeriesPoint p = s->eval(x, kSeriesSag);
    return {p.v, p.w, p.grad_v, p.grad_w};
  };
}

void check_truncation_radius(const ScatterConfig &c, const Mesh &mesh)
{
  if (std::abs(mesh.truncation_radius() - c.R) > 1e-6 * c.R)
  {
    throw InputError("mesh truncation radius " + fmt(mesh.truncation_radius()) +
                     " does not match R = " + fmt(c.R));
  }
}

struct LoadedReference
{
  Mesh mesh;
  SolutionField field;
};

std::shared_ptr<const LoadedReference> load_reference(const ScatterConfig &c)
{
  const std::filesystem::path dir(c.oracle.path);
  const json meta = [&] {
    try
    {
      return json::parse(read_text_file((dir / "metadata.json").string()));
    }
    catch (const json::exception &e)
    {
      throw InputError("reference metadata in '" + dir.string() + "': " + e.what());
    }
  }();
  const double kappa = meta.at("config").at("kappa").get<double>();
  const double alpha = meta.at("config").at("alpha").get<double>();
  if (std::abs(kappa - c.kappa) > 1e-12 * c.kappa || std::abs(alpha - c.alpha) > 1e-12)
  {
    throw InputError("reference run in '" + dir.string() + "' used kappa " + fmt(kappa) +
                     ", alpha " + fmt(alpha));
  }
  Mesh mesh = read_mesh_file((dir / "mesh.txt").string());
  const CsvTable t = parse_csv(read_text_file((dir / "field.csv").string()));
  const auto n = static_cast<Eigen::Index>(mesh.nodes().size());
  if (static_cast<Eigen::Index>(t.rows.size()) != n || t.header.size() != 12)
  {
    throw InputError("reference field in '" + dir.string() + "' does not match its mesh");
  }
  SolutionField f;
  for (VectorC *v : {&f.p, &f.q, &f.u, &f.v, &f.w, &f.ps, &f.qs})
  {
    v->resize(n);
  }
  const IncidentField inc(c.kappa, c.alpha);
  for (const auto &row : t.rows)
  {
    const long id = std::stol(row[0]) - 1;
    if (id < 0 || id >= n)
    {
      throw InputError("reference field has node id " + row[0] + " out of range");
    }
    auto cx = [&](int col) { return Complex(std::stod(row[col]), std::stod(row[col + 1])); };
    const Complex ui = inc.value(mesh.nodes()[id]);
    f.p[id] = cx(4);
    f.q[id] = cx(6);
    f.v[id] = cx(8);
    f.w[id] = cx(10);
    f.u[id] = f.v[id] + ui;
    f.ps[id] = f.p[id] + ui;
    f.qs[id] = f.q[id];
  }
  return std::make_shared<const LoadedReference>(LoadedReference{std::move(mesh), std::move(f)});
}

json solve_metadata(const ScatterConfig &c, const SolveOutcome &o)
{
  json j = {{"config", config_to_json(c)},
            {"mesh", mesh_summary(o.mesh)},
            {"solver",
             {{"system", "total field; scattered p and q recovered from it"},
              {"relative_residual", o.field.diagnostics.relative_residual},
              {"refinement_steps", o.field.diagnostics.refinement_steps},
              {"rcond_estimate", o.field.diagnostics.rcond_estimate}}},
            {"trace_total_variation_re_w", o.trace.total_variation()}};
  if (o.errors)
  {
    j["errors"] = {{"E_L2_v", o.errors->E_L2_v},
                   {"E_H1_v", o.errors->E_H1_v},
                   {"E_L2_w", o.errors->E_L2_w},
                   {"E_H1_w", o.errors->E_H1_w}};
  }
  return j;
}

}  // namespace

void ScatterConfig::validate() const
{
  if (!(kappa > 0.0) || !std::isfinite(kappa))
  {
    throw InputError("kappa must be positive, got " + fmt(kappa));
  }
  if (!(alpha >= 0.0 && alpha < kTwoPi))
  {
    throw InputError("alpha must lie in [0, 2 pi), got " + fmt(alpha));
  }
  if (!(R > 0.0) || !std::isfinite(R))
  {
    throw InputError("R must be positive, got " + fmt(R));
  }
  shape.validate_inside(R);
  if (N < 0 || N > specfun::kMaxOrder)
  {
    throw InputError("N must lie in [0, " + std::to_string(specfun::kMaxOrder) + "], got " +
                     std::to_string(N));
  }
  switch (method.kind)
  {
    case MethodChoice::Kind::regular:
      break;
    case MethodChoice::Kind::interior_penalty:
      MethodChoice::interior_penalty(method.gamma);
      break;
    case MethodChoice::Kind::boundary_penalty:
      MethodChoice::boundary_penalty(method.eta);
      break;
  }
  if (mesh.kind == MeshSource::Kind::generate)
  {
    const bool counts = mesh.n_radial > 0 || mesh.n_angular > 0;
    if (counts && (mesh.n_radial < 2 || mesh.n_angular < 8))
    {
      throw InputError("mesh counts need n_radial >= 2 and n_angular >= 8");
    }
    if (!counts && (!(mesh.h > 0.0) || !std::isfinite(mesh.h)))
    {
      throw InputError("mesh h must be positive, got " + fmt(mesh.h));
    }
  }
  else if (mesh.path.empty())
  {
    throw InputError("mesh source import needs a path");
  }
  if (oracle.kind == OracleChoice::Kind::series)
  {
    if (shape.kind() != CavityShape::Kind::circle)
    {
      throw InputError("the series oracle exists only for a circular cavity; use oracle "
                       "reference or none for " + shape.name());
    }
    if (oracle.modes < 0 || oracle.modes > specfun::kMaxOrder)
    {
      throw InputError("oracle modes must lie in [0, " + std::to_string(specfun::kMaxOrder) + "]");
    }
  }
  if (oracle.kind == OracleChoice::Kind::reference && oracle.path.empty())
  {
    throw InputError("oracle reference needs the path of a solve output directory");
  }
  if (output.empty())
  {
    throw InputError("output directory must not be empty");
  }
}

json config_to_json(const ScatterConfig &c)
{
  return {{"kappa", c.kappa},
          {"alpha", c.alpha},
          {"shape", shape_to_json(c.shape)},
          {"R", c.R},
          {"N", c.N},
          {"method", method_to_json(c.method)},
          {"mesh", mesh_to_json(c.mesh)},
          {"oracle", oracle_to_json(c.oracle)},
          {"output", c.output}};
}

ScatterConfig config_from_json(const json &j)
{
  reject_unknown(j, {"kappa", "alpha", "shape", "R", "N", "method", "mesh", "oracle", "output"},
                 "config");
  ScatterConfig c;
  c.kappa = get_or(j, "kappa", c.kappa, "config");
  c.alpha = get_or(j, "alpha", c.alpha, "config");
  if (j.contains("shape"))
  {
    c.shape = shape_from_json(j.at("shape"));
  }
  c.R = get_or(j, "R", c.R, "config");
  c.N = get_or(j, "N", c.N, "config");
  if (j.contains("method"))
  {
    c.method = method_from_json(j.at("method"));
  }
  if (j.contains("mesh"))
  {
    c.mesh = mesh_from_json(j.at("mesh"));
  }
  if (j.contains("oracle"))
  {
    c.oracle = oracle_from_json(j.at("oracle"));
  }
  c.output = get_or(j, "output", c.output, "config");
  return c;
}

std::string emit_config(const ScatterConfig &config)
{
  return config_to_json(config).dump(2) + "\n";
}

ScatterConfig parse_config(std::string_view text)
{
  json j;
  try
  {
    j = json::parse(text.begin(), text.end());
  }
  catch (const json::parse_error &e)
  {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

Mesh build_mesh(const ScatterConfig &c)
{
  if (c.mesh.kind == MeshSource::Kind::import_file)
  {
    Mesh m = read_mesh_file(c.mesh.path);
    check_truncation_radius(c, m);
    return m;
  }
  if (c.mesh.n_radial > 0 && c.mesh.n_angular > 0)
  {
    return generate_mesh(c.shape, c.R, c.mesh.n_radial, c.mesh.n_angular);
  }
  return generate_mesh_for_size(c.shape, c.R, c.mesh.h);
}

std::optional<ExactEvaluator> make_oracle(const ScatterConfig &c, const Mesh &mesh)
{
  switch (c.oracle.kind)
  {
    case OracleChoice::Kind::series:
      return series_evaluator(std::make_shared<const SeriesSolution>(
          c.shape.parameters()[0], c.kappa, c.alpha, c.oracle.modes));
    case OracleChoice::Kind::reference:
    {
      auto ref = load_reference(c);
      const ExactEvaluator inner =
          field_evaluator(ref->field, ref->mesh, Outside::extrapolate, mesh.mesh_size());
      return [ref, inner](Vec2 x) { return inner(x); };
    }
    case OracleChoice::Kind::none:
      return std::nullopt;
  }
  return std::nullopt;
}

SolveOutcome solve_config(const ScatterConfig &c, const Mesh &mesh, bool estimate_condition)
{
  c.validate();
  check_truncation_radius(c, mesh);
  const Assembled a = assemble(mesh, c.kappa, c.alpha, c.R, c.N);
  SolutionField field = solve_assembled(mesh, a, c.kappa, c.alpha, c.method, estimate_condition);
  BoundaryTrace trace = boundary_trace(field, mesh);
  std::optional<ErrorReport> errors;
  if (const auto oracle = make_oracle(c, mesh))
  {
    errors = describe(compute_errors(field, mesh, *oracle), c, c.method, mesh, c.kappa);
  }
  return {mesh, std::move(field), std::move(trace), std::move(errors)};
}

SolveOutcome run_solve(const ScatterConfig &c)
{
  c.validate();
  const Mesh mesh = build_mesh(c);
  SolveOutcome o = solve_config(c, mesh, true);
  prepare_output(c);
  write_text_file(out_path(c, "field.csv").string(), field_csv(o.field, o.mesh));
  write_text_file(out_path(c, "field.vtk").string(), field_vtk(o.field, o.mesh));
  write_text_file(out_path(c, "trace.csv").string(), trace_csv(o.trace));
  write_mesh_file(o.mesh, out_path(c, "mesh.txt").string());
  if (o.errors)
  {
    write_text_file(out_path(c, "errors.csv").string(),
                    error_csv_header() + error_csv_row(*o.errors));
  }
  write_json(out_path(c, "metadata.json"), solve_metadata(c, o));
  return o;
}

SweepParameter sweep_parameter_from(std::string_view name)
{
  if (name == "gamma")
  {
    return SweepParameter::gamma;
  }
  if (name == "eta")
  {
    return SweepParameter::eta;
  }
  if (name == "kappa")
  {
    return SweepParameter::kappa;
  }
  throw InputError("unknown sweep parameter '" + std::string(name) + "' (gamma, eta, kappa)");
}

std::string sweep_parameter_name(SweepParameter p)
{
  switch (p)
  {
    case SweepParameter::gamma:
      return "gamma";
    case SweepParameter::eta:
      return "eta";
    case SweepParameter::kappa:
      return "kappa";
  }
  return "unknown";
}

std::vector<double> logspace(double lo, double hi, int count)
{
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
  {
    throw InputError("logspace needs 0 < lo < hi and at least two points");
  }
  std::vector<double> v(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < count; ++k)
  {
    v[k] = std::pow(10.0, a + (b - a) * k / (count - 1));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

std::vector<SweepRow> sweep(const ScatterConfig &c, SweepParameter parameter,
                            const std::vector<double> &values)
{
  c.validate();
  if (values.empty())
  {
    throw InputError("sweep needs at least one value");
  }
  for (std::size_t k = 0; k < values.size(); ++k)
  {
    if (!(values[k] > 0.0) || !std::isfinite(values[k]) || (k > 0 && !(values[k] > values[k - 1])))
    {
      throw InputError("sweep values must be positive and strictly increasing");
    }
  }
  if (parameter == SweepParameter::kappa && c.oracle.kind == OracleChoice::Kind::reference)
  {
    throw InputError("a kappa sweep cannot use a fixed-kappa reference run");
  }
  const Mesh mesh = build_mesh(c);
  check_truncation_radius(c, mesh);

  std::optional<Assembled> fixed;
  std::optional<QuadratureSamples> samples;
  if (parameter != SweepParameter::kappa)
  {
    fixed = assemble(mesh, c.kappa, c.alpha, c.R, c.N);
    if (const auto oracle = make_oracle(c, mesh))
    {
      samples = sample_exact(mesh, *oracle);
    }
  }

  std::vector<SweepRow> rows;
  for (const double value : values)
  {
    SweepRow row;
    row.value = value;
    try
    {
      MethodChoice method = c.method;
      double kappa = c.kappa;
      SolutionField field;
      if (parameter == SweepParameter::kappa)
      {
        ScatterConfig ck = c;
        ck.kappa = value;
        const Assembled a = assemble(mesh, value, c.alpha, c.R, c.N);
        field = solve_assembled(mesh, a, value, c.alpha, method, false);
        kappa = value;
        if (const auto oracle = make_oracle(ck, mesh))
        {
          row.report = describe(compute_errors(field, mesh, *oracle), c, method, mesh, kappa);
        }
      }
      else
      {
        method = parameter == SweepParameter::gamma ? MethodChoice::interior_penalty(value)
                                                    : MethodChoice::boundary_penalty(value);
        field = solve_assembled(mesh, *fixed, kappa, c.alpha, method, false);
        if (samples)
        {
          row.report = describe(compute_errors(field, mesh, *samples), c, method, mesh, kappa);
        }
      }
      row.trace_variation = boundary_trace(field, mesh).total_variation();
    }
    catch (const Error &e)
    {
      row.report.reset();
      row.trace_variation = std::nan("");
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(SweepParameter parameter, const std::vector<SweepRow> &rows)
{
  std::string header = error_csv_header();
  header.pop_back();
  std::string out = "parameter,value," + header + ",tv_re_w,status\n";
  for (const auto &r : rows)
  {
    std::string body;
    if (r.report)
    {
      body = error_csv_row(*r.report);
      body.pop_back();
    }
    else
    {
      body = ",,,,,,,,,,";
    }
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += sweep_parameter_name(parameter) + ',' + fmt(r.value) + ',' + body + ',' +
           fmt(r.trace_variation) + ',' + status + '\n';
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ScatterConfig &c, SweepParameter parameter,
                                const std::vector<double> &values)
{
  std::vector<SweepRow> rows = sweep(c, parameter, values);
  prepare_output(c);
  write_text_file(out_path(c, "sweep.csv").string(), sweep_csv(parameter, rows));
  const auto failed = std::count_if(rows.begin(), rows.end(),
                                    [](const SweepRow &r) { return r.status != "ok"; });
  write_json(out_path(c, "metadata.json"),
             {{"config", config_to_json(c)},
              {"mesh", mesh_summary(build_mesh(c))},
              {"parameter", sweep_parameter_name(parameter)},
              {"values", values},
              {"failed", failed}});
  return rows;
}

double least_squares_slope(const std::vector<double> &x, const std::vector<double> &y)
{
  if (x.size() != y.size() || x.size() < 2)
  {
    throw InputError("slope needs two or more matching points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
  {
    sx += std::log(x[k]);
    sy += std::log(y[k]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
  {
    const double dx = std::log(x[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[k]) - my);
  }
  return sxy / sxx;
}

ConvergenceStudy convergence(const ScatterConfig &c, int levels)
{
  c.validate();
  if (levels < 3)
  {
    throw InputError("convergence needs at least 3 levels, got " + std::to_string(levels));
  }
  if (c.mesh.kind != MeshSource::Kind::generate)
  {
    throw InputError("convergence needs a generated mesh");
  }
  std::vector<Mesh> meshes{build_mesh(c)};
  for (int k = 1; k < levels; ++k)
  {
    meshes.push_back(refine(meshes.back()));
  }

  ConvergenceStudy study;
  std::optional<LoadedReference> fine;
  const bool series = c.oracle.kind == OracleChoice::Kind::series;
  if (series)
  {
    study.reference = "series";
  }
  else
  {
    Mesh fine_mesh = refine(refine(meshes.back()));
    const double gamma = c.method.kind == MethodChoice::Kind::interior_penalty ? c.method.gamma
                                                                               : c.kappa * 1e-3;
    const Assembled a = assemble(fine_mesh, c.kappa, c.alpha, c.R, c.N);
    SolutionField f = solve_assembled(fine_mesh, a, c.kappa, c.alpha,
                                      MethodChoice::interior_penalty(gamma), false);
    study.reference_dofs = fine_mesh.unknown_dimension();
    study.reference = "ip gamma " + fmt(gamma) + " h " + fmt(fine_mesh.mesh_size());
    fine = LoadedReference{std::move(fine_mesh), std::move(f)};
  }

  for (const Mesh &mesh : meshes)
  {
    const Assembled a = assemble(mesh, c.kappa, c.alpha, c.R, c.N);
    const SolutionField field = solve_assembled(mesh, a, c.kappa, c.alpha, c.method, false);
    const ExactEvaluator oracle =
        series ? *make_oracle(c, mesh)
               : field_evaluator(fine->field, fine->mesh, Outside::extrapolate, mesh.mesh_size());
    study.levels.push_back(describe(compute_errors(field, mesh, oracle), c, c.method, mesh, c.kappa));
  }

  std::vector<double> h;
  std::array<std::vector<double>, 4> e;
  for (const auto &r : study.levels)
  {
    h.push_back(r.h);
    e[0].push_back(r.E_L2_v);
    e[1].push_back(r.E_H1_v);
    e[2].push_back(r.E_L2_w);
    e[3].push_back(r.E_H1_w);
  }
  for (int k = 0; k < 4; ++k)
  {
    study.orders[k] = least_squares_slope(h, e[k]);
  }
  return study;
}

std::string convergence_csv(const ConvergenceStudy &study)
{
  std::string out = "level," + error_csv_header();
  for (std::size_t k = 0; k < study.levels.size(); ++k)
  {
    out += std::to_string(k) + ',' + error_csv_row(study.levels[k]);
  }
  return out;
}

std::string orders_csv(const ConvergenceStudy &study)
{
  static const char *names[4] = {"E_L2_v", "E_H1_v", "E_L2_w", "E_H1_w"};
  std::string out = "quantity,order\n";
  for (int k = 0; k < 4; ++k)
  {
    out += std::string(names[k]) + ',' + fmt(study.orders[k]) + '\n';
  }
  return out;
}

ConvergenceStudy run_convergence(const ScatterConfig &c, int levels)
{
  ConvergenceStudy study = convergence(c, levels);
  prepare_output(c);
  write_text_file(out_path(c, "convergence.csv").string(), convergence_csv(study));
  write_text_file(out_path(c, "orders.csv").string(), orders_csv(study));
  write_json(out_path(c, "metadata.json"), {{"config", config_to_json(c)},
                                            {"levels", levels},
                                            {"reference", study.reference},
                                            {"reference_dofs", study.reference_dofs}});
  return study;
}

void run_analytic(const ScatterConfig &c, int grid)
{
  c.validate();
  if (c.shape.kind() != CavityShape::Kind::circle)
  {
    throw InputError("the series solution exists only for a circular cavity");
  }
  if (grid < 1)
  {
    throw InputError("analytic grid needs at least one interval");
  }
  const int modes = c.oracle.kind == OracleChoice::Kind::series ? c.oracle.modes
                                                                : SeriesSolution::kDefaultModes;
  const double R_hat = c.shape.parameters()[0];
  const SeriesSolution s(R_hat, c.kappa, c.alpha, modes);
  std::string out = "x,y,Re_v,Im_v,Re_w,Im_w,Re_dv_dx,Im_dv_dx,Re_dv_dy,Im_dv_dy\n";
  for (int iy = 0; iy <= grid; ++iy)
  {
    for (int ix = 0; ix <= grid; ++ix)
    {
      const Vec2 x{-c.R + 2.0 * c.R * ix / grid, -c.R + 2.0 * c.R * iy / grid};
      const double r = norm(x);
      if (r < R_hat || r > c.R)
      {
        continue;
      }
      const SeriesPoint p = s.eval(x);
      out += fmt(x.x) + ',' + fmt(x.y);
      for (const Complex z : {p.v, p.w, p.grad_v[0], p.grad_v[1]})
      {
        out += ',' + fmt(z.real()) + ',' + fmt(z.imag());
      }
      out += '\n';
    }
  }
  prepare_output(c);
  write_text_file(out_path(c, "analytic.csv").string(), out);
  write_text_file(out_path(c, "coefficients.csv").string(), s.coefficients_csv());
}

Mesh run_mesh(const ScatterConfig &c)
{
  c.validate();
  Mesh mesh = build_mesh(c);
  prepare_output(c);
  write_mesh_file(mesh, out_path(c, "mesh.txt").string());
  write_json(out_path(c, "metadata.json"),
             {{"config", config_to_json(c)}, {"mesh", mesh_summary(mesh)}});
  return mesh;
}

}  // namespace flexural
