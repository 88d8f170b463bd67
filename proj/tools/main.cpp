#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "flexural/driver.hpp"
#include "flexural/errors.hpp"

using namespace flexural;
using nlohmann::json;

namespace
{

// Values that parse as JSON keep their type; anything else is a string.
json scalar_value(const std::string &text)
{
  try
  {
    return json::parse(text);
  }
  catch (const json::parse_error &)
  {
    return text;
  }
}

void set_path(json &doc, const std::string &dotted, const json &value)
{
  json *node = &doc;
  std::size_t start = 0;
  for (;;)
  {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty())
    {
      throw InputError("bad config key '" + dotted + "'");
    }
    if (dot == std::string::npos)
    {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object())
    {
      (*node)[key] = json::object();
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

void print_report(const ErrorReport &r)
{
  std::printf("%s h=%.4g dofs=%d E_L2_v=%.3e E_H1_v=%.3e E_L2_w=%.3e E_H1_w=%.3e\n",
              r.method.c_str(), r.h, r.dofs, r.E_L2_v, r.E_H1_v, r.E_L2_w, r.E_H1_w);
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Flexural wave scattering by a clamped cavity: FEM with DtN boundary conditions"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");

  std::string config_path;
  std::string out;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::optional<double>>> numbers = {
      {"kappa", {}}, {"alpha", {}}, {"R", {}}, {"shape.radius", {}}, {"shape.a", {}},
      {"shape.b", {}}, {"shape.c", {}}, {"method.gamma", {}}, {"method.eta", {}}, {"mesh.h", {}}};
  std::optional<int> N;
  std::optional<int> n_radial;
  std::optional<int> n_angular;
  std::optional<int> modes;
  std::string shape;
  std::string method;
  std::string mesh_file;
  std::string oracle;
  std::string reference;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out, "artifact directory");
  app.add_option("--set", sets, "override any config key, e.g. --set mesh.h=0.1");
  static const char *flag_names[] = {"--kappa", "--alpha", "--R", "--radius", "--a",
                                     "--b",     "--c",     "--gamma", "--eta", "--h"};
  for (std::size_t k = 0; k < numbers.size(); ++k)
  {
    app.add_option(flag_names[k], numbers[k].second, numbers[k].first);
  }
  app.add_option("--N", N, "DtN truncation order");
  app.add_option("--n-radial", n_radial, "generated mesh rings");
  app.add_option("--n-angular", n_angular, "generated mesh sectors");
  app.add_option("--shape", shape, "circle, ellipse or kite");
  app.add_option("--method", method, "regular, ip or bp");
  app.add_option("--mesh-file", mesh_file, "import this mesh instead of generating one");
  app.add_option("--oracle", oracle, "series, reference or none");
  app.add_option("--modes", modes, "series oracle modes");
  app.add_option("--reference", reference, "solve output directory used as reference oracle");

  CLI::App *mesh_cmd = app.add_subcommand("mesh", "generate or import a mesh and report it");
  CLI::App *solve_cmd = app.add_subcommand("solve", "single solve with field, trace and errors");
  CLI::App *sweep_cmd = app.add_subcommand("sweep", "error against gamma, eta or kappa");
  CLI::App *conv_cmd = app.add_subcommand("converge", "errors over refinement levels");
  CLI::App *analytic_cmd = app.add_subcommand("analytic", "series solution on a grid");
  for (CLI::App *sub : {mesh_cmd, solve_cmd, sweep_cmd, conv_cmd, analytic_cmd})
  {
    sub->fallthrough();
  }

  std::string parameter;
  std::vector<double> values;
  std::vector<double> span;
  sweep_cmd->add_option("--param", parameter, "gamma, eta or kappa")->required();
  auto *values_opt = sweep_cmd->add_option("--values", values, "values in increasing order")
                         ->delimiter(',');
  auto *span_opt = sweep_cmd->add_option("--logspace", span, "lo,hi,count")
                       ->delimiter(',')
                       ->expected(3);
  values_opt->excludes(span_opt);
  int levels = 4;
  conv_cmd->add_option("--levels", levels, "refinement levels (>= 3)");
  int grid = 100;
  analytic_cmd->add_option("--grid", grid, "grid intervals per side");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try
  {
    json doc = json::object();
    if (!config_path.empty())
    {
      try
      {
        doc = json::parse(read_text_file(config_path));
      }
      catch (const json::parse_error &e)
      {
        throw InputError(config_path + ": " + e.what());
      }
    }
    if (!shape.empty())
    {
      // A new shape kind drops parameters that belong to the old one.
      if (!doc.contains("shape") || doc["shape"].value("kind", "circle") != shape)
      {
        doc["shape"] = json::object();
      }
      set_path(doc, "shape.kind", shape);
    }
    if (!method.empty())
    {
      set_path(doc, "method.kind", method);
    }
    for (const auto &[key, value] : numbers)
    {
      if (value)
      {
        set_path(doc, key, *value);
      }
    }
    if (N)
    {
      set_path(doc, "N", *N);
    }
    if (n_radial)
    {
      set_path(doc, "mesh.n_radial", *n_radial);
    }
    if (n_angular)
    {
      set_path(doc, "mesh.n_angular", *n_angular);
    }
    if (!mesh_file.empty())
    {
      set_path(doc, "mesh.source", "import");
      set_path(doc, "mesh.path", mesh_file);
    }
    if (!oracle.empty())
    {
      set_path(doc, "oracle.kind", oracle);
    }
    if (modes)
    {
      set_path(doc, "oracle.modes", *modes);
    }
    if (!reference.empty())
    {
      set_path(doc, "oracle.kind", "reference");
      set_path(doc, "oracle.path", reference);
    }
    if (!out.empty())
    {
      set_path(doc, "output", out);
    }
    for (const auto &s : sets)
    {
      const auto eq = s.find('=');
      if (eq == std::string::npos)
      {
        throw InputError("--set expects key=value, got '" + s + "'");
      }
      set_path(doc, s.substr(0, eq), scalar_value(s.substr(eq + 1)));
    }
    // Non-circular shapes have no series; fall back unless asked otherwise.
    if (doc.contains("shape") && doc["shape"].value("kind", "circle") != "circle" &&
        !(doc.contains("oracle") && doc["oracle"].contains("kind")))
    {
      set_path(doc, "oracle.kind", "none");
    }
    const ScatterConfig config = config_from_json(doc);
    config.validate();

    if (mesh_cmd->parsed())
    {
      const Mesh m = run_mesh(config);
      std::printf("nodes=%zu triangles=%zu h=%.6g dofs=%d\n", m.nodes().size(),
                  m.triangles().size(), m.mesh_size(), m.unknown_dimension());
      for (const auto &w : m.warnings())
      {
        std::printf("warning: %s\n", w.c_str());
      }
    }
    else if (solve_cmd->parsed())
    {
      const SolveOutcome o = run_solve(config);
      std::printf("dofs=%d h=%.6g residual=%.3e tv_re_w=%.6g\n", o.mesh.unknown_dimension(),
                  o.mesh.mesh_size(), o.field.diagnostics.relative_residual,
                  o.trace.total_variation());
      if (o.errors)
      {
        print_report(*o.errors);
      }
    }
    else if (sweep_cmd->parsed())
    {
      if (*span_opt)
      {
        const int count = static_cast<int>(span[2]);
        if (count != span[2])
        {
          throw InputError("--logspace count must be an integer");
        }
        values = logspace(span[0], span[1], count);
      }
      if (values.empty())
      {
        throw InputError("sweep needs --values or --logspace");
      }
      const SweepParameter p = sweep_parameter_from(parameter);
      const auto rows = run_sweep(config, p, values);
      int failed = 0;
      for (const auto &r : rows)
      {
        if (r.status != "ok")
        {
          ++failed;
          std::printf("%s=%.6g failed: %s\n", parameter.c_str(), r.value, r.status.c_str());
        }
      }
      std::printf("%zu values, %d failed\n", rows.size(), failed);
      if (failed == static_cast<int>(rows.size()))
      {
        return 2;
      }
    }
    else if (conv_cmd->parsed())
    {
      const ConvergenceStudy s = run_convergence(config, levels);
      for (const auto &r : s.levels)
      {
        print_report(r);
      }
      std::printf("orders L2v=%.3f H1v=%.3f L2w=%.3f H1w=%.3f (reference: %s)\n", s.orders[0],
                  s.orders[1], s.orders[2], s.orders[3], s.reference.c_str());
    }
    else if (analytic_cmd->parsed())
    {
      run_analytic(config, grid);
      std::printf("wrote %s/analytic.csv\n", config.output.c_str());
    }
    return 0;
  }
  catch (const InputError &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  catch (const Error &e)
  {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  catch (const std::bad_alloc &)
  {
    std::cerr << "numerical failure: out of memory\n";
    return 2;
  }
}
