#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <locale>
#include <sstream>
#include <string>

#include "surfrec/harness.hpp"
#include "surfrec/scalar_fem.hpp"

namespace surfrec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int max_level(Experiment e) {
  switch (e) {
    case Experiment::normals_torus: return 5;   // 204800 vertices
    case Experiment::scalar_quartic: return 4;  // about 2M vertices
    default: return 7;                          // 163842 vertices
  }
}

PerturbationSpec seeded(PerturbationSpec spec, std::uint64_t seed, int level) {
  spec.seed = seed + static_cast<std::uint64_t>(level);
  return spec;
}

std::vector<double> scalar_errors(const TriMesh& mesh, const LevelSetSurface& surface, const AmbientFunction& u,
                                  const VectorX& uh, RecoveryScheme scheme) {
  const auto G = recover_gradient(recover_geometry(mesh, scheme), uh);
  const auto e = gradient_errors(mesh, surface, u, uh, &G);
  return {e.fem, e.interpolant, e.recovered};
}

void sphere_scalar_rows(const StudyConfig& cfg, const PerturbationSpec& spec, const std::string& tag,
                        ConvergenceTable& t, const RowCallback& on_row, int& at) {
  const auto sphere = builtin_surface("sphere");
  const auto u = builtin_function("x1x2");
  const auto f = ambient_rhs(sphere, u, ScalarProblem::laplace);
  for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
    at = level;
    const TriMesh base = make_icosphere(level);
    const TriMesh mesh = perturb_mesh(base, sphere, seeded(spec, cfg.seed, level));
    const VectorX uh = solve_laplace(mesh, sphere, f);
    // h of the unperturbed mesh: random noise would otherwise jitter the step orders
    t.add_row(level, mesh.vertex_count(), mesh_stats(base).h, scalar_errors(mesh, sphere, u, uh, cfg.scheme), tag);
    if (on_row) on_row(t, t.rows.back());
  }
}

double max_vertex_error(const TriMesh& mesh, const LevelSetSurface& surface, const std::vector<Vec3>& normals) {
  double e = 0.0;
  for (std::size_t i = 0; i < normals.size(); ++i)
    e = std::max(e, (normals[i] - surface.normal(project_to_surface(surface, mesh.vertices()[i]))).norm());
  return e;
}

ConvergenceTable run(const StudyConfig& cfg, const RowCallback& on_row, int& at) {
  ConvergenceTable t;
  switch (cfg.experiment) {
    case Experiment::supercloseness: {
      t.columns = {"jac_err", "det_err", "metric_err"};
      const auto sphere = builtin_surface("sphere");
      const std::string tag = format_perturbation(cfg.perturbation);
      for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
        at = level;
        const TriMesh star = make_icosphere(level);
        const TriMesh dev = perturb_mesh(star, sphere, seeded(cfg.perturbation, cfg.seed, level));
        const auto r = supercloseness_report(star, dev);
        t.add_row(level, star.vertex_count(), mesh_stats(star).h, {r.jacobian, r.sqrt_det, r.metric}, tag);
        if (on_row) on_row(t, t.rows.back());
      }
      break;
    }
    case Experiment::scalar_sphere:
      t.columns = {"De", "De_I", "De_r"};
      sphere_scalar_rows(cfg, cfg.perturbation, format_perturbation(cfg.perturbation), t, on_row, at);
      break;
    case Experiment::counterexample:
      t.columns = {"De", "De_I", "De_r"};
      sphere_scalar_rows(cfg, tangential_noise_regime(), "tangential", t, on_row, at);
      sphere_scalar_rows(cfg, normal_noise_regime(), "normal", t, on_row, at);
      break;
    case Experiment::scalar_quartic: {
      t.columns = {"De", "De_I", "De_r"};
      const auto quartic = builtin_surface("quartic");
      const auto u = builtin_function("exp_r2");
      const auto f = ambient_rhs(quartic, u, ScalarProblem::reaction);
      TriMesh mesh = make_quartic(cfg.level_min);
      for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
        at = level;
        if (level > cfg.level_min) {
          const TriMesh fine = uniform_refine(mesh);
          std::vector<Vec3> v(fine.vertices());
          for (std::size_t i = mesh.vertex_count(); i < v.size(); ++i)
            v[i] = project_to_surface(quartic, v[i], ProjectionMode::first_order);
          mesh = fine.with_vertices(std::move(v));
        }
        const VectorX uh = solve_reaction(mesh, quartic, f);
        t.add_row(level, mesh.vertex_count(), mesh_stats(mesh).h, scalar_errors(mesh, quartic, u, uh, cfg.scheme));
        if (on_row) on_row(t, t.rows.back());
      }
      break;
    }
    case Experiment::normals_torus: {
      t.columns = {"nu_h", "nu_bar", "nu_r"};
      const auto torus = builtin_surface("torus");
      for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
        at = level;
        const TriMesh mesh = make_chevron_torus(level);
        double eh = 0.0;
        for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
          const auto p = mesh.face_points(f);
          const Vec3 y = project_to_surface(torus, (p[0] + p[1] + p[2]) / 3.0);
          eh = std::max(eh, (face_normal_area(mesh, f).normal - torus.normal(y)).norm());
        }
        const double ea = max_vertex_error(mesh, torus, averaged_normals(mesh));
        const double er = max_vertex_error(mesh, torus, recover_normal(recover_geometry(mesh, cfg.scheme)));
        t.add_row(level, mesh.vertex_count(), mesh_stats(mesh).h, {eh, ea, er});
        if (on_row) on_row(t, t.rows.back());
      }
      break;
    }
    case Experiment::vector_laplace: {
      t.columns = {"l2_err", "h1_err"};
      const auto sphere = builtin_surface("sphere");
      const auto prob = manufactured_vector_problem(sphere);
      for (const NormalSource source : cfg.normal_sources) {
        PenaltyConfig pc;
        pc.beta = cfg.beta;
        pc.normal_source = source;
        pc.scheme = cfg.scheme;
        for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
          at = level;
          const TriMesh mesh = make_icosphere(level);
          const VectorSystem sys = assemble_vector_system(mesh, pc);
          const VectorField uh = solve_vector_laplace(mesh, sys, prob.f);
          const auto e = vector_errors(mesh, sphere, uh, prob);
          t.add_row(level, 3 * mesh.vertex_count(), sys.h, {e.l2, e.h1}, std::string(normal_source_name(source)));
          if (on_row) on_row(t, t.rows.back());
        }
      }
      break;
    }
  }
  return t;
}

}  // namespace

Experiment parse_experiment(std::string_view name) {
  for (const Experiment e : {Experiment::supercloseness, Experiment::scalar_sphere, Experiment::scalar_quartic,
                             Experiment::counterexample, Experiment::normals_torus, Experiment::vector_laplace})
    if (experiment_name(e) == name) return e;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::supercloseness: return "supercloseness";
    case Experiment::scalar_sphere: return "scalar-sphere";
    case Experiment::scalar_quartic: return "scalar-quartic";
    case Experiment::counterexample: return "counterexample";
    case Experiment::normals_torus: return "normals-torus";
    case Experiment::vector_laplace: return "vector-laplace";
  }
  return "";
}

void StudyConfig::validate() const {
  if (level_min < 0 || level_min > level_max)
    throw ConfigError("levels must be a nonempty ascending range of non-negative integers");
  if (level_max > max_level(experiment))
    throw ConfigError(std::string(experiment_name(experiment)) + ": level " + std::to_string(level_max) +
                      " exceeds the cap of " + std::to_string(max_level(experiment)));
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive and finite");
  if (experiment == Experiment::vector_laplace && normal_sources.empty())
    throw ConfigError("vector-laplace needs at least one normal source");
  perturbation.validate();
}

void parse_levels(std::string_view text, int& first, int& last) {
  const auto parse = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
      throw ConfigError("cannot parse level range '" + std::string(text) + "' (expected A..B)");
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    first = last = parse(text);
  } else {
    first = parse(text.substr(0, dots));
    last = parse(text.substr(dots + 2));
  }
  if (first < 0 || first > last) throw ConfigError("level range '" + std::string(text) + "' is empty or negative");
}

std::size_t ConvergenceTable::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("no column named '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

void ConvergenceTable::add_row(int level, std::size_t dof, double h, std::vector<double> errors, std::string tag) {
  if (errors.size() != columns.size()) throw Error("add_row: error count does not match the columns");
  ConvergenceRow r{level, dof, h, std::move(errors), std::vector<double>(columns.size(), kNaN), std::move(tag)};
  const auto prev = std::find_if(rows.rbegin(), rows.rend(), [&](const ConvergenceRow& p) { return p.tag == r.tag; });
  if (prev != rows.rend()) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const double a = prev->errors[k], b = r.errors[k];
      if (a > 0.0 && b > 0.0 && prev->h > 0.0 && h > 0.0 && prev->h != h)
        r.orders[k] = std::log(a / b) / std::log(prev->h / h);
    }
  }
  rows.push_back(std::move(r));
}

std::vector<const ConvergenceRow*> ConvergenceTable::rows_with_tag(std::string_view tag) const {
  std::vector<const ConvergenceRow*> out;
  for (const auto& r : rows)
    if (r.tag == tag) out.push_back(&r);
  return out;
}

std::vector<std::string> ConvergenceTable::tags() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.tag) == out.end()) out.push_back(r.tag);
  return out;
}

OrderFit fit_orders(std::span<const double> errors, std::span<const double> h) {
  if (errors.size() != h.size()) throw ConfigError("fit_orders: errors and h differ in length");
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!(errors[k] > 0.0) || !std::isfinite(errors[k]))
      throw ConfigError("fit_orders: error values must be positive and finite (entry " + std::to_string(k) + ")");
    if (!(h[k] > 0.0)) throw ConfigError("fit_orders: mesh sizes must be positive");
  }
  OrderFit fit;
  for (std::size_t k = 1; k < errors.size(); ++k)
    fit.steps.push_back(std::log(errors[k - 1] / errors[k]) / std::log(h[k - 1] / h[k]));
  if (errors.size() < 2) {
    fit.slope = kNaN;
    return fit;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    mx += std::log(h[k]);
    my += std::log(errors[k]);
  }
  mx /= static_cast<double>(errors.size());
  my /= static_cast<double>(errors.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double dx = std::log(h[k]) - mx;
    sxy += dx * (std::log(errors[k]) - my);
    sxx += dx * dx;
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : kNaN;
  return fit;
}

double regression_order(const ConvergenceTable& table, std::string_view column, std::string_view tag,
                        std::size_t count) {
  const auto k = table.column_index(column);
  const auto rows = table.rows_with_tag(tag);
  if (rows.size() < 2) throw ConfigError("regression_order: fewer than two rows with tag '" + std::string(tag) + "'");
  const std::size_t first = rows.size() > count ? rows.size() - count : 0;
  std::vector<double> e, h;
  for (std::size_t i = first; i < rows.size(); ++i) {
    e.push_back(rows[i]->errors[k]);
    h.push_back(rows[i]->h);
  }
  return fit_orders(e, h).slope;
}

ConvergenceTable run_study(const StudyConfig& cfg, const RowCallback& on_row) {
  cfg.validate();
  ConvergenceTable t;
  int at = cfg.level_min;
  try {
    t = run(cfg, on_row, at);
  } catch (const Error& e) {
    throw Error(std::string(experiment_name(cfg.experiment)) + " level " + std::to_string(at) + ": " + e.what());
  }
  if (!cfg.output.empty()) emit_csv(t, cfg.output);
  return t;
}

PerturbationSpec tangential_noise_regime() { return parse_perturbation("tangential:2:rand"); }
PerturbationSpec normal_noise_regime() { return parse_perturbation("normal:2:rand"); }

std::vector<Gate> parse_gates(std::string_view text) {
  std::vector<Gate> gates;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const auto number = [&](const std::string& t, double& out) {
      const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
      return r.ec == std::errc{} && r.ptr == t.data() + t.size();
    };
    Gate g;
    g.column = tok[0];
    if (tok.size() < 3 || tok.size() > 4 || !number(tok[1], g.min_order) || !number(tok[2], g.max_order))
      throw ConfigError("gate line " + std::to_string(lineno) + ": expected 'column min_order max_order [tag]'");
    if (tok.size() == 4) g.tag = tok[3];
    if (g.min_order > g.max_order) throw ConfigError("gate line " + std::to_string(lineno) + ": min exceeds max");
    gates.push_back(std::move(g));
  }
  return gates;
}

std::vector<Gate> read_gates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gate file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_gates(ss.str());
}

std::vector<GateResult> evaluate_gates(const ConvergenceTable& table, std::span<const Gate> gates) {
  std::vector<GateResult> out;
  const auto tags = table.tags();
  for (const Gate& g : gates) {
    std::string tag = g.tag;
    if (tag.empty()) {
      if (tags.size() != 1) throw ConfigError("gate on '" + g.column + "' needs a tag: the table has several");
      tag = tags.front();
    }
    GateResult r{g, regression_order(table, g.column, tag), false};
    r.gate.tag = tag;
    r.pass = r.order >= g.min_order && r.order <= g.max_order;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace surfrec
