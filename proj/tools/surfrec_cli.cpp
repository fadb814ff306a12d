// Command-line driver: one subcommand per convergence study, plus mesh export.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "surfrec/harness.hpp"

namespace {

using namespace surfrec;

struct StudyArgs {
  std::string levels;
  std::string scheme = "pppr";
  std::string perturb = "none";
  std::string normals = "recovered,averaged,elementwise";
  std::uint64_t seed = 0;
  double beta = 1.0;
  std::string out;
  std::string gate;
  bool quiet = false;
};

const char* default_levels(Experiment e) {
  switch (e) {
    case Experiment::supercloseness: return "3..7";
    case Experiment::scalar_quartic: return "0..3";
    case Experiment::normals_torus: return "0..5";
    default: return "3..6";
  }
}

std::vector<NormalSource> parse_sources(const std::string& text) {
  std::vector<NormalSource> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(parse_normal_source(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void print_row(const ConvergenceTable& t, const ConvergenceRow& r) {
  std::printf("%-3d %9zu %10.3e", r.level, r.dof, r.h);
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    std::printf("  %10.3e", r.errors[k]);
    if (std::isnan(r.orders[k]))
      std::printf(" %6s", "-");
    else
      std::printf(" %6.2f", r.orders[k]);
  }
  if (!r.tag.empty()) std::printf("  %s", r.tag.c_str());
  std::printf("\n");
  std::fflush(stdout);
}

int run_experiment(Experiment e, const StudyArgs& a) {
  StudyConfig cfg;
  cfg.experiment = e;
  parse_levels(a.levels.empty() ? default_levels(e) : a.levels, cfg.level_min, cfg.level_max);
  cfg.scheme = parse_scheme(a.scheme);
  cfg.perturbation = parse_perturbation(a.perturb);
  cfg.seed = a.seed;
  cfg.beta = a.beta;
  cfg.normal_sources = parse_sources(a.normals);
  cfg.output = a.out;
  const auto gates = a.gate.empty() ? std::vector<Gate>{} : read_gates(a.gate);

  bool header = false;
  const auto table = run_study(cfg, [&](const ConvergenceTable& t, const ConvergenceRow& r) {
    if (a.quiet) return;
    if (!header) {
      std::printf("%-3s %9s %10s", "lvl", "dof", "h");
      for (const auto& c : t.columns) std::printf("  %10s %6s", c.c_str(), "order");
      std::printf("\n");
      header = true;
    }
    print_row(t, r);
  });

  if (!a.quiet) {
    for (const auto& tag : table.tags()) {
      if (table.rows_with_tag(tag).size() < 2) continue;
      std::printf("regression (last 4 levels)%s%s:", tag.empty() ? "" : " ", tag.c_str());
      for (const auto& c : table.columns) {
        try {
          std::printf("  %s %.2f", c.c_str(), regression_order(table, c, tag));
        } catch (const ConfigError&) {
          std::printf("  %s n/a", c.c_str());
        }
      }
      std::printf("\n");
    }
  }

  bool ok = true;
  for (const auto& g : evaluate_gates(table, gates)) {
    std::printf("%s %s%s%s order %.3f in [%g, %g]\n", g.pass ? "PASS" : "FAIL", g.gate.column.c_str(),
                g.gate.tag.empty() ? "" : " ", g.gate.tag.c_str(), g.order, g.gate.min_order, g.gate.max_order);
    ok = ok && g.pass;
  }
  return ok ? 0 : 1;
}

int export_mesh(const std::string& surface, int level, const std::string& perturb, std::uint64_t seed,
                const std::string& out) {
  TriMesh mesh = surface == "sphere"    ? make_icosphere(level)
                 : surface == "torus"   ? make_chevron_torus(level)
                 : surface == "quartic" ? make_quartic(level)
                                        : throw ConfigError("unknown surface '" + surface + "'");
  PerturbationSpec spec = parse_perturbation(perturb);
  if (!spec.is_identity()) {
    spec.seed = seed;
    mesh = perturb_mesh(mesh, builtin_surface(surface), spec);
  }
  save_mesh(mesh, out, format_from_path(out));
  const auto s = mesh_stats(mesh);
  std::printf("%s level %d: %zu vertices, %zu faces, h = %.4e, min angle = %.2f deg\n", surface.c_str(), level,
              mesh.vertex_count(), mesh.face_count(), s.h, s.min_angle * 180.0 / M_PI);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surface finite elements, gradient and normal recovery, convergence studies"};
  app.require_subcommand(1);

  const std::vector<Experiment> experiments = {Experiment::supercloseness, Experiment::scalar_sphere,
                                               Experiment::scalar_quartic, Experiment::counterexample,
                                               Experiment::normals_torus,  Experiment::vector_laplace};
  const char* help[] = {
      "element-pair Jacobian, metric and area-ratio deviations on a perturbed icosphere",
      "Laplace-Beltrami on the unit sphere, u = x1 x2",
      "-Delta u + u = f on the quartic surface, u = exp(|x|^2)",
      "scalar sphere study under random tangential and random normal O(h^2) noise",
      "elementwise, averaged and recovered normals on chevron tori",
      "penalty vector Laplacian on the unit sphere",
  };

  StudyArgs args;
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    auto* sub = app.add_subcommand(std::string(experiment_name(experiments[i])), help[i]);
    sub->add_option("--levels", args.levels, "level range A..B")->type_name("A..B");
    sub->add_option("--scheme", args.scheme, "recovery scheme: pppr or pspr")->capture_default_str();
    sub->add_option("--seed", args.seed, "random seed (per-level seed is seed + level)")->capture_default_str();
    sub->add_option("--out", args.out, "write the convergence table as CSV");
    sub->add_option("--gate", args.gate, "gate file: lines 'column min_order max_order [tag]'");
    sub->add_flag("--quiet", args.quiet, "print gate results only");
    if (experiments[i] == Experiment::supercloseness || experiments[i] == Experiment::scalar_sphere)
      sub->add_option("--perturb", args.perturb, "e.g. normal:2:det,tangential:3:rand or none")
          ->capture_default_str();
    if (experiments[i] == Experiment::vector_laplace) {
      sub->add_option("--beta", args.beta, "penalty scale, mu = beta / h^2")->capture_default_str();
      sub->add_option("--normals", args.normals, "comma-separated normal sources")->capture_default_str();
    }
    subs.push_back(sub);
  }

  std::string surface = "sphere", out, perturb = "none";
  int level = 0;
  std::uint64_t seed = 0;
  auto* mesh_cmd = app.add_subcommand("mesh", "export a generated (optionally perturbed) mesh as OFF or OBJ");
  mesh_cmd->add_option("--surface", surface, "sphere, torus or quartic")->capture_default_str();
  mesh_cmd->add_option("--level", level, "refinement level")->capture_default_str();
  mesh_cmd->add_option("--perturb", perturb, "vertex perturbation")->capture_default_str();
  mesh_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  mesh_cmd->add_option("--out", out, "output file (.off or .obj)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh_cmd->parsed()) return export_mesh(surface, level, perturb, seed, out);
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return run_experiment(experiments[i], args);
  } catch (const surfrec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
