#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surfrec/recovery.hpp"
#include "surfrec/surface.hpp"
#include "surfrec/vector_fem.hpp"

namespace surfrec {

enum class Experiment {
  supercloseness,  // element-pair Jacobian, metric and area-ratio deviations on the sphere
  scalar_sphere,   // Laplace-Beltrami, u = x1 x2 on the unit sphere
  scalar_quartic,  // -Delta u + u = f, u = exp(|x|^2) on the quartic surface
  counterexample,  // random tangential and random normal O(h^2) vertex noise on the sphere
  normals_torus,   // elementwise, averaged and recovered normals on chevron tori
  vector_laplace,  // penalty vector Laplacian on the sphere
};

[[nodiscard]] Experiment parse_experiment(std::string_view name);
[[nodiscard]] std::string_view experiment_name(Experiment e);

struct StudyConfig {
  Experiment experiment = Experiment::scalar_sphere;
  int level_min = 3;
  int level_max = 6;
  RecoveryScheme scheme = RecoveryScheme::pppr;
  PerturbationSpec perturbation;  // supercloseness and scalar-sphere; the seed field is ignored
  std::uint64_t seed = 0;
  double beta = 1.0;
  std::vector<NormalSource> normal_sources = {NormalSource::recovered, NormalSource::averaged,
                                              NormalSource::elementwise};
  std::filesystem::path output;  // CSV destination, empty for none

  void validate() const;
};

/// Parses "A..B" (or a single level "A").
void parse_levels(std::string_view text, int& first, int& last);

struct ConvergenceRow {
  int level = 0;
  std::size_t dof = 0;
  double h = 0.0;
  std::vector<double> errors;
  std::vector<double> orders;  // NaN on the first row of each tag
  std::string tag;
};

struct ConvergenceTable {
  std::vector<std::string> columns;
  std::vector<ConvergenceRow> rows;

  [[nodiscard]] std::size_t column_index(std::string_view name) const;
  /// Appends a row; orders are taken against the previous row with the same tag.
  void add_row(int level, std::size_t dof, double h, std::vector<double> errors, std::string tag = {});
  [[nodiscard]] std::vector<const ConvergenceRow*> rows_with_tag(std::string_view tag) const;
  [[nodiscard]] std::vector<std::string> tags() const;
};

struct OrderFit {
  std::vector<double> steps;  // log(e_{k-1}/e_k) / log(h_{k-1}/h_k)
  double slope = 0.0;         // least-squares slope of log e against log h
};

[[nodiscard]] OrderFit fit_orders(std::span<const double> errors, std::span<const double> h);

/// Regression slope of one column over the last `count` rows carrying `tag`.
[[nodiscard]] double regression_order(const ConvergenceTable& table, std::string_view column, std::string_view tag = {},
                                      std::size_t count = 4);

[[nodiscard]] std::string to_csv(const ConvergenceTable& table);
[[nodiscard]] ConvergenceTable parse_csv(std::string_view text);
void emit_csv(const ConvergenceTable& table, const std::filesystem::path& path);
[[nodiscard]] ConvergenceTable read_csv(const std::filesystem::path& path);

using RowCallback = std::function<void(const ConvergenceTable&, const ConvergenceRow&)>;

/// Runs one experiment over the configured levels; writes the CSV when an output path is set.
[[nodiscard]] ConvergenceTable run_study(const StudyConfig& cfg, const RowCallback& on_row = {});

/// Perturbation regimes of the counterexample study.
[[nodiscard]] PerturbationSpec tangential_noise_regime();
[[nodiscard]] PerturbationSpec normal_noise_regime();

struct Gate {
  std::string column;
  double min_order = 0.0;
  double max_order = 0.0;
  std::string tag;  // empty: rows without a tag, or all rows when the table has a single tag
};

struct GateResult {
  Gate gate;
  double order = 0.0;
  bool pass = false;
};

/// Lines "column min_order max_order [tag]"; '#' starts a comment.
[[nodiscard]] std::vector<Gate> parse_gates(std::string_view text);
[[nodiscard]] std::vector<Gate> read_gates(const std::filesystem::path& path);
/// Each gate checks the regression order over the last four levels of its rows.
[[nodiscard]] std::vector<GateResult> evaluate_gates(const ConvergenceTable& table, std::span<const Gate> gates);

}  // namespace surfrec
