#include <clocale>
#include <cmath>
#include <fstream>
#include <locale>
#include <sstream>

#include <doctest.h>

#include "fixtures.hpp"
#include "surfrec/harness.hpp"

using namespace surfrec;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("order fitting") {
  const std::vector<double> h = {1.0, 0.5, 0.25};
  const auto a = fit_orders(std::vector<double>{1.0, 0.25, 0.0625}, h);
  REQUIRE(a.steps.size() == 2);
  CHECK(a.steps[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(a.steps[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-14));

  const auto c = fit_orders(std::vector<double>{3.0, 3.0, 3.0}, h);
  CHECK(c.steps[0] == 0.0);
  CHECK(c.steps[1] == 0.0);
  CHECK(std::abs(c.slope) <= 1e-15);

  // Published FEM gradient errors on the sphere with halving h.
  const std::vector<double> de = {5.13e-01, 1.96e-01, 9.83e-02, 4.92e-02, 2.46e-02, 1.23e-02, 6.15e-03, 3.07e-03};
  std::vector<double> hh;
  for (std::size_t k = 0; k < de.size(); ++k) hh.push_back(std::ldexp(1.0, -static_cast<int>(k)));
  const auto t = fit_orders(de, hh);
  const double expected[] = {1.39, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00};
  for (std::size_t k = 0; k < 7; ++k) CHECK(std::abs(t.steps[k] - expected[k]) <= 0.01);

  CHECK_THROWS_AS((void)fit_orders(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS((void)fit_orders(std::vector<double>{1.0, -1.0}, std::vector<double>{1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS((void)fit_orders(std::vector<double>{1.0}, std::vector<double>{1.0, 0.5}), ConfigError);
  CHECK(std::isnan(fit_orders(std::vector<double>{1.0}, std::vector<double>{1.0}).slope));
}

TEST_CASE("convergence tables") {
  ConvergenceTable t;
  t.columns = {"a", "b"};
  t.add_row(1, 10, 0.5, {1.0, 2.0}, "x");
  t.add_row(1, 10, 0.5, {4.0, 8.0}, "y");
  t.add_row(2, 40, 0.25, {0.25, 1.0}, "x");
  CHECK(std::isnan(t.rows[0].orders[0]));
  CHECK(std::isnan(t.rows[1].orders[1]));
  CHECK(t.rows[2].orders[0] == doctest::Approx(2.0));
  CHECK(t.rows[2].orders[1] == doctest::Approx(1.0));
  CHECK(t.tags() == std::vector<std::string>{"x", "y"});
  CHECK(t.rows_with_tag("x").size() == 2);
  CHECK(t.column_index("b") == 1);
  CHECK_THROWS_AS((void)t.column_index("c"), ConfigError);
  CHECK_THROWS_AS(t.add_row(3, 1, 0.1, {1.0}), Error);
  CHECK(regression_order(t, "a", "x") == doctest::Approx(2.0));
  CHECK_THROWS_AS((void)regression_order(t, "a", "y"), ConfigError);
}

TEST_CASE("level ranges") {
  int a = 0, b = 0;
  parse_levels("3..7", a, b);
  CHECK(a == 3);
  CHECK(b == 7);
  parse_levels("4", a, b);
  CHECK(a == 4);
  CHECK(b == 4);
  CHECK_THROWS_AS(parse_levels("7..3", a, b), ConfigError);
  CHECK_THROWS_AS(parse_levels("x..3", a, b), ConfigError);
  CHECK_THROWS_AS(parse_levels("-1..3", a, b), ConfigError);
}

TEST_CASE("study config validation") {
  StudyConfig c;
  c.experiment = Experiment::normals_torus;
  c.level_min = 0;
  c.level_max = 6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.level_max = 5;
  CHECK_NOTHROW(c.validate());
  c.experiment = Experiment::scalar_sphere;
  c.level_max = 8;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.level_max = 4;
  c.beta = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.beta = 1;
  c.experiment = Experiment::vector_laplace;
  c.normal_sources.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);

  for (const char* name :
       {"supercloseness", "scalar-sphere", "scalar-quartic", "counterexample", "normals-torus", "vector-laplace"})
    CHECK(experiment_name(parse_experiment(name)) == name);
  CHECK_THROWS_AS((void)parse_experiment("table-7"), ConfigError);
}

TEST_CASE("CSV output") {
  ConvergenceTable t;
  t.columns = {"err", "other"};
  CHECK(to_csv(t) == "level,dof,h,err,err_order,other,other_order,tag\n");

  t.add_row(2, 162, 0.3249196962329064, {0.1, 1.0 / 3.0}, "normal:2:det,tangential:3:rand");
  t.add_row(3, 642, 0.16464716006392044, {0.025, 1e-300}, "normal:2:det,tangential:3:rand");
  t.add_row(3, 642, 0.16464716006392044, {7.5e-5, 2.0}, "quote\"d");
  const std::string csv = to_csv(t);
  CHECK(csv.find("\"normal:2:det,tangential:3:rand\"") != std::string::npos);
  CHECK(csv.find("\"quote\"\"d\"") != std::string::npos);
  CHECK(csv.find("3.3333333333333331e-01") != std::string::npos);  // 17 significant digits

  const ConvergenceTable back = parse_csv(csv);
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(back.columns == t.columns);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].level == t.rows[i].level);
    CHECK(back.rows[i].dof == t.rows[i].dof);
    CHECK(back.rows[i].h == t.rows[i].h);
    CHECK(back.rows[i].tag == t.rows[i].tag);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(back.rows[i].errors[k] == t.rows[i].errors[k]);
      CHECK(same(back.rows[i].orders[k], t.rows[i].orders[k]));
    }
  }
  CHECK(to_csv(back) == csv);

  // CRLF input parses the same.
  std::string crlf;
  for (const char ch : csv) {
    if (ch == '\n') crlf += '\r';
    crlf += ch;
  }
  CHECK(to_csv(parse_csv(crlf)) == csv);

  CHECK_THROWS_AS((void)parse_csv(""), IoError);
  CHECK_THROWS_AS((void)parse_csv("level,dof,h,err,tag\n"), IoError);
  CHECK_THROWS_AS((void)parse_csv("level,dof,h,err,err_order,tag\n1,2,3\n"), IoError);
  CHECK_THROWS_AS((void)parse_csv("level,dof,h,err,err_order,tag\n1,2,3,x,,t\n"), IoError);

  test::TempFile f("table.csv");
  emit_csv(t, f.path);
  CHECK(slurp(f.path) == csv);
  CHECK(to_csv(read_csv(f.path)) == csv);
  CHECK_THROWS_AS(emit_csv(t, ""), IoError);
  CHECK_THROWS_AS(emit_csv(t, "/nonexistent/dir/t.csv"), IoError);
}

TEST_CASE("CSV output ignores the global locale") {
  ConvergenceTable t;
  t.columns = {"err"};
  t.add_row(1, 1234567, 0.5, {1234.5});
  const std::string before = to_csv(t);
  const char* old = std::setlocale(LC_ALL, nullptr);
  const std::string saved = old ? old : "C";
  bool switched = false;
  for (const char* name : {"de_DE.UTF-8", "de_DE.utf8", "fr_FR.UTF-8"})
    if (std::setlocale(LC_ALL, name)) {
      switched = true;
      break;
    }
  try {
    std::locale::global(std::locale(""));
  } catch (const std::runtime_error&) {
  }
  const std::string during = to_csv(t);
  std::setlocale(LC_ALL, saved.c_str());
  std::locale::global(std::locale::classic());
  CHECK(during == before);
  CHECK(before.find("1234567") != std::string::npos);
  CHECK(before.find("1.2345") != std::string::npos);
  if (!switched) MESSAGE("no comma-decimal locale installed; checked the classic locale only");
}

TEST_CASE("gate files") {
  const auto gates = parse_gates("# comment\njac_err 1.85 2.15\n\nDe_r -inf 1.5 tangential  # trailing\n");
  REQUIRE(gates.size() == 2);
  CHECK(gates[0].column == "jac_err");
  CHECK(gates[0].min_order == 1.85);
  CHECK(gates[0].tag.empty());
  CHECK(gates[1].tag == "tangential");
  CHECK(std::isinf(gates[1].min_order));
  CHECK_THROWS_AS((void)parse_gates("jac_err 2"), ConfigError);
  CHECK_THROWS_AS((void)parse_gates("jac_err 2 1"), ConfigError);
  CHECK_THROWS_AS((void)parse_gates("jac_err 1 2 t extra"), ConfigError);
  CHECK_THROWS_AS((void)parse_gates("jac_err 1,5 2"), ConfigError);
  CHECK_THROWS_AS((void)read_gates("/nonexistent/gates.txt"), IoError);

  ConvergenceTable t;
  t.columns = {"e"};
  for (int k = 0; k < 6; ++k) t.add_row(k, 1, std::ldexp(1.0, -k), {std::ldexp(1.0, -2 * k)}, "only");
  const std::vector<Gate> g = {{"e", 1.9, 2.1, ""}, {"e", 0.0, 1.0, "only"}};
  const auto r = evaluate_gates(t, g);
  CHECK(r[0].pass);
  CHECK(r[0].gate.tag == "only");
  CHECK(r[0].order == doctest::Approx(2.0));
  CHECK_FALSE(r[1].pass);

  t.add_row(0, 1, 1.0, {1.0}, "second");
  CHECK_THROWS_AS((void)evaluate_gates(t, std::vector<Gate>{{"e", 0, 1, ""}}), ConfigError);
}

TEST_CASE("studies: dof counts and determinism") {
  StudyConfig cfg;
  cfg.experiment = Experiment::supercloseness;
  cfg.level_min = 2;
  cfg.level_max = 4;
  cfg.perturbation = parse_perturbation("normal:2:rand,tangential:3:rand");
  cfg.seed = 42;
  test::TempFile a("a.csv"), b("b.csv");
  cfg.output = a.path;
  int seen = 0;
  const auto t = run_study(cfg, [&](const ConvergenceTable&, const ConvergenceRow&) { ++seen; });
  CHECK(seen == 3);
  CHECK(t.columns == std::vector<std::string>{"jac_err", "det_err", "metric_err"});
  for (const auto& r : t.rows) CHECK(r.dof == 10 * (std::size_t{1} << (2 * r.level)) + 2);
  cfg.output = b.path;
  (void)run_study(cfg);
  CHECK(slurp(a.path) == slurp(b.path));
  CHECK(slurp(a.path) == to_csv(t));
  cfg.seed = 43;
  CHECK(to_csv(run_study(cfg)) != slurp(a.path));

  StudyConfig torus;
  torus.experiment = Experiment::normals_torus;
  torus.level_min = 0;
  torus.level_max = 1;
  const auto tt = run_study(torus);
  CHECK(tt.rows[0].dof == 200);
  CHECK(tt.rows[1].dof == 800);

  StudyConfig vec;
  vec.experiment = Experiment::vector_laplace;
  vec.level_min = 1;
  vec.level_max = 2;
  vec.normal_sources = {NormalSource::recovered, NormalSource::elementwise};
  const auto vt = run_study(vec);
  CHECK(vt.tags() == std::vector<std::string>{"recovered", "elementwise"});
  CHECK(vt.rows[0].dof == 3 * 42);
}

TEST_CASE("scalar sphere study on exact-vertex meshes") {
  StudyConfig cfg;
  cfg.experiment = Experiment::scalar_sphere;
  cfg.level_min = 2;
  cfg.level_max = 5;
  const auto t = run_study(cfg);
  CHECK(t.tags() == std::vector<std::string>{"none"});
  const double de = regression_order(t, "De", "none", 3);
  const double di = regression_order(t, "De_I", "none", 3);
  const double dr = regression_order(t, "De_r", "none", 3);
  CHECK(de >= 0.9);
  CHECK(de <= 1.1);
  CHECK(di >= 1.8);
  CHECK(dr >= 1.85);
}
