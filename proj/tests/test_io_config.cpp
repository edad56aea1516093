#include "frs/config.hpp"
#include "frs/io.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace frs;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(FRS_SOURCE_DIR) / "tests" / "data";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "frs_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string minimal(const std::string& extra = "") {
  return R"({"problem": {"kind": "forward", "rho": 0.5, "gamma": 1, "horizon": 1, "time_grid": {"uniform": 9}},
             "operator": {"kind": "explicit_spectrum", "eigenvalues": [1, 4]},
             "data": {"unit": 2})" +
         extra + "}";
}

}  // namespace

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("atomic write replaces the target") {
  const auto p = scratch("atomic.txt");
  write_atomic(p, "one");
  write_atomic(p, "two");
  std::ifstream in(p);
  std::string s;
  in >> s;
  CHECK(s == "two");
  CHECK_THROWS(write_atomic(fs::path("/nonexistent-dir/x/y.txt"), "z"));
}

TEST_CASE("decimal parsing") {
  CHECK(parse_decimal("0.1") == 0.1);
  CHECK(parse_decimal("pi") == doctest::Approx(3.141592653589793));
  CHECK_THROWS_AS(parse_decimal("0.1x"), ConfigError);
  CHECK_THROWS_AS(parse_decimal(""), ConfigError);
}

TEST_CASE("minimal config and defaults") {
  const auto cfg = parse_run_config(minimal(), ".");
  CHECK(cfg.spec.kind == ProblemKind::forward);
  CHECK(cfg.spec.time_grid.size() == 9);
  CHECK(cfg.spec.data(2) == 1.0);
  CHECK(cfg.spec.source.is_zero());
  CHECK(cfg.output.prefix == "trace");
  CHECK(cfg.output.csv);
  CHECK(cfg.output.json);
  CHECK_FALSE(cfg.output.grid);
  CHECK_FALSE(cfg.convergence);

  const auto dflt = parse_run_config(R"({"problem": {"kind": "forward", "rho": 0.5, "gamma": 1, "horizon": 2},
      "operator": {"kind": "dirichlet_laplacian_1d", "length": "pi", "modes": 2}, "data": {"zero": true}})", ".");
  CHECK(dflt.spec.time_grid.size() == 513);
  CHECK(dflt.spec.time_grid(512) == 2.0);
  CHECK(dflt.spec.op->eigenvalue(2) == doctest::Approx(4.0));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_run_config("{", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config(minimal(R"(, "colour": "red")"), "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"kind": "forward", "rho": 1.5, "gamma": 1, "horizon": 1},
      "operator": {"kind": "explicit_spectrum", "eigenvalues": [1]}, "data": {"zero": true}})", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"kind": "upward", "rho": 0.5, "gamma": 1, "horizon": 1},
      "operator": {"kind": "explicit_spectrum", "eigenvalues": [1]}, "data": {"zero": true}})", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"problem": {"kind": "forward", "rho": 0.5, "gamma": 1, "horizon": 1,
      "time_grid": [0, 0.5, 0.4, 1]}, "operator": {"kind": "explicit_spectrum", "eigenvalues": [1]},
      "data": {"zero": true}})", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config(minimal(R"(, "convergence": {"steps": []})"), "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config(minimal(R"(, "output": {"formats": ["grid"]})"), "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config(minimal(R"(, "source": {"kind": "constant"})"), "."), ConfigError);
  CHECK_THROWS_AS(load_run_config(kData / "missing.json"), ConfigError);
}

TEST_CASE("sample configs load") {
  const auto f = load_run_config(kData / "forward.json");
  CHECK(f.output.grid);
  CHECK(f.output.grid_points == 33);
  const auto n = load_run_config(kData / "nonlocal.json");
  CHECK(n.spec.data(1) == 0.8);
  CHECK(n.spec.data(3) == 0.0);
  const auto b = load_run_config(kData / "backward.json");
  CHECK(b.spec.source(1, 0.5) == doctest::Approx(1.5));
  CHECK(b.spec.source(2, 0.25) == doctest::Approx(0.125));
  const auto c = load_run_config(kData / "convergence.json");
  REQUIRE(c.convergence);
  CHECK(c.convergence->steps.size() == 3);
}

TEST_CASE("field csv ingestion") {
  const auto op = dirichlet_laplacian_1d(1.0, 3);
  const auto p = scratch("field.csv");
  write(p, "k,coefficient\n3,0.5\n1,-1e-3\n");
  auto f = read_field_csv(p, op);
  CHECK(f.field(1) == -1e-3);
  CHECK(f.field(2) == 0.0);
  CHECK(f.field(3) == 0.5);

  std::ostringstream grid;
  grid << "x,value\n";
  const auto x = uniform_grid(1.0, 129);
  for (Eigen::Index i = 0; i < x.size(); ++i) grid << format_number(x(i)) << ',' << format_number(op->eigenfunction(2, x(i))) << '\n';
  write(p, grid.str());
  f = read_field_csv(p, op);
  CHECK(f.field(2) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(f.field(1)) < 1e-10);

  write(p, "k,coefficient\n4,1\n");
  CHECK_THROWS_AS(read_field_csv(p, op), IngestError);
  write(p, "k,coefficient\n1,1\n1,2\n");
  CHECK_THROWS_AS(read_field_csv(p, op), IngestError);
  write(p, "k,coefficient\n1,abc\n");
  CHECK_THROWS_AS(read_field_csv(p, op), IngestError);
  write(p, "mode,c\n1,1\n");
  CHECK_THROWS_AS(read_field_csv(p, op), IngestError);
  write(p, "k,coefficient\n");
  CHECK_THROWS_AS(read_field_csv(p, op), IngestError);
  CHECK_THROWS_AS(read_field_csv(scratch("nope.csv"), op), IngestError);
}

TEST_CASE("sampled source ingestion") {
  const auto op = explicit_spectrum((Eigen::VectorXd(2) << 1.0, 2.0).finished());
  const auto p = scratch("source.csv");
  write(p, "t,k,value\n0,1,0\n0,2,1\n2,1,4\n2,2,1\n");
  const auto s = read_sampled_source_csv(p, op);
  CHECK(s(1, 1.0) == doctest::Approx(2.0));
  CHECK(s(2, 1.5) == doctest::Approx(1.0));
  CHECK_NOTHROW(s.check_covers(2.0));
  CHECK_THROWS_AS(s.check_covers(3.0), std::invalid_argument);
  write(p, "t,k,value\n0,1,0\n1,1,1\n1,2,0\n");
  CHECK_THROWS_AS(read_sampled_source_csv(p, op), IngestError);
}

TEST_CASE("trace exports") {
  const auto op = dirichlet_laplacian_1d(1.0, 2);
  SolutionTrace tr;
  tr.nodes = (Eigen::VectorXd(2) << 0.0, 1.0).finished();
  tr.coefficients = (Eigen::MatrixXd(2, 2) << 1.0, 0.5, 0.25, 0.125).finished();
  tr.op = op;
  tr.metrics["nonlocal_gap"] = 1e-12;
  tr.warnings.push_back("note");

  const std::string csv = trace_csv(tr);
  CHECK(csv.rfind("t,k,coefficient\n", 0) == 0);
  CHECK(csv.find("1,2,0.125\n") != std::string::npos);

  const auto grid = trace_grid_csv(tr, uniform_grid(1.0, 3));
  CHECK(grid.rfind("t,x,u\n", 0) == 0);
  std::istringstream lines(grid);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 1 + 2 * 3);

  const auto j = nlohmann::json::parse(trace_json(tr));
  CHECK(j.at("modes") == 2);
  CHECK(j.at("eigenvalues").size() == 2);
  CHECK(j.at("fields").at(1).at(0) == 0.25);
  CHECK(j.at("diagnostics").is_null());
  CHECK(j.at("metrics").at("nonlocal_gap") == 1e-12);
  CHECK(j.at("warnings").at(0) == "note");
}
