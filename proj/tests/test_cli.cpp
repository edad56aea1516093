#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(FRS_SOURCE_DIR) / "tests" / "data";

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir() {
  const auto d = fs::temp_directory_path() / "frs_test_cli";
  fs::create_directories(d);
  return d;
}

Run frs(const std::string& args) {
  const auto out = workdir() / "stdout.txt";
  const auto err = workdir() / "stderr.txt";
  const std::string cmd = std::string("'") + FRS_CLI + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = workdir() / name;
  std::ofstream(p) << text;
  return p;
}

void check_error_json(const Run& r, int code) {
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j.at("status") == "error");
  CHECK(j.at("exit_code") == code);
  CHECK_FALSE(j.at("message").get<std::string>().empty());
}

}  // namespace

TEST_CASE("kernel table") {
  const auto r = frs("kernel --rho 0.5 --gamma 1 --lambda 1 --t-start 0 --t-end 1 --t-steps 3");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,A,B,dA_dt,dB_dt");
  std::getline(in, line);
  CHECK(line.rfind("0,1,1,nan,nan", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("0.5,0.7317864755", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("1,0.5932387991", 0) == 0);

  const auto bad = frs("kernel --rho 1.5 --gamma 1 --lambda 1 --t-start 0 --t-end 1 --t-steps 3");
  CHECK(bad.code == 2);
  check_error_json(bad, 2);
  CHECK(frs("kernel --rho 0.5 --gamma 1 --lambda 1 --t-start 1 --t-end 0 --t-steps 3").code == 2);
  CHECK(frs("kernel --rho 0.5").code == 2);
}

TEST_CASE("solve writes every artifact and is reproducible") {
  const auto a = workdir() / "run_a";
  const auto b = workdir() / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const auto ra = frs("solve --config '" + (kData / "forward.json").string() + "' --out-dir '" + a.string() + "'");
  const auto rb = frs("solve --config '" + (kData / "forward.json").string() + "' --out-dir '" + b.string() + "'");
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  for (const char* f : {"forward.csv", "forward.json", "forward_grid.csv", "diagnostics.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto d = nlohmann::json::parse(slurp(a / "diagnostics.json"));
  CHECK(d.at("status") == "ok");
  CHECK(d.at("residual_max").get<double>() < 1e-3);
  CHECK(d.at("coercivity").size() == 256);
}

TEST_CASE("non-local and backward runs report their consistency gaps") {
  const auto out = workdir() / "run_nb";
  fs::remove_all(out);
  REQUIRE(frs("solve --config '" + (kData / "nonlocal.json").string() + "' --out-dir '" + out.string() + "'").code == 0);
  auto d = nlohmann::json::parse(slurp(out / "diagnostics.json"));
  CHECK(d.at("nonlocal_gap").get<double>() < 1e-6);
  REQUIRE(frs("solve --config '" + (kData / "backward.json").string() + "' --out-dir '" + out.string() + "'").code == 0);
  d = nlohmann::json::parse(slurp(out / "diagnostics.json"));
  CHECK(d.at("terminal_gap").get<double>() < 1e-6);
  CHECK(d.at("kind") == "backward");
}

TEST_CASE("solve error categories") {
  const auto out = workdir() / "run_err";
  fs::remove_all(out);
  auto r = frs("solve --config '" + (workdir() / "absent.json").string() + "' --out-dir '" + out.string() + "'");
  CHECK(r.code == 2);
  check_error_json(r, 2);

  auto cfg = write_config("malformed.json", R"({"problem": {"kind": "forward"}})");
  r = frs("solve --config '" + cfg.string() + "' --out-dir '" + out.string() + "'");
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(out));

  cfg = write_config("ingest.json", R"({"problem": {"kind": "forward", "rho": 0.5, "gamma": 1, "horizon": 1},
      "operator": {"kind": "explicit_spectrum", "eigenvalues": [1]}, "data": {"csv": "no_such_field.csv"}})");
  r = frs("solve --config '" + cfg.string() + "' --out-dir '" + out.string() + "'");
  CHECK(r.code == 3);
  check_error_json(r, 3);
  CHECK_FALSE(fs::exists(out));

  cfg = write_config("starved.json", R"({"problem": {"kind": "forward", "rho": 0.5, "gamma": 1, "horizon": 1,
      "time_grid": {"uniform": 9}}, "operator": {"kind": "explicit_spectrum", "eigenvalues": [1]},
      "data": {"unit": 1}, "quadrature": {"rel_tol": 1e-15, "abs_tol": 1e-300, "max_refinements": 1}})");
  r = frs("solve --config '" + cfg.string() + "' --out-dir '" + out.string() + "'");
  CHECK(r.code == 4);
  check_error_json(r, 4);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("verify exit codes") {
  const auto report = workdir() / "verify.json";
  auto r = frs("verify --suite laplace --suite initial --report '" + report.string() + "'");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("passed") == true);
  CHECK(j.at("checks").size() == 4);

  r = frs("verify --suite initial --tolerance-scale 0");
  CHECK(r.code == 1);
  CHECK(r.err.find("FAILED initial/") != std::string::npos);

  CHECK(frs("verify --suite nonsense").code == 2);
}

TEST_CASE("convergence table") {
  auto r = frs("convergence --config '" + (kData / "convergence.json").string() + "'");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);

  auto cfg = write_config("empty_steps.json", R"({"problem": {"kind": "forward", "rho": 0.5, "gamma": 1, "horizon": 1},
      "operator": {"kind": "explicit_spectrum", "eigenvalues": [1]}, "data": {"unit": 1}, "convergence": {"steps": []}})");
  CHECK(frs("convergence --config '" + cfg.string() + "'").code == 2);
  cfg = write_config("odd_steps.json", R"({"problem": {"kind": "forward", "rho": 0.5, "gamma": 1, "horizon": 1},
      "operator": {"kind": "explicit_spectrum", "eigenvalues": [1]}, "data": {"unit": 1}, "convergence": {"steps": [0.3]}})");
  CHECK(frs("convergence --config '" + cfg.string() + "'").code == 2);
  CHECK(frs("convergence --config '" + (kData / "forward.json").string() + "'").code == 2);
}
