#include "frs/config.hpp"

#include "frs/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace frs {

using json = nlohmann::json;

double parse_decimal(const std::string& text) {
  if (text == "pi") return std::numbers::pi;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("'" + text + "' is not a finite decimal number");
  }
  return v;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + " must be finite");
    return d;
  }
  if (v.is_string()) {
    try {
      return parse_decimal(v.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  throw ConfigError(where + " must be a number or a decimal string");
}

int integer(const json& v, const std::string& where) {
  const double d = number(v, where);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(where + " must be an integer");
  return static_cast<int>(d);
}

Eigen::VectorXd number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

std::filesystem::path resolve(const json& v, const std::filesystem::path& base, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + " must be a path string");
  std::filesystem::path p = v.get<std::string>();
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) throw IngestError(where + ": file " + p.string() + " does not exist");
  return p;
}

OperatorPtr parse_operator(const json& j) {
  const std::string where = "operator";
  check_keys(j, where, {"kind", "length", "modes", "eigenvalues"});
  const auto kind = field(j, "kind", where);
  if (!kind.is_string()) throw ConfigError("operator.kind must be a string");
  try {
    if (kind == "dirichlet_laplacian_1d") {
      return dirichlet_laplacian_1d(number(field(j, "length", where), "operator.length"),
                                    integer(field(j, "modes", where), "operator.modes"));
    }
    if (kind == "explicit_spectrum") return explicit_spectrum(number_list(field(j, "eigenvalues", where), "operator.eigenvalues"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("operator: ") + e.what());
  }
  throw ConfigError("operator.kind must be 'dirichlet_laplacian_1d' or 'explicit_spectrum'");
}

Eigen::VectorXd parse_time_grid(const json& j, double horizon) {
  if (j.is_array()) return number_list(j, "problem.time_grid");
  check_keys(j, "problem.time_grid", {"uniform"});
  const int nodes = integer(field(j, "uniform", "problem.time_grid"), "problem.time_grid.uniform");
  if (nodes < 2) throw ConfigError("problem.time_grid.uniform needs at least 2 nodes");
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(nodes, 0.0, horizon);
  grid(nodes - 1) = horizon;
  return grid;
}

IngestedField parse_data(const json& j, const OperatorPtr& op, const std::filesystem::path& base) {
  const std::string where = "data";
  check_keys(j, where, {"coefficients", "unit", "zero", "csv"});
  if (j.size() != 1) throw ConfigError("data needs exactly one of 'coefficients', 'unit', 'zero', 'csv'");
  if (j.contains("coefficients")) {
    const Eigen::VectorXd c = number_list(j.at("coefficients"), "data.coefficients");
    if (c.size() > op->modes()) throw ConfigError("data.coefficients has more entries than modes");
    Eigen::VectorXd full = Eigen::VectorXd::Zero(op->modes());
    full.head(c.size()) = c;
    return {CoefficientField(op, std::move(full)), {}};
  }
  if (j.contains("unit")) {
    const int k = integer(j.at("unit"), "data.unit");
    if (k < 1 || k > op->modes()) throw ConfigError("data.unit is outside the mode range");
    return {CoefficientField::unit(op, k), {}};
  }
  if (j.contains("zero")) return {CoefficientField::zero(op), {}};
  return read_field_csv(resolve(j.at("csv"), base, "data.csv"), op);
}

Source parse_source(const json& j, const OperatorPtr& op, double rho, double gamma, const std::filesystem::path& base) {
  const std::string where = "source";
  check_keys(j, where, {"kind", "value", "csv"});
  const auto& kind = field(j, "kind", where);
  if (kind == "zero") return Source::zero(op);
  if (kind == "constant") return Source::constant(op, number(field(j, "value", where), "source.value"));
  if (kind == "manufactured_t2") return Source::manufactured_t2(op, rho, gamma);
  if (kind == "sampled") return read_sampled_source_csv(resolve(field(j, "csv", where), base, "source.csv"), op);
  throw ConfigError("source.kind must be one of zero, constant, manufactured_t2, sampled");
}

QuadratureConfig parse_quadrature(const json& j) {
  check_keys(j, "quadrature", {"rel_tol", "abs_tol", "max_refinements", "split_point", "min_derivative_time"});
  QuadratureConfig q;
  if (j.contains("rel_tol")) q.rel_tol = number(j.at("rel_tol"), "quadrature.rel_tol");
  if (j.contains("abs_tol")) q.abs_tol = number(j.at("abs_tol"), "quadrature.abs_tol");
  if (j.contains("max_refinements")) q.max_refinements = integer(j.at("max_refinements"), "quadrature.max_refinements");
  if (j.contains("split_point")) q.split_point = number(j.at("split_point"), "quadrature.split_point");
  if (j.contains("min_derivative_time")) {
    q.min_derivative_time = number(j.at("min_derivative_time"), "quadrature.min_derivative_time");
  }
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("quadrature: ") + e.what());
  }
  return q;
}

OutputConfig parse_output(const json& j) {
  check_keys(j, "output", {"prefix", "formats", "grid_points"});
  OutputConfig out;
  if (j.contains("prefix")) {
    if (!j.at("prefix").is_string()) throw ConfigError("output.prefix must be a string");
    out.prefix = j.at("prefix").get<std::string>();
    if (out.prefix.empty() || out.prefix.find('/') != std::string::npos) {
      throw ConfigError("output.prefix must be a plain file name");
    }
  }
  if (j.contains("formats")) {
    const auto& f = j.at("formats");
    if (!f.is_array()) throw ConfigError("output.formats must be an array");
    out.csv = out.json = out.grid = false;
    for (const auto& name : f) {
      if (name == "csv") out.csv = true;
      else if (name == "json") out.json = true;
      else if (name == "grid") out.grid = true;
      else throw ConfigError("output.formats entries must be csv, json or grid");
    }
  }
  if (j.contains("grid_points")) out.grid_points = integer(j.at("grid_points"), "output.grid_points");
  if (out.grid_points < 2) throw ConfigError("output.grid_points must be at least 2");
  return out;
}

ConvergenceConfig parse_convergence(const json& j, int modes) {
  check_keys(j, "convergence", {"steps", "modes"});
  ConvergenceConfig c;
  const Eigen::VectorXd steps = number_list(field(j, "steps", "convergence"), "convergence.steps");
  if (steps.size() == 0) throw ConfigError("convergence.steps must not be empty");
  for (Eigen::Index i = 0; i < steps.size(); ++i) {
    if (!(steps(i) > 0.0)) throw ConfigError("convergence.steps must be positive");
    c.steps.push_back(steps(i));
  }
  if (j.contains("modes")) {
    c.modes.clear();
    const auto& m = j.at("modes");
    if (!m.is_array() || m.empty()) throw ConfigError("convergence.modes must be a non-empty array");
    for (const auto& k : m) {
      const int mode = integer(k, "convergence.modes");
      if (mode < 1 || mode > modes) throw ConfigError("convergence.modes entry outside the mode range");
      c.modes.push_back(mode);
    }
  }
  return c;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j, "config", {"problem", "operator", "data", "source", "output", "quadrature", "convergence"});
    const auto& problem = field(j, "problem", "config");
    check_keys(problem, "problem", {"kind", "rho", "gamma", "horizon", "time_grid"});
    const auto& kind_json = field(problem, "kind", "problem");
    if (!kind_json.is_string()) throw ConfigError("problem.kind must be a string");
    ProblemKind kind;
    try {
      kind = problem_kind_from_string(kind_json.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("problem.kind: ") + e.what());
    }
    const double rho = number(field(problem, "rho", "problem"), "problem.rho");
    const double gamma = number(field(problem, "gamma", "problem"), "problem.gamma");
    const double horizon = number(field(problem, "horizon", "problem"), "problem.horizon");
    try {
      check_order_and_relaxation(rho, gamma);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("problem: ") + e.what());
    }
    if (!(horizon > 0.0)) throw ConfigError("problem.horizon must be positive");
    Eigen::VectorXd grid = problem.contains("time_grid") ? parse_time_grid(problem.at("time_grid"), horizon)
                                                         : parse_time_grid(json{{"uniform", 513}}, horizon);
    const OperatorPtr op = parse_operator(field(j, "operator", "config"));
    IngestedField data = parse_data(field(j, "data", "config"), op, base_dir);
    Source source = j.contains("source") ? parse_source(j.at("source"), op, rho, gamma, base_dir) : Source::zero(op);

    RunConfig cfg{ProblemSpec{kind, op, rho, gamma, horizon, std::move(data.field), std::move(source), std::move(grid)},
                  j.contains("quadrature") ? parse_quadrature(j.at("quadrature")) : QuadratureConfig{},
                  j.contains("output") ? parse_output(j.at("output")) : OutputConfig{},
                  std::nullopt,
                  std::move(data.warnings)};
    if (j.contains("convergence")) cfg.convergence = parse_convergence(j.at("convergence"), op->modes());
    if (cfg.output.grid && !op->has_eigenfunctions()) throw ConfigError("grid output needs an operator with eigenfunctions");
    try {
      cfg.spec.validate();
    } catch (const IngestError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("problem: ") + e.what());
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

}  // namespace frs
