#include "frs/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace frs {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string trace_csv(const SolutionTrace& trace) {
  std::string out = "t,k,coefficient\n";
  for (Eigen::Index i = 0; i < trace.nodes.size(); ++i) {
    const std::string t = format_number(trace.nodes(i));
    for (Eigen::Index k = 0; k < trace.coefficients.cols(); ++k) {
      out += t + ',' + std::to_string(k + 1) + ',' + format_number(trace.coefficients(i, k)) + '\n';
    }
  }
  return out;
}

std::string trace_grid_csv(const SolutionTrace& trace, const Eigen::VectorXd& x) {
  std::string out = "t,x,u\n";
  for (Eigen::Index i = 0; i < trace.nodes.size(); ++i) {
    const Eigen::VectorXd u = synthesize(trace.field(i), x);
    const std::string t = format_number(trace.nodes(i));
    for (Eigen::Index j = 0; j < x.size(); ++j) out += t + ',' + format_number(x(j)) + ',' + format_number(u(j)) + '\n';
  }
  return out;
}

namespace {

nlohmann::ordered_json to_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));  // NaN becomes null
  return arr;
}

}  // namespace

std::string trace_json(const SolutionTrace& trace) {
  nlohmann::ordered_json j;
  j["modes"] = trace.modes();
  j["eigenvalues"] = to_json(trace.op->eigenvalues());
  j["nodes"] = to_json(trace.nodes);
  auto fields = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < trace.coefficients.rows(); ++i) fields.push_back(to_json(trace.coefficients.row(i).transpose()));
  j["fields"] = std::move(fields);
  if (trace.diagnostics) {
    const auto& d = *trace.diagnostics;
    j["diagnostics"] = {{"norm_u", to_json(d.norm_u)},
                        {"norm_Au", to_json(d.norm_Au)},
                        {"norm_Dt_u", to_json(d.norm_Dt_u)},
                        {"norm_A_Drho_u", to_json(d.norm_A_Drho_u)},
                        {"residual", to_json(d.residual)}};
  } else {
    j["diagnostics"] = nullptr;
  }
  j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : trace.metrics) j["metrics"][name] = value;
  j["warnings"] = trace.warnings;
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw IngestError(where + ": '" + s + "' is not a finite number");
  }
  return v;
}

int parse_mode(const std::string& s, int modes, const std::string& where) {
  int k = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IngestError(where + ": '" + s + "' is not a mode index");
  if (k < 1 || k > modes) throw IngestError(where + ": mode " + s + " outside 1.." + std::to_string(modes));
  return k;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  Table t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IngestError(path.string() + ":" + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
                        " columns");
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(n);
  }
  if (t.header.empty()) throw IngestError(path.string() + ": empty file");
  if (t.rows.empty()) throw IngestError(path.string() + ": no data rows");
  return t;
}

std::string where(const std::filesystem::path& path, std::size_t line) { return path.string() + ":" + std::to_string(line); }

}  // namespace

IngestedField read_field_csv(const std::filesystem::path& path, const OperatorPtr& op) {
  const Table t = read_table(path);
  if (t.header == std::vector<std::string>{"k", "coefficient"}) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(op->modes());
    std::vector<char> seen(static_cast<std::size_t>(op->modes()), 0);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto w = where(path, t.lines[r]);
      const int k = parse_mode(t.rows[r][0], op->modes(), w);
      if (seen[static_cast<std::size_t>(k - 1)]) throw IngestError(w + ": mode " + std::to_string(k) + " given twice");
      seen[static_cast<std::size_t>(k - 1)] = 1;
      c(k - 1) = parse_double(t.rows[r][1], w);
    }
    return {CoefficientField(op, std::move(c)), {}};
  }
  if (t.header == std::vector<std::string>{"x", "value"}) {
    if (!op->has_eigenfunctions()) throw IngestError(path.string() + ": grid samples need an operator with eigenfunctions");
    const auto m = static_cast<Eigen::Index>(t.rows.size());
    Eigen::VectorXd x(m), v(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto w = where(path, t.lines[static_cast<std::size_t>(i)]);
      x(i) = parse_double(t.rows[static_cast<std::size_t>(i)][0], w);
      v(i) = parse_double(t.rows[static_cast<std::size_t>(i)][1], w);
    }
    try {
      auto p = project(v, x, op);
      std::vector<std::string> warnings;
      if (p.aliasing_risk) warnings.push_back(path.string() + ": fewer than 8 samples per shortest resolved wavelength");
      return {std::move(p.field), std::move(warnings)};
    } catch (const std::invalid_argument& e) {
      throw IngestError(path.string() + ": " + e.what());
    }
  }
  throw IngestError(path.string() + ": header must be 'k,coefficient' or 'x,value'");
}

Source read_sampled_source_csv(const std::filesystem::path& path, const OperatorPtr& op) {
  const Table t = read_table(path);
  if (t.header != std::vector<std::string>{"t", "k", "value"}) throw IngestError(path.string() + ": header must be 't,k,value'");
  std::map<double, std::map<int, double>> samples;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto w = where(path, t.lines[r]);
    const double time = parse_double(t.rows[r][0], w);
    const int k = parse_mode(t.rows[r][1], op->modes(), w);
    if (!samples[time].emplace(k, parse_double(t.rows[r][2], w)).second) {
      throw IngestError(w + ": duplicate sample for mode " + std::to_string(k));
    }
  }
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::VectorXd times(n);
  Eigen::MatrixXd values(n, op->modes());
  Eigen::Index i = 0;
  for (const auto& [time, row] : samples) {
    if (static_cast<int>(row.size()) != op->modes()) {
      throw IngestError(path.string() + ": time " + format_number(time) + " does not sample every mode");
    }
    times(i) = time;
    for (const auto& [k, value] : row) values(i, k - 1) = value;
    ++i;
  }
  try {
    return Source::sampled(op, std::move(times), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw IngestError(path.string() + ": " + e.what());
  }
}

}  // namespace frs
