#include "frs/constants.hpp"

#include "frs/io.hpp"
#include "frs/kernel.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace frs {

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

std::string describe(const ConstantsKey& k) {
  std::ostringstream os;
  os << "(rho=" << k.rho << ", gamma=" << k.gamma << ", lambda_1=" << k.lambda_1 << ", T=" << k.horizon
     << ", epsilon=" << k.epsilon << ")";
  return os.str();
}

}  // namespace

bool ConstantsKey::matches(const ConstantsKey& o) const {
  return close(rho, o.rho) && close(gamma, o.gamma) && close(lambda_1, o.lambda_1) && close(horizon, o.horizon) &&
         close(epsilon, o.epsilon);
}

std::vector<double> nested_log_grid(double lo, double hi, int level) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("log grid needs 0 < lo < hi");
  if (level < 0 || level > 20) throw std::invalid_argument("grid level out of range");
  const int intervals = ConstantsProtocol::points(level) - 1;
  const double ratio = hi / lo;
  std::vector<double> out(static_cast<std::size_t>(intervals + 1));
  for (int i = 0; i <= intervals; ++i) out[static_cast<std::size_t>(i)] = lo * std::pow(ratio, double(i) / intervals);
  out.front() = lo;
  out.back() = hi;
  return out;
}

EmpiricalConstants measure_constants(const ConstantsKey& key, const ConstantsProtocol& protocol, int level,
                                     const QuadratureConfig& q) {
  check_order_and_relaxation(key.rho, key.gamma);
  if (!(key.lambda_1 > 0.0 && key.horizon > 0.0 && key.epsilon > 0.0 && key.epsilon <= 1.0)) {
    throw std::invalid_argument("constants key needs lambda_1, T > 0 and epsilon in (0, 1]");
  }
  const double rho = key.rho;
  const double eps = key.epsilon;
  const auto times = nested_log_grid(protocol.t_min_fraction * key.horizon, key.horizon, level);
  const auto dtimes = nested_log_grid(protocol.derivative_t_min_fraction * key.horizon, key.horizon, level);
  EmpiricalConstants c{0.0, 0.0, 0.0};
  for (double m : protocol.lambda_multipliers) {
    const KernelParams p(rho, key.gamma, m * key.lambda_1);
    const double lam = p.lambda();
    for (double t : times) {
      const double b = require(eval_B(p, t, q), "B");
      const double a = require(eval_A(p, t, q), "A");
      c.c_lambda_B = std::max(c.c_lambda_B, lam * b * std::max(t, std::pow(t, 1.0 - rho)));
      c.c_coercive = std::max(c.c_coercive, std::pow(lam, -eps) * (1.0 - a));
    }
    for (double t : dtimes) {
      const double db = require(eval_dB_dt(p, t, q), "dB/dt");
      c.c_dB = std::max(c.c_dB, std::pow(t, 1.0 - eps * (1.0 - rho)) * std::pow(lam, -eps) * std::abs(db));
    }
  }
  return c;
}

ConstantsManifest ConstantsManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constants manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed constants manifest " + path.string() + ": " + e.what());
  }
  ConstantsManifest m;
  try {
    if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported constants manifest version");
    const auto& p = j.at("protocol");
    m.protocol_.lambda_multipliers = p.at("lambda_multipliers").get<std::vector<double>>();
    m.protocol_.t_min_fraction = p.at("t_min_fraction").get<double>();
    m.protocol_.derivative_t_min_fraction = p.at("derivative_t_min_fraction").get<double>();
    m.protocol_.reference_level = p.at("reference_level").get<int>();
    for (const auto& e : j.at("entries")) {
      m.entries_.push_back({{e.at("rho").get<double>(), e.at("gamma").get<double>(), e.at("lambda_1").get<double>(),
                             e.at("horizon").get<double>(), e.at("epsilon").get<double>()},
                            {e.at("c_lambda_B").get<double>(), e.at("c_dB").get<double>(),
                             e.at("c_coercive").get<double>()}});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid constants manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void ConstantsManifest::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["protocol"] = {{"lambda_multipliers", protocol_.lambda_multipliers},
                   {"t_min_fraction", protocol_.t_min_fraction},
                   {"derivative_t_min_fraction", protocol_.derivative_t_min_fraction},
                   {"reference_level", protocol_.reference_level},
                   {"reference_points", ConstantsProtocol::points(protocol_.reference_level)}};
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    j["entries"].push_back({{"rho", e.key.rho},
                            {"gamma", e.key.gamma},
                            {"lambda_1", e.key.lambda_1},
                            {"horizon", e.key.horizon},
                            {"epsilon", e.key.epsilon},
                            {"c_lambda_B", e.constants.c_lambda_B},
                            {"c_dB", e.constants.c_dB},
                            {"c_coercive", e.constants.c_coercive}});
  }
  write_atomic(path, j.dump(2) + "\n");
}

std::optional<EmpiricalConstants> ConstantsManifest::find(const ConstantsKey& key) const {
  for (const auto& e : entries_) {
    if (e.key.matches(key)) return e.constants;
  }
  return std::nullopt;
}

EmpiricalConstants ConstantsManifest::at(const ConstantsKey& key) const {
  if (auto c = find(key)) return *c;
  throw std::out_of_range("no empirical constants recorded for " + describe(key));
}

void ConstantsManifest::upsert(const ManifestEntry& entry) {
  for (auto& e : entries_) {
    if (e.key.matches(entry.key)) {
      e = entry;
      return;
    }
  }
  entries_.push_back(entry);
}

std::filesystem::path manifest_path() {
  if (const char* env = std::getenv("FRS_CONSTANTS_MANIFEST"); env && *env) return env;
  return FRS_DEFAULT_MANIFEST;
}

const ConstantsManifest& default_manifest() {
  static const ConstantsManifest m = ConstantsManifest::load(manifest_path());
  return m;
}

}  // namespace frs
