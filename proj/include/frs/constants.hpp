#pragma once

#include "frs/quadrature.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace frs {

/// One (rho, gamma, lambda_1, T, epsilon) cell of the empirical-constant manifest.
struct ConstantsKey {
  double rho;
  double gamma;
  double lambda_1;
  double horizon;
  double epsilon;

  bool matches(const ConstantsKey& other) const;
};

/// Measured stand-ins for the unspecified constants of the kernel and coercivity estimates.
struct EmpiricalConstants {
  /// sup lambda B(lambda, t) / min(1/t, t^{rho-1})
  double c_lambda_B;
  /// sup t^{1-eps(1-rho)} lambda^{-eps} |D_t B(lambda, t)|
  double c_dB;
  /// sup lambda^{-eps} (1 - A(lambda, t)); bounds ||Au|| by max ||f||_eps for phi = 0
  double c_coercive;
};

/// Sampling used for every sup. Levels are nested: the points of level l are a
/// subset of those of level l+1, so a sup measured on a coarser level can never
/// exceed the stored reference value.
struct ConstantsProtocol {
  std::vector<double> lambda_multipliers{1.0, 10.0, 100.0};
  /// log grid over [t_min_fraction T, T]
  double t_min_fraction = 1e-3;
  /// log grid over [derivative_t_min_fraction T, T] for D_t B
  double derivative_t_min_fraction = 1e-2;
  /// 16 * 2^level + 1 points
  int reference_level = 5;

  static int points(int level) { return 16 * (1 << level) + 1; }
};

/// Nested log-spaced grid over [lo, hi] with ConstantsProtocol::points(level) nodes.
std::vector<double> nested_log_grid(double lo, double hi, int level);

EmpiricalConstants measure_constants(const ConstantsKey& key, const ConstantsProtocol& protocol, int level,
                                     const QuadratureConfig& q = {});

struct ManifestEntry {
  ConstantsKey key;
  EmpiricalConstants constants;
};

class ConstantsManifest {
 public:
  static ConstantsManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::optional<EmpiricalConstants> find(const ConstantsKey& key) const;
  /// Throws std::out_of_range naming the key when absent.
  EmpiricalConstants at(const ConstantsKey& key) const;
  void upsert(const ManifestEntry& entry);

  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
  const ConstantsProtocol& protocol() const noexcept { return protocol_; }
  void set_protocol(const ConstantsProtocol& p) { protocol_ = p; }

 private:
  ConstantsProtocol protocol_;
  std::vector<ManifestEntry> entries_;
};

/// FRS_CONSTANTS_MANIFEST if set, otherwise the in-repo manifest.
std::filesystem::path manifest_path();

/// Loaded once from manifest_path() and shared read-only.
const ConstantsManifest& default_manifest();

}  // namespace frs
