#pragma once

#include "frs/solvers.hpp"
#include "frs/source.hpp"
#include "frs/spectral.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace frs {

/// Malformed or missing input data.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// 17 significant digits; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double value);

/// One row per (node, mode): `t,k,coefficient`.
std::string trace_csv(const SolutionTrace& trace);

/// `t,x,u` rows of the synthesized field on a spatial grid.
std::string trace_grid_csv(const SolutionTrace& trace, const Eigen::VectorXd& x);

/// Nodes, coefficient rows, diagnostics, metrics and warnings.
std::string trace_json(const SolutionTrace& trace);

struct IngestedField {
  CoefficientField field;
  std::vector<std::string> warnings;
};

/// Accepts `k,coefficient` (missing modes are zero) or `x,value` samples on a
/// grid spanning [0, L], which are projected onto the eigenbasis.
IngestedField read_field_csv(const std::filesystem::path& path, const OperatorPtr& op);

/// `t,k,value` rows; every mode must be sampled at the same times.
Source read_sampled_source_csv(const std::filesystem::path& path, const OperatorPtr& op);

}  // namespace frs
