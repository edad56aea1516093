// Command-line front end: solve, kernel, verify, convergence.

#include "frs/config.hpp"
#include "frs/constants.hpp"
#include "frs/io.hpp"
#include "frs/kernel.hpp"
#include "frs/solvers.hpp"
#include "frs/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kIngest = 3, kSolver = 4 };

int report_error(int code, const std::string& category, const std::string& message) {
  ordered_json j{{"status", "error"}, {"category", category}, {"exit_code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return code;
}

// Maps library exceptions onto the documented exit codes.
template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const frs::ConfigError& e) {
    return report_error(kConfig, "config", e.what());
  } catch (const frs::IngestError& e) {
    return report_error(kIngest, "ingest", e.what());
  } catch (const frs::SolverError& e) {
    return report_error(kSolver, "solver", e.what());
  } catch (const frs::NonconvergenceError& e) {
    return report_error(kSolver, "solver", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error(kConfig, "argument", e.what());
  } catch (const std::exception& e) {
    return report_error(kSolver, "solver", e.what());
  }
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string diagnostics_json(const frs::RunConfig& cfg, const frs::SolutionTrace& trace) {
  ordered_json j;
  j["status"] = "ok";
  j["kind"] = frs::to_string(cfg.spec.kind);
  j["modes"] = trace.modes();
  j["nodes"] = trace.nodes.size();
  j["source"] = cfg.spec.source.describe();
  for (const auto& [name, value] : trace.metrics) j[name] = number_or_null(value);
  std::vector<std::string> warnings = cfg.warnings;
  warnings.insert(warnings.end(), trace.warnings.begin(), trace.warnings.end());
  j["warnings"] = warnings;
  auto table = ordered_json::array();
  if (trace.diagnostics) {
    for (const auto& row : frs::coercivity_report(trace, cfg.spec)) {
      table.push_back({{"t", row.t},
                       {"norm_Dt_u", number_or_null(row.norm_Dt_u)},
                       {"norm_Au", number_or_null(row.norm_Au)},
                       {"norm_A_Drho_u", number_or_null(row.norm_A_Drho_u)},
                       {"weighted_Dt_u", number_or_null(row.weighted_Dt_u)}});
    }
  }
  j["coercivity"] = std::move(table);
  return j.dump(2) + "\n";
}

int cmd_solve(const std::string& config_path, const std::string& out_dir) {
  return guarded([&] {
    const frs::RunConfig cfg = frs::load_run_config(config_path);
    const frs::SolutionTrace trace = frs::solve(cfg.spec, cfg.quadrature);

    // Render everything before touching the output directory.
    std::vector<std::pair<std::string, std::string>> files;
    const auto& prefix = cfg.output.prefix;
    if (cfg.output.csv) files.emplace_back(prefix + ".csv", frs::trace_csv(trace));
    if (cfg.output.json) files.emplace_back(prefix + ".json", frs::trace_json(trace));
    if (cfg.output.grid) {
      const auto x = frs::uniform_grid(cfg.spec.op->length(), cfg.output.grid_points);
      files.emplace_back(prefix + "_grid.csv", frs::trace_grid_csv(trace, x));
    }
    files.emplace_back("diagnostics.json", diagnostics_json(cfg, trace));

    try {
      fs::create_directories(out_dir);
      for (const auto& [name, content] : files) frs::write_atomic(fs::path(out_dir) / name, content);
    } catch (const std::exception& e) {
      return report_error(kSolver, "output", e.what());
    }
    ordered_json summary{{"status", "ok"}, {"out_dir", out_dir}};
    summary["files"] = ordered_json::array();
    for (const auto& f : files) summary["files"].push_back(f.first);
    std::cout << summary.dump() << "\n";
    return static_cast<int>(kOk);
  });
}

int cmd_kernel(double rho, double gamma, double lambda, double t_start, double t_end, int t_steps) {
  return guarded([&] {
    const frs::KernelParams p(rho, gamma, lambda);
    if (t_steps < 1) throw std::invalid_argument("--t-steps must be at least 1");
    if (!(t_start >= 0.0) || !(t_end >= t_start)) throw std::invalid_argument("need 0 <= t-start <= t-end");
    const Eigen::VectorXd times = t_steps == 1 ? Eigen::VectorXd(Eigen::VectorXd::Constant(1, t_start))
                                                : Eigen::VectorXd(Eigen::VectorXd::LinSpaced(t_steps, t_start, t_end));
    const frs::QuadratureConfig q;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::string out = "t,A,B,dA_dt,dB_dt\n";
    for (Eigen::Index i = 0; i < times.size(); ++i) {
      const double t = times(i);
      const double a = frs::require(frs::eval_A(p, t, q), "A");
      const double b = frs::require(frs::eval_B(p, t, q), "B");
      const double da = t > 0.0 ? frs::require(frs::eval_dA_dt(p, t, q), "dA/dt") : nan;
      const double db = t >= q.min_derivative_time ? frs::require(frs::eval_dB_dt(p, t, q), "dB/dt") : nan;
      out += frs::format_number(t) + ',' + frs::format_number(a) + ',' + frs::format_number(b) + ',' +
             frs::format_number(da) + ',' + frs::format_number(db) + '\n';
    }
    std::cout << out;
    return static_cast<int>(kOk);
  });
}

int cmd_verify(const std::vector<std::string>& suites, double tolerance_scale, const std::string& report_path) {
  return guarded([&] {
    frs::VerifyOptions opt;
    opt.suites = suites;
    opt.tolerance_scale = tolerance_scale;
    const auto report = frs::run_verify(opt);
    const std::string json = report.json();
    if (!report_path.empty()) frs::write_atomic(report_path, json);
    std::cout << json;
    if (!report.passed()) {
      for (const auto& name : report.failures()) std::cerr << "FAILED " << name << "\n";
      return static_cast<int>(kFailed);
    }
    return static_cast<int>(kOk);
  });
}

int cmd_convergence(const std::string& config_path) {
  return guarded([&] {
    const frs::RunConfig cfg = frs::load_run_config(config_path);
    if (!cfg.convergence) throw frs::ConfigError("config has no 'convergence' section");
    if (cfg.spec.kind != frs::ProblemKind::forward) throw frs::ConfigError("convergence studies need a forward problem");
    std::vector<frs::ConvergenceRow> rows;
    try {
      rows = frs::run_convergence(cfg.spec, *cfg.convergence, cfg.quadrature);
    } catch (const std::invalid_argument& e) {
      throw frs::ConfigError(e.what());
    }
    std::string out = "k,dt,oracle,reference,error,observed_order\n";
    for (const auto& r : rows) {
      out += std::to_string(r.mode) + ',' + frs::format_number(r.step) + ',' + frs::format_number(r.oracle) + ',' +
             frs::format_number(r.reference) + ',' + frs::format_number(r.error) + ',' +
             frs::format_number(r.observed_order) + '\n';
    }
    std::cout << out;
    return static_cast<int>(kOk);
  });
}

// Regenerates the in-repo constants manifest for the standard parameter grid.
int cmd_measure_constants(const std::string& out_path, int level) {
  return guarded([&] {
    frs::ConstantsManifest manifest;
    frs::ConstantsProtocol protocol;
    protocol.reference_level = level;
    manifest.set_protocol(protocol);
    for (double rho : {0.3, 0.5, 0.7, 0.9}) {
      for (double gamma : {0.5, 1.0, 2.0}) {
        const frs::ConstantsKey key{rho, gamma, 1.0, 1.0, 0.5};
        manifest.upsert({key, frs::measure_constants(key, protocol, level)});
      }
    }
    manifest.save(out_path);
    std::cout << ordered_json{{"status", "ok"}, {"path", out_path}, {"entries", manifest.entries().size()}}.dump() << "\n";
    return static_cast<int>(kOk);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rayleigh-Stokes fractional solver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  auto* solve = app.add_subcommand("solve", "Solve a problem described by a JSON config");
  solve->add_option("--config", config_path, "Run configuration")->required();
  solve->add_option("--out-dir", out_dir, "Directory for the exported trace");

  double rho = 0.0, gamma = 0.0, lambda = 0.0, t_start = 0.0, t_end = 0.0;
  int t_steps = 1;
  auto* kernel = app.add_subcommand("kernel", "Tabulate A, B and their time derivatives");
  kernel->add_option("--rho", rho)->required();
  kernel->add_option("--gamma", gamma)->required();
  kernel->add_option("--lambda", lambda)->required();
  kernel->add_option("--t-start", t_start)->required();
  kernel->add_option("--t-end", t_end)->required();
  kernel->add_option("--t-steps", t_steps, "Number of rows")->required();

  std::vector<std::string> suites;
  double tolerance_scale = 1.0;
  std::string report_path;
  auto* verify = app.add_subcommand("verify", "Run the kernel and solver property suites");
  verify->add_option("--suite", suites, "Restrict to the named suite (repeatable)");
  verify->add_option("--tolerance-scale", tolerance_scale, "Multiply every tolerance (fault injection)");
  verify->add_option("--report", report_path, "Also write the JSON report here");

  std::string conv_config;
  auto* convergence = app.add_subcommand("convergence", "Oracle-versus-quadrature refinement table");
  convergence->add_option("--config", conv_config, "Run configuration with a 'convergence' section")->required();

  std::string manifest_out = frs::manifest_path().string();
  int level = frs::ConstantsProtocol{}.reference_level;
  auto* measure = app.add_subcommand("measure-constants", "");
  measure->group("");
  measure->add_option("--out", manifest_out);
  measure->add_option("--level", level);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(kConfig, "argument", e.what());
  }

  if (*solve) return cmd_solve(config_path, out_dir);
  if (*kernel) return cmd_kernel(rho, gamma, lambda, t_start, t_end, t_steps);
  if (*verify) return cmd_verify(suites, tolerance_scale, report_path);
  if (*convergence) return cmd_convergence(conv_config);
  if (*measure) return cmd_measure_constants(manifest_out, level);
  return kConfig;
}
