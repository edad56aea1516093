#include "frs/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace frs {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::forward: return "forward";
    case ProblemKind::nonlocal: return "nonlocal";
    case ProblemKind::backward: return "backward";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "forward") return ProblemKind::forward;
  if (name == "nonlocal") return ProblemKind::nonlocal;
  if (name == "backward") return ProblemKind::backward;
  throw std::invalid_argument("unknown problem kind '" + name + "'");
}

void ProblemSpec::validate() const {
  if (!op) throw std::invalid_argument("problem needs an operator");
  check_order_and_relaxation(rho, gamma);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon T must be positive");
  if (data.modes() != op->modes()) throw std::invalid_argument("data must have one coefficient per mode");
  if (!data.coefficients().allFinite()) throw std::invalid_argument("data coefficients must be finite");
  if (source.modes() != op->modes()) throw std::invalid_argument("source must have one component per mode");
  if (time_grid.size() < 2) throw std::invalid_argument("time grid needs at least two nodes");
  if (time_grid(0) != 0.0) throw std::invalid_argument("time grid must start at 0");
  if (time_grid(time_grid.size() - 1) != horizon) throw std::invalid_argument("time grid must end at T");
  for (Eigen::Index i = 1; i < time_grid.size(); ++i) {
    if (!(time_grid(i) > time_grid(i - 1))) throw std::invalid_argument("time grid must be strictly increasing");
  }
  source.check_covers(horizon);
}

CoefficientField SolutionTrace::field(Eigen::Index node) const {
  return {op, coefficients.row(node).transpose()};
}

namespace {

std::atomic<unsigned> g_threads{0};

// Runs fn(k) for k = 1..modes. Each call must only write state owned by mode k,
// so the result does not depend on scheduling. The first failure in mode order
// is rethrown with its mode index.
template <class F>
void for_each_mode(int modes, F&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(modes));
  auto run = [&](int k) {
    try {
      fn(k);
    } catch (...) {
      errors[static_cast<std::size_t>(k - 1)] = std::current_exception();
    }
  };
  const unsigned threads = std::min<unsigned>(mode_threads(), static_cast<unsigned>(modes));
  if (threads <= 1) {
    for (int k = 1; k <= modes; ++k) run(k);
  } else {
    std::atomic<int> next{1};
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) {
      pool.emplace_back([&] {
        for (int k = next++; k <= modes; k = next++) run(k);
      });
    }
  }
  for (int k = 1; k <= modes; ++k) {
    const auto& err = errors[static_cast<std::size_t>(k - 1)];
    if (!err) continue;
    try {
      std::rethrow_exception(err);
    } catch (const SolverError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError("mode " + std::to_string(k) + ": " + e.what(), k);
    }
  }
}

struct ConvolutionPlan {
  std::vector<double> s;
  std::vector<double> w;
  // points with s <= t_i, per time node
  std::vector<std::size_t> upto;
};

constexpr int kGaussPoints = 12;
constexpr int kGeometricLevels = 30;
constexpr double kMaxPanelFraction = 1.0 / 64.0;

const quadrature::GaussRule& panel_rule() {
  static const quadrature::GaussRule rule = quadrature::gauss_legendre(kGaussPoints);
  return rule;
}

void add_panel(ConvolutionPlan& plan, double a, double b) {
  const auto& rule = panel_rule();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  for (int j = 0; j < kGaussPoints; ++j) {
    plan.s.push_back(c + h * rule.nodes(j));
    plan.w.push_back(h * rule.weights(j));
  }
}

// Panels in the lag variable s = t_i - tau. The grid intervals serve as panels
// (split when wide); [0, t_1] is graded geometrically toward s = 0 where B is
// least regular.
ConvolutionPlan make_plan(const Eigen::VectorXd& grid, double horizon) {
  ConvolutionPlan plan;
  const Eigen::Index n = grid.size();
  plan.upto.assign(static_cast<std::size_t>(n), 0);
  const double t1 = grid(1);
  add_panel(plan, 0.0, std::ldexp(t1, -kGeometricLevels));
  for (int l = kGeometricLevels; l > 0; --l) add_panel(plan, std::ldexp(t1, -l), std::ldexp(t1, -l + 1));
  plan.upto[1] = plan.s.size();
  const double max_width = horizon * kMaxPanelFraction;
  for (Eigen::Index i = 2; i < n; ++i) {
    const double a = grid(i - 1);
    const double b = grid(i);
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
    for (int j = 0; j < pieces; ++j) {
      const double lo = a + (b - a) * j / pieces;
      const double hi = j + 1 == pieces ? b : a + (b - a) * (j + 1) / pieces;
      add_panel(plan, lo, hi);
    }
    plan.upto[static_cast<std::size_t>(i)] = plan.s.size();
  }
  return plan;
}

// B on the plan lags depends only on the kernel, the grid and the quadrature
// settings, and the same table is wanted by every solve on a given setup.
struct TableKey {
  double rho, gamma, lambda, horizon;
  double rel_tol, abs_tol, split_point;
  int max_refinements;
  std::vector<double> grid;
  auto operator<=>(const TableKey&) const = default;
};

constexpr std::size_t kMaxCachedTables = 256;

std::shared_ptr<const Eigen::VectorXd> tabulate_B(const KernelParams& p, const ProblemSpec& spec,
                                                  const ConvolutionPlan& plan, const QuadratureConfig& q) {
  static std::mutex mutex;
  static std::map<TableKey, std::shared_ptr<const Eigen::VectorXd>> cache;
  TableKey key{p.rho(), p.gamma(), p.lambda(), spec.horizon, q.rel_tol, q.abs_tol, q.split_point, q.max_refinements,
               std::vector<double>(spec.time_grid.data(), spec.time_grid.data() + spec.time_grid.size())};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<Eigen::VectorXd>(static_cast<Eigen::Index>(plan.s.size()));
  for (std::size_t m = 0; m < plan.s.size(); ++m) {
    (*table)(static_cast<Eigen::Index>(m)) = require(eval_B(p, plan.s[m], q), "B");
  }
  std::lock_guard lock(mutex);
  if (cache.size() >= kMaxCachedTables) cache.clear();
  cache.emplace(std::move(key), table);
  return table;
}

Eigen::VectorXd tabulate_A(const KernelParams& p, const Eigen::VectorXd& grid, const QuadratureConfig& q) {
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    out(i) = grid(i) == 0.0 ? 1.0 : require(eval_A(p, grid(i), q), "A");
  }
  return out;
}

SolutionTrace empty_trace(const ProblemSpec& spec) {
  SolutionTrace trace;
  trace.nodes = spec.time_grid;
  trace.coefficients = Eigen::MatrixXd::Zero(spec.time_grid.size(), spec.op->modes());
  trace.op = spec.op;
  return trace;
}

void check_kind(const ProblemSpec& spec, ProblemKind expected) {
  if (spec.kind != expected) {
    throw std::invalid_argument("expected a " + to_string(expected) + " problem, got " + to_string(spec.kind));
  }
}

constexpr double kResidualTolerance = 1e-3;

void attach_diagnostics(SolutionTrace& trace, const ProblemSpec& spec) {
  try {
    trace.diagnostics = compute_diagnostics(trace, spec);
  } catch (const GridTooCoarse& e) {
    trace.warnings.emplace_back(std::string("diagnostics skipped: ") + e.what());
    return;
  }
  const double worst = max_residual(trace.nodes, trace.diagnostics->residual, spec.horizon / 32.0);
  trace.metrics["residual_max"] = worst;
  if (!(worst <= kResidualTolerance)) {
    trace.warnings.emplace_back("residual " + std::to_string(worst) + " exceeds " + std::to_string(kResidualTolerance) +
                                " on t >= T/32");
  }
  trace.metrics["data_tail"] = tail_estimate(spec.data);
}

Eigen::MatrixXd response_or_zero(const ProblemSpec& spec, const QuadratureConfig& q) {
  if (spec.source.is_zero()) return Eigen::MatrixXd::Zero(spec.time_grid.size(), spec.op->modes());
  return source_response(spec, q);
}

}  // namespace

void set_mode_threads(unsigned threads) { g_threads = threads; }

unsigned mode_threads() {
  const unsigned t = g_threads.load();
  if (t != 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

Estimate convolve_B(const KernelParams& p, const std::function<double(double)>& f, double t, const QuadratureConfig& q) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("convolution time must be finite and nonnegative");
  if (t == 0.0) return {0.0, 0.0, true, 0};
  auto integrand = [&](double s) { return require(eval_B(p, s, q), "B") * f(t - s); };
  std::vector<double> bp{0.0, t};
  for (int j = 1; j <= 20; ++j) {
    bp.push_back(std::ldexp(t, -j));
    bp.push_back(t - std::ldexp(t, -j));
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return quadrature::integrate_adaptive(integrand, bp, q);
}

Eigen::MatrixXd source_response(const ProblemSpec& spec, const QuadratureConfig& q) {
  spec.validate();
  const auto& grid = spec.time_grid;
  const Eigen::Index n = grid.size();
  const int modes = spec.op->modes();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, modes);
  const ConvolutionPlan plan = make_plan(grid, spec.horizon);
  for_each_mode(modes, [&](int k) {
    const KernelParams p = spec.params(k);
    const auto table = tabulate_B(p, spec, plan, q);
    Eigen::VectorXd bw(static_cast<Eigen::Index>(plan.s.size()));
    for (std::size_t m = 0; m < plan.s.size(); ++m) {
      bw(static_cast<Eigen::Index>(m)) = plan.w[m] * (*table)(static_cast<Eigen::Index>(m));
    }
    for (Eigen::Index i = 1; i < n; ++i) {
      const double t = grid(i);
      double acc = 0.0;
      for (std::size_t m = 0; m < plan.upto[static_cast<std::size_t>(i)]; ++m) {
        acc += bw(static_cast<Eigen::Index>(m)) * spec.source(k, t - plan.s[m]);
      }
      out(i, k - 1) = acc;
    }
  });
  return out;
}

SolutionTrace solve_forward(const ProblemSpec& spec, const QuadratureConfig& q) {
  check_kind(spec, ProblemKind::forward);
  spec.validate();
  SolutionTrace trace = empty_trace(spec);
  trace.coefficients = response_or_zero(spec, q);
  for_each_mode(spec.op->modes(), [&](int k) {
    const double phi = spec.data(k);
    if (phi == 0.0) return;
    trace.coefficients.col(k - 1) += phi * tabulate_A(spec.params(k), spec.time_grid, q);
  });
  attach_diagnostics(trace, spec);
  return trace;
}

SolutionTrace solve_auxiliary_W(const CoefficientField& psi, const ProblemSpec& spec, const QuadratureConfig& q) {
  spec.validate();
  if (psi.modes() != spec.op->modes()) throw std::invalid_argument("psi must have one coefficient per mode");
  SolutionTrace trace = empty_trace(spec);
  const double floor_B =
      require(lower_bound_B(spec.rho, spec.gamma, spec.op->eigenvalue(1), spec.horizon, q), "lower bound of B") *
      spec.horizon / 2.0;
  std::vector<char> ill_conditioned(static_cast<std::size_t>(spec.op->modes()), 0);
  for_each_mode(spec.op->modes(), [&](int k) {
    const double value = psi(k);
    if (value == 0.0) return;
    const Eigen::VectorXd a = tabulate_A(spec.params(k), spec.time_grid, q);
    const double denom = a(a.size() - 1) - 1.0;
    if (std::abs(denom) < floor_B) ill_conditioned[static_cast<std::size_t>(k - 1)] = 1;
    trace.coefficients.col(k - 1) = a * (value / denom);
  });
  for (int k = 1; k <= spec.op->modes(); ++k) {
    if (ill_conditioned[static_cast<std::size_t>(k - 1)]) {
      trace.warnings.emplace_back("mode " + std::to_string(k) + ": |A(T) - 1| is below half the lower bound of B times T");
    }
  }
  return trace;
}

SolutionTrace solve_nonlocal(const ProblemSpec& spec, const QuadratureConfig& q) {
  check_kind(spec, ProblemKind::nonlocal);
  spec.validate();
  const Eigen::MatrixXd v = response_or_zero(spec, q);
  const Eigen::Index last = v.rows() - 1;
  const CoefficientField psi(spec.op, spec.data.coefficients() - v.row(last).transpose());
  SolutionTrace trace = solve_auxiliary_W(psi, spec, q);
  trace.coefficients += v;
  const Eigen::VectorXd gap = trace.coefficients.row(last) - trace.coefficients.row(0) - spec.data.coefficients().transpose();
  trace.metrics["nonlocal_gap"] = gap.cwiseAbs().maxCoeff();
  trace.metrics["psi_tail"] = tail_estimate(psi);
  attach_diagnostics(trace, spec);
  return trace;
}

SolutionTrace solve_backward(const ProblemSpec& spec, const QuadratureConfig& q) {
  check_kind(spec, ProblemKind::backward);
  spec.validate();
  const Eigen::MatrixXd v = response_or_zero(spec, q);
  const Eigen::Index last = v.rows() - 1;
  const int modes = spec.op->modes();
  const double lower =
      require(lower_bound_A(spec.rho, spec.gamma, spec.op->eigenvalue(1), spec.horizon, q), "lower bound of A");
  SolutionTrace trace = empty_trace(spec);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(modes);
  for_each_mode(modes, [&](int k) {
    const KernelParams p = spec.params(k);
    const Estimate a_T = eval_A(p, spec.horizon, q);
    if (!a_T.converged || a_T.error > 0.5 * lower) {
      throw SolverError("mode " + std::to_string(k) + ": error bound of A(T) (" + std::to_string(a_T.error) +
                            ") exceeds half the lower bound of A (" + std::to_string(lower) + ")",
                        k);
    }
    if (a_T.value < lower) {
      throw SolverError("mode " + std::to_string(k) + ": A(T) = " + std::to_string(a_T.value) +
                            " falls below the lower bound " + std::to_string(lower),
                        k);
    }
    const double target = spec.data(k) - v(last, k - 1);
    phi(k - 1) = target / a_T.value;
    if (phi(k - 1) == 0.0) return;
    Eigen::VectorXd a = tabulate_A(p, spec.time_grid, q);
    // reuse the exact value used for the division so u(T) reproduces psi
    a(a.size() - 1) = a_T.value;
    trace.coefficients.col(k - 1) = a * phi(k - 1);
  });
  trace.coefficients += v;
  const Eigen::VectorXd reduced = spec.data.coefficients() - v.row(last).transpose();
  trace.metrics["terminal_gap"] = (trace.coefficients.row(last).transpose() - spec.data.coefficients()).cwiseAbs().maxCoeff();
  trace.metrics["lower_bound_A"] = lower;
  trace.metrics["recovered_norm"] = phi.norm();
  trace.metrics["stability_bound"] = reduced.norm() / lower;
  attach_diagnostics(trace, spec);
  return trace;
}

SolutionTrace solve(const ProblemSpec& spec, const QuadratureConfig& q) {
  switch (spec.kind) {
    case ProblemKind::forward: return solve_forward(spec, q);
    case ProblemKind::nonlocal: return solve_nonlocal(spec, q);
    case ProblemKind::backward: return solve_backward(spec, q);
  }
  throw std::invalid_argument("unknown problem kind");
}

}  // namespace frs
