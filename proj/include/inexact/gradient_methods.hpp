#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "inexact/model_oracle.hpp"
#include "inexact/run_trace.hpp"

namespace inexact {

struct GMConfig {
  /// Starting constant of the adaptive methods; the constant L of the fixed method.
  double L0 = 1.0;
  double delta = 0.0;
  double delta_tilde = 0.0;
  std::optional<double> mu;
  std::size_t max_iters = 100;
  std::size_t max_inner_attempts = 64;
  /// When set, the trace logs V[x_k](reference) every iteration.
  std::optional<Vector> reference;
};

/// Objective, its model, and the subproblem solver. The objective may be empty
/// for the fixed method; the adaptive methods need it for the exit test.
struct GMProblem {
  Objective objective;
  InexactModel model;
  SubproblemSolver solver;
};

struct GMResult {
  Vector last_iterate;
  Vector averaged_iterate;
  Vector best_iterate;
  double best_value = 0.0;
  std::vector<Vector> iterates;        // x_0 .. x_N
  std::vector<double> lipschitz;       // L_1 .. L_N
  std::vector<double> weights;         // 1 / L_{k+1}
  std::vector<std::size_t> attempts;   // i_k + 1 per outer iteration
  std::size_t total_attempts = 0;
  double S_N = 0.0;
  std::optional<double> Lhat;
  RunTrace trace;
};

/// Constant-L method: x_{k+1} = argmin psi(x, x_k) + L V[x_k](x), L = config.L0.
GMResult gm_fixed(const GMProblem& problem, const Vector& x0, const GMConfig& config);

/// Backtracking method: L_{k+1} = 2^{i_k - 1} L_k with the smallest i_k >= 0 that
/// passes f(x_{k+1}) <= f(x_k) + psi(x_{k+1}, x_k) + L_{k+1} V[x_k](x_{k+1}) + delta.
GMResult gm_adaptive(const GMProblem& problem, const Vector& x0, const GMConfig& config);

/// Backtracking for (delta, L, mu)-models. Halving is skipped while L_k < 2 mu and
/// L_{k+1} never drops below mu.
GMResult gm_adaptive_strongly_convex(const GMProblem& problem, const Vector& x0,
                                     const GMConfig& config);

/// 1 - mu / Lhat = (prod_i (1 - mu / L_i))^(1 / count).
double geometric_mean_constant(std::span<const double> lipschitz, double mu);

struct BoundPair {
  double distance = 0.0;
  double function = 0.0;
};

/// L R^2 / N + delta_tilde + delta.
double fixed_convex_bound(double L, double R2, std::size_t N, double delta, double delta_tilde);

/// R^2 / S_N + delta_tilde + delta.
double adaptive_convex_bound(double R2, double S_N, double delta, double delta_tilde);

/// 2N + log2(L / L0).
double attempt_budget(std::size_t N, double L, double L0);

/// Bounds on V[x^{k+1}](x*) and f(x^{k+1}) - f* for the strongly convex adaptive
/// method after k iterations.
BoundPair adaptive_strongly_convex_bounds(std::size_t k, double mu, double L, double Lhat,
                                          double delta, double delta_tilde, double V0);

/// Bounds for the fixed method on a (delta, L, mu)-model after k iterations; the
/// function bound applies to the best iterate.
BoundPair fixed_strongly_convex_bounds(std::size_t k, double mu, double L, double delta,
                                       double delta_tilde, double V0);

/// Same, with k read off a finished fixed-method trace (k = records - 1).
BoundPair fixed_strongly_convex_bounds(const RunTrace& trace, double mu, double L, double delta,
                                       double delta_tilde, double V0);

/// Adaptive halving never goes below this multiple of L0.
inline constexpr double kHalvingFloor = 1e-12;

}  // namespace inexact
