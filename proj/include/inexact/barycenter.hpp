#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "inexact/ot_core.hpp"
#include "inexact/prox_sinkhorn.hpp"

namespace inexact {

/// Measures p_l with costs C_l and weights w. Measures with zero weight are
/// dropped on construction; `kept()` maps back to the input order.
class BarycenterInstance {
 public:
  BarycenterInstance(std::vector<ProbabilityVector> measures, std::vector<Matrix> costs,
                     const Vector& weights);

  const std::vector<ProbabilityVector>& measures() const noexcept { return measures_; }
  const std::vector<Matrix>& costs() const noexcept { return costs_; }
  const Vector& weights() const noexcept { return weights_; }
  const std::vector<std::size_t>& kept() const noexcept { return kept_; }
  std::size_t m() const noexcept { return measures_.size(); }
  Eigen::Index n() const noexcept { return measures_.front().size(); }
  double max_cost_norm() const;

 private:
  std::vector<ProbabilityVector> measures_;
  std::vector<Matrix> costs_;
  Vector weights_;
  std::vector<std::size_t> kept_;
};

struct PlanStack {
  std::vector<TransportPlan> plans;
  Vector common_marginal;

  /// Largest row or column residual over the stack against (p_l, common_marginal).
  double max_residual() const;
};

/// sum_l w_l <C_l, pi_l>.
double barycenter_objective(const PlanStack& stack, const BarycenterInstance& instance);

struct IBPOptions {
  double gamma = 1.0;
  double accuracy = 1e-6;
  std::size_t max_iterations = 1'000'000;
  double plain_domain_limit = 30.0;
  std::size_t trace_stride = 1;
  /// Called after every u-update with t and the current row marginals' max error.
  std::function<void(std::size_t, double)> observer;
};

struct IBPResult {
  Vector q;
  PlanStack stack;
  std::vector<Matrix> unrounded;
  std::size_t iterations = 0;
  double threshold = 0.0;
  double final_criterion = 0.0;
  RunTrace trace;
};

/// Alternating v/u projections from u = v = 0; stops when the weighted spread of
/// column marginals falls below accuracy / (4 max ||C_l||_inf).
IBPResult ibp(const BarycenterInstance& instance, const IBPOptions& options);

/// ceil(4 L m ln n / eps).
std::size_t auto_outer_iterations_ibp(double L, double epsilon, std::size_t m, Eigen::Index n);

/// c eps^2 / (m n^3).
double auto_inner_accuracy_ibp(double epsilon, std::size_t m, Eigen::Index n, double c = 1.0);

struct ProxIBPResult {
  Vector q;
  PlanStack stack;  // ergodic average of the outer iterates
  double objective = 0.0;
  double L = 0.0;
  double inner_accuracy = 0.0;
  std::size_t outer_iterations = 0;
  std::vector<std::size_t> inner_iterations;
  std::size_t total_inner_iterations = 0;
  RunTrace trace;
};

/// Proximal IBP from pi_l = p_l 1^T / n. Uses config.L, config.epsilon and the
/// optional inner accuracy / outer count; adaptive_L is ignored.
ProxIBPResult prox_ibp(const BarycenterInstance& instance, const ProxConfig& config);

}  // namespace inexact
