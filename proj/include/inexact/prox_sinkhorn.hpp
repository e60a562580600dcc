#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "inexact/ot_core.hpp"

namespace inexact {

/// Outer proximal loop settings shared by Proximal Sinkhorn and Proximal IBP.
struct ProxConfig {
  double L = 1.0;        // proximal weight
  double epsilon = 0.1;  // target accuracy on the linear cost
  std::optional<double> inner_accuracy;   // auto when unset
  std::optional<std::size_t> outer_iters; // auto when unset
  double inner_constant = 1.0;            // c in the auto inner accuracy
  bool adaptive_L = false;
  double blowup = 10.0;
  std::optional<double> min_L;            // floor for the adaptive schedule
  /// Clamp plan entries to epsilon / (2 n^2 ||C||_inf) between outer steps.
  bool floor_plans = false;
  std::size_t max_inner_iterations = 1'000'000;
  double plain_domain_limit = 30.0;

  void validate() const;
};

/// ceil(4 L ln n / eps).
std::size_t auto_outer_iterations(double L, double epsilon, Eigen::Index n);

/// c eps^4 / (L n^4).
double auto_inner_accuracy(double L, double epsilon, Eigen::Index n, double c = 1.0);

/// ||C||_inf + L ln(max pi / min pi).
double cbar(const Matrix& plan, const Matrix& cost, double L);

/// sum pi ln(pi / rho) - sum pi + sum rho, with rho floored at DBL_MIN.
double matrix_kl(const Matrix& pi, const Matrix& rho);

/// delta-tilde certified for one outer step solved to objective residual `residual`.
double certified_outer_precision(double L, double epsilon, Eigen::Index n, double residual);

struct ProxResult {
  TransportPlan plan;        // ergodic average of pi^1..pi^N
  double value = 0.0;        // <C, plan>
  TransportPlan last_plan;   // pi^N
  double L = 0.0;
  double inner_accuracy = 0.0;
  double certified_precision = 0.0;
  std::size_t outer_iterations = 0;
  std::vector<std::size_t> inner_iterations;
  std::size_t total_inner_iterations = 0;
  RunTrace trace;
};

ProxResult prox_sinkhorn(const OTInstance& instance, const ProxConfig& config);

struct LSchedule {
  double L = 0.0;                      // last L before the blowup
  std::vector<double> tried;           // every L solved, halving each time
  std::vector<std::size_t> inner_counts;
  bool hit_floor = false;
  RunTrace trace;
};

/// Starts at config.L and halves until the first-step inner count reaches
/// blowup times the initial count or L would drop below the floor.
LSchedule adaptive_L_schedule(const OTInstance& instance, const ProxConfig& config);

}  // namespace inexact
