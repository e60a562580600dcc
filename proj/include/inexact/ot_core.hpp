#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "inexact/bregman.hpp"
#include "inexact/run_trace.hpp"

namespace inexact {

/// Cost matrix C with marginals p, q of a common dimension n.
class OTInstance {
 public:
  OTInstance(Matrix cost, ProbabilityVector p, ProbabilityVector q);

  const Matrix& cost() const noexcept { return cost_; }
  const ProbabilityVector& p() const noexcept { return p_; }
  const ProbabilityVector& q() const noexcept { return q_; }
  Eigen::Index n() const noexcept { return cost_.rows(); }

 private:
  Matrix cost_;
  ProbabilityVector p_;
  ProbabilityVector q_;
};

struct TransportPlan {
  Matrix matrix;
  double row_residual = 0.0;  // ||pi 1 - p||_1
  double col_residual = 0.0;  // ||pi^T 1 - q||_1

  static TransportPlan with_residuals(Matrix m, const Vector& p, const Vector& q);
  double total_residual() const noexcept { return row_residual + col_residual; }
};

/// Log-domain scalings: B(u, v) = diag(e^u) K diag(e^v).
struct DualPotentials {
  Vector u;
  Vector v;
};

/// <C, pi> + gamma sum pi ln pi with 0 ln 0 = 0.
double reg_objective(const Matrix& plan, const Matrix& cost, double gamma);

/// B(u, v) for K = exp(-C / gamma), each entry formed as exp(u_i - C_ij / gamma + v_j).
Matrix scaled_kernel(const DualPotentials& duals, const Matrix& cost, double gamma);

/// sum B(u, v) - <u, p> - <q, v>, with the first sum taken by log-sum-exp.
double dual_objective(const DualPotentials& duals, const OTInstance& instance, double gamma);

/// Projects a nonnegative matrix onto U(p, q): rows scaled down to p, columns down
/// to q, then a rank-one correction restores the missing mass. The result satisfies
/// ||out - F||_1 <= ||F 1 - p||_1 + ||F^T 1 - q||_1.
TransportPlan round_to_polytope(const Matrix& F, const ProbabilityVector& p,
                                const ProbabilityVector& q);

struct SinkhornOptions {
  double gamma = 1.0;
  double accuracy = 1e-6;  // target regularized-objective residual
  std::size_t max_iterations = 1'000'000;
  /// Use exp(-C / gamma) directly when ||C||_inf / gamma is below this.
  double plain_domain_limit = 30.0;
  /// Called after every half-step with t and the current potentials.
  std::function<void(std::size_t, const DualPotentials&)> observer;
  /// Log every n-th half step to the trace (the final one is always logged).
  std::size_t trace_stride = 1;
};

struct SinkhornResult {
  TransportPlan plan;        // rounded into U(p, q)
  Matrix unrounded;          // B(u^t, v^t) at the stop
  DualPotentials duals;
  std::size_t iterations = 0;
  double threshold = 0.0;    // epsilon' used by the stopping test
  double final_residual = 0.0;
  bool plain_domain = false;
  RunTrace trace;
};

/// epsilon' = (acc / 4) / (max C - min C + 2 gamma ln(4 gamma n^2 / acc)), clamped to (0, 2].
double sinkhorn_stop_threshold(const Matrix& cost, double gamma, double accuracy);

/// Alternating exact row/column balancing starting from u = ln p, v = ln q;
/// stops when ||B 1 - p||_1 + ||B^T 1 - q||_1 <= epsilon' and rounds the result.
SinkhornResult sinkhorn(const OTInstance& instance, const SinkhornOptions& options);

/// Oscillation max - min of v^t - v* for even t, of u^t - u* for odd t.
double hilbert_residual(const DualPotentials& current, const DualPotentials& reference,
                        std::size_t t);

/// <A, B> Frobenius.
inline double frobenius(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

namespace detail {

/// ln(K e^v) row-wise and ln(K^T e^u) column-wise for K = exp(-C / gamma), in the
/// log domain or, for mild exponents, with a precomputed kernel.
class KernelOps {
 public:
  KernelOps(const Matrix& cost, double gamma, double plain_domain_limit);

  Vector row_log_sums(const Vector& v) const;
  Vector col_log_sums(const Vector& u) const;
  bool plain() const noexcept { return plain_; }
  void force_log_domain() { plain_ = false; }

 private:
  Matrix log_kernel_;    // -C / gamma
  Matrix log_kernel_t_;  // its transpose, for contiguous row sums
  Matrix kernel_;      // exp(-C / gamma) when plain_
  bool plain_ = false;
  double ratio_ = 0.0;  // max |C| / gamma

  // Plain products lose relative accuracy once they leave the normal range.
  bool plain_safe(const Vector& x) const;
};

}  // namespace detail

}  // namespace inexact
