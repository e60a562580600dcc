#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "inexact/bregman.hpp"

namespace inexact {

using Objective = std::function<double(const Vector&)>;

/// psi_delta(x, y) with its declared certificate: for every x, y in the domain
///   mu V[y](x) <= f(x) - f(y) - psi(x, y) <= L V[y](x) + delta
/// where the lower bound is 0 when no strong convexity is declared.
struct InexactModel {
  std::function<double(const Vector& x, const Vector& y)> evaluate;
  double delta = 0.0;
  double lipschitz = 1.0;
  std::optional<double> strong_convexity;
  std::shared_ptr<const BregmanSetup> bregman;
};

enum class CertificateKind { kExact, kIterative };

struct SubproblemSolution {
  Vector point;
  /// Certified precision of `point` for argmin psi(x, anchor) + weight V[anchor](x).
  double precision = 0.0;
};

/// Minimizes psi(x, anchor) + weight * V[anchor](x) over the domain.
struct SubproblemSolver {
  std::function<SubproblemSolution(const Vector& anchor, double weight, double target_precision)>
      solve;
  CertificateKind kind = CertificateKind::kExact;
};

using SamplePair = std::pair<Vector, Vector>;

/// Worst sampled violations of the model sandwich. All fields are >= 0 and a
/// zero report means the certificate is consistent on the sample.
struct ModelViolation {
  double max_lower_gap = 0.0;   // max of -(f(x) - f(y) - psi)
  double max_upper_gap = 0.0;   // max of (f(x) - f(y) - psi) - L V - delta
  double max_strong_gap = 0.0;  // max of mu V - (f(x) - f(y) - psi), when mu is declared
  std::size_t pairs = 0;

  bool consistent(double slack) const {
    return max_lower_gap <= slack && max_upper_gap <= slack && max_strong_gap <= slack;
  }
};

ModelViolation verify_model(const InexactModel& model, const Objective& objective,
                            const std::vector<SamplePair>& samples);

/// Draws `count` pairs from `sampler` using a fixed-seed engine.
std::vector<SamplePair> sample_pairs(const std::function<Vector(std::mt19937_64&)>& sampler,
                                     std::size_t count, std::uint64_t seed);

/// Constants of the objective-residual to delta-tilde conversion.
struct PrecisionConversion {
  double smooth_lipschitz = 0.0;  // gradient Lipschitz constant of the subproblem objective
  double diameter = 0.0;          // max distance between two feasible points
  double grad_norm_at_opt = 0.0;  // dual norm of the gradient at the exact minimizer
  std::optional<double> strong_convexity;
};

/// delta-tilde certified by an objective residual `residual`:
///   R sqrt(2 L residual)                       when the gradient vanishes at the optimum,
///   (L R + ||grad phi(x*)||) sqrt(2 residual / mu)  otherwise.
double precision_from_residual(const PrecisionConversion& conv, double residual);

/// Numerically stable ln(sum exp(values)); returns -inf for an all -inf input.
double log_sum_exp(const Vector& values);

/// exp(logits) / sum exp(logits), evaluated with max subtraction.
Vector softmax(const Vector& logits);

/// Exact minimizer of <g, x> + weight * KL(x | anchor) over the simplex:
/// x_i proportional to anchor_i exp(-g_i / weight).
ProbabilityVector solve_entropic_linear_subproblem(const Vector& g, const ProbabilityVector& anchor,
                                                   double weight);

using Gradient = std::function<Vector(const Vector&)>;

/// psi(x, y) = <grad f(y), x - y>: the model carried by a first-order oracle.
InexactModel make_linear_model(Gradient gradient, std::shared_ptr<const BregmanSetup> setup,
                               double lipschitz, std::optional<double> mu = std::nullopt,
                               double delta = 0.0);

/// Exact minimizer of <g, x> + weight ||x - y||^2 / 2 over the setup's ball (or R^n).
SubproblemSolver make_euclidean_gradient_solver(Gradient gradient,
                                                std::shared_ptr<const EuclideanSetup> setup);

/// Entropy-regularized linear objective on the simplex,
///   f(x) = <c, x> + tau sum x ln x,   tau >= 0,
/// with its exact model psi(x, y) = f(x) - f(y) under the KL setup and a
/// closed-form subproblem solver. Minimizer softmax(-c / tau) (a vertex when tau = 0).
struct EntropicLinearProblem {
  Vector cost;
  double tau = 0.0;

  double value(const Vector& x) const;
  double optimal_value() const;
  Vector minimizer() const;
  InexactModel model(double lipschitz) const;
  SubproblemSolver solver() const;
};

}  // namespace inexact
