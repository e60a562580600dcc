#pragma once

#include <optional>
#include <string>

#include "inexact/gradient_methods.hpp"

namespace inexact {

/// Smooth coupling term g(z, p) on flat points [z; p] with an L_g-Lipschitz
/// gradient in the norm ||(z, p)||^2 = ||z||_1^2 + ||p||_2^2.
struct SmoothTerm {
  std::string name;
  std::function<double(const Vector&)> value;
  Gradient gradient;
  double lipschitz = 0.0;
};

/// g = 0, declared with a caller-chosen constant (any L_g >= 0 is valid).
SmoothTerm make_zero_term(double lipschitz);

/// g(x) = x^T A x / 2 + b^T x on x = [z; p]. A may be indefinite; L_g is the
/// spectral radius of A, which dominates |d^T A d| / ||d||^2 because ||z||_1 >= ||z||_2.
SmoothTerm make_quadratic_term(Matrix A, Vector b);

/// g(z, p) = ||p - O^T z||^2 / 2 for an opinion matrix O (rows = voters): the
/// party sits near the z-weighted mean opinion. L_g = ||[-O^T, I]||_2^2.
SmoothTerm make_opinion_term(const Matrix& opinions);

/// f(z, p) = g(z, p) + mu1 sum z ln z + mu2 ||p||^2 / 2 over S_n(1) x R_+^m.
struct ClusteringProblem {
  Eigen::Index n = 0;  // simplex block (voters)
  Eigen::Index m = 0;  // orthant block (opinion dimensions)
  SmoothTerm g;
  double mu1 = 1.0;
  double mu2 = 1.0;
  /// Optional upper bound on every p coordinate; gives the domain a finite diameter.
  std::optional<double> p_box;

  void validate() const;
  std::shared_ptr<const ProductSetup> setup() const;
};

double potential(const ClusteringProblem& prob, const ProductPoint& x);
double potential_flat(const ClusteringProblem& prob, const Vector& x);

/// The (0, 2 L_g)-model
///   <grad g(y), x - y> - L_g KL(z_x|z_y) - L_g ||p_x - p_y||^2 / 2
///   + mu1 (KL(z_x|1) - KL(z_y|1)) + mu2 (||p_x||^2 - ||p_y||^2) / 2.
double clustering_model(const ClusteringProblem& prob, const ProductPoint& x, const ProductPoint& y);

/// The (0, max(mu1, mu2) + L_g, min(mu1, mu2) - L_g)-model
///   <grad g(y), x - y> + mu1 <ln z_y + 1, z_x - z_y> + mu2 <p_y, p_x - p_y>.
double clustering_linear_model(const ClusteringProblem& prob, const ProductPoint& x,
                               const ProductPoint& y);

InexactModel make_clustering_model(const ClusteringProblem& prob);
InexactModel make_clustering_linear_model(const ClusteringProblem& prob);

SubproblemSolver make_clustering_solver(const ClusteringProblem& prob);
SubproblemSolver make_clustering_linear_solver(const ClusteringProblem& prob);

/// argmin over p >= 0 (and p <= box) of <a, p> + (c / 2) ||p - p_y||^2.
Vector clamped_quadratic_step(const Vector& p_y, const Vector& a, double c,
                              std::optional<double> box = std::nullopt);

enum class ClusteringMethod { kFixed, kAdaptive, kAdaptiveStronglyConvex };

/// Runs the chosen method with the matching model. The fixed method steps with
/// config.L0 (2 L_g is the certified choice); the strongly convex method uses the
/// linear model and fills config.mu with min(mu1, mu2) - L_g when unset.
GMResult solve_clustering(const ClusteringProblem& prob, const ProductPoint& x0, GMConfig config,
                          ClusteringMethod method);

/// Simplex entries are kept at or above this inside iterations.
inline constexpr double kSimplexEntryFloor = 1e-12;

}  // namespace inexact
