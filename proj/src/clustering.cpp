#include "inexact/clustering.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "inexact/errors.hpp"

namespace inexact {

using detail::require;

namespace {

double neg_entropy(const Vector& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] > 0.0) s += z[i] * std::log(z[i]);
  }
  return s;
}

Vector floored_simplex(const Vector& z) {
  Vector out = z.cwiseMax(kSimplexEntryFloor);
  return out / out.sum();
}

struct Blocks {
  Eigen::Index n;
  Eigen::Index m;
  auto z(const Vector& x) const { return x.head(n); }
  auto p(const Vector& x) const { return x.tail(m); }
};

double model_flat(const ClusteringProblem& prob, const Vector& x, const Vector& y) {
  const Blocks b{prob.n, prob.m};
  const double Lg = prob.g.lipschitz;
  const Vector zx = b.z(x), zy = b.z(y), px = b.p(x), py = b.p(y);
  return prob.g.gradient(y).dot(x - y) - Lg * kl_divergence(zx, zy) -
         0.5 * Lg * (px - py).squaredNorm() + prob.mu1 * (neg_entropy(zx) - neg_entropy(zy)) +
         0.5 * prob.mu2 * (px.squaredNorm() - py.squaredNorm());
}

double linear_model_flat(const ClusteringProblem& prob, const Vector& x, const Vector& y) {
  const Blocks b{prob.n, prob.m};
  const Vector zx = b.z(x), zy = b.z(y), px = b.p(x), py = b.p(y);
  require(zy.minCoeff() >= kDenominatorFloor, "linear model needs a positive anchor simplex block");
  const Vector kl_grad = zy.array().log() + 1.0;
  return prob.g.gradient(y).dot(x - y) + prob.mu1 * kl_grad.dot(zx - zy) +
         prob.mu2 * py.dot(px - py);
}

}  // namespace

SmoothTerm make_zero_term(double lipschitz) {
  require(lipschitz >= 0.0, "L_g must be nonnegative");
  SmoothTerm t;
  t.name = "zero";
  t.value = [](const Vector&) { return 0.0; };
  t.gradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
  t.lipschitz = lipschitz;
  return t;
}

SmoothTerm make_quadratic_term(Matrix A, Vector b) {
  require(A.rows() == A.cols() && A.rows() == b.size(), "quadratic term: dimension mismatch");
  require(A.isApprox(A.transpose(), 1e-12), "quadratic term: A must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  SmoothTerm t;
  t.name = "quadratic";
  t.lipschitz = eig.eigenvalues().cwiseAbs().maxCoeff();
  t.value = [A, b](const Vector& x) { return 0.5 * x.dot(A * x) + b.dot(x); };
  t.gradient = [A, b](const Vector& x) { return (A * x + b).eval(); };
  return t;
}

SmoothTerm make_opinion_term(const Matrix& opinions) {
  const Eigen::Index n = opinions.rows();
  const Eigen::Index m = opinions.cols();
  require(n > 0 && m > 0, "opinion matrix must be nonempty");
  Matrix M(m, n + m);
  M << -opinions.transpose(), Matrix::Identity(m, m);
  SmoothTerm t = make_quadratic_term(M.transpose() * M, Vector::Zero(n + m));
  t.name = "opinion";
  return t;
}

void ClusteringProblem::validate() const {
  require(n > 0 && m >= 0, "clustering problem: bad block sizes");
  require(static_cast<bool>(g.value) && static_cast<bool>(g.gradient), "clustering: missing g");
  require(mu1 > 0.0 && mu2 > 0.0, "mu1 and mu2 must be positive");
  require(g.lipschitz <= mu1 && g.lipschitz <= mu2, "clustering: need L_g <= mu1 and L_g <= mu2");
  require(!p_box || *p_box > 0.0, "p box must be positive");
}

std::shared_ptr<const ProductSetup> ClusteringProblem::setup() const {
  return std::make_shared<ProductSetup>(n, m);
}

double potential_flat(const ClusteringProblem& prob, const Vector& x) {
  const Blocks b{prob.n, prob.m};
  return prob.g.value(x) + prob.mu1 * neg_entropy(b.z(x)) + 0.5 * prob.mu2 * b.p(x).squaredNorm();
}

double potential(const ClusteringProblem& prob, const ProductPoint& x) {
  return potential_flat(prob, x.flat());
}

double clustering_model(const ClusteringProblem& prob, const ProductPoint& x,
                        const ProductPoint& y) {
  return model_flat(prob, x.flat(), y.flat());
}

double clustering_linear_model(const ClusteringProblem& prob, const ProductPoint& x,
                               const ProductPoint& y) {
  require(std::min(prob.mu1, prob.mu2) > prob.g.lipschitz,
          "linear model needs min(mu1, mu2) > L_g");
  return linear_model_flat(prob, x.flat(), y.flat());
}

InexactModel make_clustering_model(const ClusteringProblem& prob) {
  prob.validate();
  InexactModel model;
  model.evaluate = [prob](const Vector& x, const Vector& y) { return model_flat(prob, x, y); };
  model.lipschitz = 2.0 * prob.g.lipschitz;
  model.bregman = prob.setup();
  return model;
}

InexactModel make_clustering_linear_model(const ClusteringProblem& prob) {
  prob.validate();
  require(std::min(prob.mu1, prob.mu2) > prob.g.lipschitz,
          "linear model needs min(mu1, mu2) > L_g");
  InexactModel model;
  model.evaluate = [prob](const Vector& x, const Vector& y) {
    return linear_model_flat(prob, x, y);
  };
  model.lipschitz = std::max(prob.mu1, prob.mu2) + prob.g.lipschitz;
  model.strong_convexity = std::min(prob.mu1, prob.mu2) - prob.g.lipschitz;
  model.bregman = prob.setup();
  return model;
}

Vector clamped_quadratic_step(const Vector& p_y, const Vector& a, double c,
                              std::optional<double> box) {
  require(c > 0.0, "quadratic step needs a positive curvature");
  require(p_y.size() == a.size(), "quadratic step: dimension mismatch");
  Vector p = (p_y - a / c).cwiseMax(0.0);
  if (box) p = p.cwiseMin(*box);
  return p;
}

SubproblemSolver make_clustering_solver(const ClusteringProblem& prob) {
  prob.validate();
  SubproblemSolver s;
  // phi(x) = psi(x, y) + beta V[y](x). Expanding the model, the z block is
  //   (beta - Lg + mu1) sum z ln z + <a - (beta - Lg) ln z_y, z>
  // and the p block is the separable quadratic
  //   <a_p, p> + (beta - Lg) ||p - p_y||^2 / 2 + mu2 ||p||^2 / 2.
  s.solve = [prob](const Vector& y, double beta, double) {
    require(beta > 0.0, "subproblem weight must be positive");
    const Blocks b{prob.n, prob.m};
    const double Lg = prob.g.lipschitz;
    const Vector grad = prob.g.gradient(y);
    const double kz = beta - Lg + prob.mu1;
    const double kp = beta - Lg + prob.mu2;
    require(kz > 0.0 && kp > 0.0, "clustering subproblem is not strongly convex");

    Vector x(prob.n + prob.m);
    const Vector zy = b.z(y);
    const Vector logits = ((beta - Lg) * zy.array().log() - grad.head(prob.n).array()) / kz;
    x.head(prob.n) = floored_simplex(softmax(logits));
    // Completing the square: minimizer of the p block before clamping is
    // ((beta - Lg) p_y - a_p) / kp.
    const Vector center = ((beta - Lg) * b.p(y) - grad.tail(prob.m)) / kp;
    x.tail(prob.m) = clamped_quadratic_step(center, Vector::Zero(prob.m), kp, prob.p_box);
    return SubproblemSolution{std::move(x), 0.0};
  };
  return s;
}

SubproblemSolver make_clustering_linear_solver(const ClusteringProblem& prob) {
  prob.validate();
  SubproblemSolver s;
  s.solve = [prob](const Vector& y, double beta, double) {
    require(beta > 0.0, "subproblem weight must be positive");
    const Blocks b{prob.n, prob.m};
    const Vector grad = prob.g.gradient(y);
    const Vector zy = b.z(y);
    Vector x(prob.n + prob.m);
    const Vector a_z = grad.head(prob.n) + prob.mu1 * zy.array().log().matrix();
    x.head(prob.n) = floored_simplex(solve_entropic_linear_subproblem(
                                         a_z, ProbabilityVector(zy), beta)
                                         .vector());
    const Vector a_p = grad.tail(prob.m) + prob.mu2 * b.p(y);
    x.tail(prob.m) = clamped_quadratic_step(b.p(y), a_p, beta, prob.p_box);
    return SubproblemSolution{std::move(x), 0.0};
  };
  return s;
}

GMResult solve_clustering(const ClusteringProblem& prob, const ProductPoint& x0, GMConfig config,
                          ClusteringMethod method) {
  prob.validate();
  require(x0.z.size() == prob.n && x0.p.size() == prob.m, "starting point has the wrong shape");
  Vector start = x0.flat();
  start.head(prob.n) = floored_simplex(start.head(prob.n));

  GMProblem gm;
  gm.objective = [prob](const Vector& x) { return potential_flat(prob, x); };
  switch (method) {
    case ClusteringMethod::kFixed:
      gm.model = make_clustering_model(prob);
      gm.solver = make_clustering_solver(prob);
      return gm_fixed(gm, start, config);
    case ClusteringMethod::kAdaptive:
      gm.model = make_clustering_model(prob);
      gm.solver = make_clustering_solver(prob);
      return gm_adaptive(gm, start, config);
    case ClusteringMethod::kAdaptiveStronglyConvex:
      gm.model = make_clustering_linear_model(prob);
      gm.solver = make_clustering_linear_solver(prob);
      if (!config.mu) config.mu = gm.model.strong_convexity;
      return gm_adaptive_strongly_convex(gm, start, config);
  }
  detail::fail("unknown clustering method");
}

}  // namespace inexact
