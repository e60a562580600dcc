#include "inexact/model_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inexact/errors.hpp"

namespace inexact {

using detail::require;

ModelViolation verify_model(const InexactModel& model, const Objective& objective,
                            const std::vector<SamplePair>& samples) {
  require(static_cast<bool>(model.evaluate) && model.bregman, "verify_model: incomplete model");
  require(static_cast<bool>(objective), "verify_model: missing objective");
  const BregmanSetup& setup = *model.bregman;
  ModelViolation report;
  for (const auto& [x, y] : samples) {
    require(setup.contains(x) && setup.contains(y), "verify_model: sample outside the domain");
    const double gap = objective(x) - objective(y) - model.evaluate(x, y);
    const double v = setup.divergence(x, y);
    report.max_lower_gap = std::max(report.max_lower_gap, -gap);
    report.max_upper_gap =
        std::max(report.max_upper_gap, gap - model.lipschitz * v - model.delta);
    if (model.strong_convexity) {
      report.max_strong_gap = std::max(report.max_strong_gap, *model.strong_convexity * v - gap);
    }
    ++report.pairs;
  }
  return report;
}

std::vector<SamplePair> sample_pairs(const std::function<Vector(std::mt19937_64&)>& sampler,
                                     std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SamplePair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector x = sampler(rng);
    Vector y = sampler(rng);
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

double precision_from_residual(const PrecisionConversion& conv, double residual) {
  require(residual >= 0.0 && std::isfinite(residual), "residual must be finite and nonnegative");
  require(conv.smooth_lipschitz >= 0.0 && conv.diameter >= 0.0 && conv.grad_norm_at_opt >= 0.0,
          "precision conversion constants must be nonnegative");
  if (conv.grad_norm_at_opt == 0.0) {
    return conv.diameter * std::sqrt(2.0 * conv.smooth_lipschitz * residual);
  }
  require(conv.strong_convexity.has_value() && *conv.strong_convexity > 0.0,
          "nonzero gradient at the optimum requires a strong convexity constant");
  const double delta_factor = conv.smooth_lipschitz * conv.diameter + conv.grad_norm_at_opt;
  return delta_factor * std::sqrt(2.0 * residual / *conv.strong_convexity);
}

double log_sum_exp(const Vector& values) {
  if (values.size() == 0) return -std::numeric_limits<double>::infinity();
  const double top = values.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((values.array() - top).exp().sum());
}

Vector softmax(const Vector& logits) {
  require(logits.size() > 0, "softmax of an empty vector");
  const double top = logits.maxCoeff();
  require(std::isfinite(top), "softmax: non-finite logits");
  Vector e = (logits.array() - top).exp();
  return e / e.sum();
}

ProbabilityVector solve_entropic_linear_subproblem(const Vector& g, const ProbabilityVector& anchor,
                                                   double weight) {
  require(weight > 0.0, "entropic subproblem: weight must be positive");
  require(g.size() == anchor.size(), "entropic subproblem: dimension mismatch");
  require(anchor.min_entry() > 0.0, "entropic subproblem: anchor has a zero entry");
  const Vector logits = anchor.vector().array().log() - g.array() / weight;
  return ProbabilityVector(softmax(logits));
}

InexactModel make_linear_model(Gradient gradient, std::shared_ptr<const BregmanSetup> setup,
                               double lipschitz, std::optional<double> mu, double delta) {
  require(static_cast<bool>(gradient) && setup, "linear model needs a gradient and a setup");
  InexactModel m;
  m.evaluate = [gradient = std::move(gradient)](const Vector& x, const Vector& y) {
    return gradient(y).dot(x - y);
  };
  m.delta = delta;
  m.lipschitz = lipschitz;
  m.strong_convexity = mu;
  m.bregman = std::move(setup);
  return m;
}

SubproblemSolver make_euclidean_gradient_solver(Gradient gradient,
                                                std::shared_ptr<const EuclideanSetup> setup) {
  require(static_cast<bool>(gradient) && setup, "euclidean solver needs a gradient and a setup");
  SubproblemSolver s;
  s.solve = [gradient = std::move(gradient), setup = std::move(setup)](
                const Vector& anchor, double weight, double) {
    require(weight > 0.0, "subproblem weight must be positive");
    Vector x = anchor - gradient(anchor) / weight;
    const double r = setup->radius();
    if (r > 0.0) {
      const double norm = x.norm();
      if (norm > r) x *= r / norm;
    }
    return SubproblemSolution{std::move(x), 0.0};
  };
  return s;
}

double EntropicLinearProblem::value(const Vector& x) const {
  double s = cost.dot(x);
  if (tau > 0.0) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] > 0.0) s += tau * x[i] * std::log(x[i]);
    }
  }
  return s;
}

double EntropicLinearProblem::optimal_value() const {
  if (tau == 0.0) return cost.minCoeff();
  return -tau * log_sum_exp(-cost / tau);
}

Vector EntropicLinearProblem::minimizer() const {
  if (tau > 0.0) return softmax(-cost / tau);
  Eigen::Index best = 0;
  cost.minCoeff(&best);
  Vector e = Vector::Zero(cost.size());
  e[best] = 1.0;
  return e;
}

InexactModel EntropicLinearProblem::model(double lipschitz) const {
  InexactModel m;
  m.evaluate = [self = *this](const Vector& x, const Vector& y) {
    return self.value(x) - self.value(y);
  };
  m.lipschitz = lipschitz;
  m.bregman = std::make_shared<EntropySetup>(cost.size());
  return m;
}

SubproblemSolver EntropicLinearProblem::solver() const {
  require(tau >= 0.0, "entropy weight must be nonnegative");
  SubproblemSolver s;
  // argmin <c, x> + tau sum x ln x + w KL(x | y):  x ~ exp((w ln y - c) / (w + tau)).
  s.solve = [c = cost, tau = tau](const Vector& anchor, double weight, double) {
    require(weight > 0.0, "subproblem weight must be positive");
    require(anchor.minCoeff() > 0.0, "entropic subproblem: anchor has a zero entry");
    const Vector logits = (weight * anchor.array().log() - c.array()) / (weight + tau);
    // Underflowed coordinates would make the next anchor leave the KL domain.
    Vector x = softmax(logits).cwiseMax(kDenominatorFloor);
    return SubproblemSolution{x / x.sum(), 0.0};
  };
  return s;
}

}  // namespace inexact
