#include "inexact/barycenter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "inexact/errors.hpp"

namespace inexact {

using detail::require;

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

struct RawProblem {
  const std::vector<ProbabilityVector>* measures;
  std::vector<Matrix> costs;
  const Vector* weights;
};

class SafeKernel {
 public:
  SafeKernel(const Matrix& cost, double gamma, double limit) : ops_(cost, gamma, limit) {}
  bool plain() const { return ops_.plain(); }
  Vector rows(const Vector& v) {
    Vector r = ops_.row_log_sums(v);
    if (ops_.plain() && !r.allFinite()) {
      ops_.force_log_domain();
      r = ops_.row_log_sums(v);
    }
    return r;
  }
  Vector cols(const Vector& u) {
    Vector c = ops_.col_log_sums(u);
    if (ops_.plain() && !c.allFinite()) {
      ops_.force_log_domain();
      c = ops_.col_log_sums(u);
    }
    return c;
  }

 private:
  detail::KernelOps ops_;
};

IBPResult run_ibp(const RawProblem& prob, const IBPOptions& options) {
  require(options.gamma > 0.0, "ibp: gamma must be positive");
  require(options.accuracy > 0.0, "ibp: accuracy must be positive");
  require(options.max_iterations > 0, "ibp: iteration cap must be positive");
  const auto start = std::chrono::steady_clock::now();
  const auto& measures = *prob.measures;
  const Vector& w = *prob.weights;
  const std::size_t m = measures.size();
  const Eigen::Index n = measures.front().size();

  double max_norm = 0.0;
  for (const Matrix& c : prob.costs) max_norm = std::max(max_norm, c.cwiseAbs().maxCoeff());
  IBPResult out;
  out.threshold = max_norm > 0.0 ? options.accuracy / (4.0 * max_norm)
                                 : std::numeric_limits<double>::infinity();
  out.trace = RunTrace("ibp");
  out.trace.set_config({{"gamma", options.gamma},
                        {"accuracy", options.accuracy},
                        {"threshold", out.threshold},
                        {"m", m},
                        {"n", n}});

  std::vector<SafeKernel> kernels;
  std::vector<Vector> log_p, u(m, Vector::Zero(n)), v(m, Vector::Zero(n)), cl(m), colmarg(m);
  kernels.reserve(m);
  for (std::size_t l = 0; l < m; ++l) {
    require(measures[l].min_entry() > 0.0, "ibp: measures must be strictly positive");
    kernels.emplace_back(prob.costs[l], options.gamma, options.plain_domain_limit);
    log_p.push_back(measures[l].vector().array().log().matrix());
    cl[l] = kernels[l].cols(u[l]);
  }
  const std::size_t stride = std::max<std::size_t>(1, options.trace_stride);
  std::size_t t = 0;
  double crit = std::numeric_limits<double>::infinity();
  Vector qbar(n);
  while (true) {
    Vector avg = Vector::Zero(n);
    for (std::size_t l = 0; l < m; ++l) avg += w[l] * cl[l];
    for (std::size_t l = 0; l < m; ++l) v[l] = avg - cl[l];
    ++t;
    double row_err = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      const Vector rl = kernels[l].rows(v[l]);
      u[l] = log_p[l] - rl;
      row_err = std::max(
          row_err, ((u[l] + rl).array().exp().matrix() - measures[l].vector()).lpNorm<1>());
    }
    ++t;
    qbar.setZero();
    for (std::size_t l = 0; l < m; ++l) {
      cl[l] = kernels[l].cols(u[l]);
      colmarg[l] = (v[l] + cl[l]).array().exp();
      qbar += w[l] * colmarg[l];
    }
    crit = 0.0;
    for (std::size_t l = 0; l < m; ++l) crit += w[l] * (colmarg[l] - qbar).lpNorm<1>();
    if (options.observer) options.observer(t, row_err);
    const bool done = crit <= out.threshold;
    if (done || (t / 2) % stride == 0) {
      out.trace.add(t, {{"criterion", crit}, {"row_error", row_err}});
    }
    if (done) break;
    if (t >= options.max_iterations) {
      throw ConvergenceError("ibp did not reach criterion " + std::to_string(out.threshold) +
                             " within " + std::to_string(options.max_iterations) +
                             " iterations (last " + std::to_string(crit) + ")");
    }
  }

  double mass = 0.0;
  out.unrounded.reserve(m);
  for (std::size_t l = 0; l < m; ++l) {
    out.unrounded.push_back(scaled_kernel({u[l], v[l]}, prob.costs[l], options.gamma));
    mass += w[l] * out.unrounded.back().sum();
  }
  out.q = qbar / mass;
  out.q /= out.q.sum();
  const ProbabilityVector q(out.q);
  out.q = q.vector();
  out.stack.common_marginal = out.q;
  for (std::size_t l = 0; l < m; ++l) {
    out.stack.plans.push_back(round_to_polytope(out.unrounded[l], measures[l], q));
  }
  out.iterations = t;
  out.final_criterion = crit;
  out.trace.finish(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return out;
}

}  // namespace

BarycenterInstance::BarycenterInstance(std::vector<ProbabilityVector> measures,
                                       std::vector<Matrix> costs, const Vector& weights) {
  require(!measures.empty(), "barycenter needs at least one measure");
  require(measures.size() == costs.size() &&
              static_cast<Eigen::Index>(measures.size()) == weights.size(),
          "measures, costs and weights disagree in count");
  require(weights.allFinite() && weights.minCoeff() >= 0.0 &&
              std::abs(weights.sum() - 1.0) <= 1e-9,
          "weights must lie on the simplex");
  const Eigen::Index n = measures.front().size();
  for (std::size_t l = 0; l < measures.size(); ++l) {
    require(measures[l].size() == n, "all measures must share one dimension");
    require(costs[l].rows() == n && costs[l].cols() == n, "cost matrix dimension mismatch");
    require(costs[l].allFinite() && costs[l].minCoeff() >= 0.0, "costs must be finite and >= 0");
    if (weights[static_cast<Eigen::Index>(l)] == 0.0) continue;
    kept_.push_back(l);
  }
  weights_.resize(static_cast<Eigen::Index>(kept_.size()));
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    measures_.push_back(std::move(measures[kept_[i]]));
    costs_.push_back(std::move(costs[kept_[i]]));
    weights_[static_cast<Eigen::Index>(i)] = weights[static_cast<Eigen::Index>(kept_[i])];
  }
  weights_ /= weights_.sum();
}

double BarycenterInstance::max_cost_norm() const {
  double r = 0.0;
  for (const Matrix& c : costs_) r = std::max(r, c.cwiseAbs().maxCoeff());
  return r;
}

double PlanStack::max_residual() const {
  double r = 0.0;
  for (const TransportPlan& p : plans) {
    r = std::max(r, (p.matrix.colwise().sum().transpose() - common_marginal).lpNorm<1>());
    r = std::max(r, p.row_residual);
  }
  return r;
}

double barycenter_objective(const PlanStack& stack, const BarycenterInstance& instance) {
  require(stack.plans.size() == instance.m(), "barycenter_objective: stack size mismatch");
  double s = 0.0;
  for (std::size_t l = 0; l < instance.m(); ++l) {
    const Matrix& pl = stack.plans[l].matrix;
    require(pl.rows() == instance.n() && pl.cols() == instance.n(),
            "barycenter_objective: plan dimension mismatch");
    s += instance.weights()[static_cast<Eigen::Index>(l)] * frobenius(instance.costs()[l], pl);
  }
  return s;
}

IBPResult ibp(const BarycenterInstance& instance, const IBPOptions& options) {
  RawProblem prob{&instance.measures(), instance.costs(), &instance.weights()};
  return run_ibp(prob, options);
}

std::size_t auto_outer_iterations_ibp(double L, double epsilon, std::size_t m, Eigen::Index n) {
  require(L > 0.0 && epsilon > 0.0 && m > 0 && n > 0, "auto_outer_iterations_ibp: bad arguments");
  return static_cast<std::size_t>(
      std::ceil(4.0 * L * static_cast<double>(m) * std::log(static_cast<double>(n)) / epsilon));
}

double auto_inner_accuracy_ibp(double epsilon, std::size_t m, Eigen::Index n, double c) {
  require(epsilon > 0.0 && m > 0 && n > 0 && c > 0.0, "auto_inner_accuracy_ibp: bad arguments");
  const double nn = static_cast<double>(n);
  return c * epsilon * epsilon / (static_cast<double>(m) * nn * nn * nn);
}

ProxIBPResult prox_ibp(const BarycenterInstance& instance, const ProxConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t m = instance.m();
  const Eigen::Index n = instance.n();
  const Vector& w = instance.weights();

  ProxIBPResult out;
  out.L = config.L;
  out.inner_accuracy = config.inner_accuracy
                           ? *config.inner_accuracy
                           : auto_inner_accuracy_ibp(config.epsilon, m, n, config.inner_constant);
  const std::size_t N = config.outer_iters
                            ? *config.outer_iters
                            : auto_outer_iterations_ibp(out.L, config.epsilon, m, n);
  out.trace = RunTrace("prox_ibp");
  out.trace.set_config({{"L", out.L},
                        {"epsilon", config.epsilon},
                        {"inner_accuracy", out.inner_accuracy},
                        {"inner_constant", config.inner_constant},
                        {"outer_iters", N},
                        {"m", m},
                        {"n", n}});

  PlanStack current;
  current.common_marginal = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (std::size_t l = 0; l < m; ++l) {
    Matrix pi = instance.measures()[l].vector() * current.common_marginal.transpose();
    current.plans.push_back(TransportPlan::with_residuals(std::move(pi),
                                                          instance.measures()[l].vector(),
                                                          current.common_marginal));
  }
  out.trace.add(0, {{"objective", barycenter_objective(current, instance)}, {"L", out.L}});

  std::vector<Matrix> sum(m, Matrix::Zero(n, n));
  RawProblem prob{&instance.measures(), std::vector<Matrix>(m), &w};
  IBPOptions opts;
  opts.gamma = out.L;
  opts.accuracy = out.inner_accuracy;
  opts.max_iterations = config.max_inner_iterations;
  opts.plain_domain_limit = config.plain_domain_limit;
  opts.trace_stride = std::numeric_limits<std::size_t>::max();
  for (std::size_t k = 1; k <= N; ++k) {
    double cb = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      const Matrix& pk = current.plans[l].matrix;
      prob.costs[l] = instance.costs()[l] - out.L * pk.cwiseMax(kTiny).array().log().matrix();
      cb = std::max(cb, pk.minCoeff() > 0.0 ? cbar(pk, instance.costs()[l], out.L)
                                            : std::numeric_limits<double>::infinity());
    }
    IBPResult step = run_ibp(prob, opts);
    double kl = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      kl += w[static_cast<Eigen::Index>(l)] *
            matrix_kl(step.stack.plans[l].matrix, current.plans[l].matrix);
    }
    current = std::move(step.stack);
    for (std::size_t l = 0; l < m; ++l) sum[l] += current.plans[l].matrix;
    out.inner_iterations.push_back(step.iterations);
    out.total_inner_iterations += step.iterations;
    out.trace.add(k, {{"objective", barycenter_objective(current, instance)},
                      {"inner_iterations", static_cast<double>(step.iterations)},
                      {"cbar", cb},
                      {"kl_step", kl},
                      {"L", out.L},
                      {"inner_criterion", step.final_criterion}});
  }

  out.outer_iterations = N;
  if (N == 0) {
    out.stack = std::move(current);
  } else {
    Vector q = Vector::Zero(n);
    std::vector<Matrix> avg(m);
    for (std::size_t l = 0; l < m; ++l) {
      avg[l] = sum[l] / static_cast<double>(N);
      q += w[static_cast<Eigen::Index>(l)] * avg[l].colwise().sum().transpose();
    }
    out.stack.common_marginal = q;
    for (std::size_t l = 0; l < m; ++l) {
      out.stack.plans.push_back(TransportPlan::with_residuals(
          std::move(avg[l]), instance.measures()[l].vector(), q));
    }
  }
  out.q = out.stack.common_marginal;
  out.objective = barycenter_objective(out.stack, instance);
  out.trace.finish(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return out;
}

}  // namespace inexact
