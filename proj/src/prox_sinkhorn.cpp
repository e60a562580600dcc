#include "inexact/prox_sinkhorn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "inexact/errors.hpp"
#include "inexact/model_oracle.hpp"

namespace inexact {

using detail::require;

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

Matrix log_floored(const Matrix& m) { return m.cwiseMax(kTiny).array().log().matrix(); }

double resolved_inner_accuracy(const ProxConfig& c, double L, Eigen::Index n) {
  return c.inner_accuracy ? *c.inner_accuracy
                          : auto_inner_accuracy(L, c.epsilon, n, c.inner_constant);
}

// One proximal step: Sinkhorn on kernel pi^k * exp(-C / L).
SinkhornResult prox_step(const OTInstance& instance, const Matrix& prev, double L,
                         double accuracy, const ProxConfig& c) {
  OTInstance inner(instance.cost() - L * log_floored(prev), instance.p(), instance.q());
  SinkhornOptions opts;
  opts.gamma = L;
  opts.accuracy = accuracy;
  opts.max_iterations = c.max_inner_iterations;
  opts.plain_domain_limit = c.plain_domain_limit;
  opts.trace_stride = std::numeric_limits<std::size_t>::max();
  return sinkhorn(inner, opts);
}

}  // namespace

void ProxConfig::validate() const {
  require(L > 0.0 && std::isfinite(L), "ProxConfig: L must be positive");
  require(epsilon > 0.0 && std::isfinite(epsilon), "ProxConfig: epsilon must be positive");
  require(!inner_accuracy || *inner_accuracy > 0.0, "ProxConfig: inner accuracy must be positive");
  require(!outer_iters || *outer_iters > 0, "ProxConfig: outer iterations must be positive");
  require(inner_constant > 0.0, "ProxConfig: inner constant must be positive");
  require(blowup > 1.0, "ProxConfig: blowup factor must exceed 1");
  require(!min_L || (*min_L > 0.0 && *min_L <= L), "ProxConfig: min_L must lie in (0, L]");
  require(max_inner_iterations > 0, "ProxConfig: inner iteration cap must be positive");
}

std::size_t auto_outer_iterations(double L, double epsilon, Eigen::Index n) {
  require(L > 0.0 && epsilon > 0.0 && n > 0, "auto_outer_iterations: bad arguments");
  return static_cast<std::size_t>(std::ceil(4.0 * L * std::log(static_cast<double>(n)) / epsilon));
}

double auto_inner_accuracy(double L, double epsilon, Eigen::Index n, double c) {
  require(L > 0.0 && epsilon > 0.0 && n > 0 && c > 0.0, "auto_inner_accuracy: bad arguments");
  const double nn = static_cast<double>(n);
  return c * std::pow(epsilon, 4) / (L * nn * nn * nn * nn);
}

double cbar(const Matrix& plan, const Matrix& cost, double L) {
  require(plan.rows() == cost.rows() && plan.cols() == cost.cols(), "cbar: dimension mismatch");
  const double lo = plan.minCoeff();
  require(lo > 0.0, "cbar: plan has a zero entry");
  return cost.cwiseAbs().maxCoeff() + L * std::log(plan.maxCoeff() / lo);
}

double matrix_kl(const Matrix& pi, const Matrix& rho) {
  require(pi.rows() == rho.rows() && pi.cols() == rho.cols(), "matrix_kl: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index j = 0; j < pi.cols(); ++j) {
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
      const double x = pi(i, j);
      const double y = std::max(rho(i, j), kTiny);
      s += (x > 0.0 ? x * std::log(x / y) : 0.0) - x + y;
    }
  }
  return s;
}

double certified_outer_precision(double L, double epsilon, Eigen::Index n, double residual) {
  const double nn = static_cast<double>(n);
  const double scale = L * nn * nn / epsilon;
  PrecisionConversion conv;
  conv.smooth_lipschitz = 4.0 * scale;
  conv.diameter = 2.0;
  conv.grad_norm_at_opt = 2.0 * scale;
  conv.strong_convexity = L;
  return precision_from_residual(conv, residual);
}

ProxResult prox_sinkhorn(const OTInstance& instance, const ProxConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = instance.n();
  const Matrix& C = instance.cost();

  ProxResult out;
  out.trace = RunTrace("prox_sinkhorn");
  std::optional<LSchedule> schedule;
  if (config.adaptive_L) schedule = adaptive_L_schedule(instance, config);
  out.L = schedule ? schedule->L : config.L;
  out.inner_accuracy = resolved_inner_accuracy(config, out.L, n);
  const std::size_t N =
      config.outer_iters ? *config.outer_iters : auto_outer_iterations(out.L, config.epsilon, n);
  out.certified_precision = certified_outer_precision(out.L, config.epsilon, n, out.inner_accuracy);
  const double cinf = C.cwiseAbs().maxCoeff();
  const double plan_floor =
      cinf > 0.0 ? config.epsilon / (2.0 * static_cast<double>(n * n) * cinf) : 0.0;

  nlohmann::json cfg = {{"L", out.L},
                        {"epsilon", config.epsilon},
                        {"inner_accuracy", out.inner_accuracy},
                        {"inner_constant", config.inner_constant},
                        {"outer_iters", N},
                        {"certified_precision", out.certified_precision},
                        {"floor_plans", config.floor_plans},
                        {"adaptive_L", config.adaptive_L}};
  if (schedule) cfg["L_schedule"] = schedule->tried;
  out.trace.set_config(cfg);

  Matrix pi = instance.p().vector() * instance.q().vector().transpose();
  out.trace.add(0, {{"cost", frobenius(C, pi)}, {"L", out.L}});
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t k = 1; k <= N; ++k) {
    const double cb = pi.minCoeff() > 0.0 ? cbar(pi, C, out.L)
                                          : std::numeric_limits<double>::infinity();
    SinkhornResult step = prox_step(instance, pi, out.L, out.inner_accuracy, config);
    TransportPlan next = std::move(step.plan);
    if (config.floor_plans && plan_floor > 0.0) {
      Matrix floored = next.matrix.cwiseMax(plan_floor);
      floored /= floored.sum();
      next = round_to_polytope(floored, instance.p(), instance.q());
    }
    const double kl = matrix_kl(next.matrix, pi);
    out.inner_iterations.push_back(step.iterations);
    out.total_inner_iterations += step.iterations;
    out.trace.add(k, {{"inner_iterations", static_cast<double>(step.iterations)},
                      {"cbar", cb},
                      {"cost", frobenius(C, next.matrix)},
                      {"kl_step", kl},
                      {"L", out.L},
                      {"inner_residual", step.final_residual},
                      {"delta_tilde", out.certified_precision}});
    pi = std::move(next.matrix);
    sum += pi;
  }
  out.outer_iterations = N;
  if (N == 0) {
    out.plan = TransportPlan::with_residuals(pi, instance.p().vector(), instance.q().vector());
  } else {
    out.plan = TransportPlan::with_residuals(sum / static_cast<double>(N), instance.p().vector(),
                                             instance.q().vector());
  }
  out.last_plan = TransportPlan::with_residuals(pi, instance.p().vector(), instance.q().vector());
  out.value = frobenius(C, out.plan.matrix);
  out.trace.finish(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return out;
}

LSchedule adaptive_L_schedule(const OTInstance& instance, const ProxConfig& config) {
  config.validate();
  const Eigen::Index n = instance.n();
  const double floor = config.min_L ? *config.min_L : config.L * std::ldexp(1.0, -30);
  const double accuracy = resolved_inner_accuracy(config, config.L, n);
  const Matrix pi0 = instance.p().vector() * instance.q().vector().transpose();

  LSchedule s;
  s.trace = RunTrace("adaptive_L");
  s.trace.set_config({{"L0", config.L}, {"blowup", config.blowup}, {"min_L", floor},
                      {"inner_accuracy", accuracy}});
  double L = config.L;
  const std::size_t base = prox_step(instance, pi0, L, accuracy, config).iterations;
  s.tried.push_back(L);
  s.inner_counts.push_back(base);
  s.trace.add(0, {{"L", L}, {"inner_iterations", static_cast<double>(base)}});
  s.L = L;
  for (std::size_t step = 1;; ++step) {
    const double next = L / 2.0;
    if (next < floor) {
      s.hit_floor = true;
      break;
    }
    std::size_t count = 0;
    bool failed = false;
    try {
      count = prox_step(instance, pi0, next, accuracy, config).iterations;
    } catch (const ConvergenceError&) {
      failed = true;
      count = config.max_inner_iterations;
    }
    s.tried.push_back(next);
    s.inner_counts.push_back(count);
    s.trace.add(step, {{"L", next}, {"inner_iterations", static_cast<double>(count)}});
    if (failed || static_cast<double>(count) >= config.blowup * static_cast<double>(base)) break;
    L = next;
    s.L = L;
  }
  return s;
}

}  // namespace inexact
