#include "inexact/ot_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "inexact/errors.hpp"
#include "inexact/model_oracle.hpp"

namespace inexact {

using detail::require;

namespace {

double xlogx_sum(const Matrix& m) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double x = m(i, j);
      if (x > 0.0) s += x * std::log(x);
    }
  }
  return s;
}

// ln sum_i exp(column_i + shift_i) for each column, i.e. a log-domain mat-vec.
Vector column_lse(const Matrix& log_matrix, const Vector& shift) {
  const Eigen::Index cols = log_matrix.cols();
  Vector out(cols);
  Vector buf(log_matrix.rows());
  for (Eigen::Index j = 0; j < cols; ++j) {
    buf = log_matrix.col(j) + shift;
    out[j] = log_sum_exp(buf);
  }
  return out;
}

}  // namespace

OTInstance::OTInstance(Matrix cost, ProbabilityVector p, ProbabilityVector q)
    : cost_(std::move(cost)), p_(std::move(p)), q_(std::move(q)) {
  require(cost_.rows() == cost_.cols(), "cost matrix must be square");
  require(cost_.rows() == p_.size() && cost_.rows() == q_.size(),
          "cost matrix and marginals disagree in dimension");
  require(cost_.allFinite(), "cost matrix has non-finite entries");
}

TransportPlan TransportPlan::with_residuals(Matrix m, const Vector& p, const Vector& q) {
  TransportPlan plan;
  plan.row_residual = (m.rowwise().sum() - p).lpNorm<1>();
  plan.col_residual = (m.colwise().sum().transpose() - q).lpNorm<1>();
  plan.matrix = std::move(m);
  return plan;
}

double reg_objective(const Matrix& plan, const Matrix& cost, double gamma) {
  require(plan.rows() == cost.rows() && plan.cols() == cost.cols(),
          "reg_objective: dimension mismatch");
  require(gamma > 0.0, "reg_objective: gamma must be positive");
  return frobenius(cost, plan) + gamma * xlogx_sum(plan);
}

Matrix scaled_kernel(const DualPotentials& duals, const Matrix& cost, double gamma) {
  require(duals.u.size() == cost.rows() && duals.v.size() == cost.cols(),
          "scaled_kernel: dimension mismatch");
  Matrix b(cost.rows(), cost.cols());
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    b.col(j) = (duals.u.array() - cost.col(j).array() / gamma + duals.v[j]).exp();
  }
  return b;
}

double dual_objective(const DualPotentials& duals, const OTInstance& instance, double gamma) {
  require(gamma > 0.0, "dual_objective: gamma must be positive");
  const Matrix& C = instance.cost();
  require(duals.u.size() == C.rows() && duals.v.size() == C.cols(),
          "dual_objective: dimension mismatch");
  // ln sum_ij B_ij = ln sum_j exp(v_j + ln sum_i exp(u_i - C_ij / gamma)).
  const Vector inner = column_lse(-C / gamma, duals.u);
  const double log_total = log_sum_exp(inner + duals.v);
  return std::exp(log_total) - duals.u.dot(instance.p().vector()) -
         instance.q().vector().dot(duals.v);
}

TransportPlan round_to_polytope(const Matrix& F, const ProbabilityVector& p,
                                const ProbabilityVector& q) {
  require(F.rows() == p.size() && F.cols() == q.size(), "round_to_polytope: dimension mismatch");
  require(F.allFinite() && F.minCoeff() >= 0.0, "round_to_polytope: F must be finite and >= 0");
  Matrix X = F;
  const Vector rows = X.rowwise().sum();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (rows[i] > p[i]) X.row(i) *= p[i] / rows[i];
  }
  const Vector cols = X.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (cols[j] > q[j]) X.col(j) *= q[j] / cols[j];
  }
  const Vector err_r = (p.vector() - X.rowwise().sum()).cwiseMax(0.0);
  const Vector err_c = (q.vector() - X.colwise().sum().transpose()).cwiseMax(0.0);
  const double mass = err_r.sum();
  if (mass > 0.0) X.noalias() += err_r * err_c.transpose() / mass;
  return TransportPlan::with_residuals(std::move(X), p.vector(), q.vector());
}

double sinkhorn_stop_threshold(const Matrix& cost, double gamma, double accuracy) {
  require(gamma > 0.0 && accuracy > 0.0, "threshold needs positive gamma and accuracy");
  const double n = static_cast<double>(cost.rows());
  const double spread = cost.maxCoeff() - cost.minCoeff();
  const double denom = spread + 2.0 * gamma * std::log(4.0 * gamma * n * n / accuracy);
  if (denom <= 0.0) return 2.0;
  return std::min(accuracy / (4.0 * denom), 2.0);
}

namespace detail {

KernelOps::KernelOps(const Matrix& cost, double gamma, double plain_domain_limit)
    : log_kernel_(-cost / gamma), log_kernel_t_(log_kernel_.transpose()) {
  ratio_ = cost.cwiseAbs().maxCoeff() / gamma;
  plain_ = ratio_ < plain_domain_limit;
  if (plain_) kernel_ = log_kernel_.array().exp().matrix();
}

bool KernelOps::plain_safe(const Vector& x) const {
  return plain_ && ratio_ + (x.maxCoeff() - x.minCoeff()) < 700.0;
}

Vector KernelOps::row_log_sums(const Vector& v) const {
  if (plain_safe(v)) {
    const double top = v.maxCoeff();
    const Vector scaled = (v.array() - top).exp();
    return (kernel_ * scaled).array().log() + top;
  }
  return column_lse(log_kernel_t_, v);
}

Vector KernelOps::col_log_sums(const Vector& u) const {
  if (plain_safe(u)) {
    const double top = u.maxCoeff();
    const Vector scaled = (u.array() - top).exp();
    return (kernel_.transpose() * scaled).array().log() + top;
  }
  return column_lse(log_kernel_, u);
}

}  // namespace detail

SinkhornResult sinkhorn(const OTInstance& instance, const SinkhornOptions& options) {
  require(options.gamma > 0.0, "sinkhorn: gamma must be positive");
  require(options.accuracy > 0.0, "sinkhorn: accuracy must be positive");
  require(options.max_iterations > 0, "sinkhorn: iteration cap must be positive");
  require(instance.p().min_entry() > 0.0 && instance.q().min_entry() > 0.0,
          "sinkhorn: marginals must be strictly positive");
  const auto start = std::chrono::steady_clock::now();
  const Matrix& C = instance.cost();
  const Vector& p = instance.p().vector();
  const Vector& q = instance.q().vector();
  const Vector log_p = p.array().log();
  const Vector log_q = q.array().log();

  SinkhornResult result;
  result.threshold = sinkhorn_stop_threshold(C, options.gamma, options.accuracy);
  const double r0_bound = (C.maxCoeff() - C.minCoeff()) / options.gamma;
  result.trace = RunTrace("sinkhorn");
  result.trace.set_config({{"gamma", options.gamma},
                           {"accuracy", options.accuracy},
                           {"threshold", result.threshold},
                           {"R0_bound", r0_bound},
                           {"predicted_iterations", r0_bound / result.threshold},
                           {"max_iterations", options.max_iterations}});

  detail::KernelOps ops(C, options.gamma, options.plain_domain_limit);
  DualPotentials d{log_p, log_q};

  auto row_sums = [&](const Vector& v) {
    Vector r = ops.row_log_sums(v);
    if (ops.plain() && !r.allFinite()) {
      ops.force_log_domain();
      r = ops.row_log_sums(v);
    }
    return r;
  };
  auto col_sums = [&](const Vector& u) {
    Vector c = ops.col_log_sums(u);
    if (ops.plain() && !c.allFinite()) {
      ops.force_log_domain();
      c = ops.col_log_sums(u);
    }
    return c;
  };

  std::size_t t = 0;
  double residual = std::numeric_limits<double>::infinity();
  Vector row_lse, col_lse;
  bool have_col_lse = false;
  const std::size_t stride = std::max<std::size_t>(1, options.trace_stride);
  while (true) {
    double row_res = 0.0, col_res = 0.0;
    if (t % 2 == 0) {
      row_lse = row_sums(d.v);
      d.u = log_p - row_lse;
      row_res = ((d.u + row_lse).array().exp().matrix() - p).lpNorm<1>();
      col_lse = col_sums(d.u);
      have_col_lse = true;
      col_res = ((d.v + col_lse).array().exp().matrix() - q).lpNorm<1>();
    } else {
      if (!have_col_lse) col_lse = col_sums(d.u);
      d.v = log_q - col_lse;
      col_res = ((d.v + col_lse).array().exp().matrix() - q).lpNorm<1>();
      row_lse = row_sums(d.v);
      row_res = ((d.u + row_lse).array().exp().matrix() - p).lpNorm<1>();
      have_col_lse = false;
    }
    ++t;
    residual = row_res + col_res;
    if (options.observer) options.observer(t, d);
    const bool done = residual <= result.threshold;
    if (done || t % stride == 0) {
      result.trace.add(t, {{"residual", residual}, {"row_residual", row_res},
                           {"col_residual", col_res}});
    }
    if (done) break;
    if (t >= options.max_iterations) {
      throw ConvergenceError("sinkhorn did not reach residual " +
                             std::to_string(result.threshold) + " within " +
                             std::to_string(options.max_iterations) + " iterations (last " +
                             std::to_string(residual) + ")");
    }
  }

  result.iterations = t;
  result.final_residual = residual;
  result.plain_domain = ops.plain();
  result.unrounded = scaled_kernel(d, C, options.gamma);
  result.plan = round_to_polytope(result.unrounded, instance.p(), instance.q());
  result.duals = std::move(d);
  result.trace.finish(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return result;
}

double hilbert_residual(const DualPotentials& current, const DualPotentials& reference,
                        std::size_t t) {
  const bool even = t % 2 == 0;
  const Vector& a = even ? current.v : current.u;
  const Vector& b = even ? reference.v : reference.u;
  require(a.size() == b.size() && a.size() > 0, "hilbert_residual: dimension mismatch");
  const Vector diff = a - b;
  return diff.maxCoeff() - diff.minCoeff();
}

}  // namespace inexact
