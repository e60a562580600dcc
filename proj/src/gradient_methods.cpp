#include "inexact/gradient_methods.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "inexact/errors.hpp"

namespace inexact {

using detail::require;

namespace {

enum class Schedule { kFixed, kAdaptive, kAdaptiveStronglyConvex };

const char* schedule_name(Schedule s) {
  switch (s) {
    case Schedule::kFixed: return "gm_fixed";
    case Schedule::kAdaptive: return "gm_adaptive";
    case Schedule::kAdaptiveStronglyConvex: return "gm_adaptive_strongly_convex";
  }
  return "";
}

nlohmann::json config_json(const GMConfig& c) {
  nlohmann::json j;
  j["L0"] = c.L0;
  j["delta"] = c.delta;
  j["delta_tilde"] = c.delta_tilde;
  j["mu"] = c.mu ? nlohmann::json(*c.mu) : nlohmann::json(nullptr);
  j["max_iters"] = c.max_iters;
  j["max_inner_attempts"] = c.max_inner_attempts;
  return j;
}

void validate(const GMProblem& problem, const Vector& x0, const GMConfig& config,
              Schedule schedule) {
  require(config.max_iters > 0, "number of iterations must be positive");
  require(config.max_inner_attempts > 0, "max_inner_attempts must be positive");
  require(config.L0 > 0.0, "L0 must be positive");
  require(config.delta >= 0.0 && config.delta_tilde >= 0.0, "delta and delta_tilde must be >= 0");
  require(static_cast<bool>(problem.solver.solve), "missing subproblem solver");
  require(static_cast<bool>(problem.model.evaluate) && problem.model.bregman,
          "incomplete inexact model");
  require(problem.model.bregman->contains(x0), "starting point outside the domain");
  require(!config.reference || config.reference->size() == x0.size(),
          "reference point dimension differs from x0");
  if (schedule != Schedule::kFixed) {
    require(static_cast<bool>(problem.objective), "adaptive methods need the objective");
  }
  if (schedule == Schedule::kAdaptiveStronglyConvex) {
    require(config.mu.has_value() && *config.mu > 0.0, "strongly convex method needs mu > 0");
    require(config.L0 >= 2.0 * *config.mu, "strongly convex method needs L0 >= 2 mu");
  }
}

GMResult run(const GMProblem& problem, const Vector& x0, const GMConfig& config,
             Schedule schedule) {
  validate(problem, x0, config, schedule);
  const auto start = std::chrono::steady_clock::now();
  const BregmanSetup& setup = *problem.model.bregman;
  const bool have_f = static_cast<bool>(problem.objective);
  const double floor_L = kHalvingFloor * config.L0;

  GMResult out;
  out.trace = RunTrace(schedule_name(schedule));
  out.trace.set_config(config_json(config));
  out.iterates.reserve(config.max_iters + 1);
  out.iterates.push_back(x0);

  Vector x = x0;
  double fx = have_f ? problem.objective(x) : 0.0;
  double L_k = config.L0;
  Vector weighted_sum = Vector::Zero(x0.size());
  out.best_value = std::numeric_limits<double>::infinity();

  auto log_record = [&](std::size_t k, double L, std::size_t attempts, const Vector& point,
                        double f_value) {
    std::vector<std::pair<std::string, double>> m{{"L", L},
                                                  {"attempts", static_cast<double>(attempts)}};
    if (have_f) m.emplace_back("f", f_value);
    if (config.reference) m.emplace_back("V_ref", setup.divergence(*config.reference, point));
    m.emplace_back("S", out.S_N);
    out.trace.add(k, std::move(m));
  };
  log_record(0, L_k, 0, x, fx);

  for (std::size_t k = 0; k < config.max_iters; ++k) {
    double L_trial = L_k;
    switch (schedule) {
      case Schedule::kFixed: break;
      case Schedule::kAdaptive: L_trial = std::max(0.5 * L_k, floor_L); break;
      case Schedule::kAdaptiveStronglyConvex:
        L_trial = (L_k >= 2.0 * *config.mu) ? 0.5 * L_k : L_k;
        L_trial = std::max({L_trial, *config.mu, floor_L});
        break;
    }

    SubproblemSolution step;
    double f_next = 0.0;
    std::size_t attempts = 0;
    bool accepted = false;
    while (attempts < config.max_inner_attempts) {
      ++attempts;
      step = problem.solver.solve(x, L_trial, config.delta_tilde);
      if (schedule == Schedule::kFixed) {
        if (have_f) f_next = problem.objective(step.point);
        accepted = true;
        break;
      }
      f_next = problem.objective(step.point);
      const double rhs = fx + problem.model.evaluate(step.point, x) +
                         L_trial * setup.divergence(step.point, x) + config.delta;
      const double slack = 1e-12 * (1.0 + std::abs(fx));
      if (f_next <= rhs + slack) {
        accepted = true;
        break;
      }
      L_trial *= 2.0;
    }
    if (!accepted) {
      throw ConvergenceError("inner search exceeded " + std::to_string(config.max_inner_attempts) +
                             " attempts at iteration " + std::to_string(k));
    }

    L_k = L_trial;
    x = std::move(step.point);
    fx = f_next;
    out.lipschitz.push_back(L_k);
    out.weights.push_back(1.0 / L_k);
    out.attempts.push_back(attempts);
    out.total_attempts += attempts;
    out.S_N += 1.0 / L_k;
    weighted_sum += x / L_k;
    out.iterates.push_back(x);
    if (have_f && fx < out.best_value) {
      out.best_value = fx;
      out.best_iterate = x;
    }
    log_record(k + 1, L_k, attempts, x, fx);
  }

  out.last_iterate = x;
  out.averaged_iterate = weighted_sum / out.S_N;
  if (!have_f) {
    out.best_iterate = x;
    out.best_value = std::numeric_limits<double>::quiet_NaN();
  }
  if (config.mu) out.Lhat = geometric_mean_constant(out.lipschitz, *config.mu);
  out.trace.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return out;
}

}  // namespace

GMResult gm_fixed(const GMProblem& problem, const Vector& x0, const GMConfig& config) {
  return run(problem, x0, config, Schedule::kFixed);
}

GMResult gm_adaptive(const GMProblem& problem, const Vector& x0, const GMConfig& config) {
  return run(problem, x0, config, Schedule::kAdaptive);
}

GMResult gm_adaptive_strongly_convex(const GMProblem& problem, const Vector& x0,
                                     const GMConfig& config) {
  return run(problem, x0, config, Schedule::kAdaptiveStronglyConvex);
}

double geometric_mean_constant(std::span<const double> lipschitz, double mu) {
  require(!lipschitz.empty(), "geometric mean of an empty sequence");
  require(mu > 0.0, "mu must be positive");
  double log_sum = 0.0;
  for (double L : lipschitz) {
    require(L >= mu, "every L_k must be at least mu");
    const double factor = 1.0 - mu / L;
    if (factor <= 0.0) return mu;
    log_sum += std::log(factor);
  }
  const double root = std::exp(log_sum / static_cast<double>(lipschitz.size()));
  return mu / (1.0 - root);
}

double fixed_convex_bound(double L, double R2, std::size_t N, double delta, double delta_tilde) {
  require(N > 0, "N must be positive");
  return L * R2 / static_cast<double>(N) + delta_tilde + delta;
}

double adaptive_convex_bound(double R2, double S_N, double delta, double delta_tilde) {
  require(S_N > 0.0, "S_N must be positive");
  return R2 / S_N + delta_tilde + delta;
}

double attempt_budget(std::size_t N, double L, double L0) {
  require(L > 0.0 && L0 > 0.0, "attempt budget needs positive constants");
  return 2.0 * static_cast<double>(N) + std::log2(L / L0);
}

BoundPair adaptive_strongly_convex_bounds(std::size_t k, double mu, double L, double Lhat,
                                          double delta, double delta_tilde, double V0) {
  require(mu > 0.0 && L > 0.0 && Lhat >= mu, "bad strongly convex constants");
  const double steps = static_cast<double>(k + 1);
  const double noise = 1.0 - std::pow(1.0 - mu / (2.0 * L), steps);
  const double contraction = std::pow(1.0 - mu / Lhat, steps);
  BoundPair b;
  b.distance = 2.0 * L * (delta + delta_tilde) / (mu * mu) * noise + contraction * V0;
  b.function = 4.0 * L * L * (delta + delta_tilde) / (mu * mu) * noise + 2.0 * L * contraction * V0;
  return b;
}

BoundPair fixed_strongly_convex_bounds(std::size_t k, double mu, double L, double delta,
                                       double delta_tilde, double V0) {
  require(mu > 0.0, "mu must be positive");
  require(mu <= L, "mu must not exceed L");
  const double contraction = std::pow(1.0 - mu / L, static_cast<double>(k + 1));
  BoundPair b;
  b.distance = (delta + delta_tilde) / mu + contraction * V0;
  b.function = L * contraction * V0 + delta + delta_tilde;
  return b;
}

BoundPair fixed_strongly_convex_bounds(const RunTrace& trace, double mu, double L, double delta,
                                       double delta_tilde, double V0) {
  require(trace.size() >= 2, "trace must contain at least one iteration");
  return fixed_strongly_convex_bounds(trace.size() - 2, mu, L, delta, delta_tilde, V0);
}

}  // namespace inexact
