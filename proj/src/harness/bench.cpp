#include "inexact/harness/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <span>
#include <thread>

#include "inexact/errors.hpp"
#include "inexact/run_trace.hpp"

namespace inexact::harness {

using detail::require;

BenchMethod parse_bench_method(const std::string& name) {
  if (name == "fixed") return BenchMethod::kFixed;
  if (name == "adaptive") return BenchMethod::kAdaptive;
  if (name == "adaptive-sc") return BenchMethod::kAdaptiveStronglyConvex;
  detail::fail("unknown bench method '" + name + "'");
}

std::string bench_method_name(BenchMethod method) {
  switch (method) {
    case BenchMethod::kFixed: return "fixed";
    case BenchMethod::kAdaptive: return "adaptive";
    case BenchMethod::kAdaptiveStronglyConvex: return "adaptive-sc";
  }
  return "?";
}

double example2_coordinate(double k) {
  require(k > 0.0, "example2_coordinate: k must be positive");
  double x = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double e = std::exp(-k * x);
    const double h = 2.0 * x - e;
    const double step = h / (2.0 + k * e);
    x -= step;
    if (std::abs(step) <= 1e-17 * (1.0 + std::abs(x))) break;
  }
  return x;
}

BenchExample bench_example(int id, std::size_t dim) {
  require(id == 1 || id == 2, "bench example must be 1 or 2");
  require(dim > 0, "bench dimension must be positive");
  BenchExample ex;
  ex.id = id;
  ex.dim = dim;
  const Eigen::Index n = static_cast<Eigen::Index>(dim);
  const Vector k = Vector::LinSpaced(n, 1.0, static_cast<double>(dim));
  ex.x0 = Vector::Constant(n, 0.2);
  ex.x0 /= ex.x0.norm();
  const double N = static_cast<double>(dim);
  if (id == 1) {
    ex.f = [k](const Vector& x) { return (k.array() * x.array().square()).sum(); };
    ex.grad = [k](const Vector& x) -> Vector { return 2.0 * k.cwiseProduct(x); };
    ex.mu = 2.0;
    ex.L = 2.0 * N;
    ex.x_star = Vector::Zero(n);
  } else {
    ex.f = [k](const Vector& x) {
      return (k.array() * x.array().square() + (-k.array() * x.array()).exp()).sum();
    };
    ex.grad = [k](const Vector& x) -> Vector {
      return (2.0 * k.array() * x.array() - k.array() * (-k.array() * x.array()).exp()).matrix();
    };
    ex.mu = 2.0 + std::exp(-1.0);
    ex.L = 2.0 * N + N * N * std::exp(1.0);
    ex.x_star.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) ex.x_star[i] = example2_coordinate(k[i]);
  }
  ex.L0 = 2.0 * ex.mu;
  return ex;
}

std::vector<std::size_t> default_rows(int example) {
  if (example == 1) return {160, 180, 200, 220, 240};
  return {50, 100, 150, 200, 250, 300};
}

BenchTable run_bench(const BenchSpec& spec) {
  const BenchExample ex = bench_example(spec.example, spec.dim);
  auto setup = std::make_shared<const EuclideanSetup>(1.0);
  GMProblem problem{ex.f, make_linear_model(ex.grad, setup, ex.L, ex.mu),
                    make_euclidean_gradient_solver(ex.grad, setup)};
  const double V0 = 0.5 * (ex.x0 - ex.x_star).squaredNorm();

  BenchTable table;
  table.spec = spec;
  if (table.spec.ks.empty()) table.spec.ks = default_rows(spec.example);
  for (std::size_t k : table.spec.ks) {
    GMConfig cfg;
    cfg.max_iters = k + 1;
    cfg.mu = ex.mu;
    cfg.L0 = spec.method == BenchMethod::kFixed ? ex.L : ex.L0;
    const auto start = std::chrono::steady_clock::now();
    GMResult r;
    switch (spec.method) {
      case BenchMethod::kFixed: r = gm_fixed(problem, ex.x0, cfg); break;
      case BenchMethod::kAdaptive: r = gm_adaptive(problem, ex.x0, cfg); break;
      case BenchMethod::kAdaptiveStronglyConvex:
        r = gm_adaptive_strongly_convex(problem, ex.x0, cfg);
        break;
    }
    BenchRow row;
    row.k = k;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.measured = (r.last_iterate - ex.x_star).squaredNorm();
    switch (spec.method) {
      case BenchMethod::kFixed:
        row.estimate = 2.0 * fixed_strongly_convex_bounds(k, ex.mu, ex.L, 0.0, 0.0, V0).distance;
        break;
      case BenchMethod::kAdaptive:
        row.estimate = adaptive_convex_bound(V0, r.S_N, 0.0, 0.0);
        break;
      case BenchMethod::kAdaptiveStronglyConvex:
        row.Lhat = geometric_mean_constant(std::span<const double>(r.lipschitz), ex.mu);
        row.estimate =
            2.0 * adaptive_strongly_convex_bounds(k, ex.mu, ex.L, row.Lhat, 0.0, 0.0, V0).distance;
        break;
    }
    table.rows.push_back(row);
  }
  return table;
}

std::size_t worker_slots() {
  const char* env = std::getenv("INEXACT_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) detail::fail("INEXACT_WORKERS must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::vector<BenchTable> run_bench_batch(const std::vector<BenchSpec>& specs, std::size_t workers) {
  require(workers > 0, "need at least one worker");
  std::vector<BenchTable> out(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        out[i] = run_bench(specs[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(workers, specs.size()); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::string bench_csv(const BenchTable& table) {
  std::string s = "k,wall_seconds,estimate,measured,Lhat\n";
  for (const BenchRow& r : table.rows) {
    s += std::to_string(r.k) + ',' + format_double(r.wall_seconds) + ',' +
         format_double(r.estimate) + ',' + format_double(r.measured) + ',' +
         format_double(r.Lhat) + '\n';
  }
  return s;
}

}  // namespace inexact::harness
