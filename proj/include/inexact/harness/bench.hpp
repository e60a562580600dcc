#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "inexact/gradient_methods.hpp"

namespace inexact::harness {

enum class BenchMethod { kFixed, kAdaptive, kAdaptiveStronglyConvex };

BenchMethod parse_bench_method(const std::string& name);
std::string bench_method_name(BenchMethod method);

/// Strongly convex test function on the unit Euclidean ball.
///   Example 1: f = sum_k k x_k^2, mu = 2, L = 2 dim, minimizer 0.
///   Example 2: f = sum_k (k x_k^2 + exp(-k x_k)), mu = 2 + 1/e, L = 2 dim + dim^2 e.
/// Both start at the normalized all-equal vector and use L0 = 2 mu.
struct BenchExample {
  int id = 1;
  std::size_t dim = 100;
  Objective f;
  Gradient grad;
  double mu = 0.0;
  double L = 0.0;
  double L0 = 0.0;
  Vector x0;
  Vector x_star;
};

BenchExample bench_example(int id, std::size_t dim = 100);

/// Solves 2x = exp(-k x) by Newton's method.
double example2_coordinate(double k);

struct BenchSpec {
  int example = 1;
  BenchMethod method = BenchMethod::kAdaptiveStronglyConvex;
  std::size_t dim = 100;
  std::vector<std::size_t> ks;  // table rows; empty selects the defaults
};

/// 160, 180, ..., 240 for example 1; 50, 100, ..., 300 for example 2.
std::vector<std::size_t> default_rows(int example);

struct BenchRow {
  std::size_t k = 0;
  double wall_seconds = 0.0;
  /// Theoretical bound on ||x^{k+1} - x*||^2 (strongly convex methods) or on
  /// f(x_avg) - f* (plain adaptive), evaluated from the run's own constants.
  double estimate = 0.0;
  double measured = 0.0;  // ||x^{k+1} - x*||^2
  double Lhat = 0.0;      // geometric-mean constant, adaptive strongly convex only
};

struct BenchTable {
  BenchSpec spec;
  std::vector<BenchRow> rows;
};

/// Row k runs k + 1 iterations of the method.
BenchTable run_bench(const BenchSpec& spec);

/// Worker slots from INEXACT_WORKERS, defaulting to 1.
std::size_t worker_slots();

/// Runs independent specs on `workers` threads; output order follows input order.
std::vector<BenchTable> run_bench_batch(const std::vector<BenchSpec>& specs, std::size_t workers);

/// `k,wall_seconds,estimate,measured,Lhat` with a header line.
std::string bench_csv(const BenchTable& table);

}  // namespace inexact::harness
