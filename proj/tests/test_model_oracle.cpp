#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "inexact/errors.hpp"
#include "inexact/model_oracle.hpp"
#include "oracles.hpp"

using namespace inexact;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::vector<SamplePair> gaussian_pairs(int count, Eigen::Index dim, std::uint64_t seed) {
  return sample_pairs(
      [dim](std::mt19937_64& rng) {
        std::normal_distribution<double> g;
        Vector v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = g(rng);
        return v;
      },
      count, seed);
}
}  // namespace

TEST_CASE("verify_model on a quadratic") {
  auto setup = std::make_shared<const EuclideanSetup>();
  const Gradient grad = [](const Vector& x) { return x; };
  const Objective f = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  const auto pairs = gaussian_pairs(200, 3, 1);

  const auto exact = verify_model(make_linear_model(grad, setup, 1.0), f, pairs);
  CHECK(exact.pairs == 200);
  CHECK(exact.consistent(1e-12));

  const auto tight = verify_model(make_linear_model(grad, setup, 0.5), f, pairs);
  CHECK(tight.max_upper_gap > 0.0);
  CHECK(tight.max_lower_gap <= 1e-12);

  // x - y = y gives f(x) - f(y) - psi = |y|^2 / 2 while 0.5 V = |y|^2 / 4.
  const Vector y = vec({1.0, 2.0, -1.0});
  const auto one = verify_model(make_linear_model(grad, setup, 0.5), f, {{2.0 * y, y}});
  CHECK(one.max_upper_gap == doctest::Approx(0.25 * y.squaredNorm()));

  const auto strong = verify_model(make_linear_model(grad, setup, 1.0, 1.0), f, pairs);
  CHECK(strong.consistent(1e-12));
  const auto too_strong = verify_model(make_linear_model(grad, setup, 2.0, 1.5), f, pairs);
  CHECK(too_strong.max_strong_gap > 0.0);
}

TEST_CASE("verify_model rejects samples outside the domain") {
  auto setup = std::make_shared<const EuclideanSetup>(1.0);
  const Gradient grad = [](const Vector& x) { return x; };
  const Objective f = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  CHECK_THROWS_AS(verify_model(make_linear_model(grad, setup, 1.0), f,
                               {{vec({3.0, 0.0}), vec({0.0, 0.0})}}),
                  InvalidInput);
}

TEST_CASE("model normalization and convexity in the first argument") {
  auto setup = std::make_shared<const EuclideanSetup>();
  const Gradient grad = [](const Vector& x) { return Vector(x.array().cube()); };
  const auto model = make_linear_model(grad, setup, 10.0);
  for (const auto& [x, y] : gaussian_pairs(100, 4, 2)) {
    CHECK(model.evaluate(y, y) == 0.0);
    const Vector z = -x;
    const double mid = model.evaluate(0.5 * (x + z), y);
    CHECK(mid <= 0.5 * (model.evaluate(x, y) + model.evaluate(z, y)) + 1e-12);
  }
}

TEST_CASE("precision_from_residual") {
  PrecisionConversion smooth{2.0, 1.0, 0.0, std::nullopt};
  CHECK(precision_from_residual(smooth, 0.0) == 0.0);
  CHECK(precision_from_residual(smooth, 0.5) == doctest::Approx(std::sqrt(2.0)));

  PrecisionConversion general{1.0, 2.0, 3.0, 4.0};
  CHECK(precision_from_residual(general, 2.0) == doctest::Approx(5.0));
  CHECK(precision_from_residual(general, 0.0) == 0.0);

  PrecisionConversion missing{1.0, 2.0, 3.0, std::nullopt};
  CHECK_THROWS_AS(precision_from_residual(missing, 1.0), InvalidInput);
  CHECK_THROWS_AS(precision_from_residual(smooth, -1.0), InvalidInput);

  for (const auto& conv : {smooth, general}) {
    double prev = 0.0;
    for (double e : {1e-8, 1e-4, 0.1, 1.0, 7.0}) {
      const double d = precision_from_residual(conv, e);
      CHECK(d >= prev);
      prev = d;
      CHECK(precision_from_residual(conv, 4.0 * e) == doctest::Approx(2.0 * d).epsilon(1e-12));
    }
  }
}

TEST_CASE("entropic linear subproblem") {
  const auto y = ProbabilityVector(vec({0.1, 0.6, 0.3}));
  const auto same = solve_entropic_linear_subproblem(Vector::Zero(3), y, 2.0);
  CHECK((same.vector() - y.vector()).cwiseAbs().maxCoeff() <= 1e-15);

  const double beta = 0.7;
  const auto tilt = solve_entropic_linear_subproblem(vec({0.0, beta * std::log(3.0)}),
                                                     ProbabilityVector::uniform(2), beta);
  CHECK(tilt[0] == doctest::Approx(0.75));
  CHECK(tilt[1] == doctest::Approx(0.25));

  CHECK_THROWS_AS(solve_entropic_linear_subproblem(Vector::Zero(3), y, 0.0), InvalidInput);
  CHECK_THROWS_AS(solve_entropic_linear_subproblem(
                      Vector::Zero(2), ProbabilityVector(vec({1.0, 0.0})), 1.0),
                  InvalidInput);

  const Vector g = vec({0.4, -1.3, 2.2});
  const auto base = solve_entropic_linear_subproblem(g, y, 0.9);
  const auto shifted = solve_entropic_linear_subproblem(g.array() + 17.0, y, 0.9);
  CHECK((base.vector() - shifted.vector()).cwiseAbs().maxCoeff() <= 1e-12);

  // large exponents stay finite
  const auto steep = solve_entropic_linear_subproblem(vec({0.0, 5000.0, -5000.0}), y, 1.0);
  CHECK(steep.vector().allFinite());
  CHECK(steep[2] == doctest::Approx(1.0));
}

TEST_CASE("exact subproblem certificate against a grid minimizer") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 20; ++t) {
    const Vector yv = oracle::random_simplex(rng, 3, 0.05);
    const ProbabilityVector y(yv);
    const Vector g = Vector::NullaryExpr(3, [&] { return n01(rng); });
    const double beta = 0.5 + std::abs(n01(rng));
    const auto phi = [&](const Vector& x) { return g.dot(x) + beta * oracle::kl_sum(x, yv); };
    const Vector x = solve_entropic_linear_subproblem(g, y, beta).vector();
    const Vector grid = oracle::simplex3_grid_argmin(phi, 400);
    CHECK(phi(x) <= phi(grid) + 1e-12);
    const Vector h = g.array() + beta * ((x.array() / yv.array()).log() + 1.0);
    CHECK(h.dot(grid - x) >= -1e-9);
    const Vector fd = oracle::central_gradient(phi, x, 1e-6);
    CHECK((fd - h).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("entropic linear problem solver and model") {
  EntropicLinearProblem prob{vec({1.0, 0.2, 0.5, 0.9}), 0.3};
  const Vector xs = prob.minimizer();
  CHECK(prob.value(xs) == doctest::Approx(prob.optimal_value()).epsilon(1e-12));
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const Vector x = oracle::random_simplex(rng, 4, 1e-3);
    CHECK(prob.value(x) >= prob.optimal_value() - 1e-12);
  }
  const auto sol = prob.solver().solve(ProbabilityVector::uniform(4).vector(), 1.0, 0.0);
  CHECK(sol.precision == 0.0);
  CHECK(std::abs(sol.point.sum() - 1.0) <= 1e-12);
  EntropicLinearProblem lin{vec({1.0, 0.2, 0.5}), 0.0};
  CHECK(lin.optimal_value() == doctest::Approx(0.2));
}

TEST_CASE("log-sum-exp and softmax") {
  CHECK(log_sum_exp(vec({1000.0, 1000.0})) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(std::isinf(log_sum_exp(Vector::Constant(2, -INFINITY))));
  const Vector s = softmax(vec({-1000.0, 0.0}));
  CHECK(s[1] == doctest::Approx(1.0));
  CHECK(s.allFinite());
}
