#include <doctest.h>

#include <cmath>
#include <random>

#include "inexact/errors.hpp"
#include "inexact/ot_core.hpp"
#include "oracles.hpp"

using namespace inexact;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

OTInstance random_instance(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  return OTInstance(oracle::random_cost(rng, n, scale),
                    ProbabilityVector(oracle::random_simplex(rng, n, 0.05)),
                    ProbabilityVector(oracle::random_simplex(rng, n, 0.05)));
}

}  // namespace

TEST_CASE("regularized objective examples") {
  CHECK(reg_objective(Matrix::Ones(1, 1), Matrix::Zero(1, 1), 1.0) == 0.0);
  const Matrix uni = Matrix::Constant(2, 2, 0.25);
  CHECK(reg_objective(uni, Matrix::Zero(2, 2), 1.0) == doctest::Approx(-2.0 * std::log(2.0)));
  const Matrix I = Matrix::Identity(2, 2);
  CHECK(reg_objective(uni, I, 1.0) == doctest::Approx(oracle::reg_cost(uni, I, 1.0)));
  CHECK(oracle::reg_cost(uni, I, 1.0) == doctest::Approx(0.5 - 2.0 * std::log(2.0)));
  CHECK(reg_objective(mat2(0.5, 0.0, 0.0, 0.5), I, 2.0) ==
        doctest::Approx(1.0 + 2.0 * std::log(0.5)));
  CHECK_THROWS_AS(reg_objective(uni, I, 0.0), InvalidInput);
}

TEST_CASE("dual objective examples and gradient") {
  for (Eigen::Index n : {1, 3}) {
    const OTInstance inst(Matrix::Zero(n, n), ProbabilityVector::uniform(n),
                          ProbabilityVector::uniform(n));
    CHECK(dual_objective({Vector::Zero(n), Vector::Zero(n)}, inst, 0.7) ==
          doctest::Approx(double(n * n)));
  }
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    const OTInstance inst = random_instance(rng, 4, 2.0);
    const double gamma = 0.5;
    const Vector u = Vector::NullaryExpr(4, [&] { return g(rng); });
    const Vector v = Vector::NullaryExpr(4, [&] { return g(rng); });
    const auto fu = [&](const Vector& x) { return dual_objective({x, v}, inst, gamma); };
    const Vector fd = oracle::central_gradient(fu, u, 1e-5);
    const Vector exact = scaled_kernel({u, v}, inst.cost(), gamma).rowwise().sum() - inst.p().vector();
    CHECK((fd - exact).norm() <= 1e-6 * std::max(1.0, exact.norm()));
  }
}

TEST_CASE("rounding to the transportation polytope") {
  const ProbabilityVector p(vec({0.3, 0.7})), q(vec({0.4, 0.6}));
  const Matrix feasible = mat2(0.1, 0.2, 0.3, 0.4);
  const TransportPlan same = round_to_polytope(feasible, p, q);
  CHECK((same.matrix - feasible).cwiseAbs().maxCoeff() <= 1e-16);

  // row 1 overweight
  const Matrix F = mat2(0.3, 0.3, 0.2, 0.2);
  const TransportPlan r = round_to_polytope(F, p, q);
  CHECK(r.row_residual <= 1e-15);
  CHECK(r.col_residual <= 1e-15);
  const double budget = (F.rowwise().sum() - p.vector()).lpNorm<1>() +
                        (F.colwise().sum().transpose() - q.vector()).lpNorm<1>();
  CHECK((r.matrix - F).cwiseAbs().sum() <= budget + 1e-15);
  // hand evaluation: rows scaled to (0.15, 0.15 | 0.2, 0.2), no column exceeds q,
  // missing mass (0, 0.3) x (0.05, 0.25) / 0.3.
  CHECK(r.matrix(0, 0) == doctest::Approx(0.15));
  CHECK(r.matrix(1, 0) == doctest::Approx(0.25));
  CHECK(r.matrix(1, 1) == doctest::Approx(0.45));

  CHECK_THROWS_AS(round_to_polytope(mat2(-0.1, 0.5, 0.3, 0.3), p, q), InvalidInput);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const ProbabilityVector a(oracle::random_simplex(rng, 5)), b(oracle::random_simplex(rng, 5));
    Matrix G = Matrix::NullaryExpr(5, 5, [&] { return u(rng); });
    G /= G.sum();
    const TransportPlan out = round_to_polytope(G, a, b);
    CHECK(out.matrix.minCoeff() >= 0.0);
    CHECK(out.total_residual() <= 1e-9);
    const double bound = (G.rowwise().sum() - a.vector()).lpNorm<1>() +
                         (G.colwise().sum().transpose() - b.vector()).lpNorm<1>();
    CHECK((out.matrix - G).cwiseAbs().sum() <= bound + 1e-12);
  }
}

TEST_CASE("sinkhorn small cases") {
  const OTInstance one(Matrix::Constant(1, 1, 3.0), ProbabilityVector::uniform(1),
                       ProbabilityVector::uniform(1));
  SinkhornOptions opts;
  opts.gamma = 0.1;
  opts.accuracy = 1e-6;
  const SinkhornResult r1 = sinkhorn(one, opts);
  CHECK(r1.plan.matrix(0, 0) == doctest::Approx(1.0));
  CHECK(r1.iterations == 1);

  const OTInstance sym(mat2(0, 1, 1, 0), ProbabilityVector::uniform(2),
                       ProbabilityVector::uniform(2));
  const SinkhornResult rs = sinkhorn(sym, opts);
  CHECK(rs.plan.matrix(0, 0) == doctest::Approx(rs.plan.matrix(1, 1)).epsilon(1e-12));
  CHECK(rs.plan.matrix(0, 1) == doctest::Approx(rs.plan.matrix(1, 0)).epsilon(1e-12));

  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const OTInstance inst = random_instance(rng, 2, 3.0);
    for (double gamma : {0.05, 0.5, 2.0}) {
      opts.gamma = gamma;
      opts.accuracy = 1e-6;
      const SinkhornResult r = sinkhorn(inst, opts);
      const double best =
          oracle::reg2x2_optimum(inst.cost(), inst.p().vector(), inst.q().vector(), gamma);
      const double got = reg_objective(r.plan.matrix, inst.cost(), gamma);
      CHECK(got <= best + opts.accuracy);
      CHECK(got >= best - 1e-9);
      CHECK(r.plan.total_residual() <= 1e-9);
    }
  }
}

TEST_CASE("sinkhorn input errors and iteration cap") {
  std::mt19937_64 rng(3);
  const OTInstance inst = random_instance(rng, 4);
  SinkhornOptions opts;
  opts.gamma = 0.0;
  CHECK_THROWS_AS(sinkhorn(inst, opts), InvalidInput);
  opts.gamma = 0.01;
  opts.accuracy = 1e-12;
  opts.max_iterations = 3;
  CHECK_THROWS_AS(sinkhorn(inst, opts), ConvergenceError);
  const OTInstance zero(Matrix::Zero(2, 2), ProbabilityVector(vec({1.0, 0.0})),
                        ProbabilityVector::uniform(2));
  CHECK_THROWS_AS(sinkhorn(zero, SinkhornOptions{}), InvalidInput);
  CHECK_THROWS_AS(OTInstance(Matrix::Zero(2, 3), ProbabilityVector::uniform(2),
                             ProbabilityVector::uniform(2)),
                  InvalidInput);
}

TEST_CASE("exact half steps, monotone dual and Hilbert residual") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index n = 3 + t % 4;
    const OTInstance inst = random_instance(rng, n, 2.0);
    const double gamma = t % 2 ? 0.1 : 1.0;
    SinkhornOptions tight;
    tight.gamma = gamma;
    tight.accuracy = 1e-13;
    const DualPotentials ref = sinkhorn(inst, tight).duals;

    SinkhornOptions opts;
    opts.gamma = gamma;
    opts.accuracy = 1e-6;
    std::vector<double> R, F;
    const DualPotentials start{inst.p().vector().array().log(), inst.q().vector().array().log()};
    R.push_back(hilbert_residual(start, ref, 0));
    F.push_back(dual_objective(start, inst, gamma));
    double worst_row = 0.0, worst_col = 0.0;
    opts.observer = [&](std::size_t k, const DualPotentials& d) {
      R.push_back(hilbert_residual(d, ref, k));
      F.push_back(dual_objective(d, inst, gamma));
      const Matrix B = scaled_kernel(d, inst.cost(), gamma);
      if (k % 2 == 1) {
        worst_row = std::max(worst_row, (B.rowwise().sum() - inst.p().vector()).cwiseAbs().maxCoeff());
      } else {
        worst_col = std::max(worst_col,
                             (B.colwise().sum().transpose() - inst.q().vector()).cwiseAbs().maxCoeff());
      }
    };
    sinkhorn(inst, opts);
    CHECK(worst_row <= 1e-12);
    CHECK(worst_col <= 1e-12);
    const Matrix& C = inst.cost();
    CHECK(R[0] <= (C.maxCoeff() - C.minCoeff()) / gamma + 1e-12);
    for (std::size_t k = 1; k < R.size(); ++k) {
      CHECK(R[k] <= R[k - 1] + 1e-9);
      CHECK(F[k] <= F[k - 1] + 1e-12 * std::abs(F[k - 1]));
    }
  }
}

TEST_CASE("hilbert residual gauge invariance") {
  const DualPotentials a{vec({0.1, -2.0, 3.0}), vec({1.0, 0.5, -0.5})};
  CHECK(hilbert_residual(a, a, 0) == 0.0);
  const DualPotentials shifted{a.u.array() + 4.0, a.v.array() - 7.0};
  CHECK(hilbert_residual(shifted, a, 0) == doctest::Approx(0.0));
  CHECK(hilbert_residual(shifted, a, 1) == doctest::Approx(0.0));
  const DualPotentials b{vec({0.0, 0.0, 1.0}), vec({0.0, 2.0, 0.0})};
  CHECK(hilbert_residual(b, a, 0) == doctest::Approx((b.v - a.v).maxCoeff() - (b.v - a.v).minCoeff()));
  CHECK(hilbert_residual(b, a, 1) == doctest::Approx((b.u - a.u).maxCoeff() - (b.u - a.u).minCoeff()));
  CHECK_THROWS_AS(hilbert_residual(b, DualPotentials{vec({1.0}), vec({1.0})}, 0), InvalidInput);
}

TEST_CASE("stopping threshold") {
  const Matrix C = mat2(0.0, 2.0, 1.0, 0.5);
  const double gamma = 0.3, acc = 1e-3;
  const double expected = (acc / 4.0) / (2.0 + 2.0 * gamma * std::log(4.0 * gamma * 4.0 / acc));
  CHECK(sinkhorn_stop_threshold(C, gamma, acc) == doctest::Approx(expected));
  // enormous accuracy: the formula is nonpositive, clamp to 2
  CHECK(sinkhorn_stop_threshold(Matrix::Zero(2, 2), 1.0, 1e6) == 2.0);
  CHECK(sinkhorn_stop_threshold(C, gamma, 1e9) <= 2.0);
  CHECK(sinkhorn_stop_threshold(C, gamma, 1e9) > 0.0);
}

TEST_CASE("plain and log domains agree; underflow falls back") {
  std::mt19937_64 rng(6);
  const OTInstance inst = random_instance(rng, 6, 1.0);
  SinkhornOptions plain;
  plain.gamma = 0.2;
  plain.accuracy = 1e-8;
  SinkhornOptions logd = plain;
  logd.plain_domain_limit = 0.0;
  const SinkhornResult a = sinkhorn(inst, plain), b = sinkhorn(inst, logd);
  CHECK(a.plain_domain);
  CHECK_FALSE(b.plain_domain);
  CHECK(a.iterations == b.iterations);
  CHECK((a.plan.matrix - b.plan.matrix).cwiseAbs().maxCoeff() <= 1e-12);

  // a constant row shift leaves the problem unchanged but underflows the kernel row
  Matrix shifted = oracle::random_cost(rng, 6, 1.0);
  shifted.row(0).array() += 800.0;
  const OTInstance steep(shifted, ProbabilityVector(oracle::random_simplex(rng, 6, 0.05)),
                         ProbabilityVector(oracle::random_simplex(rng, 6, 0.05)));
  SinkhornOptions forced;
  forced.gamma = 1.0;
  forced.accuracy = 1e-4;
  forced.plain_domain_limit = 1e12;
  const SinkhornResult c = sinkhorn(steep, forced);
  forced.plain_domain_limit = 0.0;
  const SinkhornResult d = sinkhorn(steep, forced);
  CHECK(c.iterations == d.iterations);
  CHECK((c.plan.matrix - d.plan.matrix).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(c.plan.total_residual() <= 1e-9);
}

TEST_CASE("entropy perturbation bound") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Index n = 3;
  for (int t = 0; t < 1000; ++t) {
    Matrix a = Matrix::NullaryExpr(n, n, [&] { return u(rng); });
    Matrix b = a;
    const double mix = std::pow(u(rng), 3);
    b = (1.0 - mix) * a + mix * Matrix::NullaryExpr(n, n, [&] { return u(rng); });
    a /= a.sum();
    b /= b.sum();
    const double d = (a - b).cwiseAbs().sum();
    if (d <= 0.0 || d > std::exp(-1.0) * double(n * n)) continue;
    const double ha = reg_objective(a, Matrix::Zero(n, n), 1.0);
    const double hb = reg_objective(b, Matrix::Zero(n, n), 1.0);
    CHECK(std::abs(ha - hb) <= 2.0 * d * std::log(double(n * n) / d) + 1e-12);
  }
}

TEST_CASE("sinkhorn trace metadata") {
  std::mt19937_64 rng(1);
  const OTInstance inst = random_instance(rng, 5);
  SinkhornOptions opts;
  opts.gamma = 0.5;
  opts.accuracy = 1e-6;
  opts.trace_stride = 4;
  const SinkhornResult r = sinkhorn(inst, opts);
  CHECK(r.trace.finished());
  CHECK(r.trace.records().back().iteration == r.iterations);
  CHECK(r.trace.config().contains("predicted_iterations"));
  CHECK(r.final_residual <= r.threshold);
}
