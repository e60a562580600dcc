#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>

namespace inexact {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the standard simplex. Construction accepts inputs whose sum is
/// within 1e-6 of one and rescales them; anything further off is rejected.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(Vector entries);

  static ProbabilityVector uniform(Eigen::Index n);

  /// Raw nonnegative intensities: exact zeros become `zero_floor`, then the
  /// whole vector is divided by its sum.
  static ProbabilityVector from_intensities(const Vector& raw, double zero_floor);

  const Vector& vector() const noexcept { return entries_; }
  Eigen::Index size() const noexcept { return entries_.size(); }
  double operator[](Eigen::Index i) const { return entries_[i]; }
  double min_entry() const { return entries_.minCoeff(); }

 private:
  Vector entries_;
};

enum class DomainKind { kEuclidean, kBall, kSimplex, kNonnegativeOrthant, kSimplexTimesOrthant };

/// Prox-function d and the divergence V[y](x) = d(x) - d(y) - <grad d(y), x - y>.
/// Implementations shift d so that its minimum over the domain is zero.
class BregmanSetup {
 public:
  virtual ~BregmanSetup() = default;

  virtual double prox_value(const Vector& x) const = 0;
  virtual Vector prox_gradient(const Vector& y) const = 0;
  virtual bool contains(const Vector& x, double tol = 1e-9) const = 0;
  virtual DomainKind domain() const noexcept = 0;

  /// V[y](x). The default evaluates the defining formula; subclasses override
  /// with a cancellation-free closed form.
  virtual double divergence(const Vector& x, const Vector& y) const;
};

/// The defining three-term formula, independent of any override.
double generic_bregman(const BregmanSetup& setup, const Vector& x, const Vector& y);

/// V[y](x); throws InvalidInput when x or y lies outside the setup's domain.
double bregman(const BregmanSetup& setup, const Vector& x, const Vector& y);

/// d(x) = ||x||^2 / 2 on R^n or on the centered ball of the given radius.
class EuclideanSetup final : public BregmanSetup {
 public:
  EuclideanSetup() = default;
  explicit EuclideanSetup(double ball_radius);

  double prox_value(const Vector& x) const override;
  Vector prox_gradient(const Vector& y) const override;
  bool contains(const Vector& x, double tol = 1e-9) const override;
  DomainKind domain() const noexcept override;
  double divergence(const Vector& x, const Vector& y) const override;

  double radius() const noexcept { return radius_; }

 private:
  double radius_ = 0.0;  // 0 means unconstrained
};

/// Negative entropy on the simplex, d(x) = sum x ln x + ln n; V is KL.
class EntropySetup final : public BregmanSetup {
 public:
  explicit EntropySetup(Eigen::Index dim);

  double prox_value(const Vector& x) const override;
  Vector prox_gradient(const Vector& y) const override;
  bool contains(const Vector& x, double tol = 1e-9) const override;
  DomainKind domain() const noexcept override { return DomainKind::kSimplex; }
  double divergence(const Vector& x, const Vector& y) const override;

 private:
  Eigen::Index dim_;
};

/// Entropy on the simplex block z plus ||p||^2 / 2 on the orthant block p.
/// Points are stored flat as [z; p]. V[y](x) = KL(z_x|z_y) + ||p_x - p_y||^2 / 2.
class ProductSetup final : public BregmanSetup {
 public:
  ProductSetup(Eigen::Index simplex_dim, Eigen::Index orthant_dim);

  double prox_value(const Vector& x) const override;
  Vector prox_gradient(const Vector& y) const override;
  bool contains(const Vector& x, double tol = 1e-9) const override;
  DomainKind domain() const noexcept override { return DomainKind::kSimplexTimesOrthant; }
  double divergence(const Vector& x, const Vector& y) const override;

  Eigen::Index simplex_dim() const noexcept { return n_; }
  Eigen::Index orthant_dim() const noexcept { return m_; }

 private:
  Eigen::Index n_;
  Eigen::Index m_;
};

/// x = (z, p) with z on the simplex and p in the nonnegative orthant.
struct ProductPoint {
  ProductPoint(ProbabilityVector z_part, Vector p_part);

  static ProductPoint from_flat(const Vector& flat, Eigen::Index simplex_dim);
  Vector flat() const;

  ProbabilityVector z;
  Vector p;
};

/// sum a_k ln(a_k / b_k) with 0 ln 0 = 0.
double kl_divergence(const Vector& a, const Vector& b);

/// sqrt(||z||_1^2 + ||p||_2^2). Takes raw blocks so differences of points work.
double product_norm(const Vector& z, const Vector& p);
double product_norm(const ProductPoint& x);

/// Entries of b below this are treated as zero in a divergence denominator.
inline constexpr double kDenominatorFloor = 1e-300;

}  // namespace inexact
