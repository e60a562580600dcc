#include "inexact/bregman.hpp"

#include <cmath>
#include <string>

#include "inexact/errors.hpp"

namespace inexact {

using detail::require;

namespace {

constexpr double kNormalizeTolerance = 1e-6;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double entropy(const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += xlogx(x[i]);
  return s;
}

bool on_simplex(const Vector& x, double tol) {
  if (x.size() == 0) return false;
  if (x.minCoeff() < -tol) return false;
  return std::abs(x.sum() - 1.0) <= tol;
}

// Generalized KL: sum x ln(x/y) - sum x + sum y. Equals KL on the simplex.
double generalized_kl(const Vector& x, const Vector& y) {
  return kl_divergence(x, y) - x.sum() + y.sum();
}

}  // namespace

ProbabilityVector::ProbabilityVector(Vector entries) : entries_(std::move(entries)) {
  require(entries_.size() > 0, "probability vector must be nonempty");
  require(entries_.allFinite(), "probability vector has non-finite entries");
  require(entries_.minCoeff() >= 0.0, "probability vector has negative entries");
  const double total = entries_.sum();
  require(std::abs(total - 1.0) <= kNormalizeTolerance,
          "probability vector sums to " + std::to_string(total) + ", expected 1");
  entries_ /= total;
}

ProbabilityVector ProbabilityVector::uniform(Eigen::Index n) {
  require(n > 0, "uniform distribution needs a positive dimension");
  return ProbabilityVector(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

ProbabilityVector ProbabilityVector::from_intensities(const Vector& raw, double zero_floor) {
  require(raw.size() > 0, "empty intensity vector");
  require(raw.allFinite() && raw.minCoeff() >= 0.0, "intensities must be finite and nonnegative");
  require(zero_floor >= 0.0, "zero floor must be nonnegative");
  Vector v = raw;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) v[i] = zero_floor;
  }
  const double total = v.sum();
  require(total > 0.0, "intensity vector has zero mass");
  return ProbabilityVector(v / total);
}

double BregmanSetup::divergence(const Vector& x, const Vector& y) const {
  return generic_bregman(*this, x, y);
}

double generic_bregman(const BregmanSetup& setup, const Vector& x, const Vector& y) {
  return setup.prox_value(x) - setup.prox_value(y) - setup.prox_gradient(y).dot(x - y);
}

double bregman(const BregmanSetup& setup, const Vector& x, const Vector& y) {
  require(x.size() == y.size(), "bregman: dimension mismatch");
  require(setup.contains(x), "bregman: x outside the domain");
  require(setup.contains(y), "bregman: y outside the domain");
  return setup.divergence(x, y);
}

// --- Euclidean -------------------------------------------------------------

EuclideanSetup::EuclideanSetup(double ball_radius) : radius_(ball_radius) {
  require(ball_radius > 0.0, "ball radius must be positive");
}

double EuclideanSetup::prox_value(const Vector& x) const { return 0.5 * x.squaredNorm(); }

Vector EuclideanSetup::prox_gradient(const Vector& y) const { return y; }

bool EuclideanSetup::contains(const Vector& x, double tol) const {
  if (!x.allFinite()) return false;
  return radius_ == 0.0 || x.norm() <= radius_ * (1.0 + tol);
}

DomainKind EuclideanSetup::domain() const noexcept {
  return radius_ == 0.0 ? DomainKind::kEuclidean : DomainKind::kBall;
}

double EuclideanSetup::divergence(const Vector& x, const Vector& y) const {
  return 0.5 * (x - y).squaredNorm();
}

// --- Entropy ---------------------------------------------------------------

EntropySetup::EntropySetup(Eigen::Index dim) : dim_(dim) {
  require(dim > 0, "entropy setup needs a positive dimension");
}

double EntropySetup::prox_value(const Vector& x) const {
  return entropy(x) + std::log(static_cast<double>(dim_));
}

Vector EntropySetup::prox_gradient(const Vector& y) const {
  require(y.minCoeff() >= kDenominatorFloor, "entropy gradient needs a strictly positive point");
  return y.array().log() + 1.0;
}

bool EntropySetup::contains(const Vector& x, double tol) const {
  return x.size() == dim_ && x.allFinite() && on_simplex(x, tol);
}

double EntropySetup::divergence(const Vector& x, const Vector& y) const {
  return generalized_kl(x, y);
}

// --- Product ---------------------------------------------------------------

ProductSetup::ProductSetup(Eigen::Index simplex_dim, Eigen::Index orthant_dim)
    : n_(simplex_dim), m_(orthant_dim) {
  require(simplex_dim > 0 && orthant_dim >= 0, "product setup: bad block sizes");
}

double ProductSetup::prox_value(const Vector& x) const {
  return entropy(x.head(n_)) + std::log(static_cast<double>(n_)) + 0.5 * x.tail(m_).squaredNorm();
}

Vector ProductSetup::prox_gradient(const Vector& y) const {
  Vector g(n_ + m_);
  require(y.head(n_).minCoeff() >= kDenominatorFloor,
          "product gradient needs a strictly positive simplex block");
  g.head(n_) = y.head(n_).array().log() + 1.0;
  g.tail(m_) = y.tail(m_);
  return g;
}

bool ProductSetup::contains(const Vector& x, double tol) const {
  if (x.size() != n_ + m_ || !x.allFinite()) return false;
  if (!on_simplex(x.head(n_), tol)) return false;
  return m_ == 0 || x.tail(m_).minCoeff() >= -tol;
}

double ProductSetup::divergence(const Vector& x, const Vector& y) const {
  return generalized_kl(x.head(n_), y.head(n_)) + 0.5 * (x.tail(m_) - y.tail(m_)).squaredNorm();
}

// --- ProductPoint ----------------------------------------------------------

ProductPoint::ProductPoint(ProbabilityVector z_part, Vector p_part)
    : z(std::move(z_part)), p(std::move(p_part)) {
  require(p.allFinite(), "party position has non-finite entries");
  require(p.size() == 0 || p.minCoeff() >= 0.0, "party position must be nonnegative");
}

ProductPoint ProductPoint::from_flat(const Vector& flat, Eigen::Index simplex_dim) {
  require(simplex_dim > 0 && simplex_dim <= flat.size(), "product point: bad split index");
  return ProductPoint(ProbabilityVector(flat.head(simplex_dim)),
                      flat.tail(flat.size() - simplex_dim));
}

Vector ProductPoint::flat() const {
  Vector out(z.size() + p.size());
  out << z.vector(), p;
  return out;
}

// --- free functions --------------------------------------------------------

double kl_divergence(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "kl_divergence: dimension mismatch");
  require(b.size() == 0 || b.minCoeff() >= kDenominatorFloor,
          "kl_divergence: nonpositive entry in the reference vector");
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a[k] > 0.0) s += a[k] * std::log(a[k] / b[k]);
  }
  return s;
}

double product_norm(const Vector& z, const Vector& p) {
  const double z1 = z.lpNorm<1>();
  return std::sqrt(z1 * z1 + p.squaredNorm());
}

double product_norm(const ProductPoint& x) { return product_norm(x.z.vector(), x.p); }

}  // namespace inexact
