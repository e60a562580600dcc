#include "inexact/harness/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "inexact/errors.hpp"
#include "inexact/model_oracle.hpp"

namespace inexact::harness {

using detail::require;

Matrix grid_cost(Eigen::Index rows, Eigen::Index cols, GridMetric metric) {
  require(rows > 0 && cols > 0, "grid_cost: empty grid");
  const Eigen::Index n = rows * cols;
  Matrix c(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double dr = static_cast<double>(a / cols - b / cols);
      const double dc = static_cast<double>(a % cols - b % cols);
      const double sq = dr * dr + dc * dc;
      c(a, b) = metric == GridMetric::kEuclidean ? std::sqrt(sq) : sq;
    }
  }
  return c;
}

Matrix line_cost(const Vector& points) {
  const Eigen::Index n = points.size();
  Matrix c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = points[i] - points[j];
      c(i, j) = d * d;
    }
  }
  return c;
}

Vector gaussian_support() {
  Vector x(101);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i - 50) / 10.0;
  return x;
}

GaussianFamily gaussian_family(std::size_t m, std::uint64_t seed, double floor) {
  require(m > 0, "gaussian_family: need at least one measure");
  require(floor >= 0.0, "gaussian_family: floor must be >= 0");
  GaussianFamily fam;
  fam.support = gaussian_support();
  fam.means.resize(static_cast<Eigen::Index>(m));
  fam.sigmas.resize(static_cast<Eigen::Index>(m));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> sigma_dist(0.25, 1.25);
  for (std::size_t l = 0; l < m; ++l) {
    const double mu = mean_dist(rng);
    const double sigma = sigma_dist(rng);
    fam.means[static_cast<Eigen::Index>(l)] = mu;
    fam.sigmas[static_cast<Eigen::Index>(l)] = sigma;
    const Vector logits =
        -(fam.support.array() - mu).square() / (2.0 * sigma * sigma);
    Vector p = softmax(logits).cwiseMax(floor);
    p /= p.sum();
    fam.measures.emplace_back(p);
  }
  return fam;
}

Matrix synthetic_image(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  require(rows > 1 && cols > 1, "synthetic_image: grid too small");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix img = Matrix::Zero(rows, cols);
  const int strokes = 2 + static_cast<int>(rng() % 2);
  for (int s = 0; s < strokes; ++s) {
    const double r0 = unit(rng) * static_cast<double>(rows - 1);
    const double c0 = unit(rng) * static_cast<double>(cols - 1);
    const double r1 = unit(rng) * static_cast<double>(rows - 1);
    const double c1 = unit(rng) * static_cast<double>(cols - 1);
    const double width = 0.6 + 0.6 * unit(rng);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        // distance from pixel to the stroke segment
        const double dr = r1 - r0, dc = c1 - c0;
        const double len2 = dr * dr + dc * dc;
        double t = len2 > 0.0 ? ((i - r0) * dr + (j - c0) * dc) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double er = static_cast<double>(i) - (r0 + t * dr);
        const double ec = static_cast<double>(j) - (c0 + t * dc);
        const double d2 = er * er + ec * ec;
        img(i, j) = std::max(img(i, j), std::exp(-d2 / (2.0 * width * width)));
      }
    }
  }
  // dark background, as in scanned digits
  img = (img.array() < 0.15).select(0.0, img);
  return img;
}

ProbabilityVector image_marginal(const Matrix& image, double zero_floor) {
  Vector flat(image.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < image.rows(); ++i) {
    for (Eigen::Index j = 0; j < image.cols(); ++j) flat[k++] = image(i, j);
  }
  return ProbabilityVector::from_intensities(flat, zero_floor);
}

}  // namespace inexact::harness
