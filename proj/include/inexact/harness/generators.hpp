#pragma once

#include <cstdint>
#include <vector>

#include "inexact/bregman.hpp"

namespace inexact::harness {

enum class GridMetric { kEuclidean, kSquaredEuclidean };

/// Distances between the pixels of a rows x cols grid, pixels indexed row-major.
Matrix grid_cost(Eigen::Index rows, Eigen::Index cols, GridMetric metric = GridMetric::kEuclidean);

/// |x_i - x_j|^2 for points on a line.
Matrix line_cost(const Vector& points);

/// -5, -4.9, ..., 5.
Vector gaussian_support();

struct GaussianFamily {
  Vector support;
  Vector means;
  Vector sigmas;
  std::vector<ProbabilityVector> measures;
};

/// m normal densities on the support with mean ~ U[-5, 5] and sigma ~ U[0.25, 1.25],
/// normalized in the log domain, floored at `floor` and renormalized.
GaussianFamily gaussian_family(std::size_t m, std::uint64_t seed, double floor = 1e-10);

/// Seeded stand-in for a small handwritten digit: a few soft strokes on a dark
/// background, intensities in [0, 1] with exact zeros off-stroke.
Matrix synthetic_image(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// Row-major flattening with zeros replaced by `zero_floor`, then normalized.
ProbabilityVector image_marginal(const Matrix& image, double zero_floor = 1e-3);

}  // namespace inexact::harness
