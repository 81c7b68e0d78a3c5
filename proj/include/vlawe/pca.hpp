#pragma once

#include <cstddef>
#include <span>

#include "vlawe/common.hpp"

namespace vlawe {

// Mean-centred projection onto the leading principal axes.
struct PcaProjection {
  Vector mean;             // input dimension
  Matrix components;       // m x input dimension, orthonormal rows
  Vector explained_variance;  // m, non-increasing

  std::size_t input_dimension() const { return mean.size(); }
  std::size_t output_dimension() const { return components.rows(); }

  bool operator==(const PcaProjection&) const = default;
};

// Fits on the rows of `samples`. Requires 1 <= m <= min(rows, cols).
// Each axis is oriented so that its largest-magnitude entry is positive.
PcaProjection fit_pca(const Matrix& samples, std::size_t m);

Vector apply_pca(const PcaProjection& projection, std::span<const double> v);

}  // namespace vlawe
