// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mfjump {

using PointView = std::span<const double>;
using PointOut = std::span<double>;

/// Uniform probability measure on N points of R^d. Points are stored
/// row-major (point i occupies [i*d, (i+1)*d)). The barycenter is computed
/// once at construction since most mean-field coefficients need it.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(std::vector<double> flat_points, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  PointView point(std::size_t i) const {
    return {points_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> flat() const { return points_; }
  PointView mean() const { return mean_; }

  /// <mu, g> = (1/N) sum_i g(x_i).
  double integrate(const std::function<double(PointView)>& g) const;

 private:
  std::vector<double> points_;
  std::vector<double> mean_;
  std::size_t n_ = 0;
  int dim_ = 0;
};

/// Build a measure from a list of points; rejects empty lists, ragged or
/// zero-dimensional input and non-finite coordinates.
EmpiricalMeasure make_empirical(const std::vector<std::vector<double>>& points);

/// Same checks, flat row-major input.
EmpiricalMeasure make_empirical(std::vector<double> flat_points, int dim);

}  // namespace mfjump
