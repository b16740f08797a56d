// Copyright 2026 The mfjump Authors
// SPDX-License-Identifier: Apache-2.0
#include "mfjump/empirical_measure.hpp"

#include <cmath>

#include "mfjump/errors.hpp"

namespace mfjump {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> flat_points, int dim)
    : points_(std::move(flat_points)),
      mean_(static_cast<std::size_t>(dim), 0.0),
      dim_(dim) {
  n_ = dim > 0 ? points_.size() / static_cast<std::size_t>(dim) : 0;
  if (n_ == 0) return;
  for (std::size_t i = 0; i < n_; ++i)
    for (int c = 0; c < dim_; ++c) mean_[c] += points_[i * dim_ + c];
  for (auto& m : mean_) m /= static_cast<double>(n_);
}

double EmpiricalMeasure::integrate(
    const std::function<double(PointView)>& g) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) acc += g(point(i));
  return acc / static_cast<double>(n_);
}

EmpiricalMeasure make_empirical(std::vector<double> flat_points, int dim) {
  if (dim < 1) throw InvalidInput("make_empirical: dimension must be >= 1");
  if (flat_points.empty())
    throw InvalidInput("make_empirical: empty point list");
  if (flat_points.size() % static_cast<std::size_t>(dim) != 0)
    throw InvalidInput("make_empirical: coordinate count not a multiple of d");
  for (double v : flat_points)
    if (!std::isfinite(v))
      throw InvalidInput("make_empirical: non-finite coordinate");
  return EmpiricalMeasure(std::move(flat_points), dim);
}

EmpiricalMeasure make_empirical(
    const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw InvalidInput("make_empirical: empty point list");
  const std::size_t d = points.front().size();
  std::vector<double> flat;
  flat.reserve(points.size() * d);
  for (const auto& p : points) {
    if (p.size() != d)
      throw InvalidInput("make_empirical: points of different dimension");
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return make_empirical(std::move(flat), static_cast<int>(d));
}

}  // namespace mfjump
