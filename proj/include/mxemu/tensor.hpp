// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mxemu/error.hpp"

namespace mxemu {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape);

/// Dense row-major tensor of 64-bit reals.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (element_count(shape) != data.size()) {
      throw ShapeError("tensor shape " + shape_to_string(shape) +
                       " does not match " + std::to_string(data.size()) +
                       " elements");
    }
  }

  static Tensor zeros(Shape s) {
    std::vector<double> d(element_count(s), 0.0);
    return Tensor(std::move(s), std::move(d));
  }

  /// Row vector of `values`.
  static Tensor vector(std::vector<double> values) {
    Shape s{values.size()};
    return Tensor(std::move(s), std::move(values));
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }

  bool operator==(const Tensor&) const = default;
};

/// Resolves a possibly negative axis index against `rank`.
std::size_t normalize_axis(int axis, std::size_t rank);

}  // namespace mxemu
