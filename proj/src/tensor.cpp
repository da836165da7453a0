// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/tensor.hpp"

namespace mxemu {

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t normalize_axis(int axis, std::size_t rank) {
  const auto r = static_cast<long long>(rank);
  const long long a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ConfigError("axis " + std::to_string(axis) +
                      " out of range for rank " + std::to_string(rank));
  }
  return static_cast<std::size_t>(a);
}

}  // namespace mxemu
