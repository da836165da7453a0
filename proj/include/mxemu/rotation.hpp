// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mxemu/tensor.hpp"

namespace mxemu {

/// Randomized Hadamard rotation R = H_dim * D / sqrt(dim), where H_dim is the
/// Sylvester Hadamard matrix and D a seeded +-1 diagonal.
struct RotationSpec {
  std::size_t dim = 1;
  std::uint64_t seed = 0;
  std::vector<double> signs;

  /// Dense R, row-major dim x dim. Built entry by entry from the Sylvester
  /// sign rule, independent of the fast transform.
  std::vector<double> matrix() const;
};

/// `dim` must be a power of two (UnsupportedError otherwise). Sign i is
/// negative when the top bit of the i-th SplitMix64 draw is set.
RotationSpec make_rotation(std::size_t dim, std::uint64_t seed);

/// Applies R (or R^T when `transpose`) along `axis` with a fast
/// Walsh-Hadamard transform. ShapeError if the axis extent is not spec.dim.
Tensor rotate(const Tensor& x, const RotationSpec& spec, int axis = -1,
              bool transpose = false);

/// In-place unnormalised Walsh-Hadamard transform of a power-of-two span.
void fwht(std::span<double> v);

}  // namespace mxemu
