// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/rotation.hpp"

#include <bit>
#include <cmath>

#include "mxemu/error.hpp"
#include "mxemu/random.hpp"

namespace mxemu {

RotationSpec make_rotation(std::size_t dim, std::uint64_t seed) {
  if (dim == 0 || !std::has_single_bit(dim)) {
    throw UnsupportedError("rotation dimension must be a power of two, got " +
                           std::to_string(dim));
  }
  RotationSpec spec;
  spec.dim = dim;
  spec.seed = seed;
  spec.signs.resize(dim);
  SplitMix64 rng(seed);
  for (auto& s : spec.signs) s = (rng() >> 63) ? -1.0 : 1.0;
  return spec;
}

std::vector<double> RotationSpec::matrix() const {
  const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<double> r(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double h = (std::popcount(i & j) & 1) ? -1.0 : 1.0;
      r[i * dim + j] = h * signs[j] * norm;
    }
  }
  return r;
}

void fwht(std::span<double> v) {
  for (std::size_t h = 1; h < v.size(); h *= 2) {
    for (std::size_t i = 0; i < v.size(); i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = v[j];
        const double b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

Tensor rotate(const Tensor& x, const RotationSpec& spec, int axis,
              bool transpose) {
  if (x.rank() == 0) throw ShapeError("cannot rotate a rank-0 tensor");
  const std::size_t ax = normalize_axis(axis, x.rank());
  if (x.shape[ax] != spec.dim) {
    throw ShapeError("rotation dim " + std::to_string(spec.dim) +
                     " does not match extent " + std::to_string(x.shape[ax]) +
                     " of axis " + std::to_string(ax));
  }
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (std::size_t d = 0; d < ax; ++d) outer *= x.shape[d];
  for (std::size_t d = ax + 1; d < x.rank(); ++d) inner *= x.shape[d];
  const double norm = 1.0 / std::sqrt(static_cast<double>(spec.dim));

  Tensor out = x;
  std::vector<double> line(spec.dim);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * spec.dim * inner + i;
      for (std::size_t k = 0; k < spec.dim; ++k) {
        line[k] = x.data[base + k * inner];
      }
      // R = H D / sqrt(n); R^T = D H / sqrt(n).
      if (!transpose) {
        for (std::size_t k = 0; k < spec.dim; ++k) line[k] *= spec.signs[k];
      }
      fwht(line);
      for (std::size_t k = 0; k < spec.dim; ++k) {
        line[k] *= norm;
        if (transpose) line[k] *= spec.signs[k];
        out.data[base + k * inner] = line[k];
      }
    }
  }
  return out;
}

}  // namespace mxemu
