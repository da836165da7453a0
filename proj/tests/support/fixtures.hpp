// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "mxemu/quantizer.hpp"
#include "mxemu/random.hpp"
#include "mxemu/tensor.hpp"

namespace mxemu::testing {

inline double normal(SplitMix64& rng) {
  // Box-Muller on (0, 1].
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform(SplitMix64& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

inline std::size_t below(SplitMix64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

/// numpy-style linspace(start, stop, n) as a 1 x n row.
inline Tensor linspace(double start, double stop, std::size_t n) {
  std::vector<double> v(n);
  const double step = (stop - start) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i) * step;
  v[n - 1] = stop;
  return Tensor({1, n}, std::move(v));
}

inline Tensor snippet_fixture() { return linspace(-4.9, 31.0, 1024); }

inline Tensor gaussian(const Shape& shape, std::uint64_t seed, double sigma = 1.0) {
  SplitMix64 rng(seed);
  Tensor t = Tensor::zeros(shape);
  for (double& v : t.data) v = sigma * normal(rng);
  return t;
}

/// Standard normal data where every group of `gs` consecutive values along
/// the last axis is shifted by +sigma or -sigma (random sign per group).
inline Tensor shifted_gaussian(std::size_t rows, std::size_t cols, std::size_t gs,
                               std::uint64_t seed, double sigma = 1.0) {
  SplitMix64 rng(seed);
  Tensor t = Tensor::zeros({rows, cols});
  double shift = sigma;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i % gs == 0) shift = (rng() >> 63) ? -sigma : sigma;
    t.data[i] = shift + sigma * normal(rng);
  }
  return t;
}

/// Gaussian rows with large spikes on a few channels whose index has its low
/// five bits clear.
inline Tensor spike_fixture(std::uint64_t seed) {
  constexpr std::size_t kRows = 16;
  constexpr std::size_t kCols = 256;
  SplitMix64 rng(seed);
  Tensor t = Tensor::zeros({kRows, kCols});
  for (double& v : t.data) v = normal(rng);
  for (std::size_t r = 0; r < kRows; ++r) {
    t.data[r * kCols + 64] += 60.0 + 10.0 * rng.uniform();
    if (r % 2 == 0) t.data[r * kCols + 160] -= 40.0;
  }
  return t;
}

/// Values with a random overall magnitude and occasional outliers; the
/// general-purpose input for property tests.
inline Tensor mixed_random(const Shape& shape, SplitMix64& rng) {
  Tensor t = Tensor::zeros(shape);
  const double mag = std::ldexp(1.0, static_cast<int>(below(rng, 24)) - 12);
  const double shift = (rng.uniform() < 0.3) ? mag * uniform(rng, -2.0, 2.0) : 0.0;
  for (double& v : t.data) {
    const double r = rng.uniform();
    if (r < 0.05) {
      v = 0.0;
    } else if (r < 0.08) {
      v = mag * 20.0 * normal(rng);
    } else {
      v = shift + mag * normal(rng);
    }
  }
  return t;
}

inline std::vector<std::string> all_scale_modes() {
  return {"pot_floor", "pot_round", "fp8e4m3", "fp8e5m2", "fp16", "fp32",
          "nvfp4_double"};
}

inline QuantConfig make_config(const std::string& format, const std::string& scale,
                               GroupSize gs, int axis = -1) {
  const FormatSpec fs = parse_format_name(format);
  QuantConfig cfg;
  cfg.format = fs.format;
  cfg.asymmetric = fs.asymmetric;
  cfg.scale_mode = ScaleMode::from_name(scale);
  cfg.group_size = gs;
  cfg.axis = axis;
  return cfg;
}

/// Bitwise equality that distinguishes -0 from +0 and matches NaNs.
inline bool same_bits(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.data[i]) !=
        std::bit_cast<std::uint64_t>(b.data[i])) {
      return false;
    }
  }
  return true;
}

/// True when every group scale, relative to the tensor scale, is a normal
/// number of the scale encoding. PoT and FP32 scales always qualify.
inline bool scales_in_normal_range(const QuantizedTensor& q) {
  const auto& sf = q.config.scale_mode.scale_format();
  if (!sf) return true;
  const double min_normal = std::ldexp(1.0, 1 - sf->bias());
  const double ts = q.tensor_scale.value_or(1.0);
  const bool zp = q.config.uses_zero_point();
  for (const auto& s : q.scales) {
    if (s.pos_scale > 0.0 && s.pos_scale / ts < min_normal) return false;
    if (!zp && s.neg_scale > 0.0 && s.neg_scale / ts < min_normal) return false;
  }
  return true;
}

}  // namespace mxemu::testing
