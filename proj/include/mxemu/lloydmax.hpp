// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mxemu/analysis.hpp"
#include "mxemu/quantizer.hpp"
#include "mxemu/tensor.hpp"

namespace mxemu {

struct LloydConfig {
  std::size_t n_clusters = 16;
  std::size_t n_iters = 100;
  std::size_t n_levels = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Sorted reconstruction levels with midpoint decision boundaries.
struct Codebook {
  std::vector<double> levels;
  std::vector<double> boundaries;

  static Codebook from_levels(std::vector<double> levels);

  /// Index of the nearest level; a value on a boundary goes to the lower one.
  std::size_t index_of(double v) const;
  double quantize(double v) const { return levels[index_of(v)]; }
  double mse(std::span<const double> values) const;
};

struct Clustering {
  /// Cluster of each group. Groups with undefined kurtosis share the extra
  /// cluster index `n_clusters`.
  std::vector<std::size_t> assignment;
  /// Feature-space centroids (normalized mean, normalized kurtosis).
  std::vector<std::array<double, 2>> centroids;
  std::size_t n_clusters = 0;

  std::size_t cluster_count() const { return n_clusters + 1; }
};

/// k-means on min-max normalized (mean, kurtosis) features with a seeded
/// k-means++ start; at most 50 iterations, stopping once no centroid moves
/// more than 1e-9.
Clustering cluster_groups(const std::vector<GroupStats>& stats,
                          const LloydConfig& cfg);

struct LloydFit {
  Codebook codebook;
  /// trace[0] is the MSE of the (range-clamped) initial codebook, trace[i]
  /// the MSE after iteration i; n_iters + 1 entries, non-increasing.
  std::vector<double> mse_trace;
};

/// Classic Lloyd-Max iteration: nearest-level assignment, then each level
/// moves to the mean of its cell. Empty cells keep their level. Initial
/// levels are clamped into [min(values), max(values)] and deduplicated.
/// An update that would raise the measured MSE (possible only through
/// floating-point rounding at a fixed point) is not applied.
LloydFit lloyd_fit(std::span<const double> values, const LloydConfig& cfg,
                   const Codebook& init);

/// Levels at the (i + 0.5) / n quantiles of `values`; if the data has at
/// most n distinct values those values are the codebook.
Codebook quantile_init(std::span<const double> values, std::size_t n_levels);

/// Every value the quantizer `cfg` can produce when `values` form a single
/// row group, as a codebook.
Codebook grid_codebook(std::span<const double> values, const QuantConfig& cfg);

struct ReferenceOptions {
  enum class Init { kQuantile, kFormatGrid };
  Init init = Init::kQuantile;
  /// Format used for kFormatGrid initialization (AMXFP4 with E5M2 scales by
  /// default).
  QuantConfig grid_config{formats::fp4_e2m1(), GroupSize::row(),
                          ScaleMode::fp_scale(formats::fp8_e5m2()), true, -1};
};

struct ReferenceResult {
  Tensor reconstruction;
  ErrorReport report;
  Clustering clustering;
  /// One per cluster index; empty for clusters with no groups.
  std::vector<Codebook> codebooks;
};

/// Cluster-wise Lloyd-Max reference quantizer: group statistics, clustering,
/// one codebook fitted per cluster on its pooled raw values.
ReferenceResult reference_quantize(const Tensor& x, GroupSize group_size,
                                   const LloydConfig& cfg,
                                   const ReferenceOptions& opts = {});

}  // namespace mxemu
