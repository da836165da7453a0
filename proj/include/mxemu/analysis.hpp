// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mxemu/quantizer.hpp"
#include "mxemu/tensor.hpp"

namespace mxemu {

struct GroupStats {
  std::size_t group_index = 0;
  double mean = 0.0;
  /// Pearson kurtosis E[(v - mean)^4] / sigma^4; empty when sigma == 0.
  std::optional<double> kurtosis;
};

std::vector<GroupStats> group_stats(const Tensor& x, GroupSize group_size,
                                    int axis = -1);

/// Mean and Pearson kurtosis of one sample (population moments).
GroupStats sample_stats(std::span<const double> values);

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;

  double iqr() const { return q3 - q1; }
};

/// Five-number summary with linearly interpolated quantiles. Throws
/// DataError on empty input.
FiveNumber five_number(std::vector<double> values);

struct StatsSummary {
  std::size_t groups = 0;
  FiveNumber mean;
  FiveNumber kurtosis;
  /// Groups with zero variance, left out of the kurtosis summary.
  std::size_t undefined_kurtosis = 0;
};

/// Throws DataError when `stats` is empty or every kurtosis is undefined.
StatsSummary stats_summary(const std::vector<GroupStats>& stats);

/// Mean squared difference; ShapeError if shapes differ.
double mse(const Tensor& x, const Tensor& y);

struct GroupError {
  double clamp_sq_error = 0.0;
  double round_sq_error = 0.0;
  std::size_t clamped = 0;
};

struct ErrorReport {
  std::size_t element_count = 0;
  /// clamp_sq_error + round_sq_error.
  double total_sq_error = 0.0;
  /// total_sq_error / element_count.
  double mse = 0.0;
  double clamp_sq_error = 0.0;
  double round_sq_error = 0.0;
  std::size_t clamped_count = 0;
  std::vector<GroupError> per_group;
};

/// Quantizes `x` and splits the squared error into elements whose scaled
/// magnitude exceeded the format's largest value (clamped) and the rest.
/// Each group's components are summed in element order, then groups are
/// combined in group order.
ErrorReport error_decomposition(const Tensor& x, const QuantConfig& cfg);

/// Same decomposition for an existing reconstruction where no element counts
/// as clamped (e.g. a codebook quantizer).
ErrorReport rounding_only_report(const Tensor& x, const Tensor& y,
                                 GroupSize group_size, int axis = -1);

}  // namespace mxemu
