// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mxemu/formats.hpp"
#include "mxemu/scaling.hpp"
#include "mxemu/tensor.hpp"

namespace mxemu {

/// Number of consecutive elements sharing a scale, or the whole axis.
class GroupSize {
 public:
  static GroupSize row() { return GroupSize(0); }
  /// Any power of two >= 1.
  static GroupSize of(std::size_t n);
  /// "row" or a decimal power of two.
  static GroupSize parse(std::string_view text);

  bool is_row() const { return n_ == 0; }
  std::size_t value() const { return n_; }
  /// Group size for an axis of the given extent.
  std::size_t resolve(std::size_t extent) const { return is_row() ? extent : n_; }
  std::string to_string() const;

  bool operator==(const GroupSize&) const = default;

 private:
  explicit GroupSize(std::size_t n) : n_(n) {}
  std::size_t n_;
};

struct QuantConfig {
  ElementFormat format = formats::fp4_e2m1();
  GroupSize group_size = GroupSize::of(32);
  ScaleMode scale_mode = ScaleMode::pot_floor();
  bool asymmetric = false;
  int axis = -1;

  /// Asymmetric integers use a zero-point instead of sign-split scales.
  bool uses_zero_point() const {
    return asymmetric && format.kind() == FormatKind::kInt;
  }
  /// e.g. "fp4_e2m1_asym/fp8e5m2/gs32".
  std::string describe() const;
  /// Throws ConfigError for combinations that cannot be quantized.
  void validate() const;

  bool operator==(const QuantConfig&) const = default;
};

/// Maps (group, position) pairs onto flat row-major element offsets for
/// grouping along one axis. Groups are numbered line by line, where a line is
/// one full run along the axis: group = (outer * inner + i) * per_line + g.
class GroupLayout {
 public:
  GroupLayout(const Shape& shape, int axis, GroupSize group_size);

  std::size_t group_size() const { return group_size_; }
  std::size_t group_count() const { return outer_ * inner_ * per_line_; }
  std::size_t axis() const { return axis_; }

  std::size_t element_index(std::size_t group, std::size_t pos) const {
    const std::size_t g = group % per_line_;
    const std::size_t line = group / per_line_;
    const std::size_t o = line / inner_;
    const std::size_t i = line % inner_;
    return (o * extent_ + g * group_size_ + pos) * inner_ + i;
  }

  /// Copies one group's values into `out` (resized to group_size()).
  void gather(std::span<const double> data, std::size_t group,
              std::vector<double>& out) const;

 private:
  std::size_t axis_ = 0;
  std::size_t outer_ = 1;
  std::size_t extent_ = 1;
  std::size_t inner_ = 1;
  std::size_t group_size_ = 1;
  std::size_t per_line_ = 1;
};

/// Element codes plus per-group scales. For zero-point integers each code
/// holds the unsigned level and each scale pair is reinterpreted as
/// (scale, zero_point).
struct QuantizedTensor {
  Shape shape;
  QuantConfig config;
  std::vector<ElementCode> codes;
  std::vector<AsymScalePair> scales;
  std::optional<double> tensor_scale;

  GroupLayout layout() const {
    return GroupLayout(shape, config.axis, config.group_size);
  }

  /// Multiplier applied to elements of `group` with the given sign,
  /// including the tensor-wise scale when present.
  double effective_scale(std::size_t group, bool negative) const {
    const AsymScalePair& p = scales[group];
    const double s = negative ? p.neg_scale : p.pos_scale;
    return tensor_scale ? s * *tensor_scale : s;
  }

  /// Zero-point integer accessors.
  double zp_scale(std::size_t group) const { return scales[group].pos_scale; }
  double zero_point(std::size_t group) const { return scales[group].neg_scale; }
};

/// Largest unsigned level of the zero-point integer path, 2^bits - 1.
double zero_point_levels(const ElementFormat& fmt);

QuantizedTensor quantize(const Tensor& x, const QuantConfig& cfg);
Tensor dequantize(const QuantizedTensor& q);
Tensor quantize_dequantize(const Tensor& x, const QuantConfig& cfg);

}  // namespace mxemu
