// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mxemu/formats.hpp"

namespace mxemu {

/// How a group's shared scale is derived from its absolute maximum.
class ScaleMode {
 public:
  enum class Kind {
    kPotFloor,     // 2^(floor(log2 amax) - emax_elem), MX default
    kPotRound,     // 2^(round(log2 amax) - emax_elem)
    kFpScale,      // amax / max_normal rounded onto an FP8/FP16 grid
    kFp32Exact,    // amax / max_normal rounded to binary32
    kDoubleScale,  // tensor-wise real scale times group-wise E4M3 scale
  };

  static ScaleMode pot_floor() { return ScaleMode(Kind::kPotFloor); }
  static ScaleMode pot_round() { return ScaleMode(Kind::kPotRound); }
  static ScaleMode fp_scale(const ElementFormat& scale_format);
  static ScaleMode fp32() { return ScaleMode(Kind::kFp32Exact); }
  static ScaleMode nvfp4_double() { return ScaleMode(Kind::kDoubleScale); }

  /// Accepts "pot_floor", "pot_round", "fp8e4m3", "fp8e5m2", "fp16", "fp32"
  /// and "nvfp4_double".
  static ScaleMode from_name(std::string_view name);
  static const std::vector<std::string>& names();

  Kind kind() const { return kind_; }
  /// Encoding of the scale for kFpScale (and the inner scale of
  /// kDoubleScale).
  const std::optional<ElementFormat>& scale_format() const { return fmt_; }
  std::string name() const;

  bool is_pot() const {
    return kind_ == Kind::kPotFloor || kind_ == Kind::kPotRound;
  }

  bool operator==(const ScaleMode& other) const {
    return kind_ == other.kind_ && fmt_ == other.fmt_;
  }

 private:
  explicit ScaleMode(Kind k, std::optional<ElementFormat> fmt = std::nullopt)
      : kind_(k), fmt_(std::move(fmt)) {}

  Kind kind_;
  std::optional<ElementFormat> fmt_;
};

/// Positive and negative shared scales of one group. Symmetric quantization
/// uses pos_scale == neg_scale.
struct AsymScalePair {
  double pos_scale = 1.0;
  double neg_scale = 1.0;

  bool operator==(const AsymScalePair&) const = default;
};

/// Grid ceiling and exponent that a scale maps the group maximum onto. For
/// sign-magnitude formats this is (max_normal, emax_elem); the zero-point
/// integer path uses the unsigned code range instead.
struct ScaleTarget {
  double max_value;
  int emax;

  static ScaleTarget of(const ElementFormat& fmt) {
    return {fmt.max_normal(), fmt.emax_elem()};
  }
};

/// Scale used for an all-zero group under power-of-two modes:
/// 2^(-emax - 126).
double degenerate_pot_scale(int emax);
inline double degenerate_pot_scale(const ElementFormat& fmt) {
  return degenerate_pot_scale(fmt.emax_elem());
}

double pot_floor_scale(double amax, const ElementFormat& fmt);
double pot_round_scale(double amax, const ElementFormat& fmt);
double fp_scale(double amax, const ElementFormat& fmt,
                const ElementFormat& scale_fmt);

/// Scalar scale for any single-level mode. kDoubleScale is rejected here
/// (it needs tensor context; see nvfp4_scales).
double group_scale(double amax, const ScaleMode& mode, ScaleTarget target);
inline double group_scale(double amax, const ScaleMode& mode,
                          const ElementFormat& fmt) {
  return group_scale(amax, mode, ScaleTarget::of(fmt));
}

/// Separate scales from the positive maximum and the negative minimum of
/// `group` (zero included on both sides).
AsymScalePair asym_scales(std::span<const double> group, const ScaleMode& mode,
                          const ElementFormat& fmt);

/// Two-level NVFP4-style scaling.
struct DoubleScales {
  double tensor_scale = 0.0;
  std::vector<double> group_scales;  // on the E4M3 grid
};

/// Largest value of the inner (E4M3) scale grid, 448.
inline constexpr double kDoubleScaleInnerMax = 448.0;

/// tensor_scale = tensor_amax / (448 * max_normal(fmt)); each group scale is
/// group_amax / (max_normal(fmt) * tensor_scale) rounded to E4M3.
DoubleScales nvfp4_scales(double tensor_amax,
                          std::span<const double> group_amaxes,
                          const ElementFormat& fmt = formats::fp4_e2m1());

/// Inner E4M3 scale for one group given an already computed tensor scale.
double double_scale_group(double group_amax, double tensor_scale,
                          const ElementFormat& fmt);

/// Encoded bit pattern of a scale under `mode`, for audit output:
/// the unbiased exponent as a two's-complement int32 for PoT modes, raw
/// FP8/FP16 bits for FP modes and the inner scale of kDoubleScale, binary32
/// bits for kFp32Exact.
std::uint32_t scale_bits(double scale, const ScaleMode& mode);

}  // namespace mxemu
