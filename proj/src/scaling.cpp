// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/scaling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "mxemu/error.hpp"

namespace mxemu {

namespace {

constexpr double kFloatDenormMin =
    static_cast<double>(std::numeric_limits<float>::denorm_min());

double pot_from_exponent(int exponent, int emax) {
  const double s = std::ldexp(1.0, exponent - emax);
  return s > 0.0 ? s : degenerate_pot_scale(emax);
}

double pot_floor(double amax, int emax) {
  if (!(amax > 0.0)) return degenerate_pot_scale(emax);
  return pot_from_exponent(std::ilogb(amax), emax);
}

// round(log2(amax)) with ties up. log2(amax) = e + log2(m) for m in [1, 2),
// so the exponent rounds up exactly when m^2 >= 2.
double pot_round(double amax, int emax) {
  if (!(amax > 0.0)) return degenerate_pot_scale(emax);
  const int e = std::ilogb(amax);
  const double m = std::ldexp(amax, -e);
  const double sq = m * m;
  const double sq_err = std::fma(m, m, -sq);
  const bool up = sq > 2.0 || (sq == 2.0 && sq_err >= 0.0);
  return pot_from_exponent(up ? e + 1 : e, emax);
}

double fp32_round(double v) {
  if (!(v > 0.0)) return kFloatDenormMin;
  const float f = static_cast<float>(
      std::min(v, static_cast<double>(std::numeric_limits<float>::max())));
  return f > 0.0f ? static_cast<double>(f) : kFloatDenormMin;
}

}  // namespace

ScaleMode ScaleMode::fp_scale(const ElementFormat& scale_format) {
  if (scale_format.kind() != FormatKind::kFloat) {
    throw ConfigError("FP scale mode needs a float scale format");
  }
  return ScaleMode(Kind::kFpScale, scale_format);
}

const std::vector<std::string>& ScaleMode::names() {
  static const std::vector<std::string> n = {
      "pot_floor", "pot_round", "fp8e4m3",     "fp8e5m2",
      "fp16",      "fp32",      "nvfp4_double"};
  return n;
}

ScaleMode ScaleMode::from_name(std::string_view name) {
  if (name == "pot_floor") return pot_floor();
  if (name == "pot_round") return pot_round();
  if (name == "fp8e4m3") return fp_scale(formats::fp8_e4m3());
  if (name == "fp8e5m2") return fp_scale(formats::fp8_e5m2());
  if (name == "fp16") return fp_scale(formats::fp16());
  if (name == "fp32") return fp32();
  if (name == "nvfp4_double") return nvfp4_double();
  std::string valid;
  for (const auto& n : names()) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw ConfigError("unknown scale mode '" + std::string(name) +
                    "'; valid modes: " + valid);
}

std::string ScaleMode::name() const {
  switch (kind_) {
    case Kind::kPotFloor:
      return "pot_floor";
    case Kind::kPotRound:
      return "pot_round";
    case Kind::kFpScale:
      if (*fmt_ == formats::fp8_e4m3()) return "fp8e4m3";
      if (*fmt_ == formats::fp8_e5m2()) return "fp8e5m2";
      if (*fmt_ == formats::fp16()) return "fp16";
      return "fp:" + fmt_->name();
    case Kind::kFp32Exact:
      return "fp32";
    case Kind::kDoubleScale:
      return "nvfp4_double";
  }
  return "?";
}

double degenerate_pot_scale(int emax) { return std::ldexp(1.0, -emax - 126); }

double pot_floor_scale(double amax, const ElementFormat& fmt) {
  return pot_floor(amax, fmt.emax_elem());
}

double pot_round_scale(double amax, const ElementFormat& fmt) {
  return pot_round(amax, fmt.emax_elem());
}

double fp_scale(double amax, const ElementFormat& fmt,
                const ElementFormat& scale_fmt) {
  const double ideal = amax / fmt.max_normal();
  if (!(ideal > 0.0)) return scale_fmt.min_positive();
  return round_real_to_fp(ideal, scale_fmt);
}

double group_scale(double amax, const ScaleMode& mode, ScaleTarget target) {
  if (!std::isfinite(amax) || amax < 0.0) {
    throw DataError("group maximum must be finite and non-negative");
  }
  switch (mode.kind()) {
    case ScaleMode::Kind::kPotFloor:
      return pot_floor(amax, target.emax);
    case ScaleMode::Kind::kPotRound:
      return pot_round(amax, target.emax);
    case ScaleMode::Kind::kFpScale: {
      const ElementFormat& sf = *mode.scale_format();
      const double ideal = amax / target.max_value;
      return ideal > 0.0 ? round_real_to_fp(ideal, sf) : sf.min_positive();
    }
    case ScaleMode::Kind::kFp32Exact:
      return fp32_round(amax / target.max_value);
    case ScaleMode::Kind::kDoubleScale:
      break;
  }
  throw ConfigError("double scaling needs tensor context; use nvfp4_scales");
}

AsymScalePair asym_scales(std::span<const double> group, const ScaleMode& mode,
                          const ElementFormat& fmt) {
  if (group.empty()) throw DataError("asym_scales on an empty group");
  double hi = 0.0;
  double lo = 0.0;
  for (double v : group) {
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  return {group_scale(hi, mode, fmt), group_scale(-lo, mode, fmt)};
}

double double_scale_group(double group_amax, double tensor_scale,
                          const ElementFormat& fmt) {
  const ElementFormat& inner = formats::fp8_e4m3();
  const double ideal = group_amax / (fmt.max_normal() * tensor_scale);
  return ideal > 0.0 ? round_real_to_fp(ideal, inner) : inner.min_positive();
}

DoubleScales nvfp4_scales(double tensor_amax,
                          std::span<const double> group_amaxes,
                          const ElementFormat& fmt) {
  if (!std::isfinite(tensor_amax) || tensor_amax < 0.0) {
    throw DataError("tensor maximum must be finite and non-negative");
  }
  DoubleScales out;
  out.tensor_scale = tensor_amax > 0.0
                         ? tensor_amax / (kDoubleScaleInnerMax * fmt.max_normal())
                         : kFloatDenormMin;
  out.group_scales.reserve(group_amaxes.size());
  for (double g : group_amaxes) {
    if (g > tensor_amax) {
      throw DataError("group maximum exceeds tensor maximum");
    }
    out.group_scales.push_back(double_scale_group(g, out.tensor_scale, fmt));
  }
  return out;
}

std::uint32_t scale_bits(double scale, const ScaleMode& mode) {
  switch (mode.kind()) {
    case ScaleMode::Kind::kPotFloor:
    case ScaleMode::Kind::kPotRound:
      return static_cast<std::uint32_t>(std::ilogb(scale));
    case ScaleMode::Kind::kFpScale: {
      const ElementFormat& sf = *mode.scale_format();
      return code_bits(encode(scale, sf), sf);
    }
    case ScaleMode::Kind::kFp32Exact:
      return std::bit_cast<std::uint32_t>(static_cast<float>(scale));
    case ScaleMode::Kind::kDoubleScale:
      return code_bits(encode(scale, formats::fp8_e4m3()), formats::fp8_e4m3());
  }
  return 0;
}

}  // namespace mxemu
