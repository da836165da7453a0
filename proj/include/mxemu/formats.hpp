// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mxemu {

enum class FormatKind { kFloat, kInt, kCodebook };

/// How the all-ones exponent field of a float format is used.
enum class SpecialEncoding {
  kNone,        // every code is finite (FP4, FP6)
  kNanOnly,     // only S.1111.111 is NaN (OCP E4M3)
  kIeeeInfNan,  // the whole top exponent is Inf/NaN (E5M2, FP16)
};

/// An element code: sign bit plus an index into the format's magnitude list.
/// For the built-in float and integer formats the index equals the raw
/// exponent|mantissa (or integer) bit pattern.
struct ElementCode {
  std::uint8_t sign = 0;
  std::uint32_t code = 0;

  bool operator==(const ElementCode&) const = default;
};

/// Bit-level description of a per-element (or per-scale) numeric format
/// together with its enumerated, sorted magnitude grid.
///
/// Instances are immutable and cheap to copy; the grid is shared.
class ElementFormat {
 public:
  /// Sign/exponent/mantissa float. Supported (E, M) pairs are
  /// (2,1), (3,2), (2,3), (4,3), (5,2) and (5,10); anything else throws
  /// UnsupportedError.
  static ElementFormat floating(int exponent_bits, int mantissa_bits,
                                bool has_subnormals = true);

  /// Sign-magnitude integer of `bits` total width; the most negative
  /// two's-complement code is excluded so the grid is symmetric.
  static ElementFormat integer(int bits);

  /// User-supplied codebook (e.g. NF4-style). `magnitudes` must be finite,
  /// non-negative, and contain 0; it is sorted and deduplicated.
  static ElementFormat codebook(std::string name,
                                std::vector<double> magnitudes);

  FormatKind kind() const;
  const std::string& name() const;
  int exponent_bits() const;
  int mantissa_bits() const;
  int total_bits() const;
  bool has_subnormals() const;
  int bias() const;
  SpecialEncoding special_encoding() const;

  /// Largest representable magnitude.
  double max_normal() const;
  /// floor(log2(max_normal)).
  int emax_elem() const;
  /// Smallest non-zero magnitude.
  double min_positive() const;

  /// Non-negative grid, ascending. Index i is the magnitude of code i.
  std::span<const double> magnitudes() const;
  /// Raw magnitude bit pattern of each code.
  std::span<const std::uint32_t> raw_bits() const;

  bool operator==(const ElementFormat& other) const;

 private:
  struct Data;
  explicit ElementFormat(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;
};

namespace formats {

const ElementFormat& fp4_e2m1();
const ElementFormat& fp6_e3m2();
const ElementFormat& fp6_e2m3();
const ElementFormat& fp8_e4m3();
const ElementFormat& fp8_e5m2();
const ElementFormat& fp16();
const ElementFormat& int4();
const ElementFormat& int8();

}  // namespace formats

/// A parsed element-format name: "fp4_e2m1", ..., "int8", each optionally
/// suffixed with "_asym".
struct FormatSpec {
  ElementFormat format;
  bool asymmetric = false;
};

FormatSpec parse_format_name(std::string_view name);
std::string format_name(const ElementFormat& fmt, bool asymmetric = false);
/// The base names accepted by parse_format_name (without "_asym").
const std::vector<std::string>& element_format_names();

/// Full signed grid, ascending, containing 0 exactly once.
std::vector<double> grid(const ElementFormat& fmt);

/// Nearest grid value, ties to the even code, saturating at +-max_normal.
/// Non-finite input throws DataError.
double round_to_grid(double v, const ElementFormat& fmt);

/// Encodes `v` under round_to_grid's rule. Zero magnitudes always get sign 0.
ElementCode encode(double v, const ElementFormat& fmt);
double decode(ElementCode code, const ElementFormat& fmt);

/// Sign bit placed above the raw magnitude bits.
std::uint32_t code_bits(ElementCode code, const ElementFormat& fmt);

/// Rounds a positive real onto a scale format's grid: nearest-even,
/// saturating at max_normal, never returning zero (underflow goes to the
/// smallest positive magnitude). Non-positive input throws DataError.
double round_real_to_fp(double v, const ElementFormat& fmt);

/// Index of the magnitude code nearest to |v| under the tie rule.
std::uint32_t nearest_magnitude_code(double magnitude, const ElementFormat& fmt);

}  // namespace mxemu
