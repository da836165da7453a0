// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/formats.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mxemu/error.hpp"

namespace mxemu {

struct ElementFormat::Data {
  FormatKind kind;
  std::string name;
  int exponent_bits = 0;
  int mantissa_bits = 0;
  int total_bits = 0;
  bool has_subnormals = true;
  int bias = 0;
  SpecialEncoding special = SpecialEncoding::kNone;
  std::vector<double> magnitudes;
  std::vector<std::uint32_t> raw_bits;
};

namespace {

SpecialEncoding special_for(int e, int m) {
  if (e == 4 && m == 3) return SpecialEncoding::kNanOnly;
  if (e == 5) return SpecialEncoding::kIeeeInfNan;
  return SpecialEncoding::kNone;
}

std::string float_name(int e, int m) {
  const int bits = 1 + e + m;
  return "fp" + std::to_string(bits) + "_e" + std::to_string(e) + "m" +
         std::to_string(m);
}

}  // namespace

ElementFormat::ElementFormat(std::shared_ptr<const Data> data)
    : data_(std::move(data)) {}

ElementFormat ElementFormat::floating(int exponent_bits, int mantissa_bits,
                                      bool has_subnormals) {
  static constexpr std::pair<int, int> kSupported[] = {
      {2, 1}, {3, 2}, {2, 3}, {4, 3}, {5, 2}, {5, 10}};
  const bool ok = std::any_of(std::begin(kSupported), std::end(kSupported),
                              [&](const auto& p) {
                                return p.first == exponent_bits &&
                                       p.second == mantissa_bits;
                              });
  if (!ok) {
    throw UnsupportedError("unsupported float format E" +
                           std::to_string(exponent_bits) + "M" +
                           std::to_string(mantissa_bits));
  }

  auto d = std::make_shared<Data>();
  d->kind = FormatKind::kFloat;
  d->exponent_bits = exponent_bits;
  d->mantissa_bits = mantissa_bits;
  d->total_bits = 1 + exponent_bits + mantissa_bits;
  d->has_subnormals = has_subnormals;
  d->bias = (1 << (exponent_bits - 1)) - 1;
  d->special = special_for(exponent_bits, mantissa_bits);
  d->name = exponent_bits == 5 && mantissa_bits == 10
                ? std::string("fp16")
                : float_name(exponent_bits, mantissa_bits);

  const std::uint32_t mag_codes = 1u << (exponent_bits + mantissa_bits);
  const std::uint32_t mant_mask = (1u << mantissa_bits) - 1;
  std::uint32_t end = mag_codes;
  switch (d->special) {
    case SpecialEncoding::kNone:
      break;
    case SpecialEncoding::kNanOnly:
      end = mag_codes - 1;
      break;
    case SpecialEncoding::kIeeeInfNan:
      end = mag_codes - (1u << mantissa_bits);
      break;
  }
  for (std::uint32_t c = 0; c < end; ++c) {
    const int e = static_cast<int>(c >> mantissa_bits);
    const double m = static_cast<double>(c & mant_mask);
    double v;
    if (e == 0) {
      if (!has_subnormals && (c & mant_mask) != 0) continue;
      v = std::ldexp(m, 1 - d->bias - mantissa_bits);
    } else {
      v = std::ldexp(std::ldexp(1.0, mantissa_bits) + m,
                     e - d->bias - mantissa_bits);
    }
    d->magnitudes.push_back(v);
    d->raw_bits.push_back(c);
  }
  return ElementFormat(std::move(d));
}

ElementFormat ElementFormat::integer(int bits) {
  if (bits < 2 || bits > 16) {
    throw UnsupportedError("unsupported integer width " + std::to_string(bits));
  }
  auto d = std::make_shared<Data>();
  d->kind = FormatKind::kInt;
  d->total_bits = bits;
  d->name = "int" + std::to_string(bits);
  const std::uint32_t max_mag = (1u << (bits - 1)) - 1;
  for (std::uint32_t c = 0; c <= max_mag; ++c) {
    d->magnitudes.push_back(static_cast<double>(c));
    d->raw_bits.push_back(c);
  }
  return ElementFormat(std::move(d));
}

ElementFormat ElementFormat::codebook(std::string name,
                                      std::vector<double> magnitudes) {
  for (double m : magnitudes) {
    if (!std::isfinite(m) || m < 0.0) {
      throw ConfigError("codebook '" + name +
                        "' magnitudes must be finite and non-negative");
    }
  }
  std::sort(magnitudes.begin(), magnitudes.end());
  magnitudes.erase(std::unique(magnitudes.begin(), magnitudes.end()),
                   magnitudes.end());
  if (magnitudes.size() < 2 || magnitudes.front() != 0.0) {
    throw ConfigError("codebook '" + name +
                      "' needs 0 and at least one positive magnitude");
  }
  auto d = std::make_shared<Data>();
  d->kind = FormatKind::kCodebook;
  d->name = std::move(name);
  std::uint32_t n = static_cast<std::uint32_t>(magnitudes.size());
  int bits = 1;
  while ((1u << bits) < n) ++bits;
  d->total_bits = bits + 1;
  d->magnitudes = std::move(magnitudes);
  for (std::uint32_t c = 0; c < n; ++c) d->raw_bits.push_back(c);
  return ElementFormat(std::move(d));
}

FormatKind ElementFormat::kind() const { return data_->kind; }
const std::string& ElementFormat::name() const { return data_->name; }
int ElementFormat::exponent_bits() const { return data_->exponent_bits; }
int ElementFormat::mantissa_bits() const { return data_->mantissa_bits; }
int ElementFormat::total_bits() const { return data_->total_bits; }
bool ElementFormat::has_subnormals() const { return data_->has_subnormals; }
int ElementFormat::bias() const { return data_->bias; }
SpecialEncoding ElementFormat::special_encoding() const {
  return data_->special;
}

double ElementFormat::max_normal() const { return data_->magnitudes.back(); }

int ElementFormat::emax_elem() const { return std::ilogb(max_normal()); }

double ElementFormat::min_positive() const { return data_->magnitudes[1]; }

std::span<const double> ElementFormat::magnitudes() const {
  return data_->magnitudes;
}

std::span<const std::uint32_t> ElementFormat::raw_bits() const {
  return data_->raw_bits;
}

bool ElementFormat::operator==(const ElementFormat& other) const {
  if (data_ == other.data_) return true;
  return data_->kind == other.data_->kind && data_->name == other.data_->name &&
         data_->has_subnormals == other.data_->has_subnormals &&
         data_->magnitudes == other.data_->magnitudes;
}

namespace formats {

const ElementFormat& fp4_e2m1() {
  static const ElementFormat f = ElementFormat::floating(2, 1);
  return f;
}
const ElementFormat& fp6_e3m2() {
  static const ElementFormat f = ElementFormat::floating(3, 2);
  return f;
}
const ElementFormat& fp6_e2m3() {
  static const ElementFormat f = ElementFormat::floating(2, 3);
  return f;
}
const ElementFormat& fp8_e4m3() {
  static const ElementFormat f = ElementFormat::floating(4, 3);
  return f;
}
const ElementFormat& fp8_e5m2() {
  static const ElementFormat f = ElementFormat::floating(5, 2);
  return f;
}
const ElementFormat& fp16() {
  static const ElementFormat f = ElementFormat::floating(5, 10);
  return f;
}
const ElementFormat& int4() {
  static const ElementFormat f = ElementFormat::integer(4);
  return f;
}
const ElementFormat& int8() {
  static const ElementFormat f = ElementFormat::integer(8);
  return f;
}

}  // namespace formats

const std::vector<std::string>& element_format_names() {
  static const std::vector<std::string> names = {
      "fp4_e2m1", "fp6_e3m2", "fp6_e2m3", "fp8_e4m3",
      "fp8_e5m2", "int4",     "int8"};
  return names;
}

FormatSpec parse_format_name(std::string_view name) {
  constexpr std::string_view kAsym = "_asym";
  bool asym = false;
  if (name.size() > kAsym.size() &&
      name.substr(name.size() - kAsym.size()) == kAsym) {
    asym = true;
    name.remove_suffix(kAsym.size());
  }
  if (name == "fp4_e2m1") return {formats::fp4_e2m1(), asym};
  if (name == "fp6_e3m2") return {formats::fp6_e3m2(), asym};
  if (name == "fp6_e2m3") return {formats::fp6_e2m3(), asym};
  if (name == "fp8_e4m3") return {formats::fp8_e4m3(), asym};
  if (name == "fp8_e5m2") return {formats::fp8_e5m2(), asym};
  if (name == "int4") return {formats::int4(), asym};
  if (name == "int8") return {formats::int8(), asym};

  std::string valid;
  for (const auto& n : element_format_names()) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw ConfigError("unknown format '" + std::string(name) +
                    (asym ? "_asym" : "") + "'; valid formats: " + valid +
                    " (optionally suffixed with _asym)");
}

std::string format_name(const ElementFormat& fmt, bool asymmetric) {
  return fmt.name() + (asymmetric ? "_asym" : "");
}

std::vector<double> grid(const ElementFormat& fmt) {
  const auto mags = fmt.magnitudes();
  std::vector<double> out;
  out.reserve(2 * mags.size() - 1);
  for (auto it = mags.rbegin(); it != mags.rend() - 1; ++it) out.push_back(-*it);
  out.insert(out.end(), mags.begin(), mags.end());
  return out;
}

std::uint32_t nearest_magnitude_code(double magnitude, const ElementFormat& fmt) {
  const auto mags = fmt.magnitudes();
  const auto raw = fmt.raw_bits();
  if (magnitude >= mags.back()) {
    return static_cast<std::uint32_t>(mags.size() - 1);
  }
  // First grid point strictly above the input; the answer is it or its
  // predecessor.
  const auto upper_it = std::upper_bound(mags.begin(), mags.end(), magnitude);
  const auto hi = static_cast<std::uint32_t>(upper_it - mags.begin());
  const std::uint32_t lo = hi - 1;
  if (mags[lo] == magnitude) return lo;
  // Midpoint of two dyadic neighbours is exact in double.
  const double mid = mags[lo] + (mags[hi] - mags[lo]) / 2;
  if (magnitude < mid) return lo;
  if (magnitude > mid) return hi;
  return (raw[lo] & 1u) == 0 ? lo : hi;
}

ElementCode encode(double v, const ElementFormat& fmt) {
  if (!std::isfinite(v)) {
    throw DataError("cannot encode non-finite value into " + fmt.name());
  }
  ElementCode out;
  out.code = nearest_magnitude_code(std::fabs(v), fmt);
  out.sign = (out.code != 0 && std::signbit(v)) ? 1 : 0;
  return out;
}

double decode(ElementCode code, const ElementFormat& fmt) {
  const auto mags = fmt.magnitudes();
  if (code.code >= mags.size()) {
    throw DataError("code " + std::to_string(code.code) + " out of range for " +
                    fmt.name());
  }
  const double m = mags[code.code];
  return code.sign ? -m : m;
}

std::uint32_t code_bits(ElementCode code, const ElementFormat& fmt) {
  return (static_cast<std::uint32_t>(code.sign) << (fmt.total_bits() - 1)) |
         fmt.raw_bits()[code.code];
}

double round_to_grid(double v, const ElementFormat& fmt) {
  return decode(encode(v, fmt), fmt);
}

double round_real_to_fp(double v, const ElementFormat& fmt) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DataError("scale rounding needs a finite positive value");
  }
  const std::uint32_t c = nearest_magnitude_code(v, fmt);
  return c == 0 ? fmt.min_positive() : fmt.magnitudes()[c];
}

}  // namespace mxemu
