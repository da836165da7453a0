// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mxemu/quantizer.hpp"
#include "mxemu/tensor.hpp"

namespace mxemu {

/// Element type byte of an MXT1 file.
enum class DType : std::uint8_t {
  kFloat32 = 0,
  kFloat64 = 1,
};

/// MXT1 tensor container:
///   "MXT1" | dtype u8 | ndim u8 | ndim x u64 dims | row-major payload,
/// all little-endian.
struct TensorFile {
  DType dtype = DType::kFloat32;
  Tensor tensor;
};

std::vector<std::uint8_t> encode_tensor_file(const Tensor& t, DType dtype);
TensorFile decode_tensor_file(std::span<const std::uint8_t> bytes);

/// Throws IoError when the file cannot be opened and DataError when its
/// contents are malformed.
TensorFile read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path, const Tensor& t,
                       DType dtype = DType::kFloat32);

/// 2-D comma-separated decimals, one row per line. Blank lines are skipped.
Tensor parse_csv(std::string_view text);

/// Loads `.csv` files through parse_csv (reported as float64) and anything
/// else as MXT1.
TensorFile load_tensor(const std::filesystem::path& path);

/// MXQ1 quantized-tensor container:
///   "MXQ1" | version u8 (1) | format name | scale mode name | group size
///   | axis i32 | ndim u8 | dims u64... | has_tensor_scale u8 | tensor scale f64
///   | group count u64 | per group: pos f64, neg f64, pos bits u32, neg bits u32
///   | one code byte per element (sign above magnitude bits; the unsigned
///     level for zero-point integers).
/// Strings are a u16 length followed by the bytes. Scale bits follow
/// scale_bits(); for zero-point integers the second pair slot holds the zero
/// point as a plain integer.
std::vector<std::uint8_t> encode_quantized(const QuantizedTensor& q);
QuantizedTensor decode_quantized(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes);

}  // namespace mxemu
