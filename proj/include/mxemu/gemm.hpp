// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mxemu/quantizer.hpp"
#include "mxemu/tensor.hpp"

namespace mxemu {

struct AccumSpec {
  enum class Width { kFloat64Reference, kFloat32 };
  Width width = Width::kFloat64Reference;
  // Group partial sums are always combined in ascending group order.
};

/// Dot product of two 1-D quantized vectors with matching group sizes.
///
/// Each element product is code_a * code_b * scale_a(sign_a) * scale_b(sign_b).
/// Within a group pair the code products are summed per sign class
/// (++, +-, -+, --) and each class sum is multiplied by its scale product
/// once. In the float64 path every intermediate is exact for 4-bit elements
/// with FP8 or power-of-two scales, so the result equals the sequential sum
/// of dequantized products.
///
/// Throws ShapeError on length or group mismatch and UnsupportedError for
/// zero-point integer operands.
double dot(const QuantizedTensor& a, const QuantizedTensor& b,
           AccumSpec spec = {});

/// Quantizes `a` (M x K) along K per row and `b` (K x N) along K per column,
/// then emits every output element with `dot` semantics.
Tensor matmul(const Tensor& a, const Tensor& b, const QuantConfig& cfg_a,
              const QuantConfig& cfg_b, AccumSpec spec = {});

/// Same product on operands that are already quantized (a grouped along
/// axis 1, b along axis 0).
Tensor matmul(const QuantizedTensor& a, const QuantizedTensor& b,
              AccumSpec spec = {});

/// Dequantizes both operands and multiplies them in float64, summing over
/// the inner index in ascending order. Used for oracle checks.
Tensor dequantized_matmul(const QuantizedTensor& a, const QuantizedTensor& b);

}  // namespace mxemu
