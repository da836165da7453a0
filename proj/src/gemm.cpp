// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/gemm.hpp"

#include "mxemu/error.hpp"

namespace mxemu {

namespace {

// One run of groups along the reduction axis of a quantized tensor.
struct OperandLine {
  const QuantizedTensor& q;
  const GroupLayout& layout;
  std::size_t first_group;
  std::size_t groups;
};

void check_operand(const QuantizedTensor& q, const char* which) {
  if (q.config.uses_zero_point()) {
    throw UnsupportedError(std::string("operand ") + which +
                           " uses a zero-point integer format; the reduced-"
                           "precision product is defined only for "
                           "sign-magnitude formats, use dequantize then a "
                           "reference matmul");
  }
}

template <typename Acc>
Acc group_pair(const OperandLine& a, const OperandLine& b, std::size_t g) {
  const std::size_t ga = a.first_group + g;
  const std::size_t gb = b.first_group + g;
  const auto mags_a = a.q.config.format.magnitudes();
  const auto mags_b = b.q.config.format.magnitudes();

  // class_sum[sign_a][sign_b] holds the sum of |code_a| * |code_b|.
  Acc class_sum[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t p = 0; p < a.layout.group_size(); ++p) {
    const ElementCode ca = a.q.codes[a.layout.element_index(ga, p)];
    const ElementCode cb = b.q.codes[b.layout.element_index(gb, p)];
    class_sum[ca.sign][cb.sign] +=
        static_cast<Acc>(mags_a[ca.code]) * static_cast<Acc>(mags_b[cb.code]);
  }

  const AsymScalePair& sa = a.q.scales[ga];
  const AsymScalePair& sb = b.q.scales[gb];
  const Acc scale_a[2] = {static_cast<Acc>(sa.pos_scale),
                          static_cast<Acc>(sa.neg_scale)};
  const Acc scale_b[2] = {static_cast<Acc>(sb.pos_scale),
                          static_cast<Acc>(sb.neg_scale)};
  Acc partial = 0;
  for (int s_a = 0; s_a < 2; ++s_a) {
    for (int s_b = 0; s_b < 2; ++s_b) {
      const Acc term = class_sum[s_a][s_b] * (scale_a[s_a] * scale_b[s_b]);
      partial += (s_a ^ s_b) ? -term : term;
    }
  }
  if (a.q.tensor_scale) partial *= static_cast<Acc>(*a.q.tensor_scale);
  if (b.q.tensor_scale) partial *= static_cast<Acc>(*b.q.tensor_scale);
  return partial;
}

double line_dot(const OperandLine& a, const OperandLine& b, AccumSpec spec) {
  if (spec.width == AccumSpec::Width::kFloat32) {
    float acc = 0.0f;
    for (std::size_t g = 0; g < a.groups; ++g) acc += group_pair<float>(a, b, g);
    return acc;
  }
  double acc = 0.0;
  for (std::size_t g = 0; g < a.groups; ++g) acc += group_pair<double>(a, b, g);
  return acc;
}

}  // namespace

double dot(const QuantizedTensor& a, const QuantizedTensor& b, AccumSpec spec) {
  check_operand(a, "a");
  check_operand(b, "b");
  if (a.shape.size() != 1 || b.shape.size() != 1) {
    throw ShapeError("dot needs 1-D operands, got " + shape_to_string(a.shape) +
                     " and " + shape_to_string(b.shape));
  }
  if (a.shape != b.shape) {
    throw ShapeError("dot length mismatch: " + shape_to_string(a.shape) +
                     " vs " + shape_to_string(b.shape));
  }
  const GroupLayout la = a.layout();
  const GroupLayout lb = b.layout();
  if (la.group_size() != lb.group_size()) {
    throw ShapeError("dot group size mismatch: " +
                     std::to_string(la.group_size()) + " vs " +
                     std::to_string(lb.group_size()));
  }
  return line_dot({a, la, 0, la.group_count()}, {b, lb, 0, lb.group_count()},
                  spec);
}

Tensor matmul(const QuantizedTensor& a, const QuantizedTensor& b,
              AccumSpec spec) {
  check_operand(a, "a");
  check_operand(b, "b");
  if (a.shape.size() != 2 || b.shape.size() != 2) {
    throw ShapeError("matmul needs 2-D operands, got " +
                     shape_to_string(a.shape) + " and " +
                     shape_to_string(b.shape));
  }
  if (a.shape[1] != b.shape[0]) {
    throw ShapeError("matmul inner dimension mismatch: " +
                     shape_to_string(a.shape) + " x " +
                     shape_to_string(b.shape));
  }
  const GroupLayout la = a.layout();
  const GroupLayout lb = b.layout();
  if (la.axis() != 1 || lb.axis() != 0) {
    throw ShapeError("matmul operands must be grouped along the inner axis");
  }
  if (la.group_size() != lb.group_size()) {
    throw ShapeError("matmul group size mismatch: " +
                     std::to_string(la.group_size()) + " vs " +
                     std::to_string(lb.group_size()));
  }
  const std::size_t m = a.shape[0];
  const std::size_t n = b.shape[1];
  const std::size_t per_line = a.shape[1] / la.group_size();
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const OperandLine row{a, la, i * per_line, per_line};
    for (std::size_t j = 0; j < n; ++j) {
      const OperandLine col{b, lb, j * per_line, per_line};
      out.data[i * n + j] = line_dot(row, col, spec);
    }
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b, const QuantConfig& cfg_a,
              const QuantConfig& cfg_b, AccumSpec spec) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul needs 2-D operands, got " +
                     shape_to_string(a.shape) + " and " +
                     shape_to_string(b.shape));
  }
  if (a.shape[1] != b.shape[0]) {
    throw ShapeError("matmul inner dimension mismatch: " +
                     shape_to_string(a.shape) + " x " +
                     shape_to_string(b.shape));
  }
  QuantConfig ca = cfg_a;
  QuantConfig cb = cfg_b;
  ca.axis = 1;
  cb.axis = 0;
  return matmul(quantize(a, ca), quantize(b, cb), spec);
}

Tensor dequantized_matmul(const QuantizedTensor& a, const QuantizedTensor& b) {
  const Tensor da = dequantize(a);
  const Tensor db = dequantize(b);
  if (da.rank() != 2 || db.rank() != 2 || da.shape[1] != db.shape[0]) {
    throw ShapeError("dequantized_matmul shape mismatch: " +
                     shape_to_string(da.shape) + " x " +
                     shape_to_string(db.shape));
  }
  const std::size_t m = da.shape[0];
  const std::size_t k = da.shape[1];
  const std::size_t n = db.shape[1];
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        acc += da.data[i * k + t] * db.data[t * n + j];
      }
      out.data[i * n + j] = acc;
    }
  }
  return out;
}

}  // namespace mxemu
