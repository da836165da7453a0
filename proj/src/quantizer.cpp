// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/quantizer.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

#include "mxemu/error.hpp"

namespace mxemu {

GroupSize GroupSize::of(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) {
    throw ConfigError("group size must be a power of two, got " +
                      std::to_string(n));
  }
  return GroupSize(n);
}

GroupSize GroupSize::parse(std::string_view text) {
  if (text == "row" || text == "-1") return row();
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid group size '" + std::string(text) +
                      "'; expected 'row' or a power of two");
  }
  return of(n);
}

std::string GroupSize::to_string() const {
  return is_row() ? std::string("row") : std::to_string(n_);
}

std::string QuantConfig::describe() const {
  return format_name(format, asymmetric) + "/" + scale_mode.name() + "/gs" +
         group_size.to_string();
}

void QuantConfig::validate() const {
  if (scale_mode.kind() == ScaleMode::Kind::kDoubleScale) {
    if (group_size.is_row() ||
        (group_size.value() != 16 && group_size.value() != 32)) {
      throw ConfigError("nvfp4_double scaling needs group size 16 or 32, got " +
                        group_size.to_string());
    }
    if (uses_zero_point()) {
      throw ConfigError("nvfp4_double scaling is not defined for zero-point "
                        "integer formats");
    }
  }
}

GroupLayout::GroupLayout(const Shape& shape, int axis, GroupSize group_size) {
  if (shape.empty()) throw ShapeError("cannot group a rank-0 tensor");
  axis_ = normalize_axis(axis, shape.size());
  for (std::size_t d = 0; d < axis_; ++d) outer_ *= shape[d];
  extent_ = shape[axis_];
  for (std::size_t d = axis_ + 1; d < shape.size(); ++d) inner_ *= shape[d];
  group_size_ = group_size.resolve(extent_);
  if (group_size_ == 0 || extent_ % group_size_ != 0) {
    throw ConfigError("group size " + group_size.to_string() +
                      " does not divide extent " + std::to_string(extent_) +
                      " of axis " + std::to_string(axis_));
  }
  per_line_ = extent_ / group_size_;
}

void GroupLayout::gather(std::span<const double> data, std::size_t group,
                         std::vector<double>& out) const {
  out.resize(group_size_);
  for (std::size_t p = 0; p < group_size_; ++p) {
    out[p] = data[element_index(group, p)];
  }
}

double zero_point_levels(const ElementFormat& fmt) {
  return std::ldexp(1.0, fmt.total_bits()) - 1.0;
}

namespace {

void check_finite(const Tensor& x) {
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    if (std::isnan(x.data[i])) {
      throw DataError("NaN at element " + std::to_string(i));
    }
    if (!std::isfinite(x.data[i])) {
      throw DataError("non-finite value at element " + std::to_string(i));
    }
  }
}

ElementCode encode_scaled(double v, double pos, double neg,
                          const ElementFormat& fmt) {
  if (v == 0.0) return {};
  return encode(v > 0.0 ? v / pos : v / neg, fmt);
}

// Zero-point integer group: levels 0..2^k-1 covering [min(g, 0), max(g, 0)].
AsymScalePair zero_point_group(std::span<const double> g, const QuantConfig& cfg,
                               std::span<ElementCode> codes_out) {
  const double levels = zero_point_levels(cfg.format);
  const ScaleTarget target{levels, std::ilogb(levels)};
  double lo = 0.0;
  double hi = 0.0;
  for (double v : g) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = group_scale(hi - lo, cfg.scale_mode, target);
  const double zp = std::clamp(std::nearbyint(-lo / scale), 0.0, levels);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double q = std::clamp(std::nearbyint(g[p] / scale) + zp, 0.0, levels);
    codes_out[p] = ElementCode{0, static_cast<std::uint32_t>(q)};
  }
  return {scale, zp};
}

}  // namespace

QuantizedTensor quantize(const Tensor& x, const QuantConfig& cfg) {
  cfg.validate();
  const GroupLayout layout(x.shape, cfg.axis, cfg.group_size);
  check_finite(x);

  QuantizedTensor q;
  q.shape = x.shape;
  q.config = cfg;
  q.codes.assign(x.size(), ElementCode{});
  q.scales.resize(layout.group_count());

  const ElementFormat& fmt = cfg.format;
  const bool double_scale =
      cfg.scale_mode.kind() == ScaleMode::Kind::kDoubleScale;
  if (double_scale) {
    double tensor_amax = 0.0;
    for (double v : x.data) tensor_amax = std::max(tensor_amax, std::fabs(v));
    q.tensor_scale = nvfp4_scales(tensor_amax, {}, fmt).tensor_scale;
  }

  std::vector<double> g;
  std::vector<ElementCode> gcodes(layout.group_size());
  for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
    layout.gather(x.data, gi, g);

    AsymScalePair pair;
    if (cfg.uses_zero_point()) {
      pair = zero_point_group(g, cfg, gcodes);
    } else {
      double hi = 0.0;
      double lo = 0.0;
      for (double v : g) {
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
      const double pos_amax = cfg.asymmetric ? hi : std::max(hi, -lo);
      const double neg_amax = cfg.asymmetric ? -lo : pos_amax;
      if (double_scale) {
        pair.pos_scale = double_scale_group(pos_amax, *q.tensor_scale, fmt);
        pair.neg_scale = double_scale_group(neg_amax, *q.tensor_scale, fmt);
      } else {
        pair.pos_scale = group_scale(pos_amax, cfg.scale_mode, fmt);
        pair.neg_scale = cfg.asymmetric
                             ? group_scale(neg_amax, cfg.scale_mode, fmt)
                             : pair.pos_scale;
      }
      q.scales[gi] = pair;
      const double pos = q.effective_scale(gi, false);
      const double neg = q.effective_scale(gi, true);
      for (std::size_t p = 0; p < g.size(); ++p) {
        gcodes[p] = encode_scaled(g[p], pos, neg, fmt);
      }
    }
    q.scales[gi] = pair;
    for (std::size_t p = 0; p < g.size(); ++p) {
      q.codes[layout.element_index(gi, p)] = gcodes[p];
    }
  }
  return q;
}

Tensor dequantize(const QuantizedTensor& q) {
  const GroupLayout layout = q.layout();
  Tensor out = Tensor::zeros(q.shape);
  const ElementFormat& fmt = q.config.format;
  const bool zp_path = q.config.uses_zero_point();
  for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
    for (std::size_t p = 0; p < layout.group_size(); ++p) {
      const std::size_t idx = layout.element_index(gi, p);
      const ElementCode c = q.codes[idx];
      double v;
      if (zp_path) {
        v = (static_cast<double>(c.code) - q.zero_point(gi)) * q.zp_scale(gi);
      } else {
        const double mag = fmt.magnitudes()[c.code];
        const AsymScalePair& s = q.scales[gi];
        v = mag * (c.sign ? s.neg_scale : s.pos_scale);
        if (q.tensor_scale) v *= *q.tensor_scale;
        if (c.sign) v = -v;
      }
      // Normalise -0 so repeated passes stay bit-identical.
      out.data[idx] = v == 0.0 ? 0.0 : v;
    }
  }
  return out;
}

Tensor quantize_dequantize(const Tensor& x, const QuantConfig& cfg) {
  return dequantize(quantize(x, cfg));
}

}  // namespace mxemu
