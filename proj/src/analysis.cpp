// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "mxemu/error.hpp"

namespace mxemu {

GroupStats sample_stats(std::span<const double> values) {
  GroupStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  if (m2 > 0.0) s.kurtosis = m4 / (m2 * m2);
  return s;
}

std::vector<GroupStats> group_stats(const Tensor& x, GroupSize group_size,
                                    int axis) {
  const GroupLayout layout(x.shape, axis, group_size);
  std::vector<GroupStats> out;
  out.reserve(layout.group_count());
  std::vector<double> g;
  for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
    layout.gather(x.data, gi, g);
    GroupStats s = sample_stats(g);
    s.group_index = gi;
    out.push_back(s);
  }
  return out;
}

FiveNumber five_number(std::vector<double> values) {
  if (values.empty()) throw DataError("cannot summarise an empty sample");
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
  };
  return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75),
          values.back()};
}

StatsSummary stats_summary(const std::vector<GroupStats>& stats) {
  if (stats.empty()) throw DataError("no groups to summarise");
  StatsSummary out;
  out.groups = stats.size();
  std::vector<double> means;
  std::vector<double> kurt;
  for (const auto& s : stats) {
    means.push_back(s.mean);
    if (s.kurtosis) {
      kurt.push_back(*s.kurtosis);
    } else {
      ++out.undefined_kurtosis;
    }
  }
  if (kurt.empty()) {
    throw DataError("every group has zero variance; kurtosis summary is empty");
  }
  out.mean = five_number(std::move(means));
  out.kurtosis = five_number(std::move(kurt));
  return out;
}

double mse(const Tensor& x, const Tensor& y) {
  if (x.shape != y.shape) {
    throw ShapeError("mse shape mismatch: " + shape_to_string(x.shape) +
                     " vs " + shape_to_string(y.shape));
  }
  if (x.data.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double d = x.data[i] - y.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(x.data.size());
}

namespace {

void finish(ErrorReport& r) {
  for (const auto& g : r.per_group) {
    r.clamp_sq_error += g.clamp_sq_error;
    r.round_sq_error += g.round_sq_error;
    r.clamped_count += g.clamped;
  }
  r.total_sq_error = r.clamp_sq_error + r.round_sq_error;
  r.mse = r.element_count
              ? r.total_sq_error / static_cast<double>(r.element_count)
              : 0.0;
}

}  // namespace

ErrorReport error_decomposition(const Tensor& x, const QuantConfig& cfg) {
  const QuantizedTensor q = quantize(x, cfg);
  const Tensor y = dequantize(q);
  const GroupLayout layout = q.layout();
  const double max_normal = cfg.format.max_normal();
  const double levels = zero_point_levels(cfg.format);
  const bool zp_path = cfg.uses_zero_point();

  ErrorReport r;
  r.element_count = x.size();
  r.per_group.resize(layout.group_count());
  for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
    GroupError& ge = r.per_group[gi];
    for (std::size_t p = 0; p < layout.group_size(); ++p) {
      const std::size_t idx = layout.element_index(gi, p);
      const double v = x.data[idx];
      bool clamped;
      if (zp_path) {
        const double t = v / q.zp_scale(gi) + q.zero_point(gi);
        clamped = t > levels || t < 0.0;
      } else {
        clamped = v != 0.0 &&
                  std::fabs(v) / q.effective_scale(gi, v < 0.0) > max_normal;
      }
      const double d = v - y.data[idx];
      if (clamped) {
        ge.clamp_sq_error += d * d;
        ++ge.clamped;
      } else {
        ge.round_sq_error += d * d;
      }
    }
  }
  finish(r);
  return r;
}

ErrorReport rounding_only_report(const Tensor& x, const Tensor& y,
                                 GroupSize group_size, int axis) {
  if (x.shape != y.shape) {
    throw ShapeError("report shape mismatch: " + shape_to_string(x.shape) +
                     " vs " + shape_to_string(y.shape));
  }
  const GroupLayout layout(x.shape, axis, group_size);
  ErrorReport r;
  r.element_count = x.size();
  r.per_group.resize(layout.group_count());
  for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
    for (std::size_t p = 0; p < layout.group_size(); ++p) {
      const std::size_t idx = layout.element_index(gi, p);
      const double d = x.data[idx] - y.data[idx];
      r.per_group[gi].round_sq_error += d * d;
    }
  }
  finish(r);
  return r;
}

}  // namespace mxemu
