// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include "mxemu/lloydmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mxemu/error.hpp"
#include "mxemu/random.hpp"

namespace mxemu {

void LloydConfig::validate() const {
  if (n_levels < 2) throw ConfigError("Lloyd-Max needs at least 2 levels");
  if (n_clusters < 1) throw ConfigError("Lloyd-Max needs at least 1 cluster");
}

Codebook Codebook::from_levels(std::vector<double> levels) {
  if (levels.empty()) throw ConfigError("codebook needs at least one level");
  std::sort(levels.begin(), levels.end());
  Codebook cb;
  cb.levels = std::move(levels);
  cb.boundaries.reserve(cb.levels.size() - 1);
  for (std::size_t k = 0; k + 1 < cb.levels.size(); ++k) {
    cb.boundaries.push_back(cb.levels[k] +
                            (cb.levels[k + 1] - cb.levels[k]) / 2);
  }
  return cb;
}

std::size_t Codebook::index_of(double v) const {
  return static_cast<std::size_t>(
      std::lower_bound(boundaries.begin(), boundaries.end(), v) -
      boundaries.begin());
}

double Codebook::mse(std::span<const double> values) const {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) {
    const double d = v - quantize(v);
    sum += d * d;
  }
  return sum / static_cast<double>(values.size());
}

namespace {

double sq_dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

std::size_t nearest_centroid(const std::array<double, 2>& p,
                             const std::vector<std::array<double, 2>>& c) {
  std::size_t best = 0;
  double best_d = sq_dist(p, c[0]);
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double d = sq_dist(p, c[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

// Min-max normalization onto [0, 1]; a constant feature maps to 0.
void normalize(std::vector<double>& v) {
  if (v.empty()) return;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo;
  const double span = *hi - *lo;
  for (double& x : v) x = span > 0.0 ? (x - min) / span : 0.0;
}

}  // namespace

Clustering cluster_groups(const std::vector<GroupStats>& stats,
                          const LloydConfig& cfg) {
  cfg.validate();
  if (stats.empty()) throw DataError("cannot cluster an empty group list");

  Clustering out;
  out.n_clusters = cfg.n_clusters;
  out.assignment.assign(stats.size(), cfg.n_clusters);

  std::vector<std::size_t> members;
  std::vector<double> means;
  std::vector<double> kurts;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (!stats[i].kurtosis) continue;
    members.push_back(i);
    means.push_back(stats[i].mean);
    kurts.push_back(*stats[i].kurtosis);
  }
  out.centroids.assign(cfg.n_clusters, {0.0, 0.0});
  if (members.empty()) return out;

  normalize(means);
  normalize(kurts);
  std::vector<std::array<double, 2>> pts(members.size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {means[i], kurts[i]};

  // k-means++ seeding. Once every point coincides with a chosen centroid the
  // remaining centroids duplicate the first and stay empty.
  SplitMix64 rng(cfg.seed);
  auto& cent = out.centroids;
  cent[0] = pts[static_cast<std::size_t>(rng.uniform() *
                                          static_cast<double>(pts.size()))];
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 1; k < cfg.n_clusters; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], sq_dist(pts[i], cent[k - 1]));
      total += d2[i];
    }
    if (!(total > 0.0)) {
      for (std::size_t r = k; r < cfg.n_clusters; ++r) cent[r] = cent[0];
      break;
    }
    double target = rng.uniform() * total;
    std::size_t pick = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      target -= d2[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    cent[k] = pts[pick];
  }

  std::vector<std::size_t> assign(pts.size(), 0);
  for (int iter = 0; iter < 50; ++iter) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      assign[i] = nearest_centroid(pts[i], cent);
    }
    std::vector<std::array<double, 2>> sum(cfg.n_clusters, {0.0, 0.0});
    std::vector<std::size_t> count(cfg.n_clusters, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sum[assign[i]][0] += pts[i][0];
      sum[assign[i]][1] += pts[i][1];
      ++count[assign[i]];
    }
    double moved = 0.0;
    for (std::size_t k = 0; k < cfg.n_clusters; ++k) {
      if (count[k] == 0) continue;
      const double n = static_cast<double>(count[k]);
      const std::array<double, 2> next{sum[k][0] / n, sum[k][1] / n};
      moved = std::max(moved, std::sqrt(sq_dist(next, cent[k])));
      cent[k] = next;
    }
    if (moved < 1e-9) break;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.assignment[members[i]] = nearest_centroid(pts[i], cent);
  }
  return out;
}

LloydFit lloyd_fit(std::span<const double> values, const LloydConfig& cfg,
                   const Codebook& init) {
  if (values.empty()) throw DataError("Lloyd-Max needs at least one value");
  if (init.levels.empty()) throw ConfigError("empty initial codebook");
  for (std::size_t k = 1; k < init.levels.size(); ++k) {
    if (!(init.levels[k] > init.levels[k - 1])) {
      throw ConfigError("initial codebook levels must be distinct");
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  std::vector<double> levels = init.levels;
  for (double& l : levels) l = std::clamp(l, *lo_it, *hi_it);
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  LloydFit fit;
  fit.codebook = Codebook::from_levels(std::move(levels));
  double current = fit.codebook.mse(values);
  fit.mse_trace.reserve(cfg.n_iters + 1);
  fit.mse_trace.push_back(current);

  const std::size_t n = fit.codebook.levels.size();
  std::vector<double> sum(n);
  std::vector<std::size_t> count(n);
  for (std::size_t it = 0; it < cfg.n_iters; ++it) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (double v : values) {
      const std::size_t k = fit.codebook.index_of(v);
      sum[k] += v;
      ++count[k];
    }
    std::vector<double> next = fit.codebook.levels;
    for (std::size_t k = 0; k < n; ++k) {
      if (count[k] > 0) next[k] = sum[k] / static_cast<double>(count[k]);
    }
    Codebook candidate = Codebook::from_levels(std::move(next));
    const double m = candidate.mse(values);
    if (m <= current) {
      fit.codebook = std::move(candidate);
      current = m;
    }
    fit.mse_trace.push_back(current);
  }
  return fit;
}

Codebook quantile_init(std::span<const double> values, std::size_t n_levels) {
  if (values.empty()) throw DataError("quantile init needs values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> uniq = sorted;
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() <= n_levels) return Codebook::from_levels(std::move(uniq));

  const auto pick = [](const std::vector<double>& v, std::size_t n) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
      const double pos = (static_cast<double>(i) + 0.5) /
                         static_cast<double>(n) *
                         static_cast<double>(v.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, v.size() - 1);
      out.push_back(v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo)));
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  std::vector<double> levels = pick(sorted, n_levels);
  // Heavily tied data can collapse quantiles; spread over distinct values.
  if (levels.size() < n_levels) levels = pick(uniq, n_levels);
  return Codebook::from_levels(std::move(levels));
}

Codebook grid_codebook(std::span<const double> values, const QuantConfig& cfg) {
  if (values.empty()) throw DataError("grid init needs values");
  if (cfg.scale_mode.kind() == ScaleMode::Kind::kDoubleScale) {
    throw ConfigError("grid init does not support nvfp4_double scaling");
  }
  QuantConfig row = cfg;
  row.group_size = GroupSize::row();
  row.axis = -1;
  const QuantizedTensor q = quantize(
      Tensor::vector(std::vector<double>(values.begin(), values.end())), row);

  std::vector<double> levels;
  if (row.uses_zero_point()) {
    const double top = zero_point_levels(row.format);
    for (double c = 0.0; c <= top; c += 1.0) {
      levels.push_back((c - q.zero_point(0)) * q.zp_scale(0));
    }
  } else {
    for (double m : row.format.magnitudes()) {
      levels.push_back(m * q.scales[0].pos_scale);
      if (m != 0.0) levels.push_back(-(m * q.scales[0].neg_scale));
    }
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return Codebook::from_levels(std::move(levels));
}

ReferenceResult reference_quantize(const Tensor& x, GroupSize group_size,
                                   const LloydConfig& cfg,
                                   const ReferenceOptions& opts) {
  cfg.validate();
  const GroupLayout layout(x.shape, -1, group_size);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x.data[i])) {
      throw DataError("non-finite value at element " + std::to_string(i));
    }
  }

  ReferenceResult res;
  res.clustering = cluster_groups(group_stats(x, group_size, -1), cfg);
  res.codebooks.resize(res.clustering.cluster_count());
  res.reconstruction = x;

  std::vector<std::vector<std::size_t>> members(res.clustering.cluster_count());
  for (std::size_t g = 0; g < res.clustering.assignment.size(); ++g) {
    members[res.clustering.assignment[g]].push_back(g);
  }

  std::vector<double> pool;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) continue;
    pool.clear();
    for (std::size_t g : members[c]) {
      for (std::size_t p = 0; p < layout.group_size(); ++p) {
        pool.push_back(x.data[layout.element_index(g, p)]);
      }
    }
    const Codebook init = opts.init == ReferenceOptions::Init::kFormatGrid
                              ? grid_codebook(pool, opts.grid_config)
                              : quantile_init(pool, cfg.n_levels);
    res.codebooks[c] = lloyd_fit(pool, cfg, init).codebook;
    for (std::size_t g : members[c]) {
      for (std::size_t p = 0; p < layout.group_size(); ++p) {
        const std::size_t idx = layout.element_index(g, p);
        res.reconstruction.data[idx] = res.codebooks[c].quantize(x.data[idx]);
      }
    }
  }
  res.report = rounding_only_report(x, res.reconstruction, group_size, -1);
  return res;
}

}  // namespace mxemu
