// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails or exceeds its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mxemu/analysis.hpp"
#include "mxemu/error.hpp"
#include "mxemu/gemm.hpp"
#include "mxemu/lloydmax.hpp"
#include "mxemu/quantizer.hpp"
#include "mxemu/rotation.hpp"
#include "support/fixtures.hpp"

namespace mxemu {
namespace {

using testing::make_config;
using testing::same_bits;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> body;
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Outcome golden(const char* format, const char* scale, std::set<double> expect) {
  const Tensor y = quantize_dequantize(testing::snippet_fixture(),
                                       make_config(format, scale, GroupSize::row()));
  const std::set<double> got(y.data.begin(), y.data.end());
  Outcome o;
  o.pass = got == expect;
  o.detail = std::to_string(got.size()) + " distinct values, expected " +
             std::to_string(expect.size());
  return o;
}

Outcome idempotence() {
  std::vector<QuantConfig> combos;
  for (const auto& f : element_format_names()) {
    for (const auto* suffix : {"", "_asym"}) {
      for (const auto& s : testing::all_scale_modes()) {
        for (GroupSize gs : {GroupSize::of(16), GroupSize::of(32), GroupSize::row()}) {
          QuantConfig cfg = make_config(f + suffix, s, gs);
          try {
            cfg.validate();
          } catch (const ConfigError&) {
            continue;
          }
          combos.push_back(cfg);
        }
      }
    }
  }
  std::vector<bool> failed(combos.size(), false);
  SplitMix64 rng(0xA4);
  constexpr int kTensors = 1000;
  int bad_tensors = 0;
  int bad_normal = 0;
  for (int t = 0; t < kTensors; ++t) {
    const std::size_t c = static_cast<std::size_t>(t) % combos.size();
    const Tensor x = testing::mixed_random({4, 64}, rng);
    const QuantizedTensor q = quantize(x, combos[c]);
    const Tensor once = dequantize(q);
    const Tensor twice = quantize_dequantize(once, combos[c]);
    if (!same_bits(once, twice)) {
      failed[c] = true;
      ++bad_tensors;
      if (testing::scales_in_normal_range(q)) ++bad_normal;
    }
  }
  Outcome o;
  const auto n_failed = std::count(failed.begin(), failed.end(), true);
  o.pass = n_failed == 0;
  std::ostringstream d;
  d << kTensors << " tensors over " << combos.size() << " combos; " << bad_tensors
    << " tensors (" << bad_normal << " with normal scales) / " << n_failed
    << " combos not idempotent";
  if (n_failed > 0) {
    std::set<std::string> scales;
    for (std::size_t c = 0; c < combos.size(); ++c) {
      if (failed[c]) scales.insert(combos[c].scale_mode.name());
    }
    d << " (scale modes:";
    for (const auto& s : scales) d << " " << s;
    d << ")";
  }
  o.detail = d.str();
  return o;
}

Outcome gemm_oracle() {
  SplitMix64 rng(0xA5);
  const char* formats[] = {"fp4_e2m1", "fp4_e2m1_asym"};
  const char* scales[] = {"pot_floor", "pot_round", "fp8e4m3", "fp8e5m2"};
  int mismatches = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t gs = (t % 2 == 0) ? 16 : 32;
    const std::size_t m = 1 + testing::below(rng, 128);
    const std::size_t n = 1 + testing::below(rng, 128);
    const std::size_t k = gs * (1 + testing::below(rng, 128 / gs));
    QuantConfig ca = make_config(formats[testing::below(rng, 2)], scales[testing::below(rng, 4)],
                                 GroupSize::of(gs), 1);
    QuantConfig cb = make_config(formats[testing::below(rng, 2)], scales[testing::below(rng, 4)],
                                 GroupSize::of(gs), 0);
    const Tensor a = testing::mixed_random({m, k}, rng);
    const Tensor b = testing::mixed_random({k, n}, rng);
    const QuantizedTensor qa = quantize(a, ca);
    const QuantizedTensor qb = quantize(b, cb);
    const Tensor got = matmul(qa, qb);
    const Tensor expect = dequantized_matmul(qa, qb);
    if (!same_bits(got, expect)) ++mismatches;
    for (std::size_t i = 0; i < got.size(); ++i) {
      worst = std::max(worst, std::fabs(got.data[i] - expect.data[i]));
    }
  }
  return {mismatches == 0, "200 matmuls, " + std::to_string(mismatches) +
                               " mismatches, max abs diff " + fmt_double(worst)};
}

Outcome error_decomposition_exact() {
  SplitMix64 rng(0xA6);
  const char* formats[] = {"fp4_e2m1", "fp4_e2m1_asym", "int4", "fp6_e2m3"};
  int inexact = 0;
  int order_violations = 0;
  for (int t = 0; t < 1000; ++t) {
    // Values on the 2^-8 lattice keep every squared error and partial sum
    // exact in binary64.
    const int k = static_cast<int>(testing::below(rng, 20));
    Tensor x = Tensor::zeros({32});
    for (double& v : x.data) {
      const auto span = static_cast<std::int64_t>(1) << k;
      const auto i = static_cast<std::int64_t>(testing::below(rng, 2 * span + 1)) - span;
      v = std::ldexp(static_cast<double>(i), -8);
    }
    const char* f = formats[t % 4];
    double clamp_by_mode[2] = {0.0, 0.0};
    const char* modes[] = {"pot_floor", "pot_round"};
    for (int mi = 0; mi < 2; ++mi) {
      const QuantConfig cfg = make_config(f, modes[mi], GroupSize::of(32));
      const ErrorReport r = error_decomposition(x, cfg);
      const Tensor y = quantize_dequantize(x, cfg);
      double total = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data[i] - y.data[i];
        total += d * d;
      }
      const GroupError& g = r.per_group[0];
      if (g.clamp_sq_error + g.round_sq_error != total || r.total_sq_error != total) {
        ++inexact;
      }
      clamp_by_mode[mi] = g.clamp_sq_error;
    }
    if (clamp_by_mode[1] > clamp_by_mode[0]) ++order_violations;
  }
  return {inexact == 0 && order_violations == 0,
          "1000 groups x 2 modes: " + std::to_string(inexact) + " inexact, " +
              std::to_string(order_violations) + " clamp-order violations"};
}

Outcome rotation() {
  double worst_orth = 0.0;
  double worst_rt = 0.0;
  SplitMix64 rng(0xA7);
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    const auto r = make_rotation(n, 1000 + n).matrix();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) acc += r[i * n + t] * r[j * n + t];
        worst_orth = std::max(worst_orth, std::fabs(acc - (i == j ? 1.0 : 0.0)));
      }
    }
    const RotationSpec spec = make_rotation(n, rng());
    const Tensor x = testing::mixed_random({4, n}, rng);
    const Tensor back = rotate(rotate(x, spec), spec, -1, true);
    double norm = 0.0;
    for (double v : x.data) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst_rt = std::max(worst_rt, std::fabs(back.data[i] - x.data[i]) / norm);
    }
  }
  const Tensor x = testing::spike_fixture(0xA8);
  const Tensor y = rotate(x, make_rotation(256, 0xA9));
  const double k_before = stats_summary(group_stats(x, GroupSize::row())).kurtosis.median;
  const double k_after = stats_summary(group_stats(y, GroupSize::row())).kurtosis.median;
  const double iqr_before = stats_summary(group_stats(x, GroupSize::of(32))).mean.iqr();
  const double iqr_after = stats_summary(group_stats(y, GroupSize::of(32))).mean.iqr();
  Outcome o;
  o.pass = worst_orth < 1e-10 && worst_rt < 1e-9 && k_after <= k_before &&
           iqr_after >= iqr_before;
  o.detail = "max|RR^T-I| " + fmt_double(worst_orth) + ", roundtrip rel " +
             fmt_double(worst_rt) + ", row kurtosis " + fmt_double(k_before) + " -> " +
             fmt_double(k_after) + ", GS32 mean IQR " + fmt_double(iqr_before) +
             " -> " + fmt_double(iqr_after);
  return o;
}

Outcome lloyd() {
  SplitMix64 rng(0xAA);
  int non_monotone = 0;
  for (int t = 0; t < 50; ++t) {
    Tensor x = testing::mixed_random({2048}, rng);
    if (t % 5 == 0) {
      for (double& v : x.data) v = std::exp(testing::normal(rng));
    }
    const LloydFit fit = lloyd_fit(x.data, LloydConfig{1, 100, 16, 0}, quantile_init(x.data, 16));
    for (std::size_t i = 1; i < fit.mse_trace.size(); ++i) {
      if (fit.mse_trace[i] > fit.mse_trace[i - 1]) {
        ++non_monotone;
        break;
      }
    }
  }
  const Tensor x = testing::shifted_gaussian(64, 256, 32, 0xAB);
  const QuantConfig amx = make_config("fp4_e2m1_asym", "fp8e5m2", GroupSize::of(32));
  const QuantConfig mx = make_config("fp4_e2m1", "pot_floor", GroupSize::of(32));
  ReferenceOptions opts;
  opts.init = ReferenceOptions::Init::kFormatGrid;
  opts.grid_config = amx;
  const double ref = reference_quantize(x, GroupSize::of(32), LloydConfig{}, opts).report.mse;
  const double amx_mse = error_decomposition(x, amx).mse;
  const double mx_mse = error_decomposition(x, mx).mse;
  Outcome o;
  o.pass = non_monotone == 0 && ref <= amx_mse && amx_mse <= mx_mse;
  o.detail = std::to_string(non_monotone) + "/50 traces increase; MSE reference " +
             fmt_double(ref) + " <= AMXFP4 " + fmt_double(amx_mse) + " <= MXFP4 " +
             fmt_double(mx_mse);
  return o;
}

Outcome asymmetry_benefit() {
  Outcome o;
  std::ostringstream d;
  double worst_margin = 1.0;
  for (std::size_t gs : {16u, 32u}) {
    const Tensor x = testing::shifted_gaussian(128, 256, gs, 0xAC + gs);
    for (const auto* scale : {"pot_floor", "fp8e5m2"}) {
      const std::pair<const char*, const char*> pairs[] = {{"fp4_e2m1", "fp4_e2m1_asym"},
                                                           {"int4", "int4_asym"}};
      for (const auto& [sym, asym] : pairs) {
        const double m_sym = error_decomposition(x, make_config(sym, scale, GroupSize::of(gs))).mse;
        const double m_asym = error_decomposition(x, make_config(asym, scale, GroupSize::of(gs))).mse;
        const double margin = 1.0 - m_asym / m_sym;
        worst_margin = std::min(worst_margin, margin);
        if (!(margin >= 0.05)) {
          o.pass = false;
          d << asym << "/" << scale << "/gs" << gs << " margin " << fmt_double(margin) << "; ";
        }
      }
    }
  }
  d << "smallest relative MSE reduction " << fmt_double(worst_margin)
    << " (FP4 and INT4, pot_floor and fp8e5m2 scales, GS 16 and 32)";
  o.detail = d.str();
  return o;
}

Outcome nvfp4() {
  SplitMix64 rng(0xAD);
  int not_idempotent = 0;
  for (int t = 0; t < 200; ++t) {
    const QuantConfig cfg = make_config(t % 2 ? "fp4_e2m1_asym" : "fp4_e2m1", "nvfp4_double",
                                        GroupSize::of(t % 4 < 2 ? 16 : 32));
    const Tensor x = testing::mixed_random({4, 64}, rng);
    const Tensor once = quantize_dequantize(x, cfg);
    if (!same_bits(once, quantize_dequantize(once, cfg))) ++not_idempotent;
  }

  Tensor fixture = Tensor::zeros({4, 64});
  const double vals[] = {6, -6, 3, 1.5, -0.5, 4, 2, 0, -3, 1};
  for (std::size_t i = 0; i < fixture.size(); ++i) fixture.data[i] = vals[i % 10];
  const QuantConfig nv = make_config("fp4_e2m1", "nvfp4_double", GroupSize::of(16));
  const QuantizedTensor q = quantize(fixture, nv);
  bool exact = dequantize(q) == fixture;
  for (std::size_t g = 0; g < q.scales.size(); ++g) {
    exact = exact && q.effective_scale(g, false) == 1.0 && q.effective_scale(g, true) == 1.0;
  }

  const Tensor x = testing::shifted_gaussian(128, 256, 16, 0xAE);
  const double m_nv = error_decomposition(x, nv).mse;
  const double m_anv =
      error_decomposition(x, make_config("fp4_e2m1_asym", "nvfp4_double", GroupSize::of(16))).mse;
  return {not_idempotent == 0 && exact && m_anv < m_nv,
          std::to_string(not_idempotent) + "/200 not idempotent; exact-scale fixture " +
              (exact ? "ok" : "broken") + "; MSE ANVFP4 " + fmt_double(m_anv) +
              " vs NVFP4 " + fmt_double(m_nv)};
}

}  // namespace
}  // namespace mxemu

int main() {
  using namespace mxemu;
  const std::vector<Criterion> criteria = {
      {1, "golden MXFP4 snippet", 1.0,
       [] { return golden("fp4_e2m1", "pot_floor", {-4, -2, 0, 2, 4, 6, 8, 12, 16, 24}); }},
      {2, "golden AMXFP4-PoT snippet", 1.0,
       [] {
         return golden("fp4_e2m1_asym", "pot_floor",
                       {-4, -3, -2, -1.5, -1, -0.5, 0, 2, 4, 6, 8, 12, 16, 24});
       }},
      {3, "golden AMXFP4-FP8 snippet", 1.0,
       [] {
         return golden("fp4_e2m1_asym", "fp8e5m2",
                       {-5.25, -3.5, -2.625, -1.75, -1.3125, -0.875, -0.4375, 0, 2.5, 5,
                        7.5, 10, 15, 20, 30});
       }},
      {4, "roundtrip idempotence", 30.0, idempotence},
      {5, "GEMM oracle", 30.0, gemm_oracle},
      {6, "error decomposition exactness", 10.0, error_decomposition_exact},
      {7, "rotation", 10.0, rotation},
      {8, "Lloyd-Max", 60.0, lloyd},
      {9, "asymmetry benefit", 10.0, asymmetry_benefit},
      {10, "NVFP4/ANVFP4", 10.0, nvfp4},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %2d  %-32s %7.3f s / %4.0f s  %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.title, secs, c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
