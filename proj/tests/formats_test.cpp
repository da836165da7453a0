// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mxemu/error.hpp"
#include "mxemu/formats.hpp"
#include "support/fixtures.hpp"

namespace mxemu {
namespace {

using testing::uniform;

// Nearest grid magnitude by exhaustive search; ties go to the even raw
// bit pattern, values beyond the grid saturate.
double brute_force_round(double v, const ElementFormat& fmt) {
  const auto mags = fmt.magnitudes();
  const auto raw = fmt.raw_bits();
  const double a = std::fabs(v);
  std::size_t best = 0;
  for (std::size_t i = 1; i < mags.size(); ++i) {
    const double d = std::fabs(a - mags[i]);
    const double bd = std::fabs(a - mags[best]);
    if (d < bd || (d == bd && (raw[i] & 1u) == 0)) best = i;
  }
  const double m = mags[best];
  return (std::signbit(v) && m != 0.0) ? -m : m;
}

std::vector<ElementFormat> all_formats() {
  return {formats::fp4_e2m1(), formats::fp6_e3m2(), formats::fp6_e2m3(),
          formats::fp8_e4m3(), formats::fp8_e5m2(), formats::fp16(),
          formats::int4(),     formats::int8()};
}

TEST(Formats, Fp4Grid) {
  const std::vector<double> expect = {0, 0.5, 1, 1.5, 2, 3, 4, 6};
  const auto mags = formats::fp4_e2m1().magnitudes();
  EXPECT_EQ(std::vector<double>(mags.begin(), mags.end()), expect);
  EXPECT_EQ(formats::fp4_e2m1().max_normal(), 6.0);
  EXPECT_EQ(formats::fp4_e2m1().emax_elem(), 2);
  EXPECT_EQ(grid(formats::fp4_e2m1()).size(), 15u);
}

TEST(Formats, MaxNormals) {
  EXPECT_EQ(formats::fp6_e3m2().max_normal(), 28.0);
  EXPECT_EQ(formats::fp6_e2m3().max_normal(), 7.5);
  EXPECT_EQ(formats::fp8_e4m3().max_normal(), 448.0);
  EXPECT_EQ(formats::fp8_e5m2().max_normal(), 57344.0);
  EXPECT_EQ(formats::fp16().max_normal(), 65504.0);
  EXPECT_EQ(formats::int4().max_normal(), 7.0);
  EXPECT_EQ(formats::int8().max_normal(), 127.0);
  EXPECT_EQ(formats::int4().emax_elem(), 2);
  EXPECT_EQ(formats::int8().emax_elem(), 6);
  EXPECT_EQ(formats::fp8_e4m3().emax_elem(), 8);
  EXPECT_EQ(formats::fp8_e5m2().emax_elem(), 15);
}

TEST(Formats, MinPositive) {
  EXPECT_EQ(formats::fp8_e4m3().min_positive(), std::ldexp(1.0, -9));
  EXPECT_EQ(formats::fp8_e5m2().min_positive(), std::ldexp(1.0, -16));
  EXPECT_EQ(formats::fp16().min_positive(), std::ldexp(1.0, -24));
}

TEST(Formats, GridSizes) {
  EXPECT_EQ(formats::fp8_e4m3().magnitudes().size(), 127u);
  EXPECT_EQ(formats::fp8_e5m2().magnitudes().size(), 124u);
  EXPECT_EQ(formats::fp6_e3m2().magnitudes().size(), 32u);
  EXPECT_EQ(formats::int4().magnitudes().size(), 8u);
}

TEST(Formats, RoundingExamples) {
  const auto& fp4 = formats::fp4_e2m1();
  EXPECT_EQ(round_to_grid(1.225, fp4), 1.0);
  EXPECT_EQ(round_to_grid(7.0, fp4), 6.0);
  EXPECT_EQ(round_to_grid(-7.0, fp4), -6.0);
  EXPECT_EQ(round_to_grid(3.5, fp4), 4.0);
  EXPECT_EQ(round_to_grid(2.5, fp4), 2.0);
  EXPECT_EQ(round_to_grid(0.25, fp4), 0.0);
  EXPECT_EQ(round_to_grid(0.75, fp4), 1.0);
  EXPECT_EQ(round_to_grid(5.0, fp4), 4.0);
  EXPECT_EQ(round_to_grid(2.5, formats::int4()), 2.0);
  EXPECT_EQ(round_to_grid(3.5, formats::int4()), 4.0);
}

TEST(Formats, E5M2Neighbours) {
  const auto& e5m2 = formats::fp8_e5m2();
  EXPECT_EQ(round_real_to_fp(0.8167, e5m2), 0.875);
  EXPECT_EQ(round_real_to_fp(0.78, e5m2), 0.75);
  EXPECT_EQ(round_real_to_fp(31.0 / 6.0, e5m2), 5.0);
  EXPECT_EQ(round_real_to_fp(4.9 / 6.0, e5m2), 0.875);
}

TEST(Formats, RoundRealToFpNeverReturnsZero) {
  EXPECT_EQ(round_real_to_fp(1e-30, formats::fp8_e4m3()),
            formats::fp8_e4m3().min_positive());
  EXPECT_THROW(round_real_to_fp(0.0, formats::fp8_e4m3()), DataError);
  EXPECT_THROW(round_real_to_fp(-1.0, formats::fp8_e4m3()), DataError);
}

TEST(Formats, NegativeZeroEncodesPositive) {
  const ElementCode c = encode(-0.1, formats::fp4_e2m1());
  EXPECT_EQ(c.sign, 0);
  EXPECT_EQ(c.code, 0u);
  EXPECT_FALSE(std::signbit(round_to_grid(-0.0, formats::fp4_e2m1())));
}

TEST(Formats, NonFiniteRejected) {
  EXPECT_THROW(encode(std::nan(""), formats::fp4_e2m1()), DataError);
  EXPECT_THROW(encode(std::numeric_limits<double>::infinity(), formats::int8()),
               DataError);
}

TEST(Formats, CodeBitsFollowLayout) {
  const auto& fp4 = formats::fp4_e2m1();
  EXPECT_EQ(code_bits(encode(6.0, fp4), fp4), 0b0111u);
  EXPECT_EQ(code_bits(encode(-0.5, fp4), fp4), 0b1001u);
  EXPECT_EQ(code_bits(encode(1.0, fp4), fp4), 0b0010u);
  const auto& e4m3 = formats::fp8_e4m3();
  EXPECT_EQ(code_bits(encode(448.0, e4m3), e4m3), 0x7Eu);
  EXPECT_EQ(code_bits(encode(1.0, e4m3), e4m3), 0x38u);
  const auto& e5m2 = formats::fp8_e5m2();
  EXPECT_EQ(code_bits(encode(1.0, e5m2), e5m2), 0x3Cu);
}

TEST(Formats, NameRoundTrip) {
  for (const auto& name : element_format_names()) {
    const FormatSpec fs = parse_format_name(name);
    EXPECT_EQ(format_name(fs.format), name);
    const FormatSpec asym = parse_format_name(name + "_asym");
    EXPECT_TRUE(asym.asymmetric);
    EXPECT_EQ(format_name(asym.format, true), name + "_asym");
  }
}

TEST(Formats, UnknownNameListsValid) {
  try {
    parse_format_name("fp5_e9m9");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("fp4_e2m1"), std::string::npos);
  }
}

TEST(Formats, UnsupportedLayout) {
  EXPECT_THROW(ElementFormat::floating(3, 3), UnsupportedError);
}

TEST(Formats, CodebookFormat) {
  const auto cb = ElementFormat::codebook("nf_like", {1.0, 0.0, 0.3, 0.3});
  EXPECT_EQ(cb.magnitudes().size(), 3u);
  EXPECT_EQ(round_to_grid(0.7, cb), 1.0);
  EXPECT_THROW(ElementFormat::codebook("bad", {1.0, 2.0}), ConfigError);
}

TEST(FormatsProperty, MatchesBruteForce) {
  SplitMix64 rng(11);
  for (const auto& fmt : all_formats()) {
    const double top = fmt.max_normal() * 1.25;
    const auto g = grid(fmt);
    const int trials = g.size() > 1000 ? 3000 : 100000;
    for (int i = 0; i < trials; ++i) {
      double v;
      const double r = rng.uniform();
      if (r < 0.4) {
        v = uniform(rng, -top, top);
      } else if (r < 0.8) {
        // Log-uniform magnitudes reach the subnormal range.
        const double e = uniform(rng, std::log2(fmt.min_positive()) - 2,
                                 std::log2(top));
        v = std::exp2(e) * ((rng() >> 63) ? -1.0 : 1.0);
      } else {
        // Exact midpoints between neighbours exercise ties.
        const std::size_t k = testing::below(rng, g.size() - 1);
        v = g[k] + (g[k + 1] - g[k]) / 2;
      }
      ASSERT_EQ(round_to_grid(v, fmt), brute_force_round(v, fmt))
          << fmt.name() << " v=" << v;
    }
  }
}

TEST(FormatsProperty, GridPointsRoundTrip) {
  for (const auto& fmt : all_formats()) {
    for (double g : grid(fmt)) {
      const ElementCode c = encode(g, fmt);
      ASSERT_EQ(decode(c, fmt), g) << fmt.name();
    }
  }
}

TEST(FormatsProperty, Monotone) {
  SplitMix64 rng(12);
  for (const auto& fmt : all_formats()) {
    const double top = fmt.max_normal() * 1.5;
    for (int i = 0; i < 20000; ++i) {
      double a = uniform(rng, -top, top);
      double b = uniform(rng, -top, top);
      if (a > b) std::swap(a, b);
      ASSERT_LE(round_to_grid(a, fmt), round_to_grid(b, fmt)) << fmt.name();
    }
  }
}

TEST(FormatsProperty, SymmetricUnderNegation) {
  SplitMix64 rng(13);
  for (const auto& fmt : all_formats()) {
    for (int i = 0; i < 20000; ++i) {
      const double v = uniform(rng, 0.0, fmt.max_normal() * 1.2);
      ASSERT_EQ(round_to_grid(-v, fmt), -round_to_grid(v, fmt)) << fmt.name();
    }
  }
}

}  // namespace
}  // namespace mxemu
