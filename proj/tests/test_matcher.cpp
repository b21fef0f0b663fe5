#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <random>

#include "stereoloc/errors.hpp"
#include "stereoloc/matcher.hpp"
#include "oracle.hpp"

using namespace stereoloc;

namespace {

MatcherParams rawParams(int block, int min_d, int max_d) {
  MatcherParams p;
  p.block_size = block;
  p.min_disp = min_d;
  p.max_disp = max_d;
  p.p1 = 0.0;
  p.p2 = 0.0;
  p.lr_max_diff = std::numeric_limits<double>::infinity();  // off
  p.uniqueness_ratio = 0.0;
  p.subpixel = false;
  return p;
}

}  // namespace

TEST_CASE("ssd of identical windows is zero") {
  const Eigen::ArrayXXf w = Eigen::ArrayXXf::Random(5, 5).abs() * 100.0f;
  CHECK(ssdCost(w, w) == 0.0);
}

TEST_CASE("ssd hand case on a 2x2 block") {
  Eigen::Array22f a, b;
  a << 1, 2, 3, 4;
  b << 1, 3, 3, 5;
  // differences 0,1,0,1 -> mean of squares (0+1+0+1)/4
  CHECK(ssdCost(a, b) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ssdCost(b, a) == ssdCost(a, b));  // symmetric
}

TEST_CASE("ssd rejects mismatched window shapes") {
  const Eigen::ArrayXXf a = Eigen::ArrayXXf::Zero(3, 3);
  const Eigen::ArrayXXf b = Eigen::ArrayXXf::Zero(3, 4);
  CHECK_THROWS_AS(ssdCost(a, b), DimensionMismatch);
}

TEST_CASE("ssd is nonnegative and zero only for identical windows") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::ArrayXXf a(4, 4), b(4, 4);
    for (int i = 0; i < 16; ++i) {
      a(i / 4, i % 4) = static_cast<float>(rng() % 256);
      b(i / 4, i % 4) = static_cast<float>(rng() % 256);
    }
    const double c = ssdCost(a, b);
    CHECK(c >= 0.0);
    if ((a == b).all())
      CHECK(c == 0.0);
    else
      CHECK(c > 0.0);
  }
}

TEST_CASE("identical images give zero cost at disparity zero") {
  const GrayImage img = testutil::randomImage(24, 18, 3);
  const auto vol = buildCostVolume(img, img, rawParams(3, 0, 5));
  for (int y = 0; y < 18; ++y)
    for (int x = 0; x < 24; ++x)
      CHECK(vol.at(x, y, 0) == 0.0f);
}

TEST_CASE("cost volume matches the brute-force oracle exactly") {
  const MatcherParams p = rawParams(3, 0, 4);
  const auto [left, right] = testutil::shiftedPair(16, 16, 2, 21);
  const auto fast = buildCostVolume(left, right, p);
  const auto slow = testutil::bruteCostVolume(left, right, p);
  REQUIRE(fast.costs.size() == slow.costs.size());
  // bitwise equality, not approximate: integer-valued images keep both
  // computations exact
  CHECK((fast.costs == slow.costs).all());
}

TEST_CASE("cost volume oracle equality with offset search range") {
  MatcherParams p = rawParams(5, 2, 9);
  const auto [left, right] = testutil::shiftedPair(25, 14, 5, 22);
  const auto fast = buildCostVolume(left, right, p);
  const auto slow = testutil::bruteCostVolume(left, right, p);
  CHECK((fast.costs == slow.costs).all());
}

TEST_CASE("shifted texture wins at the true disparity") {
  const int s = 7;
  const auto [left, right] = testutil::shiftedPair(64, 32, s, 9);
  const auto vol = buildCostVolume(left, right, rawParams(5, 0, 12));
  int hits = 0, total = 0;
  for (int y = 4; y < 28; ++y)
    for (int x = s + 4; x < 60; ++x) {
      int best = 0;
      for (int k = 1; k < vol.disp_levels; ++k)
        if (vol.at(x, y, k) < vol.at(x, y, best)) best = k;
      total += 1;
      hits += (best == s);
    }
  CHECK(hits >= (total * 95) / 100);
}

TEST_CASE("input validation of the image pair") {
  const GrayImage a(32, 20);
  const GrayImage b(30, 20);
  CHECK_THROWS_AS(buildCostVolume(a, b, rawParams(3, 0, 4)),
                  ImageSizeMismatch);
  // max_disp >= width - block_size
  CHECK_THROWS_AS(buildCostVolume(a, a, rawParams(5, 0, 27)),
                  SearchRangeTooWide);
  GrayImage bad = a;
  bad(3, 3) = -2.0f;
  CHECK_THROWS_AS(buildCostVolume(bad, bad, rawParams(3, 0, 4)),
                  FieldOutOfRange);
}

TEST_CASE("parameter validation") {
  MatcherParams p;
  p.block_size = 4;
  CHECK_THROWS_AS(validateParams(p), FieldOutOfRange);
  p = MatcherParams{};
  p.min_disp = 5;
  p.max_disp = 5;
  CHECK_THROWS_AS(validateParams(p), FieldOutOfRange);
  p = MatcherParams{};
  p.p1 = 9.0;
  p.p2 = 3.0;
  CHECK_THROWS_AS(validateParams(p), FieldOutOfRange);
  p = MatcherParams{};
  p.num_paths = 6;
  CHECK_THROWS_AS(validateParams(p), FieldOutOfRange);
  p = MatcherParams{};
  p.uniqueness_ratio = 1.0;
  CHECK_THROWS_AS(validateParams(p), FieldOutOfRange);
  CHECK_NOTHROW(validateParams(MatcherParams{}));
}

TEST_CASE("zero penalties reduce aggregation to the raw argmin") {
  const auto [left, right] = testutil::shiftedPair(32, 24, 4, 17);
  MatcherParams p = rawParams(3, 0, 8);
  const auto vol = buildCostVolume(left, right, p);
  const auto agg = aggregateCosts(vol, p);
  const auto raw_wta = testutil::wtaMap(vol);
  const auto agg_wta = testutil::wtaMap(agg);
  CHECK((raw_wta.array() == agg_wta.array()).all());
}

TEST_CASE("single-row aggregation matches the hand-evaluated recurrence") {
  // 4 pixels, 3 disparity levels, p1=1, p2=2. On a one-row image the two
  // vertical paths have no predecessors and contribute the raw cost, so the
  // 4-path aggregate is L(right-going) + L(left-going) + 2*C. The expected
  // numbers below are a frozen evaluation of the scanline recurrence.
  CostVolume<float> vol(4, 1, 0, 3);
  const float c[4][3] = {{1, 3, 5}, {4, 1, 0}, {2, 0, 3}, {5, 2, 1}};
  for (int x = 0; x < 4; ++x)
    for (int k = 0; k < 3; ++k) vol.at(x, 0, k) = c[x][k];

  MatcherParams p = rawParams(3, 0, 2);
  p.p1 = 1.0;
  p.p2 = 2.0;
  p.num_paths = 4;
  const auto agg = aggregateCosts(vol, p);

  const double expected[4][3] = {
      {5, 12, 20}, {17, 5, 3}, {11, 1, 12}, {21, 8, 5}};
  for (int x = 0; x < 4; ++x)
    for (int k = 0; k < 3; ++k)
      CHECK(agg.at(x, 0, k) == doctest::Approx(expected[x][k]).epsilon(1e-12));
}

TEST_CASE("aggregation is bit-identical for any thread count") {
  const auto [left, right] = testutil::shiftedPair(48, 36, 6, 33);
  MatcherParams p;
  p.max_disp = 10;
  const auto vol = buildCostVolume(left, right, p, 1);
  const auto vol4 = buildCostVolume(left, right, p, 4);
  CHECK((vol.costs == vol4.costs).all());
  const auto agg1 = aggregateCosts(vol, p, 1);
  const auto agg4 = aggregateCosts(vol, p, 4);
  const auto agg7 = aggregateCosts(vol, p, 7);
  CHECK((agg1.costs == agg4.costs).all());
  CHECK((agg1.costs == agg7.costs).all());
}

TEST_CASE("selection finds the analytic minimum with zero offset") {
  CostVolume<float> vol(6, 4, 0, 8);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x)
      for (int k = 0; k < 8; ++k)
        vol.at(x, y, k) = static_cast<float>(std::abs(k - 3));
  MatcherParams p = rawParams(3, 0, 7);
  p.subpixel = true;  // symmetric neighbors, zero correction
  const DisparityMap disp = selectDisparity(vol, p);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x)
      CHECK(disp(x, y) == 3.0f);
}

TEST_CASE("parabola refinement lands at the hand-computed vertex") {
  CostVolume<float> vol(1, 1, 0, 6);
  const float costs[6] = {9, 8, 4, 1, 2, 7};  // min at k=3, neighbors 4 and 2
  for (int k = 0; k < 6; ++k) vol.at(0, 0, k) = costs[k];
  MatcherParams p = rawParams(3, 0, 5);
  p.subpixel = true;
  const DisparityMap disp = selectDisparity(vol, p);
  // offset = (c- - c+) / (2 (c- + c+ - 2 c0)) = (4-2)/(2*(4+2-2)) = 0.25
  CHECK(disp(0, 0) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("no refinement at the search range endpoints") {
  CostVolume<float> vol(1, 1, 2, 4);
  const float costs[4] = {1, 2, 3, 4};  // min at the first level
  for (int k = 0; k < 4; ++k) vol.at(0, 0, k) = costs[k];
  MatcherParams p = rawParams(3, 2, 5);
  p.subpixel = true;
  CHECK(selectDisparity(vol, p)(0, 0) == 2.0f);
}

TEST_CASE("ties resolve toward the smaller disparity") {
  CostVolume<float> vol(1, 1, 0, 7);
  const float costs[7] = {5, 4, 1, 6, 7, 1, 5};  // equal minima at k=2, k=5
  for (int k = 0; k < 7; ++k) vol.at(0, 0, k) = costs[k];
  const DisparityMap disp = selectDisparity(vol, rawParams(3, 0, 6));
  CHECK(disp(0, 0) == 2.0f);
}

TEST_CASE("uniqueness test rejects ambiguous pixels") {
  CostVolume<float> vol(2, 1, 0, 8);
  // pixel 0: clear minimum; pixel 1: a distant rival within 5%
  const float clear_case[8] = {40, 38, 10, 9, 11, 37, 39, 41};
  const float rival_case[8] = {40, 38, 10, 9.0f, 11, 9.2f, 39, 41};
  for (int k = 0; k < 8; ++k) {
    vol.at(0, 0, k) = clear_case[k];
    vol.at(1, 0, k) = rival_case[k];
  }
  MatcherParams p = rawParams(3, 0, 7);
  p.uniqueness_ratio = 0.15;
  const DisparityMap disp = selectDisparity(vol, p);
  CHECK(disp(0, 0) == 3.0f);
  CHECK_FALSE(isValid(disp(1, 0)));
}

TEST_CASE("full pipeline recovers a 12 px shift") {
  const int s = 12;
  const auto [left, right] = testutil::shiftedPair(128, 96, s, 77);
  MatcherParams p;  // defaults: block 5, 0..64, 8 paths, lr 1.0, uniq 0.15
  const DisparityMap disp = computeDisparity(left, right, p);

  int valid = 0, close = 0;
  for (int y = 3; y < 93; ++y)
    for (int x = s + 3; x < 125; ++x) {
      if (!isValid(disp(x, y))) continue;
      valid += 1;
      close += std::abs(disp(x, y) - s) <= 1.0f;
      CHECK(disp(x, y) >= p.min_disp);
      CHECK(disp(x, y) <= p.max_disp);
    }
  REQUIRE(valid > 0);
  CHECK(close >= (valid * 95) / 100);
}

TEST_CASE("constant images are invalidated by the uniqueness test") {
  const GrayImage flat(64, 32, 90.0f);
  MatcherParams p;
  p.max_disp = 16;
  // With smoothness penalties the scanline DP breaks the textureless tie
  // deterministically (the border seeds a monotone cost staircase), so the
  // ambiguity only survives aggregation when the penalties are off.
  p.p1 = 0.0;
  p.p2 = 0.0;
  const DisparityMap disp = computeDisparity(flat, flat, p);
  int invalid = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x) invalid += !isValid(disp(x, y));
  // a textureless scene has no unique minimum anywhere
  CHECK(invalid >= (64 * 32 * 95) / 100);

  // With the default penalties every pixel collapses to a confident d=0
  // instead; either way no spurious structure is reported.
  MatcherParams q;
  q.max_disp = 16;
  const DisparityMap smoothed = computeDisparity(flat, flat, q);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x)
      if (isValid(smoothed(x, y))) CHECK(smoothed(x, y) == 0.0f);
}

TEST_CASE("disparity sign convention: left x minus right x") {
  // A feature at x=430 in the left image sits at x=418 in the right image;
  // its disparity is +12.
  const int s = 12;
  const auto [left, right] = testutil::shiftedPair(512, 16, s, 101);
  MatcherParams p;
  p.max_disp = 32;
  const DisparityMap disp = computeDisparity(left, right, p);
  REQUIRE(isValid(disp(430, 8)));
  CHECK(disp(430, 8) == doctest::Approx(12.0).epsilon(0.1));
  // and indeed the pixels agree: left(430) was rendered from the texture
  // column that right sees at 418
  CHECK(left(430, 8) == right(430 - s, 8));
}

TEST_CASE("pipeline equals brute-force WTA when features are disabled") {
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    const auto [left, right] = testutil::shiftedPair(40, 30, 3, seed);
    const MatcherParams p = rawParams(3, 0, 9);
    const DisparityMap disp = computeDisparity(left, right, p);
    const auto oracle = testutil::wtaMap(testutil::bruteCostVolume(left, right, p));
    CHECK((disp.array() == oracle.array()).all());
  }
}

TEST_CASE("compute_disparity is deterministic across thread counts") {
  const auto [left, right] = testutil::shiftedPair(72, 48, 9, 55);
  MatcherParams p;
  p.max_disp = 20;
  const DisparityMap a = computeDisparity(left, right, p, 1);
  const DisparityMap b = computeDisparity(left, right, p, 5);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 72; ++x) {
      if (isValid(a(x, y)))
        CHECK(a(x, y) == b(x, y));
      else
        CHECK_FALSE(isValid(b(x, y)));
    }
}

TEST_CASE("left-right check invalidates half-occluded columns") {
  // With lr enabled, pixels whose counterpart is out of frame or
  // inconsistent must be removed; with it disabled they may survive.
  const auto [left, right] = testutil::shiftedPair(64, 32, 10, 91);
  MatcherParams strict;
  strict.max_disp = 16;
  MatcherParams loose = strict;
  loose.lr_max_diff = std::numeric_limits<double>::infinity();
  const DisparityMap with_lr = computeDisparity(left, right, strict);
  const DisparityMap without = computeDisparity(left, right, loose);
  int n_with = 0, n_without = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x) {
      n_with += isValid(with_lr(x, y));
      n_without += isValid(without(x, y));
    }
  CHECK(n_with <= n_without);
  CHECK(n_without > 0);
}
