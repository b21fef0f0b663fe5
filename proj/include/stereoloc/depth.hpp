#pragma once

#include <vector>

#include "stereoloc/camera.hpp"
#include "stereoloc/image.hpp"

namespace stereoloc {

/// How a depth patch collapses to one node-to-landmark distance.
/// trimmed_mean drops the given fraction of sorted values from each tail
/// before averaging; fraction must lie in [0, 0.5).
struct AggregationMethod {
  enum class Kind { kMean, kMedian, kTrimmedMean };
  Kind kind = Kind::kMean;
  double trim_fraction = 0.0;

  static AggregationMethod mean() { return {Kind::kMean, 0.0}; }
  static AggregationMethod median() { return {Kind::kMedian, 0.0}; }
  static AggregationMethod trimmedMean(double fraction) {
    return {Kind::kTrimmedMean, fraction};
  }
};

/// Depth values under one bounding box, invalid pixels included.
struct DepthPatch {
  PixelRect rect;             // clamped to the image
  std::vector<double> values; // row-major, rect.w * rect.h entries
};

/// Below this disparity (pixels) depth is treated as unmeasurable: the
/// triangulation Z = fx*B/d blows up on subpixel noise near zero.
constexpr double kDefaultDisparityEps = 0.1;

/// Fewest valid pixels a patch needs before its aggregate is trusted.
constexpr int kDefaultMinValidPixels = 10;

/// Triangulates metric depth per pixel: Z = fx * baseline / d. Pixels with
/// d <= d_eps or invalid disparity become invalid.
DepthMap disparityToDepth(const DisparityMap& disparity, const StereoRig& rig,
                          double d_eps = kDefaultDisparityEps);

/// Crops the depth values under `rect` (clamped to the image first).
/// Throws EmptyAfterClamp when the rectangle misses the image entirely.
DepthPatch extractPatch(const DepthMap& depth, const PixelRect& rect);

/// Aggregates the valid values of a patch to one distance in meters.
/// Throws InsufficientValidDepth when fewer than min_valid pixels are
/// valid — an occluded or textureless landmark the caller should skip.
double aggregatePatch(const DepthPatch& patch, const AggregationMethod& method,
                      int min_valid = kDefaultMinValidPixels);

}  // namespace stereoloc
