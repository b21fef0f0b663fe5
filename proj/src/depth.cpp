#include "stereoloc/depth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stereoloc/errors.hpp"

namespace stereoloc {

DepthMap disparityToDepth(const DisparityMap& disparity, const StereoRig& rig,
                          double d_eps) {
  validateRig(rig);
  if (disparity.width() != rig.image_width ||
      disparity.height() != rig.image_height)
    throw DimensionMismatch("disparity map " + std::to_string(disparity.width()) +
                            "x" + std::to_string(disparity.height()) +
                            " vs rig " + std::to_string(rig.image_width) + "x" +
                            std::to_string(rig.image_height));

  const double fx_b = rig.intrinsics.fx * rig.baseline_m;
  DepthMap depth(disparity.width(), disparity.height(), invalidValue<double>());
  for (Eigen::Index i = 0; i < disparity.size(); ++i) {
    const float d = disparity.data()[i];
    if (!isValid(d) || d <= d_eps) continue;
    depth.data()[i] = fx_b / static_cast<double>(d);
  }
  return depth;
}

DepthPatch extractPatch(const DepthMap& depth, const PixelRect& rect) {
  if (rect.w <= 0 || rect.h <= 0)
    throw EmptyAfterClamp("rect has non-positive area");
  const PixelRect clamped = clampRect(rect, depth.width(), depth.height());
  DepthPatch patch;
  patch.rect = clamped;
  patch.values.reserve(static_cast<std::size_t>(clamped.w) * clamped.h);
  for (int y = clamped.y0; y < clamped.y0 + clamped.h; ++y)
    for (int x = clamped.x0; x < clamped.x0 + clamped.w; ++x)
      patch.values.push_back(depth(x, y));
  return patch;
}

double aggregatePatch(const DepthPatch& patch, const AggregationMethod& method,
                      int min_valid) {
  if (method.kind == AggregationMethod::Kind::kTrimmedMean &&
      (method.trim_fraction < 0.0 || method.trim_fraction >= 0.5))
    throw FieldOutOfRange("trim fraction must be in [0, 0.5)");

  std::vector<double> valid;
  valid.reserve(patch.values.size());
  for (double v : patch.values)
    if (isValid(v)) valid.push_back(v);
  if (static_cast<int>(valid.size()) < min_valid)
    throw InsufficientValidDepth(static_cast<int>(valid.size()), min_valid);

  switch (method.kind) {
    case AggregationMethod::Kind::kMean:
      return std::accumulate(valid.begin(), valid.end(), 0.0) /
             static_cast<double>(valid.size());
    case AggregationMethod::Kind::kMedian: {
      std::sort(valid.begin(), valid.end());
      const std::size_t n = valid.size();
      return n % 2 == 1 ? valid[n / 2]
                        : 0.5 * (valid[n / 2 - 1] + valid[n / 2]);
    }
    case AggregationMethod::Kind::kTrimmedMean: {
      std::sort(valid.begin(), valid.end());
      const std::size_t drop = static_cast<std::size_t>(
          method.trim_fraction * static_cast<double>(valid.size()));
      const std::size_t lo = drop;
      const std::size_t hi = valid.size() - drop;
      return std::accumulate(valid.begin() + static_cast<std::ptrdiff_t>(lo),
                             valid.begin() + static_cast<std::ptrdiff_t>(hi),
                             0.0) /
             static_cast<double>(hi - lo);
    }
  }
  throw FieldOutOfRange("unknown aggregation kind");
}

}  // namespace stereoloc
