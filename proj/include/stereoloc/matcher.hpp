#pragma once

#include <Eigen/Core>
#include <limits>

#include "stereoloc/image.hpp"

namespace stereoloc {

/// Tuning knobs for the block matcher and the semi-global aggregation.
///
/// p1/p2 are the small/large smoothness penalties, in the same units as the
/// block cost (mean squared intensity difference). lr_max_diff is the
/// left-right consistency tolerance in pixels; setting it non-finite
/// disables the check (and skips the right-referenced pass entirely).
/// uniqueness_ratio = 0 disables the uniqueness test.
struct MatcherParams {
  int block_size = 5;
  int min_disp = 0;
  int max_disp = 64;
  double p1 = 200.0;   // 8 * block_size^2
  double p2 = 800.0;   // 32 * block_size^2
  int num_paths = 8;
  double lr_max_diff = 1.0;
  double uniqueness_ratio = 0.15;
  bool subpixel = true;

  static double defaultP1(int block_size) { return 8.0 * block_size * block_size; }
  static double defaultP2(int block_size) { return 32.0 * block_size * block_size; }

  bool lrCheckEnabled() const {
    return std::isfinite(lr_max_diff);
  }
};

/// Throws FieldOutOfRange unless every MatcherParams invariant holds.
void validateParams(const MatcherParams& params);

/// Per-(pixel, disparity-candidate) matching costs. Candidate k maps to
/// disparity min_disp + k; costs for candidates whose matching window
/// center falls outside the image carry kSentinel.
template <typename Scalar>
struct CostVolume {
  static constexpr Scalar kSentinel = Scalar(1e10);

  int width = 0;
  int height = 0;
  int min_disp = 0;
  int disp_levels = 0;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> costs;  // ((y*w + x)*levels + k)

  CostVolume() = default;
  CostVolume(int w, int h, int min_d, int levels)
      : width(w), height(h), min_disp(min_d), disp_levels(levels),
        costs(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(
            static_cast<Eigen::Index>(w) * h * levels)) {}

  Eigen::Index index(int x, int y, int k) const {
    return (static_cast<Eigen::Index>(y) * width + x) * disp_levels + k;
  }
  Scalar at(int x, int y, int k) const { return costs[index(x, y, k)]; }
  Scalar& at(int x, int y, int k) { return costs[index(x, y, k)]; }

  /// View of the disparity-indexed cost row at one pixel.
  Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> pixelCosts(
      int x, int y) const {
    return {costs.data() + index(x, y, 0), disp_levels};
  }
};

/// Mean of squared per-pixel differences between two equally sized windows.
/// Symmetric in its arguments; zero iff the windows are identical.
template <typename DerivedA, typename DerivedB>
double ssdCost(const Eigen::ArrayBase<DerivedA>& left_window,
               const Eigen::ArrayBase<DerivedB>& right_window) {
  if (left_window.rows() != right_window.rows() ||
      left_window.cols() != right_window.cols())
    throw DimensionMismatch("ssd windows differ in shape");
  if (left_window.size() == 0) throw DimensionMismatch("ssd window is empty");
  const double sum = (left_window.template cast<double>() -
                      right_window.template cast<double>())
                         .square()
                         .sum();
  return sum / static_cast<double>(left_window.size());
}

/// Left-referenced SSD cost volume: cost(x,y,d) compares the block around
/// left(x,y) with the block around right(x-d,y). Window coordinates are
/// clamped at image edges so every cost averages block_size^2 samples.
CostVolume<float> buildCostVolume(const GrayImage& left, const GrayImage& right,
                                  const MatcherParams& params,
                                  int num_threads = 1);

/// Right-referenced volume derived from the left one:
/// cost_r(x,y,d) = cost_l(x+d,y,d), sentinel where x+d leaves the image.
CostVolume<float> rightReferencedVolume(const CostVolume<float>& left_volume,
                                        int num_threads = 1);

/// Semi-global aggregation: sums the scanline recurrence
///   L(p,d) = C(p,d) + min(L(q,d), L(q,d+-1)+p1, min_k L(q,k)+p2) - min_k L(q,k)
/// (q the predecessor along the path) over num_paths directions.
/// Accumulation order is fixed, so the result is independent of num_threads.
template <typename Scalar>
CostVolume<double> aggregateCosts(const CostVolume<Scalar>& volume,
                                  const MatcherParams& params,
                                  int num_threads = 1);

/// Winner-take-all selection with ties broken toward the smaller disparity,
/// optional uniqueness test, and equispaced-parabola subpixel refinement
/// (skipped for winners at the range endpoints).
template <typename Scalar>
DisparityMap selectDisparity(const CostVolume<Scalar>& aggregated,
                             const MatcherParams& params);

/// Full pipeline: build -> aggregate -> select on the left-referenced
/// volume, then (unless disabled) the same on the right-referenced volume
/// followed by the left-right consistency check. Deterministic: identical
/// inputs give a bit-identical map for any num_threads.
DisparityMap computeDisparity(const GrayImage& left, const GrayImage& right,
                              const MatcherParams& params, int num_threads = 1);

}  // namespace stereoloc
