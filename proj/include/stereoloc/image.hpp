#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "stereoloc/errors.hpp"

namespace stereoloc {

/// Marker for pixels that carry no measurement (disparity/depth rasters).
/// Serialized as -1.0 in PFM files; all valid values are strictly positive
/// there, so the mapping is unambiguous.
template <typename Scalar>
constexpr Scalar invalidValue() {
  return std::numeric_limits<Scalar>::quiet_NaN();
}

template <typename Scalar>
inline bool isValid(Scalar v) {
  return std::isfinite(static_cast<double>(v));
}

/// Dense row-major raster over a single channel. Thin wrapper around an
/// Eigen array so callers can use expression syntax on `.array()` while the
/// toolkit API speaks in (x, y) pixel coordinates.
template <typename Scalar>
class Image {
 public:
  using ArrayType =
      Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Image() = default;
  Image(int width, int height) : data_(ArrayType::Zero(height, width)) {}
  Image(int width, int height, Scalar fill)
      : data_(ArrayType::Constant(height, width, fill)) {}
  explicit Image(ArrayType data) : data_(std::move(data)) {}

  int width() const { return static_cast<int>(data_.cols()); }
  int height() const { return static_cast<int>(data_.rows()); }
  bool empty() const { return data_.size() == 0; }
  Eigen::Index size() const { return data_.size(); }

  Scalar operator()(int x, int y) const { return data_(y, x); }
  Scalar& operator()(int x, int y) { return data_(y, x); }

  const ArrayType& array() const { return data_; }
  ArrayType& array() { return data_; }

  const Scalar* data() const { return data_.data(); }
  Scalar* data() { return data_.data(); }

  bool sameSize(const Image& other) const {
    return width() == other.width() && height() == other.height();
  }

  bool contains(int x, int y) const {
    return x >= 0 && x < width() && y >= 0 && y < height();
  }

 private:
  ArrayType data_;
};

using GrayImage = Image<float>;

/// Per-pixel disparity in pixels; invalid pixels are NaN.
using DisparityMap = Image<float>;

/// Per-pixel metric depth in meters; invalid pixels are NaN. Kept in double
/// so Z = fx*B/d stays exactly invertible back to the disparity it came
/// from; PFM serialization narrows to float32.
using DepthMap = Image<double>;

/// Axis-aligned pixel rectangle, top-left origin, half-open in neither axis:
/// covers columns [x0, x0+w) and rows [y0, y0+h).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  bool operator==(const PixelRect&) const = default;
};

/// Intersects `rect` with the image bounds. Throws EmptyAfterClamp when the
/// intersection has no area.
PixelRect clampRect(const PixelRect& rect, int image_w, int image_h);

}  // namespace stereoloc
