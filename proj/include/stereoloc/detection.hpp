#pragma once

#include <string>
#include <vector>

#include "stereoloc/image.hpp"

namespace stereoloc {

/// One recognized landmark as emitted by the detector: box given by its
/// center (x, y) and extent, plus confidence and class identity.
struct Detection {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
  double confidence = 0.0;
  std::string class_name;
  int class_id = 0;
  std::string image_path;
  std::string prediction_type;
};

enum class BoxConvention {
  kCenter,  // (x, y) is the box center (detector-export default)
  kCorner,  // (x, y) is the top-left corner
};

/// Parses detection-result JSON: either a single object or an array of
/// objects with keys x, y, width, height, confidence, class, classId,
/// imagePath, predictionType. Unknown keys are ignored; the string keys may
/// be absent. Throws MalformedInput / FieldOutOfRange naming the record
/// index and field.
std::vector<Detection> parseDetections(const std::string& text);

/// Serializes detections back to the same JSON shape (always an array).
std::string serializeDetections(const std::vector<Detection>& detections);

/// Converts a detection box to an image-clamped pixel rectangle.
/// Throws EmptyAfterClamp when the box misses the image.
PixelRect toRect(const Detection& det, int image_w, int image_h,
                 BoxConvention convention = BoxConvention::kCenter);

/// Keeps exactly the records with confidence >= threshold, in order.
std::vector<Detection> filterByConfidence(const std::vector<Detection>& dets,
                                          double threshold);

/// One record per class_id: the highest-confidence detection of each class,
/// in order of first appearance.
std::vector<Detection> bestPerClass(const std::vector<Detection>& dets);

}  // namespace stereoloc
