#include "stereoloc/detection.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

#include "stereoloc/errors.hpp"
#include "stereoloc/image_io.hpp"

namespace stereoloc {

using nlohmann::json;

namespace {

double numberField(const json& rec, std::size_t index, const char* key) {
  if (!rec.contains(key))
    throw MalformedInput("detection record " + std::to_string(index) +
                         ": missing key '" + key + "'");
  if (!rec[key].is_number())
    throw MalformedInput("detection record " + std::to_string(index) + ": '" +
                         key + "' is not numeric");
  return rec[key].get<double>();
}

Detection parseOne(const json& rec, std::size_t index) {
  if (!rec.is_object())
    throw MalformedInput("detection record " + std::to_string(index) +
                         " is not an object");
  Detection det;
  det.x = numberField(rec, index, "x");
  det.y = numberField(rec, index, "y");
  det.width = numberField(rec, index, "width");
  det.height = numberField(rec, index, "height");
  det.confidence = numberField(rec, index, "confidence");
  det.class_id = static_cast<int>(numberField(rec, index, "classId"));
  if (rec.contains("class") && rec["class"].is_string())
    det.class_name = rec["class"].get<std::string>();
  if (rec.contains("imagePath") && rec["imagePath"].is_string())
    det.image_path = rec["imagePath"].get<std::string>();
  if (rec.contains("predictionType") && rec["predictionType"].is_string())
    det.prediction_type = rec["predictionType"].get<std::string>();

  const std::string where = "detection record " + std::to_string(index);
  if (!(det.width > 0.0) || !(det.height > 0.0))
    throw FieldOutOfRange(where + ": width/height must be > 0");
  if (det.confidence < 0.0 || det.confidence > 1.0)
    throw FieldOutOfRange(where + ": confidence " +
                          std::to_string(det.confidence) +
                          " outside [0, 1]");
  if (det.class_id < 0)
    throw FieldOutOfRange(where + ": classId must be >= 0");
  return det;
}

}  // namespace

std::vector<Detection> parseDetections(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("detection json: ") + e.what());
  }
  std::vector<Detection> out;
  if (j.is_object()) {
    out.push_back(parseOne(j, 0));
  } else if (j.is_array()) {
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parseOne(j[i], i));
  } else {
    throw MalformedInput("detection json must be an object or an array");
  }
  return out;
}

std::string serializeDetections(const std::vector<Detection>& detections) {
  json arr = json::array();
  for (const Detection& d : detections) {
    json rec;
    rec["x"] = d.x;
    rec["y"] = d.y;
    rec["width"] = d.width;
    rec["height"] = d.height;
    rec["confidence"] = d.confidence;
    rec["class"] = d.class_name;
    rec["classId"] = d.class_id;
    rec["imagePath"] = d.image_path;
    rec["predictionType"] = d.prediction_type;
    arr.push_back(std::move(rec));
  }
  return arr.dump(2) + "\n";
}

PixelRect toRect(const Detection& det, int image_w, int image_h,
                 BoxConvention convention) {
  if (image_w <= 0 || image_h <= 0)
    throw FieldOutOfRange("image dimensions must be positive");
  double left = det.x;
  double top = det.y;
  if (convention == BoxConvention::kCenter) {
    left = det.x - det.width / 2.0;
    top = det.y - det.height / 2.0;
  }
  const PixelRect nominal{static_cast<int>(std::lround(left)),
                          static_cast<int>(std::lround(top)),
                          static_cast<int>(std::lround(det.width)),
                          static_cast<int>(std::lround(det.height))};
  return clampRect(nominal, image_w, image_h);
}

std::vector<Detection> filterByConfidence(const std::vector<Detection>& dets,
                                          double threshold) {
  std::vector<Detection> out;
  for (const Detection& d : dets)
    if (d.confidence >= threshold) out.push_back(d);
  return out;
}

std::vector<Detection> bestPerClass(const std::vector<Detection>& dets) {
  std::map<int, std::size_t> best;  // class_id -> index into `out`
  std::vector<Detection> out;
  for (const Detection& d : dets) {
    auto it = best.find(d.class_id);
    if (it == best.end()) {
      best.emplace(d.class_id, out.size());
      out.push_back(d);
    } else if (d.confidence > out[it->second].confidence) {
      out[it->second] = d;
    }
  }
  return out;
}

}  // namespace stereoloc
