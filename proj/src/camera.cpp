#include "stereoloc/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/LU>
#include <json.hpp>

#include "stereoloc/errors.hpp"

namespace stereoloc {

using nlohmann::json;

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = fx;
  k(1, 1) = fy;
  k(0, 2) = cx;
  k(1, 2) = cy;
  return k;
}

Eigen::Matrix4d Extrinsics::homogeneous() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

void validateRig(const StereoRig& rig) {
  const auto& in = rig.intrinsics;
  if (!(in.fx > 0.0)) throw FieldOutOfRange("fx must be > 0");
  if (!(in.fy > 0.0)) throw FieldOutOfRange("fy must be > 0");
  if (rig.image_width <= 0 || rig.image_height <= 0)
    throw FieldOutOfRange("image_width/image_height must be > 0");
  if (!std::isfinite(in.cx) || in.cx < 0.0 || in.cx > 4.0 * rig.image_width)
    throw FieldOutOfRange("cx outside [0, 4*image_width]");
  if (!std::isfinite(in.cy) || in.cy < 0.0 || in.cy > 4.0 * rig.image_height)
    throw FieldOutOfRange("cy outside [0, 4*image_height]");
  if (!(rig.baseline_m > 0.0)) throw NonPositiveBaseline(rig.baseline_m);

  const Eigen::Matrix3d& r = rig.extrinsics.rotation;
  if (!r.allFinite()) throw NonOrthonormalRotation("non-finite entries");
  const double ortho_err =
      (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-6)
    throw NonOrthonormalRotation("|r^T r - I| = " + std::to_string(ortho_err));
  const double det_err = std::abs(r.determinant() - 1.0);
  if (det_err > 1e-6)
    throw NonOrthonormalRotation("|det(r) - 1| = " + std::to_string(det_err));
  if (!rig.extrinsics.translation.allFinite())
    throw FieldOutOfRange("translation has non-finite entries");
}

namespace {

double requireNumber(const json& j, const char* key) {
  if (!j.contains(key)) throw MissingField(key);
  if (!j[key].is_number())
    throw FieldOutOfRange(std::string(key) + " must be numeric");
  return j[key].get<double>();
}

}  // namespace

StereoRig parseRig(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("rig config: ") + e.what());
  }
  if (!j.is_object()) throw MalformedInput("rig config must be a JSON object");

  StereoRig rig;
  rig.intrinsics.fx = requireNumber(j, "fx");
  rig.intrinsics.fy = requireNumber(j, "fy");
  rig.intrinsics.cx = requireNumber(j, "cx");
  rig.intrinsics.cy = requireNumber(j, "cy");
  rig.baseline_m = requireNumber(j, "baseline_m");
  rig.image_width = static_cast<int>(requireNumber(j, "image_width"));
  rig.image_height = static_cast<int>(requireNumber(j, "image_height"));

  if (j.contains("rotation")) {
    const auto& rot = j["rotation"];
    if (!rot.is_array() || rot.size() != 9)
      throw FieldOutOfRange("rotation must be an array of 9 numbers");
    for (int i = 0; i < 9; ++i)
      rig.extrinsics.rotation(i / 3, i % 3) = rot[static_cast<std::size_t>(i)].get<double>();
  }
  if (j.contains("translation")) {
    const auto& t = j["translation"];
    if (!t.is_array() || t.size() != 3)
      throw FieldOutOfRange("translation must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i)
      rig.extrinsics.translation(i) = t[static_cast<std::size_t>(i)].get<double>();
  } else {
    rig.extrinsics.translation = Eigen::Vector3d(rig.baseline_m, 0.0, 0.0);
  }

  validateRig(rig);
  return rig;
}

StereoRig loadRig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rig config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parseRig(buf.str());
}

std::string serializeRig(const StereoRig& rig) {
  json j;
  j["fx"] = rig.intrinsics.fx;
  j["fy"] = rig.intrinsics.fy;
  j["cx"] = rig.intrinsics.cx;
  j["cy"] = rig.intrinsics.cy;
  j["baseline_m"] = rig.baseline_m;
  j["image_width"] = rig.image_width;
  j["image_height"] = rig.image_height;
  json rot = json::array();
  for (int i = 0; i < 9; ++i) rot.push_back(rig.extrinsics.rotation(i / 3, i % 3));
  j["rotation"] = rot;
  json t = json::array();
  for (int i = 0; i < 3; ++i) t.push_back(rig.extrinsics.translation(i));
  j["translation"] = t;
  return j.dump(2) + "\n";
}

void saveRig(const std::string& path, const StereoRig& rig) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << serializeRig(rig);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace stereoloc
