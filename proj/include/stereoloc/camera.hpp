#pragma once

#include <Eigen/Core>
#include <string>

namespace stereoloc {

/// Pinhole intrinsics in pixel units.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  /// 3x3 calibration matrix [[fx,0,cx],[0,fy,cy],[0,0,1]].
  Eigen::Matrix3d matrix() const;
};

/// Relative pose of the right camera in the left camera frame.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// 4x4 homogeneous [R|t; 0 1] view of the pose.
  Eigen::Matrix4d homogeneous() const;
};

/// Calibration bundle for a rectified stereo pair. Immutable after load;
/// safe to share across threads.
struct StereoRig {
  Intrinsics intrinsics;
  Extrinsics extrinsics;
  double baseline_m = 0.0;
  int image_width = 0;
  int image_height = 0;
};

/// Validates all rig invariants: positive focal lengths and baseline,
/// principal point within a [0, 4*dim] sanity band, orthonormal rotation
/// with det = +1 (tolerance 1e-6). Throws the error naming the first
/// violated field.
void validateRig(const StereoRig& rig);

/// Loads a rig from a JSON config file; see README for the schema.
/// Pure function of the file bytes.
StereoRig loadRig(const std::string& path);

/// Parses a rig from JSON text (the file-free core of loadRig).
StereoRig parseRig(const std::string& json_text);

/// Serializes a rig back to the config schema. loadRig(saveRig(r)) is
/// field-wise equal to r.
std::string serializeRig(const StereoRig& rig);
void saveRig(const std::string& path, const StereoRig& rig);

}  // namespace stereoloc
