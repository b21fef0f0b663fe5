#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "stereoloc/depth.hpp"
#include "stereoloc/detection.hpp"
#include "stereoloc/image.hpp"

namespace stereoloc {

/// Mean Earth radius in meters; shared by the great-circle distance and the
/// local tangent-plane projection.
constexpr double kEarthRadiusM = 6371008.8;

/// Beyond this separation the equirectangular local frame is refused.
constexpr double kLocalRangeM = 10000.0;

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

/// East/north offsets in meters within a local tangent frame.
using PlanarPoint = Eigen::Vector2d;

/// Geo-referenced landmark identity as kept on the offline server.
struct LandmarkRecord {
  int class_id = 0;
  std::string name;
  GeoPoint position;
};

/// (landmark id, estimated distance) tuple standing in for a GPS fix.
struct NodeVirtualCoordinate {
  int landmark_id = 0;
  double distance_m = 0.0;
};

struct TrilaterationResult {
  PlanarPoint position;
  double residual_m = 0.0;  // RMS range misfit at the solution
};

/// Absolute-error statistics (Table-style report shape): min/max/mean,
/// population standard deviation, and RMSE, all in meters.
struct ErrorStats {
  double min_m = 0.0;
  double max_m = 0.0;
  double mean_m = 0.0;
  double std_m = 0.0;
  double rmse_m = 0.0;
  std::size_t n = 0;
};

/// Immutable landmark registry keyed by class id.
class LandmarkRegistry {
 public:
  LandmarkRegistry() = default;
  explicit LandmarkRegistry(std::vector<LandmarkRecord> records);

  static LandmarkRegistry fromJson(const std::string& text);
  static LandmarkRegistry load(const std::string& path);
  std::string toJson() const;

  const std::vector<LandmarkRecord>& records() const { return records_; }
  std::optional<LandmarkRecord> find(int class_id) const;
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<LandmarkRecord> records_;
};

/// Great-circle distance on the mean-radius sphere via the haversine form.
double haversineMeters(const GeoPoint& a, const GeoPoint& b);

/// Equirectangular local projection around `origin`:
/// x_east = R * dlon * cos(lat_origin), y_north = R * dlat.
/// Throws OutOfLocalRange beyond 10 km.
PlanarPoint projectEnu(const GeoPoint& origin, const GeoPoint& p);

/// Inverse of projectEnu.
GeoPoint inverseProjectEnu(const GeoPoint& origin, const PlanarPoint& p);

/// Why a detection produced no virtual coordinate.
struct NvcSkip {
  int class_id = 0;
  std::string reason;
};

struct NvcResult {
  std::vector<NodeVirtualCoordinate> coordinates;
  std::vector<NvcSkip> skipped;
};

/// Turns detections plus a depth map into virtual coordinates: for each
/// detection whose class id is in the registry, box -> depth patch ->
/// aggregate -> (id, distance). Unknown ids and patches with too little
/// valid depth are skipped, not fatal; output order follows input order.
NvcResult buildNvc(const std::vector<Detection>& detections,
                   const DepthMap& depth, const LandmarkRegistry& registry,
                   const AggregationMethod& method,
                   int min_valid = kDefaultMinValidPixels);

/// NVC wire format: JSON array of {landmarkId, distanceM}.
std::string serializeNvc(const std::vector<NodeVirtualCoordinate>& nvc);
std::vector<NodeVirtualCoordinate> parseNvc(const std::string& text);

/// Least-squares position from >= 3 anchor/distance pairs: the linearized
/// circle system seeded estimate, refined by at most 20 Gauss-Newton steps
/// on the range residuals. Throws InsufficientAnchors / CollinearAnchors /
/// LengthMismatch.
TrilaterationResult trilaterate(const std::vector<PlanarPoint>& anchors,
                                const std::vector<double>& distances);

/// Abs-error statistics between observed and actual distances.
ErrorStats evalMetrics(const std::vector<double>& observed,
                       const std::vector<double>& actual);

}  // namespace stereoloc
