#include "stereoloc/geo.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stereoloc/errors.hpp"

namespace stereoloc {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void validateGeoPoint(const GeoPoint& p, const std::string& what) {
  if (!std::isfinite(p.lat_deg) || p.lat_deg < -90.0 || p.lat_deg > 90.0)
    throw FieldOutOfRange(what + ": lat " + std::to_string(p.lat_deg));
  if (!std::isfinite(p.lon_deg) || p.lon_deg < -180.0 || p.lon_deg > 180.0)
    throw FieldOutOfRange(what + ": lon " + std::to_string(p.lon_deg));
}

}  // namespace

LandmarkRegistry::LandmarkRegistry(std::vector<LandmarkRecord> records)
    : records_(std::move(records)) {
  std::set<int> seen;
  for (const LandmarkRecord& r : records_) {
    validateGeoPoint(r.position, "landmark " + std::to_string(r.class_id));
    if (!seen.insert(r.class_id).second)
      throw FieldOutOfRange("duplicate landmark classId " +
                            std::to_string(r.class_id));
  }
}

LandmarkRegistry LandmarkRegistry::fromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("registry json: ") + e.what());
  }
  if (!j.is_array()) throw MalformedInput("registry must be a JSON array");
  std::vector<LandmarkRecord> records;
  records.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& rec = j[i];
    const std::string where = "registry record " + std::to_string(i);
    if (!rec.is_object() || !rec.contains("classId") || !rec.contains("lat") ||
        !rec.contains("lon"))
      throw MalformedInput(where + ": need classId, lat, lon");
    LandmarkRecord r;
    r.class_id = rec["classId"].get<int>();
    r.name = rec.value("name", std::string{});
    r.position.lat_deg = rec["lat"].get<double>();
    r.position.lon_deg = rec["lon"].get<double>();
    records.push_back(std::move(r));
  }
  return LandmarkRegistry(std::move(records));
}

LandmarkRegistry LandmarkRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open registry " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return fromJson(buf.str());
}

std::string LandmarkRegistry::toJson() const {
  json arr = json::array();
  for (const LandmarkRecord& r : records_) {
    json rec;
    rec["classId"] = r.class_id;
    rec["name"] = r.name;
    rec["lat"] = r.position.lat_deg;
    rec["lon"] = r.position.lon_deg;
    arr.push_back(std::move(rec));
  }
  return arr.dump(2) + "\n";
}

std::optional<LandmarkRecord> LandmarkRegistry::find(int class_id) const {
  for (const LandmarkRecord& r : records_)
    if (r.class_id == class_id) return r;
  return std::nullopt;
}

double haversineMeters(const GeoPoint& a, const GeoPoint& b) {
  validateGeoPoint(a, "haversine a");
  validateGeoPoint(b, "haversine b");
  const double lat1 = a.lat_deg * kDegToRad;
  const double lat2 = b.lat_deg * kDegToRad;
  const double dlat = (b.lat_deg - a.lat_deg) * kDegToRad;
  const double dlon = (b.lon_deg - a.lon_deg) * kDegToRad;
  const double sl = std::sin(dlat / 2.0);
  const double so = std::sin(dlon / 2.0);
  const double h = sl * sl + std::cos(lat1) * std::cos(lat2) * so * so;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

PlanarPoint projectEnu(const GeoPoint& origin, const GeoPoint& p) {
  const double sep = haversineMeters(origin, p);
  if (sep > kLocalRangeM) throw OutOfLocalRange(sep);
  const double x = kEarthRadiusM * (p.lon_deg - origin.lon_deg) * kDegToRad *
                   std::cos(origin.lat_deg * kDegToRad);
  const double y = kEarthRadiusM * (p.lat_deg - origin.lat_deg) * kDegToRad;
  return PlanarPoint(x, y);
}

GeoPoint inverseProjectEnu(const GeoPoint& origin, const PlanarPoint& p) {
  GeoPoint out;
  out.lat_deg = origin.lat_deg + p.y() / kEarthRadiusM / kDegToRad;
  out.lon_deg = origin.lon_deg +
                p.x() / (kEarthRadiusM * std::cos(origin.lat_deg * kDegToRad)) /
                    kDegToRad;
  return out;
}

NvcResult buildNvc(const std::vector<Detection>& detections,
                   const DepthMap& depth, const LandmarkRegistry& registry,
                   const AggregationMethod& method, int min_valid) {
  NvcResult result;
  for (const Detection& det : detections) {
    if (!registry.find(det.class_id)) {
      result.skipped.push_back(
          {det.class_id, "classId not in landmark registry"});
      continue;
    }
    try {
      const PixelRect rect = toRect(det, depth.width(), depth.height());
      const DepthPatch patch = extractPatch(depth, rect);
      const double dist = aggregatePatch(patch, method, min_valid);
      result.coordinates.push_back({det.class_id, dist});
    } catch (const EmptyAfterClamp& e) {
      result.skipped.push_back({det.class_id, e.what()});
    } catch (const InsufficientValidDepth& e) {
      result.skipped.push_back({det.class_id, e.what()});
    }
  }
  return result;
}

std::string serializeNvc(const std::vector<NodeVirtualCoordinate>& nvc) {
  json arr = json::array();
  for (const NodeVirtualCoordinate& c : nvc)
    arr.push_back({{"landmarkId", c.landmark_id}, {"distanceM", c.distance_m}});
  return arr.dump(2) + "\n";
}

std::vector<NodeVirtualCoordinate> parseNvc(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("nvc json: ") + e.what());
  }
  if (!j.is_array()) throw MalformedInput("nvc json must be an array");
  std::vector<NodeVirtualCoordinate> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& rec = j[i];
    if (!rec.is_object() || !rec.contains("landmarkId") ||
        !rec.contains("distanceM"))
      throw MalformedInput("nvc record " + std::to_string(i) +
                           ": need landmarkId and distanceM");
    NodeVirtualCoordinate c;
    c.landmark_id = rec["landmarkId"].get<int>();
    c.distance_m = rec["distanceM"].get<double>();
    if (!(c.distance_m > 0.0) || !std::isfinite(c.distance_m))
      throw FieldOutOfRange("nvc record " + std::to_string(i) +
                            ": distanceM must be finite and > 0");
    out.push_back(c);
  }
  return out;
}

TrilaterationResult trilaterate(const std::vector<PlanarPoint>& anchors,
                                const std::vector<double>& distances) {
  if (anchors.size() != distances.size())
    throw LengthMismatch(anchors.size(), distances.size());
  const int n = static_cast<int>(anchors.size());
  if (n < 3) throw InsufficientAnchors(n, 3);

  // Linearized seed: subtracting the first circle equation from the others
  // leaves a linear system in the position.
  Eigen::MatrixXd a(n - 1, 2);
  Eigen::VectorXd b(n - 1);
  const PlanarPoint& a0 = anchors[0];
  const double d0sq = distances[0] * distances[0];
  for (int i = 1; i < n; ++i) {
    const PlanarPoint& ai = anchors[static_cast<std::size_t>(i)];
    a.row(i - 1) = 2.0 * (ai - a0).transpose();
    b(i - 1) = d0sq - distances[static_cast<std::size_t>(i)] * distances[static_cast<std::size_t>(i)] +
               ai.squaredNorm() - a0.squaredNorm();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-9 * sv(0))
    throw CollinearAnchors("singular value ratio " +
                           std::to_string(sv(sv.size() - 1) / sv(0)));
  PlanarPoint p = svd.solve(b);

  // Gauss-Newton refinement of the range misfit sum.
  for (int iter = 0; iter < 20; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) {
      const PlanarPoint diff = p - anchors[static_cast<std::size_t>(i)];
      const double norm = std::max(diff.norm(), 1e-12);
      const double res = norm - distances[static_cast<std::size_t>(i)];
      const Eigen::Vector2d grad = diff / norm;
      jtj += grad * grad.transpose();
      jtr += grad * res;
    }
    const Eigen::Vector2d step = jtj.ldlt().solve(jtr);
    if (!step.allFinite()) break;
    p -= step;
    if (step.norm() < 1e-12) break;
  }

  double sq_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double res =
        (p - anchors[static_cast<std::size_t>(i)]).norm() - distances[static_cast<std::size_t>(i)];
    sq_sum += res * res;
  }
  return {p, std::sqrt(sq_sum / n)};
}

ErrorStats evalMetrics(const std::vector<double>& observed,
                       const std::vector<double>& actual) {
  if (observed.size() != actual.size())
    throw LengthMismatch(observed.size(), actual.size());
  if (observed.empty()) throw EmptyInput("observed/actual distance lists");

  const std::size_t n = observed.size();
  std::vector<double> err(n);
  for (std::size_t i = 0; i < n; ++i)
    err[i] = std::abs(observed[i] - actual[i]);

  ErrorStats s;
  s.n = n;
  s.min_m = *std::min_element(err.begin(), err.end());
  s.max_m = *std::max_element(err.begin(), err.end());
  double sum = 0.0;
  double sq_sum = 0.0;
  for (double e : err) {
    sum += e;
    sq_sum += e * e;
  }
  s.mean_m = sum / static_cast<double>(n);
  s.rmse_m = std::sqrt(sq_sum / static_cast<double>(n));
  double var = 0.0;
  for (double e : err) var += (e - s.mean_m) * (e - s.mean_m);
  s.std_m = std::sqrt(var / static_cast<double>(n));
  return s;
}

}  // namespace stereoloc
