#include <doctest.h>

#include <cmath>

#include "stereoloc/camera.hpp"
#include "stereoloc/errors.hpp"
#include "harness.hpp"

using namespace stereoloc;

namespace {

std::string minimalRig(double baseline) {
  return R"({"fx": 1000.0, "fy": 1000.0, "cx": 320.0, "cy": 240.0,
             "baseline_m": )" +
         std::to_string(baseline) +
         R"(, "image_width": 640, "image_height": 480})";
}

}  // namespace

TEST_CASE("rig with identity rotation is accepted") {
  const StereoRig rig = parseRig(minimalRig(0.2));
  CHECK(rig.intrinsics.fx == 1000.0);
  CHECK(rig.baseline_m == 0.2);
  CHECK(rig.image_width == 640);
  CHECK(rig.extrinsics.rotation.isIdentity(0.0));
  // translation defaults to the baseline along +x
  CHECK(rig.extrinsics.translation.x() == 0.2);
  CHECK(rig.extrinsics.translation.y() == 0.0);
}

TEST_CASE("zero baseline is rejected") {
  CHECK_THROWS_AS(parseRig(minimalRig(0.0)), NonPositiveBaseline);
  CHECK_THROWS_AS(parseRig(minimalRig(-0.1)), NonPositiveBaseline);
}

TEST_CASE("scaled identity rotation is rejected") {
  // r = 2*I gives r^T r = 4*I, clearly non-orthonormal.
  const std::string text = R"({"fx": 1000, "fy": 1000, "cx": 320, "cy": 240,
    "baseline_m": 0.2, "image_width": 640, "image_height": 480,
    "rotation": [2,0,0, 0,2,0, 0,0,2]})";
  CHECK_THROWS_AS(parseRig(text), NonOrthonormalRotation);
}

TEST_CASE("reflection (det -1) is rejected") {
  const std::string text = R"({"fx": 1000, "fy": 1000, "cx": 320, "cy": 240,
    "baseline_m": 0.2, "image_width": 640, "image_height": 480,
    "rotation": [1,0,0, 0,1,0, 0,0,-1]})";
  CHECK_THROWS_AS(parseRig(text), NonOrthonormalRotation);
}

TEST_CASE("a genuine rotation passes validation") {
  const double c = std::cos(0.3), s = std::sin(0.3);
  StereoRig rig = parseRig(minimalRig(0.2));
  rig.extrinsics.rotation << c, -s, 0, s, c, 0, 0, 0, 1;
  CHECK_NOTHROW(validateRig(rig));
}

TEST_CASE("each missing required key is reported by name") {
  const char* keys[] = {"fx", "fy",          "cx",
                        "cy", "baseline_m",  "image_width",
                        "image_height"};
  for (const char* key : keys) {
    std::string text = minimalRig(0.2);
    // crude but sufficient: rename the key so it is missing
    const auto pos = text.find(std::string("\"") + key + "\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos + 1, std::string(key).size(), std::string(key) + "X");
    try {
      parseRig(text);
      FAIL_CHECK("expected MissingField for " << key);
    } catch (const MissingField& e) {
      CHECK(e.field() == key);
    }
  }
}

TEST_CASE("malformed json is rejected") {
  CHECK_THROWS_AS(parseRig("not json"), MalformedInput);
  CHECK_THROWS_AS(parseRig("[1,2,3]"), MalformedInput);
}

TEST_CASE("load is a pure function of the file bytes") {
  const auto dir = testutil::makeTempDir("rig");
  const auto path = (dir / "rig.json").string();
  testutil::writeFile(path, minimalRig(0.25));
  const StereoRig a = loadRig(path);
  const StereoRig b = loadRig(path);
  CHECK(a.intrinsics.fx == b.intrinsics.fx);
  CHECK(a.intrinsics.cy == b.intrinsics.cy);
  CHECK(a.baseline_m == b.baseline_m);
  CHECK((a.extrinsics.rotation - b.extrinsics.rotation).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("serialize/reload round trip is field-wise equal") {
  StereoRig rig = parseRig(minimalRig(0.17));
  const double c = std::cos(0.1), s = std::sin(0.1);
  rig.extrinsics.rotation << c, -s, 0, s, c, 0, 0, 0, 1;
  rig.extrinsics.translation << 0.17, 0.001, -0.002;
  rig.intrinsics.cx = 321.5;

  const StereoRig back = parseRig(serializeRig(rig));
  CHECK(back.intrinsics.fx == rig.intrinsics.fx);
  CHECK(back.intrinsics.fy == rig.intrinsics.fy);
  CHECK(back.intrinsics.cx == rig.intrinsics.cx);
  CHECK(back.intrinsics.cy == rig.intrinsics.cy);
  CHECK(back.baseline_m == rig.baseline_m);
  CHECK(back.image_width == rig.image_width);
  CHECK(back.image_height == rig.image_height);
  CHECK((back.extrinsics.rotation - rig.extrinsics.rotation).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.extrinsics.translation - rig.extrinsics.translation).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("intrinsics and extrinsics matrix views") {
  const StereoRig rig = parseRig(minimalRig(0.2));
  const Eigen::Matrix3d k = rig.intrinsics.matrix();
  CHECK(k(0, 0) == 1000.0);
  CHECK(k(0, 2) == 320.0);
  CHECK(k(1, 2) == 240.0);
  CHECK(k(2, 2) == 1.0);
  const Eigen::Matrix4d e = rig.extrinsics.homogeneous();
  CHECK(e(3, 3) == 1.0);
  CHECK(e(0, 3) == 0.2);
}
