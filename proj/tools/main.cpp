// stereoloc: batch front end for the stereo localization pipeline.
// Subcommands: disparity, depth, locate, trilaterate, dvhop, eval.
// Exit codes: 0 success, 1 internal error, 2 input validation,
// 3 insufficient anchors, 4 degenerate anchor geometry.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stereoloc/camera.hpp"
#include "stereoloc/depth.hpp"
#include "stereoloc/detection.hpp"
#include "stereoloc/dvhop.hpp"
#include "stereoloc/errors.hpp"
#include "stereoloc/geo.hpp"
#include "stereoloc/image_io.hpp"
#include "stereoloc/matcher.hpp"
#include "stereoloc/version.hpp"

namespace {

using nlohmann::json;
using namespace stereoloc;

using Clock = std::chrono::steady_clock;

std::string readTextFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void writeTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

/// Every output file gets a sibling <output>.manifest.json recording the
/// command, inputs, and parameter snapshot needed to reproduce it. Wall
/// time is the only run-varying field.
void writeManifest(const std::string& out_path, const std::string& command,
                   const json& inputs, const json& params, double wall_ms) {
  json m;
  m["command"] = command;
  m["inputs"] = inputs;
  m["params"] = params;
  m["toolVersion"] = kVersion;
  m["wallTimeMs"] = wall_ms;
  writeTextFile(out_path + ".manifest.json", m.dump(2) + "\n");
}

struct MatcherCli {
  MatcherParams params;
  int threads = 1;
  std::string preset;

  void attach(CLI::App* cmd) {
    cmd->add_option("--block-size", params.block_size, "odd SSD window edge");
    cmd->add_option("--min-disp", params.min_disp, "smallest disparity candidate");
    cmd->add_option("--max-disp", params.max_disp, "largest disparity candidate");
    cmd->add_option("--p1", params.p1, "small smoothness penalty");
    cmd->add_option("--p2", params.p2, "large smoothness penalty");
    cmd->add_option("--paths", params.num_paths, "aggregation paths (4 or 8)");
    cmd->add_option("--lr-max-diff", params.lr_max_diff,
                    "left-right tolerance in px; 'off' to disable")
        ->transform(CLI::Transformer(
            std::map<std::string, double>{
                {"off", std::numeric_limits<double>::infinity()}},
            CLI::ignore_case)
                        .description(""));
    cmd->add_option("--uniqueness", params.uniqueness_ratio,
                    "uniqueness margin in [0,1); 0 disables");
    cmd->add_flag_callback(
        "--no-subpixel", [this] { params.subpixel = false; },
        "disable parabola subpixel refinement");
    cmd->add_option("--threads", threads, "worker threads (results identical)");
    cmd->add_option("--preset", preset, "named parameter preset")
        ->check(CLI::IsMember({"paper"}));
  }

  // Preset fills whatever the user did not set explicitly; p1/p2 follow the
  // block size unless given.
  void resolve(const CLI::App* cmd) {
    if (preset == "paper") {
      if (cmd->count("--block-size") == 0) params.block_size = 5;
      if (cmd->count("--min-disp") == 0) params.min_disp = 0;
      if (cmd->count("--max-disp") == 0) params.max_disp = 64;
      if (cmd->count("--paths") == 0) params.num_paths = 8;
    }
    if (cmd->count("--p1") == 0)
      params.p1 = MatcherParams::defaultP1(params.block_size);
    if (cmd->count("--p2") == 0)
      params.p2 = MatcherParams::defaultP2(params.block_size);
    validateParams(params);
  }

  json snapshot() const {
    return {{"blockSize", params.block_size},
            {"minDisp", params.min_disp},
            {"maxDisp", params.max_disp},
            {"p1", params.p1},
            {"p2", params.p2},
            {"paths", params.num_paths},
            {"lrMaxDiff", std::isfinite(params.lr_max_diff)
                              ? json(params.lr_max_diff)
                              : json("off")},
            {"uniqueness", params.uniqueness_ratio},
            {"subpixel", params.subpixel},
            {"threads", threads}};
  }
};

AggregationMethod parseAggregation(const std::string& spec) {
  if (spec == "mean") return AggregationMethod::mean();
  if (spec == "median") return AggregationMethod::median();
  if (spec.rfind("trim:", 0) == 0) {
    try {
      return AggregationMethod::trimmedMean(std::stod(spec.substr(5)));
    } catch (const std::exception&) {
      throw FieldOutOfRange("bad trim fraction in --agg " + spec);
    }
  }
  throw FieldOutOfRange("--agg must be mean, median, or trim:F");
}

BoxConvention parseBoxConvention(const std::string& name) {
  if (name == "center") return BoxConvention::kCenter;
  if (name == "corner") return BoxConvention::kCorner;
  throw FieldOutOfRange("--box-convention must be center or corner");
}

void checkRigMatchesImages(const StereoRig& rig, const GrayImage& img,
                           const std::string& path) {
  if (img.width() != rig.image_width || img.height() != rig.image_height)
    throw ImageSizeMismatch(path + " is " + std::to_string(img.width()) + "x" +
                            std::to_string(img.height()) +
                            " but rig declares " +
                            std::to_string(rig.image_width) + "x" +
                            std::to_string(rig.image_height));
}

// --- subcommand bodies -----------------------------------------------------

struct DisparityArgs {
  std::string left, right, rig, out, vis;
  MatcherCli matcher;
};

void runDisparity(const DisparityArgs& a, const CLI::App* cmd) {
  const auto t0 = Clock::now();
  MatcherCli m = a.matcher;
  m.resolve(cmd);
  const StereoRig rig = loadRig(a.rig);
  const GrayImage left = readPgm(a.left);
  const GrayImage right = readPgm(a.right);
  checkRigMatchesImages(rig, left, a.left);
  checkRigMatchesImages(rig, right, a.right);

  const DisparityMap disp = computeDisparity(left, right, m.params, m.threads);
  writePfm(a.out, disp);
  if (!a.vis.empty()) writePgm(a.vis, visualize(disp));

  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  writeManifest(a.out, "disparity",
                {{"left", a.left}, {"right", a.right}, {"rig", a.rig}},
                m.snapshot(), ms);
}

struct DepthArgs {
  std::string disparity, rig, out;
  double d_eps = kDefaultDisparityEps;
};

void runDepth(const DepthArgs& a) {
  const auto t0 = Clock::now();
  const StereoRig rig = loadRig(a.rig);
  const DisparityMap disp = readPfm(a.disparity);
  const DepthMap depth = disparityToDepth(disp, rig, a.d_eps);
  Image<float> narrowed(depth.width(), depth.height());
  narrowed.array() = depth.array().cast<float>();
  writePfm(a.out, narrowed);
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  writeManifest(a.out, "depth",
                {{"disparity", a.disparity}, {"rig", a.rig}},
                {{"dEps", a.d_eps}}, ms);
}

struct LocateArgs {
  std::string left, right, rig, detections, registry, out;
  std::string agg = "mean";
  std::string box_convention = "center";
  double min_confidence = 0.5;
  int min_valid = kDefaultMinValidPixels;
  double d_eps = kDefaultDisparityEps;
  bool require_trilateration = false;
  MatcherCli matcher;
};

int runLocate(const LocateArgs& a, const CLI::App* cmd) {
  const auto t0 = Clock::now();
  MatcherCli m = a.matcher;
  m.resolve(cmd);
  const AggregationMethod method = parseAggregation(a.agg);
  const BoxConvention convention = parseBoxConvention(a.box_convention);

  const StereoRig rig = loadRig(a.rig);
  const GrayImage left = readPgm(a.left);
  const GrayImage right = readPgm(a.right);
  checkRigMatchesImages(rig, left, a.left);
  checkRigMatchesImages(rig, right, a.right);
  const LandmarkRegistry registry = LandmarkRegistry::load(a.registry);

  std::vector<Detection> dets = parseDetections(readTextFile(a.detections));
  dets = bestPerClass(filterByConfidence(dets, a.min_confidence));
  // to_rect runs inside buildNvc with the center convention; for corner
  // boxes shift them to centers up front.
  if (convention == BoxConvention::kCorner) {
    for (Detection& d : dets) {
      d.x += d.width / 2.0;
      d.y += d.height / 2.0;
    }
  }

  const DisparityMap disp = computeDisparity(left, right, m.params, m.threads);
  const DepthMap depth = disparityToDepth(disp, rig, a.d_eps);
  const NvcResult nvc = buildNvc(dets, depth, registry, method, a.min_valid);
  for (const NvcSkip& skip : nvc.skipped)
    std::cerr << "warning: landmark " << skip.class_id << " skipped: "
              << skip.reason << "\n";

  writeTextFile(a.out, serializeNvc(nvc.coordinates));
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  json params = m.snapshot();
  params["agg"] = a.agg;
  params["minConfidence"] = a.min_confidence;
  params["boxConvention"] = a.box_convention;
  params["minValid"] = a.min_valid;
  params["dEps"] = a.d_eps;
  writeManifest(a.out, "locate",
                {{"left", a.left},
                 {"right", a.right},
                 {"rig", a.rig},
                 {"detections", a.detections},
                 {"registry", a.registry}},
                params, ms);

  if (a.require_trilateration && nvc.coordinates.size() < 3) {
    std::cerr << "error: only " << nvc.coordinates.size()
              << " virtual coordinates; trilateration needs at least 3 "
                 "landmarks\n";
    return 3;
  }
  return 0;
}

struct TrilaterateArgs {
  std::string nvc, registry, out;
};

void runTrilaterate(const TrilaterateArgs& a) {
  const auto t0 = Clock::now();
  const std::vector<NodeVirtualCoordinate> nvc = parseNvc(readTextFile(a.nvc));
  const LandmarkRegistry registry = LandmarkRegistry::load(a.registry);

  std::vector<LandmarkRecord> resolved;
  std::vector<double> distances;
  for (const NodeVirtualCoordinate& c : nvc) {
    const auto rec = registry.find(c.landmark_id);
    if (!rec) {
      std::cerr << "warning: landmark " << c.landmark_id
                << " not in registry, skipped\n";
      continue;
    }
    resolved.push_back(*rec);
    distances.push_back(c.distance_m);
  }
  if (resolved.size() < 3)
    throw InsufficientAnchors(static_cast<int>(resolved.size()), 3);

  // Local frame around the centroid of the anchors in use.
  GeoPoint centroid;
  for (const LandmarkRecord& r : resolved) {
    centroid.lat_deg += r.position.lat_deg;
    centroid.lon_deg += r.position.lon_deg;
  }
  centroid.lat_deg /= static_cast<double>(resolved.size());
  centroid.lon_deg /= static_cast<double>(resolved.size());

  std::vector<PlanarPoint> anchors;
  anchors.reserve(resolved.size());
  for (const LandmarkRecord& r : resolved)
    anchors.push_back(projectEnu(centroid, r.position));

  const TrilaterationResult fix = trilaterate(anchors, distances);
  const GeoPoint geo = inverseProjectEnu(centroid, fix.position);

  json out;
  out["xEast"] = fix.position.x();
  out["yNorth"] = fix.position.y();
  out["lat"] = geo.lat_deg;
  out["lon"] = geo.lon_deg;
  out["residualM"] = fix.residual_m;
  writeTextFile(a.out, out.dump(2) + "\n");

  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  writeManifest(a.out, "trilaterate",
                {{"nvc", a.nvc}, {"registry", a.registry}},
                {{"anchorsUsed", resolved.size()}}, ms);
}

struct DvhopArgs {
  int nodes = 100;
  int anchors = 10;
  double range = 0.2;
  std::vector<std::uint64_t> seeds;
  bool per_anchor = false;
  std::string out;
};

void runDvhop(const DvhopArgs& a) {
  const auto t0 = Clock::now();
  DvHopParams params;
  params.n_nodes = a.nodes;
  params.n_anchors = a.anchors;
  params.radio_range = a.range;
  params.per_anchor_correction = a.per_anchor;
  std::vector<std::uint64_t> seeds = a.seeds;
  if (seeds.empty()) seeds.push_back(1);

  const ExperimentReport report = runExperiment(params, seeds);
  writeTextFile(a.out, report.toJson());

  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  json seeds_json = json::array();
  for (auto s : seeds) seeds_json.push_back(s);
  writeManifest(a.out, "dvhop", json::object(),
                {{"nodes", a.nodes},
                 {"anchors", a.anchors},
                 {"range", a.range},
                 {"seeds", seeds_json},
                 {"perAnchorCorrection", a.per_anchor}},
                ms);
}

struct EvalArgs {
  std::string pairs, out;
};

void runEval(const EvalArgs& a) {
  const auto t0 = Clock::now();
  json j;
  try {
    j = json::parse(readTextFile(a.pairs));
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("pairs json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("observed") || !j.contains("actual"))
    throw MalformedInput(
        "pairs file must be an object with 'observed' and 'actual' arrays");
  const std::vector<double> observed = j["observed"].get<std::vector<double>>();
  const std::vector<double> actual = j["actual"].get<std::vector<double>>();

  const ErrorStats s = evalMetrics(observed, actual);
  json out;
  out["minM"] = s.min_m;
  out["maxM"] = s.max_m;
  out["meanM"] = s.mean_m;
  out["stdM"] = s.std_m;
  out["rmseM"] = s.rmse_m;
  out["n"] = s.n;
  writeTextFile(a.out, out.dump(2) + "\n");

  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  writeManifest(a.out, "eval", {{"pairs", a.pairs}}, json::object(), ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo-vision localization toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  DisparityArgs disparity_args;
  auto* disparity = app.add_subcommand(
      "disparity", "Dense disparity map from a rectified PGM pair");
  disparity->add_option("--left", disparity_args.left)->required();
  disparity->add_option("--right", disparity_args.right)->required();
  disparity->add_option("--rig", disparity_args.rig)->required();
  disparity->add_option("--out", disparity_args.out, "output PFM")->required();
  disparity->add_option("--vis", disparity_args.vis, "optional PGM preview");
  disparity_args.matcher.attach(disparity);

  DepthArgs depth_args;
  auto* depth = app.add_subcommand(
      "depth", "Triangulate a disparity PFM into a metric depth PFM");
  depth->add_option("--disparity", depth_args.disparity)->required();
  depth->add_option("--rig", depth_args.rig)->required();
  depth->add_option("--out", depth_args.out)->required();
  depth->add_option("--d-eps", depth_args.d_eps,
                    "disparities at or below this are invalid");

  LocateArgs locate_args;
  auto* locate = app.add_subcommand(
      "locate", "Full pipeline: images + detections -> virtual coordinates");
  locate->add_option("--left", locate_args.left)->required();
  locate->add_option("--right", locate_args.right)->required();
  locate->add_option("--rig", locate_args.rig)->required();
  locate->add_option("--detections", locate_args.detections)->required();
  locate->add_option("--registry", locate_args.registry)->required();
  locate->add_option("--out", locate_args.out, "output NVC JSON")->required();
  locate->add_option("--agg", locate_args.agg, "mean, median, or trim:F");
  locate->add_option("--min-confidence", locate_args.min_confidence);
  locate->add_option("--box-convention", locate_args.box_convention,
                     "center or corner");
  locate->add_option("--min-valid", locate_args.min_valid,
                     "valid pixels required per patch");
  locate->add_option("--d-eps", locate_args.d_eps);
  locate->add_flag("--require-trilateration",
                   locate_args.require_trilateration,
                   "fail (exit 3) unless >= 3 coordinates result");
  locate_args.matcher.attach(locate);

  TrilaterateArgs trilaterate_args;
  auto* trilaterate_cmd = app.add_subcommand(
      "trilaterate", "Node position from an NVC file and the registry");
  trilaterate_cmd->add_option("--nvc", trilaterate_args.nvc)->required();
  trilaterate_cmd->add_option("--registry", trilaterate_args.registry)->required();
  trilaterate_cmd->add_option("--out", trilaterate_args.out)->required();

  DvhopArgs dvhop_args;
  auto* dvhop = app.add_subcommand(
      "dvhop", "DV-Hop range-free localization simulation");
  dvhop->add_option("--nodes", dvhop_args.nodes);
  dvhop->add_option("--anchors", dvhop_args.anchors);
  dvhop->add_option("--range", dvhop_args.range, "radio range in field units");
  dvhop->add_option("--seeds", dvhop_args.seeds)->delimiter(',');
  dvhop->add_flag("--per-anchor-correction", dvhop_args.per_anchor);
  dvhop->add_option("--out", dvhop_args.out)->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand(
      "eval", "Distance error statistics from observed/actual pairs");
  eval->add_option("--pairs", eval_args.pairs,
                   "JSON with 'observed' and 'actual' arrays")->required();
  eval->add_option("--out", eval_args.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (disparity->parsed()) runDisparity(disparity_args, disparity);
    if (depth->parsed()) runDepth(depth_args);
    if (locate->parsed()) {
      const int rc = runLocate(locate_args, locate);
      if (rc != 0) return rc;
    }
    if (trilaterate_cmd->parsed()) runTrilaterate(trilaterate_args);
    if (dvhop->parsed()) runDvhop(dvhop_args);
    if (eval->parsed()) runEval(eval_args);
  } catch (const InsufficientAnchors& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CollinearAnchors& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
