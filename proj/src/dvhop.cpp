#include "stereoloc/dvhop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include <json.hpp>

#include "stereoloc/errors.hpp"

namespace stereoloc {

using nlohmann::json;

int DvHopNetwork::anchorCount() const {
  return static_cast<int>(std::count(anchor_flags.begin(), anchor_flags.end(), true));
}

std::vector<int> DvHopNetwork::anchorIndices() const {
  std::vector<int> idx;
  for (int i = 0; i < nodeCount(); ++i)
    if (anchor_flags[static_cast<std::size_t>(i)]) idx.push_back(i);
  return idx;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; keeps the draw sequence
// independent of the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double medianOf(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double meanOf(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

json numberOrNull(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json seedReportJson(const SeedReport& r, bool with_seed) {
  json j;
  if (with_seed) j["seed"] = r.seed;
  j["meanErr"] = numberOrNull(r.mean_err);
  j["medianErr"] = numberOrNull(r.median_err);
  j["unlocalizableFrac"] = r.unlocalizable_frac;
  return j;
}

}  // namespace

DvHopNetwork generateNetwork(int n_nodes, int n_anchors, double radio_range,
                             std::uint64_t seed) {
  if (n_anchors < 3) throw TooFewAnchors(n_anchors);
  if (n_anchors > n_nodes)
    throw FieldOutOfRange("n_anchors exceeds n_nodes");
  if (!(radio_range > 0.0) || radio_range > std::sqrt(2.0))
    throw FieldOutOfRange("radio_range must be in (0, sqrt(2)]");

  DvHopNetwork net;
  net.seed = seed;
  net.radio_range = radio_range;
  net.positions.resize(2, n_nodes);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_nodes; ++i) {
    net.positions(0, i) = uniform01(rng);
    net.positions(1, i) = uniform01(rng);
  }
  net.anchor_flags.assign(static_cast<std::size_t>(n_nodes), false);
  for (int i = 0; i < n_anchors; ++i) net.anchor_flags[static_cast<std::size_t>(i)] = true;

  net.adjacency.assign(static_cast<std::size_t>(n_nodes), {});
  const double range_sq = radio_range * radio_range;
  for (int i = 0; i < n_nodes; ++i)
    for (int j = i + 1; j < n_nodes; ++j)
      if ((net.positions.col(i) - net.positions.col(j)).squaredNorm() <=
          range_sq) {
        net.adjacency[static_cast<std::size_t>(i)].push_back(j);
        net.adjacency[static_cast<std::size_t>(j)].push_back(i);
      }
  return net;
}

HopTable hopCounts(const DvHopNetwork& net) {
  const auto anchors = net.anchorIndices();
  HopTable table;
  table.hops.resize(static_cast<Eigen::Index>(anchors.size()), net.nodeCount());
  table.hops.setConstant(kUnreachable);

  for (std::size_t row = 0; row < anchors.size(); ++row) {
    std::queue<int> frontier;
    frontier.push(anchors[row]);
    table.hops(static_cast<Eigen::Index>(row), anchors[row]) = 0;
    while (!frontier.empty()) {
      const int node = frontier.front();
      frontier.pop();
      const int h = table.hops(static_cast<Eigen::Index>(row), node);
      for (int next : net.adjacency[static_cast<std::size_t>(node)]) {
        if (table.hops(static_cast<Eigen::Index>(row), next) != kUnreachable) continue;
        table.hops(static_cast<Eigen::Index>(row), next) = h + 1;
        frontier.push(next);
      }
    }
  }
  return table;
}

double avgHopDistance(const DvHopNetwork& net, const HopTable& table) {
  const auto anchors = net.anchorIndices();
  double dist_sum = 0.0;
  long hop_sum = 0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      if (i == j) continue;
      const int hops = table.hops(static_cast<Eigen::Index>(i), anchors[j]);
      if (hops == kUnreachable) continue;
      dist_sum +=
          (net.positions.col(anchors[i]) - net.positions.col(anchors[j])).norm();
      hop_sum += hops;
    }
  }
  if (hop_sum == 0) throw NoConnectedAnchorPair();
  return dist_sum / static_cast<double>(hop_sum);
}

Eigen::ArrayXd perAnchorHopDistance(const DvHopNetwork& net,
                                    const HopTable& table) {
  const auto anchors = net.anchorIndices();
  Eigen::ArrayXd corrections(static_cast<Eigen::Index>(anchors.size()));
  corrections.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    double dist_sum = 0.0;
    long hop_sum = 0;
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      if (i == j) continue;
      const int hops = table.hops(static_cast<Eigen::Index>(i), anchors[j]);
      if (hops == kUnreachable) continue;
      dist_sum +=
          (net.positions.col(anchors[i]) - net.positions.col(anchors[j])).norm();
      hop_sum += hops;
    }
    if (hop_sum > 0) corrections(static_cast<Eigen::Index>(i)) = dist_sum / static_cast<double>(hop_sum);
  }
  return corrections;
}

namespace {

DvHopEstimate estimateImpl(const DvHopNetwork& net, const HopTable& table,
                           double global_correction,
                           const Eigen::ArrayXd* per_anchor) {
  const auto anchors = net.anchorIndices();
  const int n_nodes = net.nodeCount();
  const int n_anchors = static_cast<int>(anchors.size());
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

  DvHopEstimate est;
  est.hop_avg = global_correction;
  est.est_dist.resize(n_anchors, n_nodes);
  est.est_dist.setConstant(kNan);
  est.est_pos.assign(static_cast<std::size_t>(n_nodes), PlanarPoint::Zero());
  est.localized.assign(static_cast<std::size_t>(n_nodes), false);
  est.err.resize(n_nodes);
  est.err.setConstant(kNan);

  for (int node = 0; node < n_nodes; ++node) {
    double correction = global_correction;
    if (per_anchor != nullptr) {
      // Nearest anchor's correction, ties toward the lower anchor row.
      int best_row = -1;
      int best_hops = std::numeric_limits<int>::max();
      for (int row = 0; row < n_anchors; ++row) {
        const int h = table.hops(row, node);
        if (h == kUnreachable || !std::isfinite((*per_anchor)(row))) continue;
        if (h < best_hops) {
          best_hops = h;
          best_row = row;
        }
      }
      if (best_row < 0) continue;  // no usable anchor: leave column NaN
      correction = (*per_anchor)(best_row);
    }
    for (int row = 0; row < n_anchors; ++row) {
      const int h = table.hops(row, node);
      if (h == kUnreachable) continue;
      est.est_dist(row, node) = correction * h;
    }
  }

  for (int node = 0; node < n_nodes; ++node) {
    if (net.anchor_flags[static_cast<std::size_t>(node)]) continue;
    std::vector<PlanarPoint> positions;
    std::vector<double> dists;
    for (int row = 0; row < n_anchors; ++row) {
      const double d = est.est_dist(row, node);
      if (!std::isfinite(d)) continue;
      positions.emplace_back(net.positions.col(anchors[static_cast<std::size_t>(row)]));
      dists.push_back(d);
    }
    if (positions.size() < 3) continue;
    try {
      const TrilaterationResult fix = trilaterate(positions, dists);
      est.est_pos[static_cast<std::size_t>(node)] = fix.position;
      est.localized[static_cast<std::size_t>(node)] = true;
      est.err(node) =
          (fix.position - PlanarPoint(net.positions.col(node))).norm() /
          net.radio_range;
    } catch (const CollinearAnchors&) {
      // degenerate anchor geometry: node stays unlocalizable
    }
  }
  return est;
}

}  // namespace

DvHopEstimate estimateAndLocalize(const DvHopNetwork& net,
                                  const HopTable& table, double hop_avg) {
  return estimateImpl(net, table, hop_avg, nullptr);
}

DvHopEstimate estimateAndLocalize(const DvHopNetwork& net,
                                  const HopTable& table,
                                  const Eigen::ArrayXd& per_anchor_correction) {
  return estimateImpl(net, table,
                      std::numeric_limits<double>::quiet_NaN(),
                      &per_anchor_correction);
}

ExperimentReport runExperiment(const DvHopParams& params,
                               const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw EmptyInput("seed list");

  ExperimentReport report;
  report.params = params;
  std::vector<double> pooled_errors;
  std::size_t pooled_unknown = 0;
  std::size_t pooled_unlocalizable = 0;

  for (std::uint64_t seed : seeds) {
    const DvHopNetwork net = generateNetwork(params.n_nodes, params.n_anchors,
                                             params.radio_range, seed);
    const HopTable table = hopCounts(net);

    bool have_correction = true;
    DvHopEstimate est;
    try {
      if (params.per_anchor_correction) {
        est = estimateAndLocalize(net, table, perAnchorHopDistance(net, table));
      } else {
        est = estimateAndLocalize(net, table, avgHopDistance(net, table));
      }
    } catch (const NoConnectedAnchorPair&) {
      have_correction = false;
    }

    std::vector<double> errors;
    std::size_t unknown = 0;
    std::size_t unlocalizable = 0;
    for (int node = 0; node < net.nodeCount(); ++node) {
      if (net.anchor_flags[static_cast<std::size_t>(node)]) continue;
      ++unknown;
      if (have_correction && est.localized[static_cast<std::size_t>(node)]) {
        errors.push_back(est.err(node));
      } else {
        ++unlocalizable;
      }
    }

    SeedReport sr;
    sr.seed = seed;
    sr.mean_err = meanOf(errors);
    sr.median_err = medianOf(errors);
    sr.unlocalizable_frac =
        unknown == 0 ? 0.0
                     : static_cast<double>(unlocalizable) / static_cast<double>(unknown);
    report.per_seed.push_back(sr);

    pooled_errors.insert(pooled_errors.end(), errors.begin(), errors.end());
    pooled_unknown += unknown;
    pooled_unlocalizable += unlocalizable;
  }

  report.aggregate.mean_err = meanOf(pooled_errors);
  report.aggregate.median_err = medianOf(pooled_errors);
  report.aggregate.unlocalizable_frac =
      pooled_unknown == 0
          ? 0.0
          : static_cast<double>(pooled_unlocalizable) / static_cast<double>(pooled_unknown);
  return report;
}

std::string ExperimentReport::toJson() const {
  json j;
  j["params"] = {{"nodes", params.n_nodes},
                 {"anchors", params.n_anchors},
                 {"range", params.radio_range},
                 {"perAnchorCorrection", params.per_anchor_correction}};
  json per = json::array();
  for (const SeedReport& r : per_seed) per.push_back(seedReportJson(r, true));
  j["perSeed"] = std::move(per);
  j["aggregate"] = seedReportJson(aggregate, false);
  return j.dump(2) + "\n";
}

}  // namespace stereoloc
