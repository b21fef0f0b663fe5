#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "stereoloc/geo.hpp"

namespace stereoloc {

/// Simulated sensor field in the unit square (dimensionless field units).
/// The first anchor_count() nodes generated are anchors; adjacency is the
/// unit-disk graph at radio_range.
struct DvHopNetwork {
  Eigen::Matrix2Xd positions;           // one column per node
  std::vector<bool> anchor_flags;
  double radio_range = 0.0;
  std::vector<std::vector<int>> adjacency;
  std::uint64_t seed = 0;

  int nodeCount() const { return static_cast<int>(positions.cols()); }
  int anchorCount() const;
  /// Node indices of the anchors, ascending.
  std::vector<int> anchorIndices() const;
};

constexpr int kUnreachable = -1;

/// Minimum hop counts, one row per anchor (in anchorIndices() order), one
/// column per node. Unreachable pairs hold kUnreachable.
struct HopTable {
  Eigen::ArrayXXi hops;

  int at(int anchor_row, int node) const { return hops(anchor_row, node); }
  bool reachable(int anchor_row, int node) const {
    return hops(anchor_row, node) != kUnreachable;
  }
};

/// Distance estimates and localization output for one network.
struct DvHopEstimate {
  double hop_avg = 0.0;                      // field units per hop (global form)
  Eigen::ArrayXXd est_dist;                  // per (anchor row, node); NaN unreachable
  std::vector<PlanarPoint> est_pos;          // per node; meaningful where localized
  std::vector<bool> localized;               // per node; anchors stay false
  Eigen::ArrayXd err;                        // per node, ||est-true||/radio_range; NaN otherwise
};

struct DvHopParams {
  int n_nodes = 100;
  int n_anchors = 10;
  double radio_range = 0.2;
  bool per_anchor_correction = false;
};

struct SeedReport {
  std::uint64_t seed = 0;
  double mean_err = 0.0;
  double median_err = 0.0;
  double unlocalizable_frac = 0.0;
};

struct ExperimentReport {
  DvHopParams params;
  std::vector<SeedReport> per_seed;
  SeedReport aggregate;  // seed field unused; errors pooled over all seeds

  std::string toJson() const;
};

/// Uniform random field from a seeded generator; identical (params, seed)
/// give an identical network. Throws TooFewAnchors below 3.
DvHopNetwork generateNetwork(int n_nodes, int n_anchors, double radio_range,
                             std::uint64_t seed);

/// Breadth-first minimum hop counts from every anchor.
HopTable hopCounts(const DvHopNetwork& net);

/// Network-global average hop distance: the ratio of summed Euclidean
/// anchor-pair distances to summed anchor-pair hop counts, over connected
/// pairs. Throws NoConnectedAnchorPair when the numerator would be empty.
double avgHopDistance(const DvHopNetwork& net, const HopTable& table);

/// Classic per-anchor corrections: each anchor's own distance/hops ratio
/// over the anchors it reaches; NaN for isolated anchors.
Eigen::ArrayXd perAnchorHopDistance(const DvHopNetwork& net,
                                    const HopTable& table);

/// Distance estimation (est = correction * hops) and least-squares
/// localization of every unknown node that reaches >= 3 anchors. With the
/// global form all distances share hop_avg; with per-anchor corrections an
/// unknown node adopts the correction of its nearest anchor (fewest hops,
/// ties toward the lower anchor index).
DvHopEstimate estimateAndLocalize(const DvHopNetwork& net,
                                  const HopTable& table, double hop_avg);
DvHopEstimate estimateAndLocalize(const DvHopNetwork& net,
                                  const HopTable& table,
                                  const Eigen::ArrayXd& per_anchor_correction);

/// Runs one simulation per seed and assembles per-seed and pooled error
/// summaries. Deterministic given the seed list.
ExperimentReport runExperiment(const DvHopParams& params,
                               const std::vector<std::uint64_t>& seeds);

}  // namespace stereoloc
