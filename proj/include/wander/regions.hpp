#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wander/geo.hpp"
#include "wander/louvain.hpp"
#include "wander/preprocess.hpp"

namespace wander {

struct RegionConfig {
  double tau_s = 600.0;             ///< stay points heavier than this become graph nodes
  double xi_double_prime_m = 28.0;  ///< edge radius

  /// Fence tolerance around a hull: half the edge radius.
  double buffer_m() const { return 0.5 * xi_double_prime_m; }
  void validate() const;
};

struct StayPointGraph {
  std::vector<StayPoint> nodes;
  WeightedGraph graph;
};

/// Heavy stay points (weight > tau) of all blocks, joined when within
/// xi'' of each other with weight 1 - d/xi''.
StayPointGraph build_staypoint_graph(std::span<const Block> blocks, const RegionConfig& cfg);

/// Convex hull of a cluster of stay points plus a tolerance band.
struct GeofencedRegion {
  int id = -1;
  std::vector<LatLon> hull;  ///< counter-clockwise; 1 or 2 vertices when degenerate
  LatLon centroid;
  double buffer_m = 0.0;
  std::vector<StayPoint> members;

  bool contains(const LatLon& p) const;
};

/// Counter-clockwise convex hull (Andrew's monotone chain) in a local planar
/// frame; collinear inputs reduce to their two extreme points.
std::vector<LatLon> convex_hull(std::span<const LatLon> points);

/// One region per cluster. Region ids are reused from `previous` when a
/// centroid lies within xi'' of a previous centroid; otherwise fresh ids
/// continue after the largest id seen.
std::vector<GeofencedRegion> regions_from_clusters(const std::vector<std::vector<std::size_t>>& clusters,
                                                   std::span<const StayPoint> nodes, const RegionConfig& cfg,
                                                   std::span<const GeofencedRegion> previous = {});

/// build_staypoint_graph + louvain_cluster + regions_from_clusters.
std::vector<GeofencedRegion> discover_regions(std::span<const Block> blocks, const RegionConfig& cfg,
                                              std::span<const GeofencedRegion> previous = {});

/// Id of the first region containing p.
std::optional<int> region_of(const LatLon& p, std::span<const GeofencedRegion> regions);

/// Stay points between two region visits. The first point is the last one
/// inside the origin region; the last point is the first one inside the
/// destination region. Ongoing trajectories have no destination yet.
struct Trajectory {
  std::string person_id;
  std::vector<StayPoint> points;
  int origin_region = -1;
  std::optional<int> destination_region;

  bool ongoing() const { return !destination_region.has_value(); }
};

/// Incremental segmentation of a stream of stay points (one block at a time).
class Segmenter {
 public:
  enum class Event { none, started, extended, completed };

  Segmenter(std::string person_id, std::span<const GeofencedRegion> regions);

  /// Feeds the next stay point of the current block.
  Event push(const StayPoint& p);
  /// Ends the current block; returns the unfinished trajectory, if any.
  std::optional<Trajectory> end_block();

  /// The trajectory being built (valid after started/extended) or just
  /// finished (valid after completed).
  const Trajectory& current() const { return current_; }
  bool in_progress() const { return in_progress_; }

 private:
  std::string person_id_;
  std::span<const GeofencedRegion> regions_;
  std::optional<StayPoint> anchor_;
  int anchor_region_ = -1;
  Trajectory current_;
  bool in_progress_ = false;
};

std::vector<Trajectory> segment_block(const Block& block, std::span<const GeofencedRegion> regions);

}  // namespace wander
