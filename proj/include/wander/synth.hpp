#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wander/geo.hpp"

namespace wander {

class UnreachableError : public InputError {
 public:
  using InputError::InputError;
};

/// Origin/destination anchors of one route plus nodes an anomalous walk may
/// be forced through.
struct RegionPair {
  std::size_t origin = 0;
  std::size_t destination = 0;
  std::vector<std::size_t> detour_candidates;
};

struct GraphEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double length_m = 0.0;
};

/// Walkable network. Edge lengths are haversine distances of their ends.
class WaypointGraph {
 public:
  std::size_t add_node(LatLon p);
  void add_edge(std::size_t a, std::size_t b);

  const std::vector<LatLon>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<std::pair<std::size_t, double>>& neighbours(std::size_t n) const { return adj_[n]; }
  bool connected() const;

  std::vector<RegionPair> pairs;

 private:
  std::vector<LatLon> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
};

/// Pseudo-street grid (~200 nodes, a few streets closed) laid on the centres
/// of precision-18 cells, two cells apart. Seven anchor pairs; anchors sit in
/// block interiors on one-cell spurs. Four detour candidates per pair lie
/// 400-800 m off the pair's normal route.
WaypointGraph default_waypoint_graph();

/// Dijkstra; ties keep the first-found (lower id) predecessor.
/// Throws UnreachableError.
std::vector<std::size_t> shortest_path(const WaypointGraph& g, std::size_t from, std::size_t to);

std::vector<LatLon> path_positions(const WaypointGraph& g, const std::vector<std::size_t>& path);

/// Per-step sampling model of a walking GPS trace.
struct NoiseModel {
  double dt_base_s = 5.0;
  double dt_noise_sd = 20.0;   ///< scale of the folded Gaussian added to dt
  double speed_mean = 4.0;     ///< m/s
  double speed_sd = 0.5;
  double pos_noise_sd_m = 8.75;

  void validate() const;
  /// Distance off the normal route beyond which a walk counts as diverged.
  double divergence_envelope_m() const { return std::max(1.0, 2.0 * pos_noise_sd_m); }
};

enum class Label { normal, anomalous };

struct LabeledTrajectory {
  std::vector<GeoPoint> points;
  Label label = Label::normal;
  std::size_t pair = 0;
  std::optional<double> divergence_time;
  std::uint64_t seed = 0;
  std::vector<std::size_t> detours;
};

struct WalkOptions {
  double start_time = 0.0;
  double dwell_s = 0.0;  ///< stationary recording before and after the walk
};

LabeledTrajectory generate_normal(const WaypointGraph& g, std::size_t pair, const NoiseModel& noise,
                                  std::uint64_t seed, const WalkOptions& opts = {});

/// Forces the walk through `detours` in order. Throws InputError if a detour
/// node lies on the normal route or the walk never leaves it; UnreachableError
/// for disconnected detours.
LabeledTrajectory generate_anomalous(const WaypointGraph& g, std::size_t pair,
                                     const std::vector<std::size_t>& detours, const NoiseModel& noise,
                                     std::uint64_t seed, const WalkOptions& opts = {});

struct CorpusSpec {
  std::vector<std::size_t> normal_per_pair{29, 28, 28, 28, 28, 29, 29};
  std::vector<std::size_t> anomalous_per_pair{4, 3, 3, 3, 3, 3, 4};
  double dwell_s = 900.0;
  double spacing_s = 4.0 * 3600.0;  ///< start-to-start spacing of trajectories
  double start_time = 1'600'000'000.0;
  std::string person_id = "p0";
};

struct Corpus {
  std::string person_id;
  std::vector<LabeledTrajectory> trajectories;

  std::size_t count(Label l) const;
};

/// Trajectories in chronological order, one per block (spacing >> epsilon).
Corpus generate_corpus(const WaypointGraph& g, const CorpusSpec& spec, const NoiseModel& noise,
                       std::uint64_t master_seed);

/// Back-and-forth walk along pair 0 with a long stay at each end.
std::vector<GeoPoint> case_study_walk(const WaypointGraph& g, const NoiseModel& noise, std::uint64_t seed,
                                      std::size_t legs = 19, double stay_s = 900.0,
                                      double start_time = 1'600'000'000.0);

/// Stream lines `person,timestamp,lat,lon` and label lines
/// `trajectory_id,label,pair,divergence_time`.
void write_corpus(const Corpus& corpus, std::ostream& stream, std::ostream& labels);

std::string to_string(Label l);

}  // namespace wander
