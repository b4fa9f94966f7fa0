#include "wander/regions.hpp"

#include <algorithm>
#include <limits>

namespace wander {

void RegionConfig::validate() const {
  if (!(tau_s > 0.0)) throw InputError("regions: tau > 0 violated");
  if (!(xi_double_prime_m > 0.0)) throw InputError("regions: xi_double_prime > 0 violated");
}

StayPointGraph build_staypoint_graph(std::span<const Block> blocks, const RegionConfig& cfg) {
  cfg.validate();
  StayPointGraph out;
  for (const Block& b : blocks)
    for (const StayPoint& p : b.points)
      if (p.weight > cfg.tau_s) out.nodes.push_back(p);

  out.graph.node_count = out.nodes.size();
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < out.nodes.size(); ++j) {
      const double d = haversine(out.nodes[i].pos(), out.nodes[j].pos());
      if (d <= cfg.xi_double_prime_m) {
        const double w = std::clamp(1.0 - d / cfg.xi_double_prime_m, 1e-9, 1.0);
        out.graph.edges.push_back({i, j, w});
      }
    }
  }
  return out;
}

namespace {

LatLon mean_position(std::span<const LatLon> pts) {
  double lat = 0.0, lon = 0.0;
  for (const auto& p : pts) {
    lat += p.lat;
    lon += p.lon;
  }
  const auto n = static_cast<double>(pts.size());
  return {lat / n, lon / n};
}

}  // namespace

std::vector<LatLon> convex_hull(std::span<const LatLon> points) {
  if (points.empty()) return {};
  const LocalFrame frame(mean_position(points));
  std::vector<std::pair<Vec2, LatLon>> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.emplace_back(frame.to_local(p), p);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first.x < b.first.x || (a.first.x == b.first.x && a.first.y < b.first.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
            pts.end());
  if (pts.size() <= 2) {
    std::vector<LatLon> out;
    for (const auto& p : pts) out.push_back(p.second);
    return out;
  }

  std::vector<std::pair<Vec2, LatLon>> hull(2 * pts.size());
  std::size_t k = 0;
  const auto turn = [&](std::size_t a, std::size_t b, const Vec2& c) {
    return cross(hull[b].first - hull[a].first, c - hull[a].first);
  };
  for (const auto& p : pts) {
    while (k >= 2 && turn(k - 2, k - 1, p.first) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(k - 2, k - 1, pts[i].first) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  std::vector<LatLon> out;
  out.reserve(hull.size());
  for (const auto& h : hull) out.push_back(h.second);
  return out;
}

bool GeofencedRegion::contains(const LatLon& p) const {
  if (hull.empty()) return false;
  const LocalFrame frame(centroid);
  const Vec2 q = frame.to_local(p);
  std::vector<Vec2> v;
  v.reserve(hull.size());
  for (const auto& h : hull) v.push_back(frame.to_local(h));

  if (v.size() == 1) return norm(q - v[0]) <= buffer_m;
  if (v.size() >= 3) {
    bool inside = true;
    for (std::size_t i = 0; i < v.size() && inside; ++i)
      inside = cross(v[(i + 1) % v.size()] - v[i], q - v[i]) >= 0.0;
    if (inside) return true;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) best = std::min(best, segment_distance(q, v[i], v[(i + 1) % v.size()]));
  return best <= buffer_m;
}

std::vector<GeofencedRegion> regions_from_clusters(const std::vector<std::vector<std::size_t>>& clusters,
                                                   std::span<const StayPoint> nodes, const RegionConfig& cfg,
                                                   std::span<const GeofencedRegion> previous) {
  int next_id = 0;
  for (const auto& r : previous) next_id = std::max(next_id, r.id + 1);
  std::vector<bool> reused(previous.size(), false);

  std::vector<GeofencedRegion> regions;
  regions.reserve(clusters.size());
  for (const auto& cluster : clusters) {
    GeofencedRegion region;
    std::vector<LatLon> coords;
    for (std::size_t idx : cluster) {
      region.members.push_back(nodes[idx]);
      coords.push_back(nodes[idx].pos());
    }
    region.centroid = mean_position(coords);
    region.hull = convex_hull(coords);
    region.buffer_m = cfg.buffer_m();

    std::optional<std::size_t> match;
    double best = cfg.xi_double_prime_m;
    for (std::size_t i = 0; i < previous.size(); ++i) {
      if (reused[i]) continue;
      const double d = haversine(previous[i].centroid, region.centroid);
      if (d <= best) {
        best = d;
        match = i;
      }
    }
    if (match) {
      reused[*match] = true;
      region.id = previous[*match].id;
    } else {
      region.id = next_id++;
    }
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<GeofencedRegion> discover_regions(std::span<const Block> blocks, const RegionConfig& cfg,
                                              std::span<const GeofencedRegion> previous) {
  const StayPointGraph g = build_staypoint_graph(blocks, cfg);
  return regions_from_clusters(louvain_cluster(g.graph), g.nodes, cfg, previous);
}

std::optional<int> region_of(const LatLon& p, std::span<const GeofencedRegion> regions) {
  for (const auto& r : regions)
    if (r.contains(p)) return r.id;
  return std::nullopt;
}

Segmenter::Segmenter(std::string person_id, std::span<const GeofencedRegion> regions)
    : person_id_(std::move(person_id)), regions_(regions) {}

Segmenter::Event Segmenter::push(const StayPoint& p) {
  const std::optional<int> region = region_of(p.pos(), regions_);
  if (region) {
    anchor_ = p;
    anchor_region_ = *region;
    if (!in_progress_) return Event::none;
    current_.points.push_back(p);
    current_.destination_region = *region;
    in_progress_ = false;
    return Event::completed;
  }
  if (in_progress_) {
    current_.points.push_back(p);
    return Event::extended;
  }
  if (!anchor_) return Event::none;
  current_ = Trajectory{person_id_, {*anchor_, p}, anchor_region_, std::nullopt};
  in_progress_ = true;
  return Event::started;
}

std::optional<Trajectory> Segmenter::end_block() {
  std::optional<Trajectory> out;
  if (in_progress_) out = current_;
  in_progress_ = false;
  anchor_.reset();
  anchor_region_ = -1;
  return out;
}

std::vector<Trajectory> segment_block(const Block& block, std::span<const GeofencedRegion> regions) {
  Segmenter seg(block.person_id, regions);
  std::vector<Trajectory> out;
  for (const StayPoint& p : block.points)
    if (seg.push(p) == Segmenter::Event::completed) out.push_back(seg.current());
  if (auto open = seg.end_block()) out.push_back(std::move(*open));
  return out;
}

}  // namespace wander
