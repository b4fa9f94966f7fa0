#include <doctest.h>

#include "gen.hpp"
#include "wander/regions.hpp"

using namespace wander;

namespace {

const LatLon kOrigin{55.37, 10.39};

StayPoint sp(Vec2 v, double t, double w) {
  const LatLon p = LocalFrame(kOrigin).to_geo(v);
  return {p.lat, p.lon, t, w};
}

// Two heavy clusters 500 m apart with light points on a path between them.
Block two_site_block(testgen::Gen& g, int site_points) {
  Block b{"p", {}, false};
  double t = 0.0;
  const auto site = [&](Vec2 c) {
    for (int i = 0; i < site_points; ++i) {
      b.points.push_back(sp({c.x + g.real(-8, 8), c.y + g.real(-8, 8)}, t, 900.0));
      t += 1000.0;
    }
  };
  site({0, 0});
  for (int k = 1; k < 10; ++k) {
    b.points.push_back(sp({50.0 * k, 0}, t, 0.0));
    t += 40.0;
  }
  site({500, 0});
  return b;
}

}  // namespace

TEST_CASE("edge weight falls off linearly with distance") {
  const RegionConfig cfg;
  const Block b{"p", {sp({0, 0}, 0, 700), sp({10, 0}, 800, 700), sp({100, 0}, 1600, 700), sp({0, 5}, 2400, 100)},
                false};
  const auto g = build_staypoint_graph(std::vector<Block>{b}, cfg);
  CHECK(g.nodes.size() == 3);
  REQUIRE(g.graph.edges.size() == 1);
  // Reference from tests/oracles/derived_values.py.
  CHECK(g.graph.edges[0].weight == doctest::Approx(0.6428571428571428).epsilon(1e-3));
}

TEST_CASE("convex hull") {
  SUBCASE("square with interior points") {
    std::vector<LatLon> pts;
    const LocalFrame f(kOrigin);
    for (Vec2 v : {Vec2{0, 0}, Vec2{10, 0}, Vec2{10, 10}, Vec2{0, 10}, Vec2{5, 5}, Vec2{2, 7}}) pts.push_back(f.to_geo(v));
    CHECK(convex_hull(pts).size() == 4);
  }
  SUBCASE("collinear") {
    const LocalFrame f(kOrigin);
    std::vector<LatLon> pts{f.to_geo({0, 0}), f.to_geo({5, 0}), f.to_geo({10, 0})};
    CHECK(convex_hull(pts).size() == 2);
  }
  SUBCASE("duplicates collapse") {
    std::vector<LatLon> pts{kOrigin, kOrigin, kOrigin};
    CHECK(convex_hull(pts).size() == 1);
  }
  SUBCASE("empty") { CHECK(convex_hull(std::vector<LatLon>{}).empty()); }
}

TEST_CASE("regions contain their members and discovered ids are stable") {
  testgen::Gen g(9);
  const RegionConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const std::vector<Block> blocks{two_site_block(g, g.integer(1, 8))};
    const auto regions = discover_regions(blocks, cfg);
    REQUIRE(regions.size() == 2);
    for (const auto& r : regions) {
      CHECK(r.buffer_m == doctest::Approx(cfg.buffer_m()));
      for (const auto& m : r.members) CHECK(r.contains(m.pos()));
    }
    CHECK_FALSE(region_of(LocalFrame(kOrigin).to_geo({250, 0}), regions));

    // Recomputing with the previous regions keeps ids even when discovery order changes.
    auto previous = regions;
    std::swap(previous[0].id, previous[1].id);
    const auto again = discover_regions(blocks, cfg, previous);
    CHECK(again[0].id == previous[0].id);
    CHECK(again[1].id == previous[1].id);
  }
}

TEST_CASE("new regions get fresh ids") {
  GeofencedRegion old;
  old.id = 7;
  old.centroid = LocalFrame(kOrigin).to_geo({5000, 0});
  const std::vector<StayPoint> nodes{sp({0, 0}, 0, 700)};
  const auto r = regions_from_clusters({{0}}, nodes, RegionConfig{}, std::vector<GeofencedRegion>{old});
  CHECK(r[0].id == 8);
}

TEST_CASE("random clusters: hulls contain every member") {
  testgen::Gen g(21);
  const RegionConfig cfg;
  for (int i = 0; i < 300; ++i) {
    std::vector<StayPoint> nodes;
    const int n = g.integer(1, 15);
    for (int k = 0; k < n; ++k) nodes.push_back(sp({g.real(-30, 30), g.real(-30, 30)}, k, 700));
    std::vector<std::size_t> all(nodes.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    const auto r = regions_from_clusters({all}, nodes, cfg);
    for (const auto& m : nodes) CHECK(r[0].contains(m.pos()));
  }
}

TEST_CASE("segmentation") {
  testgen::Gen g(2);
  const RegionConfig cfg;
  const Block b = two_site_block(g, 3);
  const auto regions = discover_regions(std::vector<Block>{b}, cfg);
  REQUIRE(regions.size() == 2);

  const auto trajs = segment_block(b, regions);
  REQUIRE(trajs.size() == 1);
  const Trajectory& t = trajs[0];
  CHECK(t.points.size() == 11);
  CHECK(t.origin_region == *region_of(t.points.front().pos(), regions));
  CHECK(t.destination_region == region_of(t.points.back().pos(), regions));
  for (std::size_t k = 1; k + 1 < t.points.size(); ++k) CHECK_FALSE(region_of(t.points[k].pos(), regions));

  SUBCASE("events") {
    Segmenter seg("p", regions);
    std::vector<Segmenter::Event> ev;
    for (const auto& p : b.points) ev.push_back(seg.push(p));
    CHECK(ev[0] == Segmenter::Event::none);
    CHECK(ev[3] == Segmenter::Event::started);
    CHECK(ev[4] == Segmenter::Event::extended);
    CHECK(ev[12] == Segmenter::Event::completed);
    CHECK_FALSE(seg.end_block());
  }
  SUBCASE("ongoing trajectory at block end") {
    Block cut = b;
    cut.points.resize(8);
    const auto open = segment_block(cut, regions);
    REQUIRE(open.size() == 1);
    CHECK(open[0].ongoing());
    CHECK(open[0].points.size() == 6);
  }
  SUBCASE("no regions, no trajectories") { CHECK(segment_block(b, {}).empty()); }
}
