#include <doctest.h>

#include "gen.hpp"
#include "oracles.hpp"
#include "wander/preprocess.hpp"

using namespace wander;

namespace {

const LatLon kHome{55.37, 10.39};

GeoPoint at(const LocalFrame& f, Vec2 v, double t) {
  const LatLon p = f.to_geo(v);
  return {p.lat, p.lon, t};
}

}  // namespace

TEST_CASE("config constraints") {
  PreprocessConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha_m = 20.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("xi_prime < alpha"), InputError);
  cfg = {};
  cfg.gamma_m = 90.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("alpha < gamma"), InputError);
  cfg = {};
  cfg.epsilon_s = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("noise filter") {
  const PreprocessConfig cfg;
  const LocalFrame f(kHome);
  const GeoPoint a = at(f, {0, 0}, 0.0);
  CHECK(filter_noise(a, 0.0, at(f, {0, 0}, 10.0), cfg) == NoiseVerdict::keep);
  // 500 m in 1 s from rest: 500 m/s^2.
  CHECK(filter_noise(a, 0.0, at(f, {500, 0}, 1.0), cfg) == NoiseVerdict::drop);
  // 50 m/s^2.
  CHECK(filter_noise(a, 0.0, at(f, {50, 0}, 1.0), cfg) == NoiseVerdict::drop);
  // Exactly at the bound is kept.
  PreprocessConfig exact = cfg;
  exact.max_abs_accel = kinematics(a, 0.0, at(f, {50, 0}, 10.0)).abs_acceleration;
  CHECK(filter_noise(a, 0.0, at(f, {50, 0}, 10.0), exact) == NoiseVerdict::keep);
}

TEST_CASE("block splitting") {
  const PreprocessConfig cfg;
  const LocalFrame f(kHome);
  SUBCASE("temporal gap") {
    StreamPreprocessor pre("p", cfg);
    CHECK_FALSE(pre.ingest(at(f, {0, 0}, 0.0)).block_closed);
    CHECK(pre.ingest(at(f, {0, 0}, 301.0)).block_closed);
  }
  SUBCASE("gap exactly epsilon splits") {
    CHECK(splits_block(at(f, {0, 0}, 0.0), at(f, {0, 0}, 300.0), cfg));
    CHECK_FALSE(splits_block(at(f, {0, 0}, 0.0), at(f, {0, 0}, 299.0), cfg));
  }
  SUBCASE("spatial jump") {
    StreamPreprocessor pre("p", cfg);
    pre.ingest(at(f, {0, 0}, 0.0));
    // 200 s keeps the acceleration (3 m/s / 200 s) under the noise bound.
    CHECK(pre.ingest(at(f, {600, 0}, 200.0)).block_closed);
  }
  SUBCASE("small step") {
    StreamPreprocessor pre("p", cfg);
    pre.ingest(at(f, {0, 0}, 0.0));
    CHECK_FALSE(pre.ingest(at(f, {5, 0}, 10.0)).block_closed);
  }
}

TEST_CASE("out-of-order points are rejected without state change") {
  const LocalFrame f(kHome);
  StreamPreprocessor pre("p", PreprocessConfig{});
  pre.ingest(at(f, {0, 0}, 10.0));
  pre.ingest(at(f, {3, 0}, 20.0));
  const auto pending = std::vector<GeoPoint>(pre.pending().begin(), pre.pending().end());
  CHECK_THROWS_AS(pre.ingest(at(f, {3, 0}, 15.0)), OutOfOrderError);
  CHECK_THROWS_AS(pre.ingest(at(f, {3, 0}, 20.0)), OutOfOrderError);
  CHECK_THROWS_AS(pre.ingest(GeoPoint{95.0, 0.0, 30.0}), InputError);
  CHECK(std::vector<GeoPoint>(pre.pending().begin(), pre.pending().end()) == pending);
  CHECK_NOTHROW(pre.ingest(at(f, {4, 0}, 30.0)));
}

TEST_CASE("stay contraction") {
  const PreprocessConfig cfg;
  const LocalFrame f(kHome);
  testgen::Gen g(3);

  SUBCASE("jittered stay becomes one weighted point") {
    std::vector<GeoPoint> raw;
    for (int i = 0; i <= 180; ++i) {
      const double r = g.real(0.0, 4.9), a = g.real(0.0, 6.28);
      raw.push_back(at(f, {r * std::cos(a), r * std::sin(a)}, 5.0 * i));
    }
    const Block b = compress_block(raw, cfg);
    REQUIRE(b.points.size() == 1);
    CHECK(b.points[0].weight == doctest::Approx(900.0));
    CHECK(b.points[0].timestamp == 0.0);
  }
  SUBCASE("far points stay separate") {
    // Widen gamma so the 1 km step stays inside one block.
    PreprocessConfig wide = cfg;
    wide.gamma_m = 5000.0;
    const std::vector<GeoPoint> raw{at(f, {0, 0}, 0.0), at(f, {1000, 0}, 250.0)};
    const Block b = compress_block(raw, wide);
    REQUIRE(b.points.size() == 2);
    CHECK(b.points[0].weight == 0.0);
    CHECK(b.points[1].weight == 0.0);
  }
  SUBCASE("slow drift flushes when the spread exceeds alpha") {
    // Each step is 10 m, well inside xi'; the run grows until the median
    // would sit alpha or more from the earliest point.
    std::vector<GeoPoint> raw;
    for (int i = 0; i < 40; ++i) raw.push_back(at(f, {10.0 * i, 0}, 10.0 * i));
    const Block b = compress_block(raw, cfg);
    REQUIRE(b.points.size() >= 2);
    // Offline oracle: the first run is the longest prefix whose median stays
    // within alpha of all its members and each point joins within xi'.
    std::size_t run = 1;
    while (run < raw.size()) {
      std::vector<GeoPoint> prefix(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(run));
      if (haversine(median_point(prefix), raw[run].pos()) >= cfg.xi_prime_m) break;
      prefix.push_back(raw[run]);
      const LatLon m = median_point(prefix);
      bool ok = true;
      for (const auto& p : prefix) ok = ok && haversine(m, p.pos()) < cfg.alpha_m;
      if (!ok) break;
      ++run;
    }
    CHECK(b.points[0].weight == doctest::Approx(raw[run - 1].timestamp));
    CHECK(b.points[1].timestamp == raw[run].timestamp);
    CHECK(run < raw.size());
  }
  SUBCASE("no neighbours within xi' keeps every point") {
    std::vector<GeoPoint> raw;
    for (int i = 0; i < 10; ++i) raw.push_back(at(f, {40.0 * i, 0}, 20.0 * i));
    const Block b = compress_block(raw, cfg);
    CHECK(b.points.size() == raw.size());
    for (const auto& p : b.points) CHECK(p.weight == 0.0);
  }
  SUBCASE("empty input") { CHECK(compress_block({}, cfg).points.empty()); }
  SUBCASE("unsorted input") {
    const std::vector<GeoPoint> raw{at(f, {0, 0}, 10.0), at(f, {0, 0}, 5.0)};
    CHECK_THROWS_AS(compress_block(raw, cfg), InputError);
  }
}

TEST_CASE("streaming and batch preprocessing agree") {
  const PreprocessConfig cfg;
  testgen::Gen g(2024);
  for (int i = 0; i < 600; ++i) {
    const auto raw = oracle::random_stream(g, g.coin());
    std::vector<StayPoint> emitted;
    const auto streamed = oracle::stream_blocks(raw, cfg, &emitted);
    const auto batch = compress_stream(raw, cfg, "p");
    REQUIRE(streamed == batch);

    // Every stay point is emitted exactly once, in order.
    std::vector<StayPoint> flat;
    for (const auto& b : batch) flat.insert(flat.end(), b.points.begin(), b.points.end());
    CHECK(emitted == flat);
  }
}

TEST_CASE("block invariants on random streams") {
  const PreprocessConfig cfg;
  testgen::Gen g(77);
  for (int i = 0; i < 300; ++i) {
    const auto raw = oracle::random_stream(g, false);
    const auto blocks = compress_stream(raw, cfg, "p");
    CHECK(blocks == compress_stream(raw, cfg, "p"));
    for (const Block& b : blocks) {
      REQUIRE_FALSE(b.points.empty());
      double covered = 0.0;
      for (std::size_t k = 0; k < b.points.size(); ++k) {
        CHECK(b.points[k].weight >= 0.0);
        covered += b.points[k].weight;
        if (k > 0) {
          CHECK(b.points[k].timestamp > b.points[k - 1].end_time());
          covered += b.points[k].timestamp - b.points[k - 1].end_time();
        }
      }
      CHECK(covered <= b.points.back().end_time() - b.points.front().timestamp + 1e-9);

      // Each stay point lies within alpha of every raw point it replaced.
      for (const StayPoint& sp : b.points)
        for (const GeoPoint& p : raw)
          if (p.timestamp >= sp.timestamp && p.timestamp <= sp.end_time())
            CHECK(haversine(sp.pos(), p.pos()) < cfg.alpha_m);
    }
  }
}

TEST_CASE("compress_block rejects multi-block input") {
  const LocalFrame f(kHome);
  const std::vector<GeoPoint> raw{at(f, {0, 0}, 0.0), at(f, {0, 0}, 1000.0)};
  CHECK_THROWS_AS(compress_block(raw, PreprocessConfig{}), InputError);
}
