#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "wander/geohash.hpp"
#include "wander/regions.hpp"

using namespace wander;

// Reference values from tests/oracles/derived_values.py.
constexpr double kErr17 = 152.70299374405343;
constexpr double kErr18 = 76.35149687202671;
constexpr double kErr19 = 38.17574843601336;

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

std::vector<CellToken> dedup(const std::vector<CellToken>& in) {
  std::vector<CellToken> out;
  for (auto t : in)
    if (out.empty() || out.back() != t) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("encoding error matches the reference table") {
  CHECK(max_encoding_error_m(17) == doctest::Approx(kErr17).epsilon(1e-9));
  CHECK(max_encoding_error_m(18) == doctest::Approx(kErr18).epsilon(1e-9));
  CHECK(max_encoding_error_m(19) == doctest::Approx(kErr19).epsilon(1e-9));
  // Cell width halves per extra level.
  for (int p = 2; p <= 30; ++p)
    CHECK(max_encoding_error_m(p) == doctest::Approx(max_encoding_error_m(p - 1) / 2.0));
}

TEST_CASE("decoded centre is within the per-axis error bound") {
  testgen::Gen g(18);
  for (int p : {17, 18, 19}) {
    const double bound = max_encoding_error_m(p) * 1.05;
    for (int i = 0; i < 5000; ++i) {
      const LatLon q = g.latlon();
      const LatLon c = decode(encode(q, p)).center;
      const double lat_err = std::abs(c.lat - q.lat) * kMetersPerDegree;
      const double lon_err = std::abs(c.lon - q.lon) * kMetersPerDegree * std::cos(q.lat * std::numbers::pi / 180.0);
      CHECK(lat_err <= bound);
      CHECK(lon_err <= bound);
      const auto b = decode(encode(q, p)).bounds;
      CHECK(q.lat >= b.lat_min);
      CHECK(q.lat <= b.lat_max);
      CHECK(q.lon >= b.lon_min);
      CHECK(q.lon <= b.lon_max);
    }
  }
}

TEST_CASE("nearby points share a cell") {
  const LatLon centre = decode(encode({55.37, 10.39}, 18)).center;
  const LatLon close = LocalFrame(centre).to_geo({0.01, 0.0});
  CHECK(encode(centre, 18) == encode(close, 18));
}

TEST_CASE("decode and re-encode round trip on random tokens") {
  testgen::Gen g(4);
  for (int i = 0; i < 10000; ++i) {
    const int p = g.integer(1, 31);
    const std::uint64_t n = std::uint64_t{1} << (2 * p);
    const CellToken t{static_cast<std::uint8_t>(p),
                      std::uniform_int_distribution<std::uint64_t>(0, n - 1)(g.engine())};
    REQUIRE(encode(decode(t).center, p) == t);
    REQUIRE(parse_token(to_string(t)) == t);
    REQUIRE(cell_from_xy(cell_xy(t), p) == t);
  }
}

TEST_CASE("code zero touches the domain corner") {
  const auto b = decode(CellToken{5, 0}).bounds;
  CHECK(b.lat_min == -90.0);
  CHECK(b.lon_min == -180.0);
}

TEST_CASE("parent contains the child") {
  testgen::Gen g(6);
  for (int i = 0; i < 2000; ++i) {
    const LatLon q = g.latlon();
    const int p = g.integer(2, 31);
    const CellToken child = encode(q, p);
    CHECK(parent(child) == encode(q, p - 1));
    CHECK(parent(child).code == child.code >> 2);
  }
  CHECK_THROWS_AS(parent(CellToken{1, 0}), InputError);
}

TEST_CASE("adjacency") {
  const CellToken a = cell_from_xy({100, 100}, 10);
  CHECK(adjacent(a, cell_from_xy({101, 100}, 10)));
  CHECK(adjacent(a, cell_from_xy({99, 101}, 10)));
  CHECK_FALSE(adjacent(a, a));
  CHECK_FALSE(adjacent(a, cell_from_xy({102, 100}, 10)));
  CHECK_FALSE(adjacent(a, cell_from_xy({50, 50}, 11)));
}

TEST_CASE("token parsing errors") {
  CHECK_THROWS_AS(parse_token("18"), InputError);
  CHECK_THROWS_AS(parse_token("18:x"), InputError);
  CHECK_THROWS_AS(parse_token("0:0"), InputError);
  CHECK_THROWS_AS(parse_token("2:16"), InputError);
  CHECK_THROWS_AS(parse_token("18:1 "), InputError);
  CHECK(parse_token("2:15") == CellToken{2, 15});
  CHECK_THROWS_AS(encode({0, 0}, 0), InputError);
  CHECK_THROWS_AS(encode({0, 0}, 32), InputError);
}

TEST_CASE("gap of three cells on the equator fills in") {
  const int p = 18;
  const std::uint32_t row = 1u << (p - 1);
  const LatLon a = decode(cell_from_xy({5000, row}, p)).center;
  const LatLon b = decode(cell_from_xy({5003, row}, p)).center;

  SequenceBuilder builder(p);
  builder.push(a);
  builder.push(b);
  CHECK(builder.tokens().size() == 4);

  // Dense sampling of the segment.
  std::vector<CellToken> dense;
  for (int k = 0; k <= 10000; ++k) dense.push_back(encode(interpolate_great_circle(a, b, k / 10000.0), p));
  CHECK(builder.tokens() == dedup(dense));
}

TEST_CASE("revisits survive merging") {
  const int p = 18;
  const LatLon a = decode(cell_from_xy({7000, 9000}, p)).center;
  const LatLon b = decode(cell_from_xy({7001, 9000}, p)).center;
  SequenceBuilder builder(p);
  for (const LatLon& q : {a, a, b, b, a}) builder.push(q);
  CHECK(builder.tokens() == std::vector<CellToken>{encode(a, p), encode(b, p), encode(a, p)});
}

TEST_CASE("sequences are well formed and cover the dense path") {
  testgen::Gen g(12);
  for (int i = 0; i < 500; ++i) {
    const int p = g.integer(16, 20);
    LatLon q{g.real(-60, 60), g.real(-170, 170)};
    Trajectory t;
    t.person_id = "p";
    const int n = g.integer(1, 12);
    for (int k = 0; k < n; ++k) {
      t.points.push_back({q.lat, q.lon, 10.0 * k, 0.0});
      q = g.near(q, g.real(0.0, 600.0));
    }
    const GeohashSequence s = sequence_from_trajectory(t, p);
    CHECK(is_well_formed(s.tokens));
    CHECK(s.tokens.size() == s.timestamps.size());
    CHECK(s.tokens.front() == encode(t.points.front().pos(), p));
    CHECK(s.tokens.back() == encode(t.points.back().pos(), p));
    CHECK(std::is_sorted(s.timestamps.begin(), s.timestamps.end()));
  }
  CHECK_THROWS_AS(sequence_from_trajectory(Trajectory{}, 18), InputError);
}
