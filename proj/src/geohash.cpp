#include "wander/geohash.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

#include "wander/regions.hpp"

namespace wander {

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

void rotate(std::uint64_t n, std::uint64_t& x, std::uint64_t& y, std::uint64_t rx, std::uint64_t ry) {
  if (ry == 0) {
    if (rx == 1) {
      x = n - 1 - x;
      y = n - 1 - y;
    }
    std::swap(x, y);
  }
}

std::uint64_t xy_to_hilbert(std::uint64_t x, std::uint64_t y, int order) {
  const std::uint64_t n = std::uint64_t{1} << order;
  std::uint64_t d = 0;
  for (std::uint64_t s = n / 2; s > 0; s /= 2) {
    const std::uint64_t rx = (x & s) ? 1 : 0;
    const std::uint64_t ry = (y & s) ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    rotate(n, x, y, rx, ry);
  }
  return d;
}

GridXY hilbert_to_xy(std::uint64_t d, int order) {
  const std::uint64_t n = std::uint64_t{1} << order;
  std::uint64_t x = 0, y = 0;
  for (std::uint64_t s = 1; s < n; s *= 2) {
    const std::uint64_t rx = 1 & (d / 2);
    const std::uint64_t ry = 1 & (d ^ rx);
    rotate(s, x, y, rx, ry);
    x += s * rx;
    y += s * ry;
    d /= 4;
  }
  return {static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
}

std::uint64_t quantize(double unit, std::uint64_t cells) {
  const double scaled = std::floor(unit * static_cast<double>(cells));
  if (scaled <= 0.0) return 0;
  return std::min(static_cast<std::uint64_t>(scaled), cells - 1);
}

// Spacing that keeps two consecutive samples within neighbouring cells.
double sampling_step_m(int precision, double max_abs_lat) {
  const double cells = std::ldexp(1.0, precision);
  const double height = 180.0 / cells * kMetersPerDegree;
  const double width = 360.0 / cells * kMetersPerDegree * std::cos(max_abs_lat * std::numbers::pi / 180.0);
  return 0.5 * std::min(height, width);
}

}  // namespace

void validate_precision(int precision) {
  if (precision < kMinPrecision || precision > kMaxPrecision)
    throw InputError("geohash precision must be within [1, 31]");
}

CellToken encode(const LatLon& p, int precision) {
  validate_precision(precision);
  const std::uint64_t cells = std::uint64_t{1} << precision;
  const std::uint64_t x = quantize((p.lon + 180.0) / 360.0, cells);
  const std::uint64_t y = quantize((p.lat + 90.0) / 180.0, cells);
  return {static_cast<std::uint8_t>(precision), xy_to_hilbert(x, y, precision)};
}

GridXY cell_xy(CellToken t) { return hilbert_to_xy(t.code, t.precision); }

CellToken cell_from_xy(GridXY xy, int precision) {
  validate_precision(precision);
  return {static_cast<std::uint8_t>(precision), xy_to_hilbert(xy.x, xy.y, precision)};
}

DecodedCell decode(CellToken t) {
  validate_precision(t.precision);
  const GridXY xy = cell_xy(t);
  const double cells = std::ldexp(1.0, t.precision);
  const double lon_step = 360.0 / cells;
  const double lat_step = 180.0 / cells;
  CellBounds b;
  b.lon_min = -180.0 + xy.x * lon_step;
  b.lon_max = b.lon_min + lon_step;
  b.lat_min = -90.0 + xy.y * lat_step;
  b.lat_max = b.lat_min + lat_step;
  return {{0.5 * (b.lat_min + b.lat_max), 0.5 * (b.lon_min + b.lon_max)}, b};
}

bool adjacent(CellToken a, CellToken b) {
  if (a.precision != b.precision || a == b) return false;
  const GridXY pa = cell_xy(a);
  const GridXY pb = cell_xy(b);
  const auto diff = [](std::uint32_t u, std::uint32_t v) { return u > v ? u - v : v - u; };
  return diff(pa.x, pb.x) <= 1 && diff(pa.y, pb.y) <= 1;
}

CellToken parent(CellToken t, int levels) {
  const int order = t.precision - levels;
  validate_precision(order);
  const GridXY xy = cell_xy(t);
  return cell_from_xy({xy.x >> levels, xy.y >> levels}, order);
}

double max_encoding_error_m(int precision) {
  validate_precision(precision);
  return 0.5 * 360.0 / std::ldexp(1.0, precision) * kMetersPerDegree;
}

std::string to_string(CellToken t) {
  return std::to_string(t.precision) + ":" + std::to_string(t.code);
}

CellToken parse_token(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InputError("token: missing ':'");
  int precision = 0;
  std::uint64_t code = 0;
  const char* first = text.data();
  const char* mid = first + colon;
  const char* last = first + text.size();
  auto r1 = std::from_chars(first, mid, precision);
  auto r2 = std::from_chars(mid + 1, last, code);
  if (r1.ec != std::errc{} || r1.ptr != mid || r2.ec != std::errc{} || r2.ptr != last)
    throw InputError("token: malformed '" + std::string(text) + "'");
  validate_precision(precision);
  if (precision < 32 && code >= (std::uint64_t{1} << (2 * precision)))
    throw InputError("token: code out of range");
  return {static_cast<std::uint8_t>(precision), code};
}

SequenceBuilder::SequenceBuilder(int precision) : precision_(precision) {
  validate_precision(precision);
}

void SequenceBuilder::append(CellToken t, std::vector<CellToken>& added) {
  if (!tokens_.empty() && tokens_.back() == t) return;
  tokens_.push_back(t);
  added.push_back(t);
}

std::vector<CellToken> SequenceBuilder::push(const LatLon& p) {
  std::vector<CellToken> added;
  const CellToken cell = encode(p, precision_);
  if (tokens_.empty() || tokens_.back() == cell || adjacent(tokens_.back(), cell)) {
    append(cell, added);
    return added;
  }
  const LatLon from = decode(tokens_.back()).center;
  const LatLon to = decode(cell).center;
  const double step = sampling_step_m(precision_, std::max(std::abs(from.lat), std::abs(to.lat)));
  const auto samples = static_cast<int>(std::ceil(haversine(from, to) / step));
  for (int k = 1; k <= samples; ++k)
    append(encode(interpolate_great_circle(from, to, static_cast<double>(k) / samples), precision_), added);
  append(cell, added);
  return added;
}

GeohashSequence sequence_from_trajectory(const Trajectory& t, int precision) {
  if (t.points.empty()) throw InputError("sequence_from_trajectory: empty trajectory");
  GeohashSequence seq;
  seq.person_id = t.person_id;
  seq.origin_region = t.origin_region;
  seq.destination_region = t.destination_region.value_or(-1);
  SequenceBuilder builder(precision);
  for (const StayPoint& p : t.points) {
    const auto added = builder.push(p.pos());
    seq.timestamps.insert(seq.timestamps.end(), added.size(), p.end_time());
  }
  seq.tokens = builder.tokens();
  return seq;
}

bool is_well_formed(const std::vector<CellToken>& tokens) {
  for (std::size_t i = 1; i < tokens.size(); ++i)
    if (!adjacent(tokens[i - 1], tokens[i])) return false;
  return true;
}

}  // namespace wander
