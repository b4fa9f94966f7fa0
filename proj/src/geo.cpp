#include "wander/geo.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <numbers>
#include <vector>

namespace wander {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

bool is_valid(const LatLon& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

bool is_valid(const GeoPoint& p) {
  return is_valid(p.pos()) && std::isfinite(p.timestamp) && p.timestamp >= 0.0;
}

double haversine(const LatLon& a, const LatLon& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

Kinematics kinematics(const GeoPoint& prev, double prev_speed, const GeoPoint& cur) {
  const double dt = cur.timestamp - prev.timestamp;
  if (!(dt > 0.0)) throw InputError("kinematics: non-positive time delta");
  const double speed = haversine(prev, cur) / dt;
  return {speed, std::abs(speed - prev_speed) / dt};
}

LatLon median_point(std::span<const LatLon> points) {
  if (points.empty()) throw InputError("median_point: empty input");
  std::vector<double> lats(points.size());
  std::vector<double> lons(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    lats[i] = points[i].lat;
    lons[i] = points[i].lon;
  }
  return {median_of(lats), median_of(lons)};
}

LatLon median_point(std::span<const GeoPoint> points) {
  std::vector<LatLon> coords;
  coords.reserve(points.size());
  for (const auto& p : points) coords.push_back(p.pos());
  return median_point(coords);
}

LatLon interpolate_great_circle(const LatLon& a, const LatLon& b, double f) {
  const double delta = haversine(a, b) / kEarthRadiusM;
  if (delta < 1e-12) return a;
  const double phi1 = a.lat * kDegToRad, lam1 = a.lon * kDegToRad;
  const double phi2 = b.lat * kDegToRad, lam2 = b.lon * kDegToRad;
  const double wa = std::sin((1.0 - f) * delta) / std::sin(delta);
  const double wb = std::sin(f * delta) / std::sin(delta);
  const double x = wa * std::cos(phi1) * std::cos(lam1) + wb * std::cos(phi2) * std::cos(lam2);
  const double y = wa * std::cos(phi1) * std::sin(lam1) + wb * std::cos(phi2) * std::sin(lam2);
  const double z = wa * std::sin(phi1) + wb * std::sin(phi2);
  return {std::atan2(z, std::hypot(x, y)) * kRadToDeg, std::atan2(y, x) * kRadToDeg};
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

LocalFrame::LocalFrame(LatLon origin)
    : origin_(origin),
      meters_per_deg_lat_(kEarthRadiusM * kDegToRad),
      meters_per_deg_lon_(kEarthRadiusM * kDegToRad * std::cos(origin.lat * kDegToRad)) {}

Vec2 LocalFrame::to_local(const LatLon& p) const {
  return {(p.lon - origin_.lon) * meters_per_deg_lon_, (p.lat - origin_.lat) * meters_per_deg_lat_};
}

LatLon LocalFrame::to_geo(const Vec2& v) const {
  return {origin_.lat + v.y / meters_per_deg_lat_, origin_.lon + v.x / meters_per_deg_lon_};
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

}  // namespace wander
