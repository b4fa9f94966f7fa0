#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace wander {

/// Mean Earth radius used by every distance computation in the library.
inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Raised for malformed or out-of-contract input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LatLon {
  double lat = 0.0;  ///< degrees, [-90, 90]
  double lon = 0.0;  ///< degrees, [-180, 180]

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

/// A timestamped GPS fix.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  double timestamp = 0.0;  ///< seconds since epoch

  LatLon pos() const { return {lat, lon}; }
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Kinematics {
  double speed = 0.0;             ///< m/s
  double abs_acceleration = 0.0;  ///< m/s^2
};

bool is_valid(const LatLon& p);
bool is_valid(const GeoPoint& p);

/// Great-circle distance in meters.
double haversine(const LatLon& a, const LatLon& b);
inline double haversine(const GeoPoint& a, const GeoPoint& b) { return haversine(a.pos(), b.pos()); }

/// Speed at `cur` and the absolute acceleration relative to `prev_speed`.
/// Throws InputError unless cur.timestamp > prev.timestamp.
Kinematics kinematics(const GeoPoint& prev, double prev_speed, const GeoPoint& cur);

/// Componentwise median of the coordinates. Even counts take the mean of the
/// two central values. The returned timestamp is 0.
LatLon median_point(std::span<const LatLon> points);
LatLon median_point(std::span<const GeoPoint> points);

/// Point at fraction `f` of the great-circle arc from a to b.
LatLon interpolate_great_circle(const LatLon& a, const LatLon& b, double f);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Distance from p to the segment [a, b].
double segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Equirectangular projection around a fixed origin, in meters (x east, y north).
/// Accurate at the scale of a neighbourhood, which is all it is used for.
class LocalFrame {
 public:
  explicit LocalFrame(LatLon origin);

  Vec2 to_local(const LatLon& p) const;
  LatLon to_geo(const Vec2& v) const;
  const LatLon& origin() const { return origin_; }

 private:
  LatLon origin_;
  double meters_per_deg_lat_;
  double meters_per_deg_lon_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace wander
