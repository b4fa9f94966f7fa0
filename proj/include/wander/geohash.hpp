#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wander/geo.hpp"

namespace wander {

struct Trajectory;

inline constexpr int kMinPrecision = 1;
inline constexpr int kMaxPrecision = 31;

/// A Hilbert-curve cell. `precision` is the curve order: the grid has
/// 2^precision cells per axis and `code` < 4^precision.
struct CellToken {
  std::uint8_t precision = 0;
  std::uint64_t code = 0;

  friend auto operator<=>(const CellToken&, const CellToken&) = default;
};

struct CellBounds {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
};

struct DecodedCell {
  LatLon center;
  CellBounds bounds;
};

struct GridXY {
  std::uint32_t x = 0;  ///< longitude axis
  std::uint32_t y = 0;  ///< latitude axis
};

void validate_precision(int precision);

CellToken encode(const LatLon& p, int precision);
DecodedCell decode(CellToken t);
GridXY cell_xy(CellToken t);
CellToken cell_from_xy(GridXY xy, int precision);

/// Edge or corner neighbours (distinct cells of equal precision).
bool adjacent(CellToken a, CellToken b);

/// Token of the enclosing cell `levels` orders coarser.
CellToken parent(CellToken t, int levels = 1);

/// Half of the cell's longitude extent at the equator, in meters: the largest
/// per-axis error of a decoded cell center.
double max_encoding_error_m(int precision);

std::string to_string(CellToken t);
/// Parses `precision:code`; throws InputError.
CellToken parse_token(std::string_view text);

/// Tokens of one trajectory, deduplicated and made grid-connected.
/// `timestamps[i]` is the time at which token i became known.
struct GeohashSequence {
  std::string person_id;
  int origin_region = -1;
  int destination_region = -1;  ///< -1 while ongoing
  std::vector<CellToken> tokens;
  std::vector<double> timestamps;
};

/// Incremental token builder shared by the batch and online paths.
class SequenceBuilder {
 public:
  explicit SequenceBuilder(int precision);

  /// Encodes p, interpolating through the cells between the previous token
  /// and this one. Returns the newly appended tokens (possibly none).
  std::vector<CellToken> push(const LatLon& p);

  const std::vector<CellToken>& tokens() const { return tokens_; }
  int precision() const { return precision_; }

 private:
  void append(CellToken t, std::vector<CellToken>& added);

  int precision_;
  std::vector<CellToken> tokens_;
};

GeohashSequence sequence_from_trajectory(const Trajectory& t, int precision);

/// Consecutive pairs adjacent and distinct.
bool is_well_formed(const std::vector<CellToken>& tokens);

}  // namespace wander
