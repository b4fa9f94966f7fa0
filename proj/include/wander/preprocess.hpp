#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wander/geo.hpp"

namespace wander {

struct PreprocessConfig {
  double epsilon_s = 300.0;     ///< temporal block split threshold
  double gamma_m = 500.0;       ///< spatial block split threshold
  double xi_prime_m = 28.0;     ///< contraction radius around the running median
  double alpha_m = 100.0;       ///< max drift of a stay point from any point it replaces
  double max_abs_accel = 5.0;   ///< noise filter bound, m/s^2

  /// Throws InputError naming the violated constraint.
  void validate() const;
};

/// A contracted run of raw points. `weight` is the dwell duration (0 for a
/// single uncontracted point); `timestamp` is the start of the run.
struct StayPoint {
  double lat = 0.0;
  double lon = 0.0;
  double timestamp = 0.0;
  double weight = 0.0;

  LatLon pos() const { return {lat, lon}; }
  double end_time() const { return timestamp + weight; }
  friend bool operator==(const StayPoint&, const StayPoint&) = default;
};

struct Block {
  std::string person_id;
  std::vector<StayPoint> points;
  bool open = false;

  friend bool operator==(const Block&, const Block&) = default;
};

enum class NoiseVerdict { keep, drop };

/// Drops a point whose absolute acceleration strictly exceeds the bound.
NoiseVerdict filter_noise(const GeoPoint& prev, double prev_speed, const GeoPoint& cur,
                          const PreprocessConfig& cfg);

/// True when `cur` starts a new block relative to its raw predecessor.
bool splits_block(const GeoPoint& prev, const GeoPoint& cur, const PreprocessConfig& cfg);

/// Collapses a buffered run into one stay point: median position, first
/// timestamp, duration as weight.
StayPoint make_stay_point(std::span<const GeoPoint> run);

/// One contraction decision. Returns nullopt when `next` can be absorbed into
/// `buffer`; otherwise the stay point that flushes the buffer (the caller
/// restarts the buffer at `next`).
std::optional<StayPoint> contract(std::span<const GeoPoint> buffer, const GeoPoint& next,
                                  const PreprocessConfig& cfg);

struct IngestEvents {
  bool dropped = false;  ///< rejected by the noise filter
  /// Stay point flushed by this point. When `block_closed` is also set the
  /// stay point is already the last point of the closed block.
  std::optional<StayPoint> stay_point;
  std::optional<Block> block_closed;
};

class OutOfOrderError : public InputError {
 public:
  using InputError::InputError;
};

/// Online preprocessing state of one person's stream: noise filter, block
/// partitioning and stay-point contraction. Single writer.
class StreamPreprocessor {
 public:
  StreamPreprocessor(std::string person_id, PreprocessConfig cfg);

  /// Throws OutOfOrderError (state untouched) unless p is strictly later than
  /// the previously ingested point, InputError for invalid coordinates.
  IngestEvents ingest(const GeoPoint& p);

  /// Flushes pending contraction and closes the current block, if any.
  std::optional<Block> finish();

  const Block& current_block() const { return block_; }
  std::span<const GeoPoint> pending() const { return buffer_; }

 private:
  PreprocessConfig cfg_;
  Block block_;
  std::vector<GeoPoint> buffer_;
  std::optional<GeoPoint> last_kept_;
  std::optional<double> last_seen_time_;
  double last_speed_ = 0.0;
};

/// Batch counterpart of StreamPreprocessor: filter, split and contract a
/// whole sorted stream. Produces the same blocks as ingesting point by point.
std::vector<Block> compress_stream(std::span<const GeoPoint> raw, const PreprocessConfig& cfg,
                                   const std::string& person_id = {});

/// Contracts raw points known to form a single block. Throws InputError on
/// unsorted input or when the points would split into several blocks.
Block compress_block(std::span<const GeoPoint> raw, const PreprocessConfig& cfg,
                     const std::string& person_id = {});

}  // namespace wander
