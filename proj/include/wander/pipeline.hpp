#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wander/detect.hpp"
#include "wander/eval.hpp"
#include "wander/ibdd.hpp"
#include "wander/mining.hpp"
#include "wander/preprocess.hpp"
#include "wander/regions.hpp"
#include "wander/synth.hpp"

namespace wander {

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct PipelineConfig {
  PreprocessConfig preprocess;
  RegionConfig regions;
  int precision = 18;
  std::size_t eta = 1;
  double theta = 0.40;
  double theta_prime = 0.10;
  SupportRule support_rule = SupportRule::contiguous;
  AlignmentParams alignment;
  NoiseModel noise;
  std::uint64_t seed = 42;
  std::vector<double> theta_grid{0.20, 0.40, 0.60};
  std::vector<double> theta_prime_grid{0.20, 0.10, 0.05};
  std::vector<int> precision_grid{17, 18, 19};

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
};

/// INI text with one section per stage; every key is optional. Unknown
/// sections or keys and unparsable values raise ConfigError.
PipelineConfig parse_config(std::istream& is);
PipelineConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& os, const PipelineConfig& cfg);

// ---- stores -------------------------------------------------------------

struct StreamReadStats {
  std::size_t lines = 0;
  std::size_t skipped = 0;
};

/// `person_id,timestamp,lat,lon` lines grouped by person (first-seen order).
/// Malformed lines are counted and skipped.
std::vector<std::pair<std::string, std::vector<GeoPoint>>> read_stream(std::istream& is,
                                                                       StreamReadStats* stats = nullptr);
void write_stream(std::ostream& os, const std::string& person_id, const std::vector<GeoPoint>& points);

/// Label sidecar `trajectory_id,label,pair,divergence_time`.
struct LabelRow {
  std::size_t id = 0;
  Label label = Label::normal;
  std::size_t pair = 0;
  std::optional<double> divergence_time;

  friend bool operator==(const LabelRow&, const LabelRow&) = default;
};
std::vector<LabelRow> read_labels(std::istream& is);

/// `block,person_id,timestamp,lat,lon,weight` per stay point.
void write_blocks(std::ostream& os, const std::vector<Block>& blocks);
std::vector<Block> read_blocks(std::istream& is);

/// `region_id;lat,lon lat,lon ...;lat,lon` (hull, then centroid). Members are
/// not persisted; a reloaded region keeps its hull, centroid and buffer.
void write_regions(std::ostream& os, const std::vector<GeofencedRegion>& regions);
std::vector<GeofencedRegion> read_regions(std::istream& is, const RegionConfig& cfg);

/// `person_id origin destination token token ...`
void write_sequences(std::ostream& os, const std::vector<GeohashSequence>& sequences);
std::vector<GeohashSequence> read_sequences(std::istream& is);

/// Header `# eta=E precision=P source_hash=H`, then `support<TAB>tokens`.
void write_patterns(std::ostream& os, const PatternSet& patterns);
PatternSet read_patterns(std::istream& is);

struct DetectionEvent {
  std::string person_id;
  std::size_t trajectory_id = 0;
  double timestamp = 0.0;
  double score = 0.0;
  double anomaly = 0.0;
  Verdict verdict = Verdict::normal;
};

/// `person_id,trajectory_id,timestamp,s_i,a_i,verdict[,method=ibdd]`
void write_event(std::ostream& os, const DetectionEvent& e, Method method);

/// File names inside a workspace directory.
struct Workspace {
  std::filesystem::path dir;

  std::filesystem::path corpus() const { return dir / "corpus.csv"; }
  std::filesystem::path labels() const { return dir / "labels.csv"; }
  std::filesystem::path blocks() const { return dir / "blocks.csv"; }
  std::filesystem::path regions() const { return dir / "regions.txt"; }
  std::filesystem::path sequences() const { return dir / "sequences.txt"; }
  std::filesystem::path patterns() const { return dir / "patterns.tsv"; }
  std::filesystem::path events() const { return dir / "events.log"; }
  std::filesystem::path records() const { return dir / "eval_records.csv"; }
  std::filesystem::path report() const { return dir / "eval_report.txt"; }
};

// ---- offline refresh and snapshots ----------------------------------------

/// Regions and the models derived from them, always published together.
struct Snapshot {
  std::uint64_t generation = 0;
  std::vector<GeofencedRegion> regions;
  std::vector<GeohashSequence> sequences;
  std::shared_ptr<const PatternSet> patterns;
  std::shared_ptr<const SupportSet> support;  ///< null when there is no history
};

/// Historical trajectories of every block, as token sequences.
std::vector<GeohashSequence> history_sequences(const std::vector<Block>& blocks,
                                               const std::vector<GeofencedRegion>& regions, int precision);

/// Recomputes regions (ids carried over from `previous`), re-segments and
/// re-hashes the blocks and re-mines the patterns.
Snapshot periodic_refresh(const std::vector<Block>& blocks, const PipelineConfig& cfg,
                          const std::vector<GeofencedRegion>& previous = {});

/// Snapshot builder for already computed regions and sequences.
Snapshot make_snapshot(std::vector<GeofencedRegion> regions, std::vector<GeohashSequence> sequences,
                       std::shared_ptr<const PatternSet> patterns, const PipelineConfig& cfg);

/// Atomic publication point between the refresh job and online monitors.
class SnapshotHolder {
 public:
  /// Stamps the next generation number and makes `s` current.
  void publish(Snapshot s);
  std::shared_ptr<const Snapshot> current() const;
  std::uint64_t generation() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Snapshot> current_;
  std::uint64_t generation_ = 0;
};

// ---- online path ----------------------------------------------------------

/// Preprocess -> segment -> encode -> detect for one person's live stream. A
/// trajectory is scored against the snapshot current at its start; newer
/// snapshots are picked up between trajectories.
class OnlineMonitor {
 public:
  OnlineMonitor(std::string person_id, const SnapshotHolder& holder, PipelineConfig cfg, Method method);

  /// Events for every token produced by this point.
  std::vector<DetectionEvent> ingest(const GeoPoint& p);
  /// Closes the open block.
  std::vector<DetectionEvent> finish();

  std::size_t trajectories() const { return trajectory_count_; }
  std::size_t dropped() const { return dropped_; }
  std::uint64_t generation() const { return snapshot_ ? snapshot_->generation : 0; }

 private:
  void on_stay_point(const StayPoint& sp, std::vector<DetectionEvent>& out);
  void on_block_end();
  void start_trajectory();
  void score(const StayPoint& sp, std::vector<DetectionEvent>& out);
  void rebind();

  std::string person_id_;
  const SnapshotHolder& holder_;
  PipelineConfig cfg_;
  Method method_;
  StreamPreprocessor preprocessor_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::unique_ptr<Segmenter> segmenter_;
  std::optional<StayPoint> last_in_block_;
  std::unique_ptr<SequenceBuilder> builder_;
  std::unique_ptr<Detector> detector_;
  std::unique_ptr<IbddDetector> ibdd_;
  std::size_t trajectory_count_ = 0;
  std::size_t dropped_ = 0;
};

}  // namespace wander
