#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wander/detect.hpp"
#include "wander/geohash.hpp"
#include "wander/ibdd.hpp"
#include "wander/preprocess.hpp"
#include "wander/regions.hpp"
#include "wander/synth.hpp"

namespace wander {

/// Rank-statistic AUC with anomalous as the positive class; ties count one
/// half. Throws InputError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const Label> labels);

struct Delay {
  std::optional<double> seconds;  ///< empty when never detected
  bool premature = false;         ///< alarm fired before the divergence
};

/// alarm_time - divergence_time, clamped at zero. Throws InputError without a
/// divergence time.
Delay detection_delay(std::optional<double> divergence_time, std::optional<double> alarm_time);

/// One labeled trajectory ready for replay.
struct EvalSample {
  std::size_t id = 0;
  Label label = Label::normal;
  std::optional<double> divergence_time;
  GeohashSequence sequence;
};

/// Corpus after preprocessing, region discovery and segmentation; one
/// trajectory per labeled walk.
struct PreparedCorpus {
  std::vector<GeofencedRegion> regions;
  std::vector<Trajectory> trajectories;  ///< parallel to the corpus
  std::vector<Label> labels;
  std::vector<std::optional<double>> divergence_times;
  std::size_t raw_points = 0;
  std::size_t stay_points = 0;
  std::size_t unsegmented = 0;  ///< walks kept whole for lack of a region visit
};

PreparedCorpus prepare_corpus(const Corpus& corpus, const PreprocessConfig& pre, const RegionConfig& reg);

std::vector<EvalSample> samples_at(const PreparedCorpus& prepared, int precision);

enum class Method { proposed, ibdd };

std::string to_string(Method m);
Method parse_method(std::string_view text);

struct LooParams {
  std::size_t eta = 1;
  AlignmentParams alignment;
  SupportRule support_rule = SupportRule::contiguous;
};

/// Replay of one held-out sample. `scores[i]` is the similarity (proposed) or
/// supporting fraction (iBDD) after token i; `times[i]` is when token i was
/// known.
struct Trace {
  std::size_t id = 0;
  Label label = Label::normal;
  std::optional<double> divergence_time;
  std::vector<double> times;
  std::vector<double> scores;
  double fit_s = 0.0;
  double detect_s = 0.0;
};

/// Trains on every other sample and replays the held-out one token by token.
/// Scores do not depend on the alarm threshold, so one run serves every
/// threshold row.
std::vector<Trace> leave_one_out(std::span<const EvalSample> samples, Method method, const LooParams& params);

struct TrajectoryRecord {
  std::size_t id = 0;
  Label label = Label::normal;
  double score = 0.0;  ///< final anomaly score
  Verdict verdict = Verdict::normal;
  std::optional<double> alarm_time;
  Delay delay;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
  friend bool operator==(const Delay& a, const Delay& b) {
    return a.seconds == b.seconds && a.premature == b.premature;
  }
};

struct EvalResult {
  Method method = Method::proposed;
  double threshold = 0.0;  ///< theta or theta'
  int precision = 0;
  double auc = 0.0;          ///< from final anomaly scores
  double verdict_auc = 0.0;  ///< from binary verdicts
  std::optional<double> median_delay_s;
  double median_detect_s = 0.0;
  double median_fit_s = 0.0;
  std::size_t detected = 0;  ///< anomalous trajectories with an alarm
  std::size_t missed = 0;
  std::size_t premature = 0;
  std::vector<TrajectoryRecord> records;
};

/// Verdicts, delays and summary statistics of a replay at one threshold.
EvalResult summarize(std::span<const Trace> traces, Method method, double threshold, int precision);

/// Final anomaly score and first alarm of one trace at a threshold.
TrajectoryRecord score_trace(const Trace& trace, Method method, double threshold);

std::optional<double> median(std::vector<double> values);

/// Aligned table in the layout `theta | precision | AUC | ...`.
void write_table(std::ostream& os, std::span<const EvalResult> results);

/// `method,theta,precision,auc,median_delay_s,median_detect_s,median_fit_s,verdict_auc,detected,missed,premature`
void write_records(std::ostream& os, std::span<const EvalResult> results);
/// Parses write_records output (per-trajectory records are not included).
std::vector<EvalResult> read_records(std::istream& is);

/// `id,label,score,verdict,alarm_time,delay_s,premature`
void write_details(std::ostream& os, const EvalResult& result);

}  // namespace wander
