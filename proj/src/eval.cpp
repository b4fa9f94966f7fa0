#include "wander/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace wander {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw InputError("records: bad number '" + s + "'");
  return v;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InputError("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney: sum of mid-ranks of the positives.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == Label::anomalous) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) throw InputError("roc_auc: both classes required");
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

Delay detection_delay(std::optional<double> divergence_time, std::optional<double> alarm_time) {
  if (!divergence_time) throw InputError("detection_delay: missing divergence time");
  if (!alarm_time) return {};
  const double d = *alarm_time - *divergence_time;
  return {std::max(0.0, d), d < 0.0};
}

PreparedCorpus prepare_corpus(const Corpus& corpus, const PreprocessConfig& pre, const RegionConfig& reg) {
  pre.validate();
  reg.validate();
  PreparedCorpus out;
  std::vector<std::vector<Block>> per_walk(corpus.trajectories.size());
  std::vector<Block> all_blocks;
  for (std::size_t i = 0; i < corpus.trajectories.size(); ++i) {
    const auto& walk = corpus.trajectories[i];
    out.raw_points += walk.points.size();
    per_walk[i] = compress_stream(walk.points, pre, corpus.person_id);
    for (const Block& b : per_walk[i]) {
      out.stay_points += b.points.size();
      all_blocks.push_back(b);
    }
    out.labels.push_back(walk.label);
    out.divergence_times.push_back(walk.divergence_time);
  }
  out.regions = discover_regions(all_blocks, reg);

  for (const auto& blocks : per_walk) {
    std::optional<Trajectory> best;
    for (const Block& b : blocks)
      for (auto& t : segment_block(b, out.regions))
        if (!best || t.points.size() > best->points.size()) best = std::move(t);
    if (!best) {
      ++out.unsegmented;
      best.emplace();
      best->person_id = corpus.person_id;
      for (const Block& b : blocks) best->points.insert(best->points.end(), b.points.begin(), b.points.end());
    }
    out.trajectories.push_back(std::move(*best));
  }
  return out;
}

std::vector<EvalSample> samples_at(const PreparedCorpus& prepared, int precision) {
  validate_precision(precision);
  std::vector<EvalSample> out;
  for (std::size_t i = 0; i < prepared.trajectories.size(); ++i) {
    if (prepared.trajectories[i].points.empty()) continue;
    out.push_back({i, prepared.labels[i], prepared.divergence_times[i],
                   sequence_from_trajectory(prepared.trajectories[i], precision)});
  }
  return out;
}

std::string to_string(Method m) { return m == Method::proposed ? "proposed" : "ibdd"; }

Method parse_method(std::string_view text) {
  if (text == "proposed") return Method::proposed;
  if (text == "ibdd") return Method::ibdd;
  throw InputError("unknown method '" + std::string(text) + "'");
}

std::vector<Trace> leave_one_out(std::span<const EvalSample> samples, Method method, const LooParams& params) {
  std::vector<Trace> traces;
  traces.reserve(samples.size());
  for (std::size_t held = 0; held < samples.size(); ++held) {
    const EvalSample& test = samples[held];
    Trace trace{test.id, test.label, test.divergence_time, test.sequence.timestamps, {}, 0.0, 0.0};

    std::vector<GeohashSequence> history;
    history.reserve(samples.size() - 1);
    for (std::size_t j = 0; j < samples.size(); ++j)
      if (j != held) history.push_back(samples[j].sequence);

    if (method == Method::proposed) {
      const int precision = test.sequence.tokens.empty() ? 1 : static_cast<int>(test.sequence.tokens[0].precision);
      auto start = Clock::now();
      auto patterns = std::make_shared<const PatternSet>(mine(history, params.eta, precision));
      trace.fit_s = seconds_since(start);
      Detector detector(patterns, 1.0, params.alignment);
      start = Clock::now();
      for (const CellToken& t : test.sequence.tokens) trace.scores.push_back(detector.step(t).score);
      trace.detect_s = seconds_since(start);
    } else {
      auto start = Clock::now();
      auto support = std::make_shared<SupportSet>();
      support->rule = params.support_rule;
      for (auto& h : history) support->sequences.push_back(std::move(h.tokens));
      trace.fit_s = seconds_since(start);
      IbddDetector detector(support);
      start = Clock::now();
      for (const CellToken& t : test.sequence.tokens) trace.scores.push_back(detector.step(t).score);
      trace.detect_s = seconds_since(start);
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

TrajectoryRecord score_trace(const Trace& trace, Method method, double threshold) {
  TrajectoryRecord r;
  r.id = trace.id;
  r.label = trace.label;
  double running_min = 1.0;
  for (std::size_t i = 0; i < trace.scores.size(); ++i) {
    running_min = std::min(running_min, trace.scores[i]);
    const bool alarm = method == Method::proposed ? 1.0 - running_min > threshold : trace.scores[i] < threshold;
    if (alarm && !r.alarm_time) r.alarm_time = trace.times[i];
  }
  r.score = 1.0 - running_min;
  r.verdict = r.alarm_time ? Verdict::anomalous : Verdict::normal;
  if (trace.label == Label::anomalous) r.delay = detection_delay(trace.divergence_time, r.alarm_time);
  return r;
}

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

EvalResult summarize(std::span<const Trace> traces, Method method, double threshold, int precision) {
  EvalResult res;
  res.method = method;
  res.threshold = threshold;
  res.precision = precision;
  std::vector<double> scores, verdicts, delays, detect_times, fit_times;
  std::vector<Label> labels;
  for (const Trace& t : traces) {
    TrajectoryRecord r = score_trace(t, method, threshold);
    scores.push_back(r.score);
    verdicts.push_back(r.verdict == Verdict::anomalous ? 1.0 : 0.0);
    labels.push_back(r.label);
    detect_times.push_back(t.detect_s);
    fit_times.push_back(t.fit_s);
    if (r.label == Label::anomalous) {
      if (r.delay.seconds) {
        ++res.detected;
        delays.push_back(*r.delay.seconds);
        if (r.delay.premature) ++res.premature;
      } else {
        ++res.missed;
      }
    }
    res.records.push_back(std::move(r));
  }
  if (traces.empty()) return res;
  const bool both = std::count(labels.begin(), labels.end(), Label::anomalous) > 0 &&
                    std::count(labels.begin(), labels.end(), Label::normal) > 0;
  if (both) {
    res.auc = roc_auc(scores, labels);
    res.verdict_auc = roc_auc(verdicts, labels);
  }
  res.median_delay_s = median(delays);
  res.median_detect_s = median(detect_times).value_or(0.0);
  res.median_fit_s = median(fit_times).value_or(0.0);
  return res;
}

void write_table(std::ostream& os, std::span<const EvalResult> results) {
  const auto flags = os.flags();
  os << std::left << std::setw(10) << "method" << std::right << std::setw(7) << "theta" << std::setw(11)
     << "precision" << std::setw(9) << "AUC" << std::setw(12) << "Delay (s)" << std::setw(15) << "Detection (s)"
     << std::setw(13) << "Fitting (s)" << std::setw(13) << "verdict AUC" << std::setw(11) << "detected"
     << '\n';
  os << std::fixed;
  for (const EvalResult& r : results) {
    os << std::left << std::setw(10) << to_string(r.method) << std::right << std::setprecision(2) << std::setw(7)
       << r.threshold << std::setw(11) << r.precision << std::setprecision(4) << std::setw(9) << r.auc
       << std::setw(12);
    if (r.median_delay_s)
      os << std::setprecision(1) << *r.median_delay_s;
    else
      os << "-";
    os << std::setprecision(4) << std::setw(15) << r.median_detect_s << std::setw(13) << r.median_fit_s
       << std::setw(13) << r.verdict_auc << std::setw(8) << r.detected << '/' << (r.detected + r.missed) << '\n';
  }
  os.flags(flags);
}

void write_records(std::ostream& os, std::span<const EvalResult> results) {
  os << "method,theta,precision,auc,median_delay_s,median_detect_s,median_fit_s,verdict_auc,detected,missed,"
        "premature\n";
  for (const EvalResult& r : results) {
    os << to_string(r.method) << ',' << format_double(r.threshold) << ',' << r.precision << ','
       << format_double(r.auc) << ',' << optional_field(r.median_delay_s) << ',' << format_double(r.median_detect_s)
       << ',' << format_double(r.median_fit_s) << ',' << format_double(r.verdict_auc) << ',' << r.detected << ','
       << r.missed << ',' << r.premature << '\n';
  }
}

std::vector<EvalResult> read_records(std::istream& is) {
  std::vector<EvalResult> out;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("method,", 0) == 0) continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 11) throw InputError("records: expected 11 fields in '" + line + "'");
    EvalResult r;
    r.method = parse_method(f[0]);
    r.threshold = parse_double(f[1]);
    r.precision = std::stoi(f[2]);
    r.auc = parse_double(f[3]);
    if (!f[4].empty()) r.median_delay_s = parse_double(f[4]);
    r.median_detect_s = parse_double(f[5]);
    r.median_fit_s = parse_double(f[6]);
    r.verdict_auc = parse_double(f[7]);
    r.detected = std::stoul(f[8]);
    r.missed = std::stoul(f[9]);
    r.premature = std::stoul(f[10]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_details(std::ostream& os, const EvalResult& result) {
  os << "id,label,score,verdict,alarm_time,delay_s,premature\n";
  for (const TrajectoryRecord& r : result.records) {
    os << r.id << ',' << to_string(r.label) << ',' << format_double(r.score) << ','
       << (r.verdict == Verdict::anomalous ? "anomalous" : "normal") << ',' << optional_field(r.alarm_time) << ','
       << optional_field(r.delay.seconds) << ',' << (r.delay.premature ? 1 : 0) << '\n';
  }
}

}  // namespace wander
