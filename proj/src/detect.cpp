#include "wander/detect.hpp"

#include <utility>

namespace wander {

void AlignmentParams::validate() const {
  if (!(match > 0.0)) throw InputError("alignment: match > 0 violated");
  if (!(mismatch <= 0.0)) throw InputError("alignment: mismatch <= 0 violated");
  if (!(gap_open <= 0.0)) throw InputError("alignment: gap_open <= 0 violated");
  if (!(gap_extend <= 0.0)) throw InputError("alignment: gap_extend <= 0 violated");
}

double similarity(const PatternSet& patterns, std::span<const CellToken> v, const AlignmentParams& params) {
  if (v.empty()) throw InputError("similarity: empty sequence");
  std::size_t best = 0;
  for (const Pattern& p : patterns.patterns) {
    best = std::max(best, smith_waterman(std::span<const CellToken>(p.tokens), v, params));
    if (best >= v.size()) break;
  }
  return std::clamp(static_cast<double>(best) / static_cast<double>(v.size()), 0.0, 1.0);
}

Detector::Detector(std::shared_ptr<const PatternSet> patterns, double theta, AlignmentParams params)
    : patterns_(std::move(patterns)), theta_(theta), params_(params) {
  if (!patterns_) throw InputError("detector: missing pattern set");
  if (!(theta_ > 0.0 && theta_ <= 1.0)) throw InputError("detector: 0 < theta <= 1 violated");
  params_.validate();
}

StepResult Detector::step(CellToken token) {
  if (!ongoing_.empty() && ongoing_.back() == token)
    throw InputError("detector: token repeats the previous one");
  ongoing_.push_back(token);
  const double s = similarity(*patterns_, ongoing_, params_);
  scores_.push_back(s);
  anomaly_ = std::max(anomaly_, 1.0 - s);
  if (anomaly_ > theta_) latched_ = true;
  return {s, anomaly_, latched_ ? Verdict::anomalous : Verdict::normal};
}

void Detector::reset() {
  ongoing_.clear();
  scores_.clear();
  anomaly_ = 0.0;
  latched_ = false;
}

std::vector<double> anomaly_scores(std::span<const double> scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  double running_min = 1.0;
  for (double s : scores) {
    running_min = std::min(running_min, s);
    out.push_back(1.0 - running_min);
  }
  return out;
}

AlignmentCost complexity_guard(const PatternSet& patterns, std::size_t v_length) {
  AlignmentCost cost;
  cost.bound = patterns.patterns.size() * v_length * v_length;
  for (const Pattern& p : patterns.patterns) cost.exact += p.tokens.size() * v_length;
  return cost;
}

}  // namespace wander
