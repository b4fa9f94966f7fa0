#pragma once

#include <memory>
#include <span>
#include <vector>

#include "wander/detect.hpp"
#include "wander/geohash.hpp"

namespace wander {

enum class SupportRule {
  contiguous,   ///< ongoing sequence must occur as a substring
  subsequence,  ///< gaps allowed (sensitivity-analysis variant)
};

/// Historical sequences of the baseline detector.
struct SupportSet {
  std::vector<std::vector<CellToken>> sequences;
  double theta_prime = 0.1;
  SupportRule rule = SupportRule::contiguous;

  void validate() const;
};

bool supports(std::span<const CellToken> history, std::span<const CellToken> ongoing,
              SupportRule rule = SupportRule::contiguous);

/// Online baseline: anomalous once fewer than theta' of the historical
/// sequences support the ongoing one. Keeps, per historical sequence, the end
/// positions of the ongoing sequence's occurrences, so a step costs at most
/// one comparison per live position.
class IbddDetector {
 public:
  explicit IbddDetector(std::shared_ptr<const SupportSet> support);

  /// score = supporting fraction, anomaly = 1 - running min of it.
  StepResult step(CellToken token);
  void reset();

  std::size_t supporting() const { return supporting_; }

 private:
  std::shared_ptr<const SupportSet> support_;
  std::vector<std::vector<std::size_t>> live_;  // contiguous: next positions to match
  std::vector<std::size_t> cursor_;             // subsequence: greedy embedding cursor
  std::vector<bool> alive_;
  std::size_t steps_ = 0;
  std::size_t supporting_ = 0;
  double anomaly_ = 0.0;
  bool latched_ = false;
};

}  // namespace wander
