#include "wander/ibdd.hpp"

#include <algorithm>
#include <utility>

namespace wander {

void SupportSet::validate() const {
  if (!(theta_prime > 0.0 && theta_prime <= 1.0)) throw InputError("ibdd: 0 < theta_prime <= 1 violated");
  if (sequences.empty()) throw InputError("ibdd: empty support set");
}

bool supports(std::span<const CellToken> history, std::span<const CellToken> ongoing, SupportRule rule) {
  if (ongoing.empty()) throw InputError("supports: empty ongoing sequence");
  if (rule == SupportRule::contiguous)
    return std::search(history.begin(), history.end(), ongoing.begin(), ongoing.end()) != history.end();
  std::size_t k = 0;
  for (const CellToken& t : history)
    if (k < ongoing.size() && t == ongoing[k]) ++k;
  return k == ongoing.size();
}

IbddDetector::IbddDetector(std::shared_ptr<const SupportSet> support) : support_(std::move(support)) {
  if (!support_) throw InputError("ibdd: missing support set");
  support_->validate();
  reset();
}

void IbddDetector::reset() {
  const std::size_t n = support_->sequences.size();
  live_.assign(n, {});
  cursor_.assign(n, 0);
  alive_.assign(n, true);
  steps_ = 0;
  supporting_ = n;
  anomaly_ = 0.0;
  latched_ = false;
}

StepResult IbddDetector::step(CellToken token) {
  const auto& seqs = support_->sequences;
  supporting_ = 0;
  for (std::size_t h = 0; h < seqs.size(); ++h) {
    if (!alive_[h]) continue;
    const auto& hist = seqs[h];
    if (support_->rule == SupportRule::subsequence) {
      std::size_t& c = cursor_[h];
      while (c < hist.size() && hist[c] != token) ++c;
      alive_[h] = c < hist.size();
      if (alive_[h]) ++c;
    } else {
      auto& pos = live_[h];
      if (steps_ == 0) {
        for (std::size_t k = 0; k < hist.size(); ++k)
          if (hist[k] == token) pos.push_back(k + 1);
      } else {
        std::size_t kept = 0;
        for (const std::size_t p : pos)
          if (p < hist.size() && hist[p] == token) pos[kept++] = p + 1;
        pos.resize(kept);
      }
      alive_[h] = !pos.empty();
    }
    if (alive_[h]) ++supporting_;
  }
  ++steps_;

  const double fraction = static_cast<double>(supporting_) / static_cast<double>(seqs.size());
  anomaly_ = std::max(anomaly_, 1.0 - fraction);
  if (fraction < support_->theta_prime) latched_ = true;
  return {fraction, anomaly_, latched_ ? Verdict::anomalous : Verdict::normal};
}

}  // namespace wander
