#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "wander/geohash.hpp"
#include "wander/mining.hpp"

namespace wander {

struct AlignmentParams {
  double match = 1.0;
  double mismatch = -1.0;
  double gap_open = -1.0;    ///< first position of a gap
  double gap_extend = -0.5;  ///< every further position of the same gap

  void validate() const;
};

namespace detail {

// Alignment value ordered by score first, then by matched positions.
struct AlignScore {
  double score = 0.0;
  int matches = 0;

  friend auto operator<=>(const AlignScore&, const AlignScore&) = default;
  AlignScore plus(double s, int m) const { return {score + s, matches + m}; }
};

}  // namespace detail

/// Local alignment (affine gaps) of u against v. Returns the number of
/// matched positions of the best-scoring local alignment; among alignments
/// of equal best score, the one with most matches. Symmetric in u and v.
/// Throws InputError on an empty sequence.
template <class T>
std::size_t smith_waterman(std::span<const T> u, std::span<const T> v, const AlignmentParams& params) {
  using detail::AlignScore;
  if (u.empty() || v.empty()) throw InputError("smith_waterman: empty sequence");
  constexpr AlignScore kFloor{};
  constexpr AlignScore kNone{-1e300, 0};

  // Gotoh states: m ends in an aligned pair, e in a gap consuming v, f in a
  // gap consuming u. A gap is only opened from a different state.
  const std::size_t cols = v.size() + 1;
  std::vector<AlignScore> h_prev(cols, kFloor), h_cur(cols, kFloor);
  std::vector<AlignScore> m_prev(cols, kNone), m_cur(cols, kNone);
  std::vector<AlignScore> e_prev(cols, kNone), e_cur(cols, kNone);
  std::vector<AlignScore> f_prev(cols, kNone), f_cur(cols, kNone);
  AlignScore best = kFloor;

  for (std::size_t i = 1; i <= u.size(); ++i) {
    h_cur[0] = kFloor;
    m_cur[0] = e_cur[0] = f_cur[0] = kNone;
    for (std::size_t j = 1; j < cols; ++j) {
      e_cur[j] = std::max(std::max(m_cur[j - 1], f_cur[j - 1]).plus(params.gap_open, 0),
                          e_cur[j - 1].plus(params.gap_extend, 0));
      f_cur[j] = std::max(std::max(m_prev[j], e_prev[j]).plus(params.gap_open, 0),
                          f_prev[j].plus(params.gap_extend, 0));
      const bool same = u[i - 1] == v[j - 1];
      m_cur[j] = h_prev[j - 1].plus(same ? params.match : params.mismatch, same ? 1 : 0);
      h_cur[j] = std::max({kFloor, m_cur[j], e_cur[j], f_cur[j]});
      best = std::max(best, h_cur[j]);
    }
    std::swap(h_prev, h_cur);
    std::swap(m_prev, m_cur);
    std::swap(e_prev, e_cur);
    std::swap(f_prev, f_cur);
  }
  return static_cast<std::size_t>(best.matches);
}

template <class T>
std::size_t smith_waterman(const std::vector<T>& u, const std::vector<T>& v, const AlignmentParams& params) {
  return smith_waterman(std::span<const T>(u), std::span<const T>(v), params);
}

/// Best normalized match count of v against any pattern, in [0, 1]; 0 for an
/// empty pattern set. Throws InputError for empty v.
double similarity(const PatternSet& patterns, std::span<const CellToken> v, const AlignmentParams& params);

enum class Verdict { normal, anomalous };

struct StepResult {
  double score = 0.0;    ///< s_i
  double anomaly = 0.0;  ///< a_i
  Verdict verdict = Verdict::normal;
};

/// Online scorer of one ongoing sequence against a pattern-set snapshot.
/// Single writer; the snapshot is shared read-only.
class Detector {
 public:
  Detector(std::shared_ptr<const PatternSet> patterns, double theta, AlignmentParams params = {});

  /// Appends a token (must differ from the previous one) and rescores.
  StepResult step(CellToken token);
  void reset();

  const std::vector<CellToken>& ongoing() const { return ongoing_; }
  const std::vector<double>& scores() const { return scores_; }
  double anomaly() const { return anomaly_; }
  bool latched() const { return latched_; }
  const PatternSet& patterns() const { return *patterns_; }

 private:
  std::shared_ptr<const PatternSet> patterns_;
  double theta_;
  AlignmentParams params_;
  std::vector<CellToken> ongoing_;
  std::vector<double> scores_;
  double anomaly_ = 0.0;
  bool latched_ = false;
};

/// Anomaly score after each step: one minus the running minimum of scores.
std::vector<double> anomaly_scores(std::span<const double> scores);

struct AlignmentCost {
  std::size_t bound = 0;  ///< |D| * |V|^2
  std::size_t exact = 0;  ///< sum over patterns of |U| * |V|
};

/// Work of one similarity evaluation of a sequence of length v_length.
AlignmentCost complexity_guard(const PatternSet& patterns, std::size_t v_length);

}  // namespace wander
