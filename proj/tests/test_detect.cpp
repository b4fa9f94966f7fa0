#include <doctest.h>

#include <algorithm>

#include "gen.hpp"
#include "oracles.hpp"
#include "wander/detect.hpp"

using namespace wander;

namespace {

using Word = std::vector<std::uint64_t>;

double half_steps(testgen::Gen& g, int lo, int hi) { return 0.5 * g.integer(lo, hi); }

std::vector<CellToken> tokens(std::initializer_list<std::uint64_t> codes) {
  std::vector<CellToken> out;
  for (auto c : codes) out.push_back({18, c});
  return out;
}

std::shared_ptr<const PatternSet> patterns_of(std::vector<std::vector<CellToken>> seqs) {
  auto set = std::make_shared<PatternSet>();
  set->precision = 18;
  for (auto& s : seqs) set->patterns.push_back({1, std::move(s)});
  return set;
}

}  // namespace

TEST_CASE("smith-waterman matches exhaustive local alignment") {
  testgen::Gen g(77);
  for (int i = 0; i < 600; ++i) {
    const Word u = g.word(7, g.integer(1, 4));
    const Word v = g.word(7, g.integer(1, 4));
    AlignmentParams p;
    if (i % 3 != 0) {
      p.match = half_steps(g, 1, 4);
      p.mismatch = half_steps(g, -4, 0);
      p.gap_open = half_steps(g, -4, 0);
      p.gap_extend = half_steps(g, -4, 0);
    }
    REQUIRE(smith_waterman(u, v, p) == oracle::Alignment(u, v, p).matches());
    REQUIRE(smith_waterman(v, u, p) == smith_waterman(u, v, p));
  }
}

TEST_CASE("alignment examples") {
  const AlignmentParams p;
  const Word abcd{1, 2, 3, 4}, abxd{1, 2, 9, 4};
  CHECK(smith_waterman(abcd, abxd, p) == 3);
  CHECK(smith_waterman(abcd, abcd, p) == 4);
  CHECK(smith_waterman(abcd, Word{7, 8}, p) == 0);
  CHECK_THROWS_AS(smith_waterman(abcd, Word{}, p), InputError);

  const auto set = patterns_of({tokens({1, 2, 3, 4})});
  CHECK(similarity(*set, tokens({1, 2, 9, 4}), p) == doctest::Approx(0.75));
  CHECK(similarity(PatternSet{}, tokens({1}), p) == 0.0);
}

TEST_CASE("parameter validation") {
  AlignmentParams p;
  p.match = 0.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = {};
  p.gap_open = 0.5;
  CHECK_THROWS_AS(p.validate(), InputError);
  CHECK_THROWS_AS(Detector(patterns_of({}), 0.0), InputError);
  CHECK_THROWS_AS(Detector(patterns_of({}), 1.5), InputError);
  CHECK_THROWS_AS(Detector(nullptr, 0.4), InputError);
}

TEST_CASE("anomaly score is one minus the running minimum") {
  const std::vector<double> s{1.0, 0.8, 0.9};
  const auto a = anomaly_scores(s);
  CHECK(a[0] == doctest::Approx(0.0));
  CHECK(a[1] == doctest::Approx(0.2));
  CHECK(a[2] == doctest::Approx(0.2));
}

TEST_CASE("detector") {
  const auto set = patterns_of({tokens({1, 2, 3, 4, 5}), tokens({1, 6, 7})});

  SUBCASE("prefixes of a pattern score one") {
    Detector d(set, 0.4);
    for (std::uint64_t c : {1, 2, 3, 4, 5}) {
      const StepResult r = d.step({18, c});
      CHECK(r.score == 1.0);
      CHECK(r.verdict == Verdict::normal);
    }
  }
  SUBCASE("divergence latches") {
    Detector d(set, 0.4);
    std::vector<Verdict> v;
    for (std::uint64_t c : {1, 2, 8, 9, 10, 3}) v.push_back(d.step({18, c}).verdict);
    CHECK(v[1] == Verdict::normal);
    CHECK(v[4] == Verdict::anomalous);
    CHECK(v[5] == Verdict::anomalous);
    CHECK(d.latched());
    d.reset();
    CHECK_FALSE(d.latched());
    CHECK(d.ongoing().empty());
  }
  SUBCASE("empty pattern set flags everything") {
    Detector d(std::make_shared<PatternSet>(), 0.4);
    CHECK(d.step({18, 1}).verdict == Verdict::anomalous);
  }
  SUBCASE("repeated token rejected") {
    Detector d(set, 0.4);
    d.step({18, 1});
    CHECK_THROWS_AS(d.step({18, 1}), InputError);
  }
}

TEST_CASE("anomaly is monotone on random replays") {
  testgen::Gen g(19);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::vector<CellToken>> seqs;
    for (int k = g.integer(0, 5); k > 0; --k) {
      std::vector<CellToken> s;
      for (auto c : g.word(10, 6)) s.push_back({18, c});
      seqs.push_back(s);
    }
    Detector d(patterns_of(seqs), g.real(0.05, 1.0));
    double prev = 0.0;
    bool latched = false;
    std::uint64_t last = 99;
    for (int k = 0; k < 15; ++k) {
      std::uint64_t c = static_cast<std::uint64_t>(g.integer(0, 6));
      if (c == last) c = 7;
      last = c;
      const StepResult r = d.step({18, c});
      CHECK(r.anomaly >= prev);
      CHECK(r.score >= 0.0);
      CHECK(r.score <= 1.0);
      if (latched) CHECK(r.verdict == Verdict::anomalous);
      latched = r.verdict == Verdict::anomalous;
      prev = r.anomaly;
    }
    CHECK(anomaly_scores(d.scores()).back() == doctest::Approx(d.anomaly()));
  }
}

TEST_CASE("alignment work bound") {
  const auto set = patterns_of({tokens({1, 2, 3, 4, 5}), tokens({1, 6, 7})});
  const AlignmentCost c = complexity_guard(*set, 10);
  CHECK(c.bound == 200);
  CHECK(c.exact == 80);
  PatternSet big;
  for (int k = 0; k < 5; ++k) big.patterns.push_back({1, tokens({1, 2, 3})});
  CHECK(complexity_guard(big, 10).bound == 500);
  CHECK(complexity_guard(big, 20).bound > complexity_guard(big, 10).bound);
}
