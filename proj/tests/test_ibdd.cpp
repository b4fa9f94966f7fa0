#include <doctest.h>

#include "gen.hpp"
#include "wander/ibdd.hpp"

using namespace wander;

namespace {

std::vector<CellToken> tokens(const std::vector<std::uint64_t>& codes) {
  std::vector<CellToken> out;
  for (auto c : codes) out.push_back({18, c});
  return out;
}

std::shared_ptr<const SupportSet> support_of(std::vector<std::vector<CellToken>> seqs, double theta_prime,
                                             SupportRule rule = SupportRule::contiguous) {
  auto s = std::make_shared<SupportSet>();
  s->sequences = std::move(seqs);
  s->theta_prime = theta_prime;
  s->rule = rule;
  return s;
}

}  // namespace

TEST_CASE("support rules") {
  const auto h = tokens({1, 2, 3, 4});
  CHECK(supports(h, tokens({2, 3})));
  CHECK_FALSE(supports(h, tokens({2, 4})));
  CHECK(supports(h, tokens({2, 4}), SupportRule::subsequence));
  CHECK_FALSE(supports(h, tokens({4, 2}), SupportRule::subsequence));
  CHECK(supports(h, h));
  CHECK_FALSE(supports(h, tokens({1, 2, 3, 4, 5})));
  CHECK_THROWS_AS(supports(h, {}), InputError);
}

TEST_CASE("support fraction below theta prime") {
  std::vector<std::vector<CellToken>> seqs(19, tokens({5, 6, 7}));
  seqs.push_back(tokens({1, 2, 3}));
  IbddDetector d(support_of(seqs, 0.1));
  const StepResult r = d.step({18, 1});
  CHECK(r.score == doctest::Approx(0.05));
  CHECK(r.verdict == Verdict::anomalous);

  IbddDetector common(support_of(seqs, 0.1));
  CHECK(common.step({18, 5}).verdict == Verdict::normal);
  CHECK(common.supporting() == 19);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(IbddDetector(support_of({}, 0.1)), InputError);
  CHECK_THROWS_AS(IbddDetector(support_of({tokens({1})}, 0.0)), InputError);
  CHECK_THROWS_AS(IbddDetector(nullptr), InputError);
}

TEST_CASE("incremental support equals brute-force recount") {
  testgen::Gen g(8);
  for (int i = 0; i < 600; ++i) {
    const SupportRule rule = g.coin() ? SupportRule::contiguous : SupportRule::subsequence;
    std::vector<std::vector<CellToken>> seqs;
    for (int k = g.integer(1, 8); k > 0; --k) seqs.push_back(tokens(g.word(12, 3)));
    const double tp = g.real(0.01, 1.0);
    IbddDetector d(support_of(seqs, tp, rule));
    std::vector<CellToken> ongoing;
    double prev = 0.0;
    bool latched = false;
    for (int k = g.integer(1, 10); k > 0; --k) {
      ongoing.push_back({18, static_cast<std::uint64_t>(g.integer(0, 2))});
      const StepResult r = d.step(ongoing.back());
      std::size_t n = 0;
      for (const auto& h : seqs) n += supports(h, ongoing, rule) ? 1 : 0;
      REQUIRE(d.supporting() == n);
      CHECK(r.score == doctest::Approx(static_cast<double>(n) / seqs.size()));
      CHECK(r.anomaly >= prev);
      latched = latched || r.score < tp;
      CHECK((r.verdict == Verdict::anomalous) == latched);
      prev = r.anomaly;
    }
  }
}

TEST_CASE("lower theta prime flags less") {
  testgen::Gen g(9);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::vector<CellToken>> seqs;
    for (int k = g.integer(1, 8); k > 0; --k) seqs.push_back(tokens(g.word(8, 3)));
    const auto ongoing = tokens(g.word(6, 3));
    const auto verdict = [&](double tp) {
      IbddDetector d(support_of(seqs, tp));
      Verdict v = Verdict::normal;
      for (const auto& t : ongoing) v = d.step(t).verdict;
      return v;
    };
    if (verdict(0.1) == Verdict::anomalous) CHECK(verdict(0.2) == Verdict::anomalous);
  }
}
