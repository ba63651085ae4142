#include "cascade/evaluation.h"

#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "cascade/errors.h"
#include "oracle/reference.h"

namespace cascade {
namespace {

AnnotatedSentence S(std::string id, std::vector<EventRecord> events) {
  AnnotatedSentence s;
  s.id = std::move(id);
  s.tokens.assign(8, "w");
  s.events = std::move(events);
  return s;
}

AnnotatedSentence RandomSentence(const std::string& id, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pos(0, 5), count(0, 3), roles(0, 2), pick(0, 1);
  auto span = [&] {
    const int a = pos(rng);
    return Span{a, a + pick(rng)};
  };
  AnnotatedSentence s = S(id, {});
  const int events = count(rng);
  for (int e = 0; e < events; ++e) {
    EventRecord ev{pick(rng) ? "A" : "B", span(), {}};
    const int n = roles(rng);
    for (int r = 0; r < n; ++r) ev.arguments.push_back({pick(rng) ? "x" : "y", span()});
    s.events.push_back(ev);
  }
  return s;
}

TEST(Score, PerfectPredictionsScoreOne) {
  const std::vector<AnnotatedSentence> gold = {
      S("a", {{"A", {1, 1}, {{"x", {0, 0}}, {"y", {3, 4}}}}}),
      S("b", {{"A", {2, 2}, {{"x", {0, 1}}}}, {"B", {2, 2}, {{"x", {0, 1}}}}})};
  const auto r = Score(gold, gold);
  for (Metric m : kAllMetrics) {
    EXPECT_EQ(r.prf(Group::kAll, m).precision, 1.0);
    EXPECT_EQ(r.prf(Group::kAll, m).recall, 1.0);
    EXPECT_EQ(r.prf(Group::kAll, m).f1, 1.0);
  }
}

TEST(Score, HalfRightTypedTriggers) {
  const std::vector<AnnotatedSentence> gold = {S("a", {{"A", {1, 1}, {}}, {"B", {4, 4}, {}}})};
  const std::vector<AnnotatedSentence> pred = {S("a", {{"A", {1, 1}, {}}, {"A", {6, 6}, {}}})};
  const Prf tc = Score(pred, gold).prf(Group::kAll, Metric::kTC);
  EXPECT_DOUBLE_EQ(tc.precision, 0.5);
  EXPECT_DOUBLE_EQ(tc.recall, 0.5);
  EXPECT_DOUBLE_EQ(tc.f1, 0.5);
}

TEST(Score, EmptyPredictionsScoreZero) {
  const std::vector<AnnotatedSentence> gold = {S("a", {{"A", {1, 1}, {{"x", {0, 0}}}}})};
  const std::vector<AnnotatedSentence> pred = {S("a", {})};
  for (Metric m : kAllMetrics) {
    const Prf p = Score(pred, gold).prf(Group::kAll, m);
    EXPECT_EQ(p.precision, 0.0);
    EXPECT_EQ(p.recall, 0.0);
    EXPECT_EQ(p.f1, 0.0);
  }
  EXPECT_EQ(MakePrf(0.0, 0.0).f1, 0.0);
}

TEST(Score, ArgumentsNeedTheRightTypeOnly) {
  const std::vector<AnnotatedSentence> gold = {S("a", {{"A", {1, 1}, {{"x", {3, 3}}}}})};
  const std::vector<AnnotatedSentence> shifted = {S("a", {{"A", {2, 2}, {{"x", {3, 3}}}}})};
  const std::vector<AnnotatedSentence> retyped = {S("a", {{"B", {1, 1}, {{"x", {3, 3}}}}})};
  EXPECT_EQ(Score(shifted, gold).prf(Group::kAll, Metric::kAC).f1, 1.0);
  EXPECT_EQ(Score(retyped, gold).prf(Group::kAll, Metric::kAI).f1, 0.0);
  ScoreOptions strict;
  strict.trigger_conditioned_arguments = true;
  EXPECT_EQ(Score(shifted, gold, strict).prf(Group::kAll, Metric::kAC).f1, 0.0);
}

TEST(Score, MismatchedIdsThrow) {
  const std::vector<AnnotatedSentence> gold = {S("a", {})};
  const std::vector<AnnotatedSentence> pred = {S("b", {})};
  EXPECT_THROW(Score(pred, gold), ArgumentError);
  EXPECT_THROW(Score({}, gold), ArgumentError);
}

TEST(Score, MatchesHandCountsOnRandomPairs) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<AnnotatedSentence> pred, gold;
    for (int i = 0; i < 4; ++i) {
      const std::string id = "s" + std::to_string(i);
      gold.push_back(RandomSentence(id, rng));
      pred.push_back(rng() % 3 == 0 ? gold.back() : RandomSentence(id, rng));
    }
    for (bool strict : {false, true}) {
      ScoreOptions o;
      o.trigger_conditioned_arguments = strict;
      const EvaluationReport r = Score(pred, gold, o);
      for (int m = 0; m < 4; ++m) {
        oracle::Tally all, ov, nm;
        for (size_t i = 0; i < gold.size(); ++i) {
          const auto t = oracle::CountPair(pred[i], gold[i], m, strict);
          oracle::Tally& g = oracle::HasOverlap(gold[i]) ? ov : nm;
          for (oracle::Tally* x : {&all, &g}) {
            x->matched += t.matched;
            x->predicted += t.predicted;
            x->gold += t.gold;
          }
        }
        const Metric metric = static_cast<Metric>(m);
        const Counts& c = r.counts(Group::kAll)[metric];
        EXPECT_EQ(c.matched, all.matched);
        EXPECT_EQ(c.predicted, all.predicted);
        EXPECT_EQ(c.gold, all.gold);
        EXPECT_EQ(r.counts(Group::kOverlap)[metric].matched, ov.matched);
        EXPECT_EQ(r.counts(Group::kNormal)[metric].gold, nm.gold);
        Counts sum = r.counts(Group::kOverlap)[metric];
        sum += r.counts(Group::kNormal)[metric];
        EXPECT_EQ(sum, c);
        const double p = oracle::Ratio(all.matched, all.predicted);
        const double rc = oracle::Ratio(all.matched, all.gold);
        EXPECT_EQ(r.prf(Group::kAll, metric).precision, p);
        EXPECT_EQ(r.prf(Group::kAll, metric).recall, rc);
        EXPECT_EQ(r.prf(Group::kAll, metric).f1, oracle::F1(p, rc));
      }
    }
  }
}

TEST(Score, EventOrderDoesNotMatter) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<AnnotatedSentence> gold = {RandomSentence("a", rng)};
    std::vector<AnnotatedSentence> pred = {RandomSentence("a", rng)};
    const auto before = Score(pred, gold);
    std::reverse(pred[0].events.begin(), pred[0].events.end());
    std::shuffle(gold[0].events.begin(), gold[0].events.end(), rng);
    const auto after = Score(pred, gold);
    for (Group g : {Group::kAll, Group::kOverlap, Group::kNormal}) EXPECT_EQ(before.counts(g), after.counts(g));
  }
}

TEST(MacroTypeScores, PerfectSingleType) {
  const std::vector<std::set<std::string>> g = {{"A"}, {}, {"A"}};
  const Prf p = MacroTypeScores(g, g);
  EXPECT_EQ(p.precision, 1.0);
  EXPECT_EQ(p.recall, 1.0);
  EXPECT_EQ(p.f1, 1.0);
}

TEST(MacroTypeScores, NeverPredictedTypePullsMeanDown) {
  const std::vector<std::set<std::string>> gold = {{"A"}, {"B"}};
  const std::vector<std::set<std::string>> pred = {{"A"}, {}};
  const Prf p = MacroTypeScores(pred, gold);
  EXPECT_DOUBLE_EQ(p.precision, 0.5);
  EXPECT_DOUBLE_EQ(p.recall, 0.5);
  EXPECT_DOUBLE_EQ(p.f1, 0.5);
}

TEST(MacroTypeScores, HandCountedConfusion) {
  // A: tp 1, fp 2, fn 1 -> (1/3, 1/2, 0.4). B: tp 2 -> (1, 1, 1).
  const std::vector<std::set<std::string>> gold = {{"A"}, {"A", "B"}, {"B"}, {}};
  const std::vector<std::set<std::string>> pred = {{"A"}, {"B"}, {"A", "B"}, {"A"}};
  const Prf p = MacroTypeScores(pred, gold);
  EXPECT_NEAR(p.precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.recall, 0.75, 1e-15);
  EXPECT_NEAR(p.f1, 0.7, 1e-15);
  const auto [op, orc, of] = oracle::MacroTypes(pred, gold);
  EXPECT_EQ(p.precision, op);
  EXPECT_EQ(p.recall, orc);
  EXPECT_EQ(p.f1, of);
}

TEST(Report, JsonAndTableCarryEveryGroup) {
  const std::vector<AnnotatedSentence> gold = {S("a", {{"A", {1, 1}, {}}})};
  const auto r = Score(gold, gold);
  const auto j = ReportToJson(r);
  for (const char* g : {"all", "overlap", "normal"}) EXPECT_TRUE(j.contains(g)) << g;
  std::ostringstream out;
  PrintReportTable(r, out);
  for (const char* m : {"TI", "TC", "AI", "AC"}) EXPECT_NE(out.str().find(m), std::string::npos);
}

}  // namespace
}  // namespace cascade
