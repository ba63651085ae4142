#include "cascade/trigger_extractor.h"

#include <random>

#include <gtest/gtest.h>

#include "cascade/span_decoder.h"
#include "oracle/reference.h"

namespace cascade {
namespace {

ExtractorOptions Options(FusionMode fusion, bool attention = true) {
  ExtractorOptions o;
  o.fusion = fusion;
  o.self_attention = attention;
  o.heads = 2;
  return o;
}

Matrix OracleCondition(const TriggerExtractor& te, const Matrix& h, const Matrix& c) {
  const auto& cln = te.fusion().cln();
  const Matrix g = oracle::Cln(c, h, cln.gain_weight()->value, cln.gain_bias()->value,
                               cln.shift_weight()->value, cln.shift_bias()->value, kNormEpsilon);
  const auto& a = *te.attention();
  return oracle::Attention(g, a.query().weight()->value, a.query().bias()->value,
                           a.key().weight()->value, a.value().weight()->value,
                           a.value().bias()->value, a.output().weight()->value,
                           a.output().bias()->value, a.heads(), kNormEpsilon);
}

TEST(TriggerExtractor, AddFusionWithZeroTypeKeepsStates) {
  ParameterStore store;
  std::mt19937_64 rng(1);
  TriggerExtractor te(store, 4, 4, Options(FusionMode::kAdd), rng);
  Tape tape;
  const Matrix h = oracle::RandomMatrix(3, 4, rng);
  auto c = te.ConditionOnType(tape.Constant(h), tape.Constant(Matrix::Zero(1, 4)));
  EXPECT_EQ(c.fused.value(), h);
}

TEST(TriggerExtractor, DistinctTypesGiveDistinctStates) {
  ParameterStore store;
  std::mt19937_64 rng(1);
  TriggerExtractor te(store, 4, 4, Options(FusionMode::kCln), rng);
  Tape tape;
  Var h = tape.Constant(oracle::RandomMatrix(3, 4, rng));
  const Matrix z1 = te.ConditionOnType(h, tape.Constant(oracle::RandomMatrix(1, 4, rng))).refined.value();
  const Matrix z2 = te.ConditionOnType(h, tape.Constant(oracle::RandomMatrix(1, 4, rng))).refined.value();
  EXPECT_GT(oracle::MaxAbsDiff(z1, z2), 1e-6);
}

TEST(TriggerExtractor, ConditionMatchesComposedOracle) {
  ParameterStore store;
  std::mt19937_64 rng(2);
  TriggerExtractor te(store, 4, 4, Options(FusionMode::kCln), rng);
  Tape tape;
  const Matrix h = oracle::RandomMatrix(3, 4, rng);
  const Matrix c = oracle::RandomMatrix(1, 4, rng);
  auto out = te.ConditionOnType(tape.Constant(h), tape.Constant(c));
  EXPECT_LT(oracle::MaxAbsDiff(out.refined.value(), OracleCondition(te, h, c)), 1e-9);
}

TEST(TriggerExtractor, ZeroHeadsGiveHalfAndNoSpans) {
  ParameterStore store;
  std::mt19937_64 rng(3);
  TriggerExtractor te(store, 4, 4, Options(FusionMode::kCln), rng);
  for (const Linear* l : {&te.start_head(), &te.end_head()}) {
    l->weight()->value.setZero();
    l->bias()->value.setZero();
  }
  Tape tape;
  auto tagged = te.Tag(tape.Constant(oracle::RandomMatrix(5, 4, rng)));
  EXPECT_EQ(tagged.start.value(), Matrix::Constant(5, 1, 0.5));
  EXPECT_EQ(tagged.end.value(), Matrix::Constant(5, 1, 0.5));
  SpanTagging t;
  for (int i = 0; i < 5; ++i) {
    t.start_probs.push_back(tagged.start.value()(i, 0));
    t.end_probs.push_back(tagged.end.value()(i, 0));
  }
  EXPECT_TRUE(AssembleSpans(t).empty());
}

TEST(TriggerExtractor, CraftedHeadsGiveSingleTokenSpan) {
  ParameterStore store;
  std::mt19937_64 rng(3);
  TriggerExtractor te(store, 2, 2, Options(FusionMode::kCln, false), rng);
  // The first feature is large only on token 0.
  for (const Linear* l : {&te.start_head(), &te.end_head()}) {
    l->weight()->value << 10.0, 0.0;
    l->bias()->value << -5.0;
  }
  Tape tape;
  Matrix z(3, 2);
  z << 1, 0, 0, 1, 0, 1;
  auto tagged = te.Tag(tape.Constant(z));
  SpanTagging t;
  for (int i = 0; i < 3; ++i) {
    t.start_probs.push_back(tagged.start.value()(i, 0));
    t.end_probs.push_back(tagged.end.value()(i, 0));
  }
  EXPECT_EQ(AssembleSpans(t), (std::vector<Span>{{0, 0}}));
}

TEST(TriggerExtractor, TagMatchesOracle) {
  ParameterStore store;
  std::mt19937_64 rng(4);
  TriggerExtractor te(store, 4, 4, Options(FusionMode::kCln), rng);
  Tape tape;
  const Matrix z = oracle::RandomMatrix(4, 4, rng);
  auto tagged = te.Tag(tape.Constant(z));
  const Matrix s = oracle::Affine(z, te.start_head().weight()->value, te.start_head().bias()->value);
  const Matrix e = oracle::Affine(z, te.end_head().weight()->value, te.end_head().bias()->value);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(tagged.start.value()(i, 0), oracle::Logistic(s(i, 0)), 1e-12);
    EXPECT_NEAR(tagged.end.value()(i, 0), oracle::Logistic(e(i, 0)), 1e-12);
    EXPECT_GT(tagged.start.value()(i, 0), 0.0);
    EXPECT_LT(tagged.start.value()(i, 0), 1.0);
  }
}

TEST(TriggerExtractor, ConcatWidensTheHeads) {
  ParameterStore store;
  std::mt19937_64 rng(4);
  TriggerExtractor te(store, 4, 4, Options(FusionMode::kConcat), rng);
  EXPECT_EQ(te.fused_dim(), 8);
  Tape tape;
  auto c = te.ConditionOnType(tape.Constant(oracle::RandomMatrix(3, 4, rng)),
                              tape.Constant(oracle::RandomMatrix(1, 4, rng)));
  EXPECT_EQ(c.refined.cols(), 8);
  EXPECT_EQ(te.Tag(c.refined).start.rows(), 3);
}

}  // namespace
}  // namespace cascade
