#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cascade/autograd.h"
#include "cascade/errors.h"
#include "cascade/grad_check.h"
#include "cascade/gradient_probes.h"
#include "cascade/layers.h"
#include "oracle/reference.h"

namespace cascade {
namespace {

Matrix RowVec(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

TEST(Autograd, MatMulGradient) {
  Tape tape;
  ParameterStore store;
  std::mt19937_64 rng(1);
  Parameter* a = store.Add("a", 2, 3, Init::kXavierUniform, ParamGroup::kDecoder, true, rng);
  Matrix b = oracle::RandomMatrix(3, 2, rng);
  store.ZeroGrad();
  Var y = Sum(MatMul(tape.Param(*a), tape.Constant(b)));
  tape.Backward(y);
  // d/dA sum(A B) = 1 * B^T
  Matrix want = Matrix::Ones(2, 2) * b.transpose();
  EXPECT_LT(oracle::MaxAbsDiff(a->grad, want), 1e-12);
}

TEST(Autograd, ShapeMismatchThrows) {
  Tape tape;
  Var a = tape.Constant(Matrix::Zero(2, 3));
  Var b = tape.Constant(Matrix::Zero(2, 3));
  EXPECT_THROW(MatMul(a, b), ShapeError);
  EXPECT_THROW(Add(a, tape.Constant(Matrix::Zero(3, 2))), ShapeError);
}

TEST(Autograd, NonRecordingTapeStillComputesValues) {
  Tape tape(/*record=*/false);
  Var x = tape.Constant(RowVec({0.0, 2.0}));
  EXPECT_DOUBLE_EQ(Sigmoid(x).value()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(Sum(x).scalar(), 2.0);
}

TEST(Autograd, BinaryCrossEntropyClampsAndSums) {
  Tape tape;
  Matrix p = RowVec({0.5, 0.0, 1.0});
  Matrix y = RowVec({1.0, 0.0, 1.0});
  const double got = BinaryCrossEntropy(tape.Constant(p), y, 1e-7).scalar();
  EXPECT_NEAR(got, oracle::BernoulliNll(p, y, 1e-7), 1e-12);
  EXPECT_NEAR(got, std::log(2.0) - 2.0 * std::log(1.0 - 1e-7), 1e-12);
}

class ClnTest : public ::testing::Test {
 protected:
  ClnTest() : rng_(5), cln_(store_, "cln", 2, 2, ParamGroup::kDecoder, rng_) {}
  void Set(const Matrix& gw, const Matrix& gb, const Matrix& sw, const Matrix& sb) {
    cln_.gain_weight()->value = gw;
    cln_.gain_bias()->value = gb;
    cln_.shift_weight()->value = sw;
    cln_.shift_bias()->value = sb;
  }
  ParameterStore store_;
  std::mt19937_64 rng_;
  ConditionalLayerNorm cln_;
};

TEST_F(ClnTest, HandExample) {
  // gain (2, 2) and shift (1, 1) come from the biases alone.
  Set(Matrix::Zero(2, 2), RowVec({2, 2}), Matrix::Zero(2, 2), RowVec({1, 1}));
  Tape tape;
  Var out = cln_.Forward(tape.Constant(RowVec({0.3, -0.7})), tape.Constant(RowVec({1, 3})));
  EXPECT_NEAR(out.value()(0, 0), -1.0, 1e-9);
  EXPECT_NEAR(out.value()(0, 1), 3.0, 1e-9);
}

TEST_F(ClnTest, ConstantStatesGiveTheShift) {
  Set(oracle::RandomMatrix(2, 2, rng_), RowVec({1, 1}), oracle::RandomMatrix(2, 2, rng_),
      RowVec({0.5, -0.25}));
  Tape tape;
  const Matrix c = RowVec({0.4, 1.1});
  Var out = cln_.Forward(tape.Constant(c), tape.Constant(RowVec({7, 7})));
  const Matrix shift = oracle::Affine(c, cln_.shift_weight()->value, cln_.shift_bias()->value);
  EXPECT_TRUE(std::isfinite(out.value()(0, 0)));
  EXPECT_LT(oracle::MaxAbsDiff(out.value(), shift), 1e-12);
}

TEST_F(ClnTest, MatchesOracleAtRandomParameters) {
  Set(oracle::RandomMatrix(2, 2, rng_), oracle::RandomMatrix(1, 2, rng_),
      oracle::RandomMatrix(2, 2, rng_), oracle::RandomMatrix(1, 2, rng_));
  Tape tape;
  const Matrix c = oracle::RandomMatrix(1, 2, rng_);
  const Matrix h = oracle::RandomMatrix(4, 2, rng_);
  Var out = cln_.Forward(tape.Constant(c), tape.Constant(h));
  const Matrix want = oracle::Cln(c, h, cln_.gain_weight()->value, cln_.gain_bias()->value,
                                  cln_.shift_weight()->value, cln_.shift_bias()->value,
                                  kNormEpsilon);
  EXPECT_LT(oracle::MaxAbsDiff(out.value(), want), 1e-9);
}

TEST(Cln, DegeneratesToLayerNorm) {
  ParameterStore store;
  std::mt19937_64 rng(9);
  ConditionalLayerNorm cln(store, "cln", 6, 6, ParamGroup::kDecoder, rng);
  cln.gain_weight()->value.setZero();
  cln.gain_bias()->value.setOnes();
  cln.shift_weight()->value.setZero();
  cln.shift_bias()->value.setZero();
  for (int trial = 0; trial < 20; ++trial) {
    Tape tape;
    const Matrix c = oracle::RandomMatrix(1, 6, rng, 3.0);
    const Matrix h = oracle::RandomMatrix(5, 6, rng, 2.0);
    Var out = cln.Forward(tape.Constant(c), tape.Constant(h));
    const Matrix want = oracle::LayerNorm(h, std::vector<double>(6, 1.0),
                                          std::vector<double>(6, 0.0), kNormEpsilon);
    EXPECT_LT(oracle::MaxAbsDiff(out.value(), want), 1e-9);
  }
}

TEST(Fusion, AddWithZeroConditionIsIdentity) {
  ParameterStore store;
  std::mt19937_64 rng(2);
  Fusion f(store, "f", FusionMode::kAdd, 3, 3, ParamGroup::kDecoder, rng);
  Tape tape;
  const Matrix h = oracle::RandomMatrix(4, 3, rng);
  Var out = f.Forward(tape.Constant(Matrix::Zero(1, 3)), tape.Constant(h));
  EXPECT_EQ(out.value(), h);
}

TEST(Fusion, ConcatDoublesWidth) {
  ParameterStore store;
  std::mt19937_64 rng(2);
  Fusion f(store, "f", FusionMode::kConcat, 2, 2, ParamGroup::kDecoder, rng);
  EXPECT_EQ(f.output_dim(), 4);
  Tape tape;
  Var out = f.Forward(tape.Constant(RowVec({5, 6})), tape.Constant(oracle::RandomMatrix(3, 2, rng)));
  EXPECT_EQ(out.cols(), 4);
  EXPECT_EQ(out.value()(2, 3), 6.0);
}

TEST(Fusion, ZeroGateAveragesStateAndCondition) {
  ParameterStore store;
  std::mt19937_64 rng(2);
  Fusion f(store, "f", FusionMode::kGate, 3, 3, ParamGroup::kDecoder, rng);
  f.gate().weight()->value.setZero();
  f.gate().bias()->value.setZero();
  Tape tape;
  const Matrix c = RowVec({1, -2, 3});
  const Matrix h = oracle::RandomMatrix(2, 3, rng);
  Var out = f.Forward(tape.Constant(c), tape.Constant(h));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(out.value()(i, j), 0.5 * h(i, j) + 0.5 * c(0, j), 1e-15);
  }
}

TEST(Fusion, GateStaysBetweenStateAndCondition) {
  ParameterStore store;
  std::mt19937_64 rng(4);
  Fusion f(store, "f", FusionMode::kGate, 4, 4, ParamGroup::kDecoder, rng);
  Tape tape;
  const Matrix c = oracle::RandomMatrix(1, 4, rng);
  const Matrix h = oracle::RandomMatrix(5, 4, rng);
  Var out = f.Forward(tape.Constant(c), tape.Constant(h));
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_GE(out.value()(i, j), std::min(h(i, j), c(0, j)) - 1e-12);
      EXPECT_LE(out.value()(i, j), std::max(h(i, j), c(0, j)) + 1e-12);
    }
  }
}

TEST(Fusion, ModeNamesRoundTrip) {
  for (auto m : {FusionMode::kCln, FusionMode::kConcat, FusionMode::kAdd, FusionMode::kGate}) {
    EXPECT_EQ(ParseFusionMode(FusionModeName(m)), m);
  }
  EXPECT_THROW(ParseFusionMode("sum"), ConfigError);
}

Matrix OracleAttention(const SelfAttentionBlock& b, const Matrix& x) {
  return oracle::Attention(x, b.query().weight()->value, b.query().bias()->value,
                           b.key().weight()->value, b.value().weight()->value,
                           b.value().bias()->value, b.output().weight()->value,
                           b.output().bias()->value, b.heads(), kNormEpsilon);
}

void Randomize(const SelfAttentionBlock& b, std::mt19937_64& rng) {
  for (const Linear* l : {&b.query(), &b.key(), &b.value(), &b.output()}) {
    l->weight()->value = oracle::RandomMatrix(l->in_dim(), l->out_dim(), rng, 0.5);
    if (l->bias() != nullptr) l->bias()->value = oracle::RandomMatrix(1, l->out_dim(), rng, 0.5);
  }
}

TEST(SelfAttention, SingleToken) {
  ParameterStore store;
  std::mt19937_64 rng(8);
  SelfAttentionBlock b(store, "att", 4, 2, false, 8, ParamGroup::kDecoder, rng);
  Randomize(b, rng);
  const Matrix x = oracle::RandomMatrix(1, 4, rng);
  Tape tape;
  Var y = b.Forward(tape.Constant(x));
  // Weight 1 on the only token: LN(x + (x Wv + bv) Wo + bo).
  const Matrix v = oracle::Affine(x, b.value().weight()->value, b.value().bias()->value);
  const Matrix o = oracle::Affine(v, b.output().weight()->value, b.output().bias()->value);
  const Matrix want = oracle::LayerNorm(x + o, std::vector<double>(4, 1.0),
                                        std::vector<double>(4, 0.0), kNormEpsilon);
  EXPECT_LT(oracle::MaxAbsDiff(y.value(), want), 1e-12);
}

TEST(SelfAttention, PermutationEquivariant) {
  ParameterStore store;
  std::mt19937_64 rng(8);
  SelfAttentionBlock b(store, "att", 8, 2, true, 16, ParamGroup::kDecoder, rng);
  const Matrix x = oracle::RandomMatrix(5, 8, rng);
  const std::vector<int> perm = {3, 0, 4, 1, 2};
  Matrix px(5, 8);
  for (int i = 0; i < 5; ++i) px.row(i) = x.row(perm[static_cast<size_t>(i)]);
  Tape tape;
  const Matrix y = b.Forward(tape.Constant(x)).value();
  const Matrix py = b.Forward(tape.Constant(px)).value();
  for (int i = 0; i < 5; ++i) {
    EXPECT_LT((py.row(i) - y.row(perm[static_cast<size_t>(i)])).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SelfAttention, MatchesBruteForce) {
  for (int heads : {1, 2}) {
    ParameterStore store;
    std::mt19937_64 rng(10 + heads);
    SelfAttentionBlock b(store, "att", 4, heads, false, 8, ParamGroup::kDecoder, rng);
    Randomize(b, rng);
    const Matrix x = oracle::RandomMatrix(6, 4, rng);
    Tape tape;
    Var y = b.Forward(tape.Constant(x));
    EXPECT_LT(oracle::MaxAbsDiff(y.value(), OracleAttention(b, x)), 1e-9) << heads;
  }
}

TEST(SelfAttention, RejectsIndivisibleHeads) {
  ParameterStore store;
  std::mt19937_64 rng(1);
  EXPECT_THROW(SelfAttentionBlock(store, "att", 6, 4, false, 8, ParamGroup::kDecoder, rng),
               ShapeError);
}

TEST(GradCheck, ClnProbeAtSmallStep) {
  for (auto& probe : StandardGradProbes(3)) {
    if (probe.name != "cln") continue;
    GradCheckOptions opts;
    opts.eps = 1e-5;
    const auto r = GradCheck(probe.params, probe.loss, opts);
    EXPECT_LE(r.max_relative_error, 1e-4) << r.worst_parameter;
    EXPECT_GT(r.entries_checked, 0);
  }
}

TEST(GradCheck, NoParametersGivesZero) {
  const auto r = GradCheck({}, [](Tape& t) { return t.Constant(Matrix::Ones(1, 1)); });
  EXPECT_EQ(r.max_relative_error, 0.0);
  EXPECT_EQ(r.entries_checked, 0);
}

TEST(GradCheck, CorruptedGradientIsCaught) {
  auto probes = StandardGradProbes(3);
  GradCheckOptions opts;
  opts.corrupt_index = 0;
  const auto r = GradCheck(probes.front().params, probes.front().loss, opts);
  EXPECT_GT(r.max_relative_error, 0.1);
}

TEST(GradCheck, EveryStandardProbePasses) {
  for (auto& probe : StandardGradProbes(1)) {
    const auto r = GradCheck(probe.params, probe.loss);
    EXPECT_LE(r.max_relative_error, 1e-4) << probe.name << " " << r.worst_parameter;
  }
}

}  // namespace
}  // namespace cascade
