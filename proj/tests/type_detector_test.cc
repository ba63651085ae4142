#include "cascade/type_detector.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cascade/errors.h"
#include "oracle/reference.h"

namespace cascade {
namespace {

// v . tanh([c; h; |c - h|; c * h] W) with loops.
double OracleDelta(const std::vector<double>& c, const std::vector<double>& h, const Matrix& w,
                   const Matrix& v) {
  std::vector<double> f;
  for (double x : c) f.push_back(x);
  for (double x : h) f.push_back(x);
  for (size_t i = 0; i < c.size(); ++i) f.push_back(std::abs(c[i] - h[i]));
  for (size_t i = 0; i < c.size(); ++i) f.push_back(c[i] * h[i]);
  double out = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    double s = 0.0;
    for (size_t k = 0; k < f.size(); ++k) s += f[k] * w(static_cast<Eigen::Index>(k), j);
    out += std::tanh(s) * v(j, 0);
  }
  return out;
}

// softmax_i(delta(c, h_i)) weighted sum of rows of H.
std::vector<double> OraclePool(const std::vector<double>& c, const Matrix& h, const Matrix& w,
                               const Matrix& v) {
  std::vector<double> scores;
  double top = -1e300;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    scores.push_back(OracleDelta(c, oracle::Row(h, i), w, v));
    top = std::max(top, scores.back());
  }
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    z += s;
  }
  std::vector<double> out(static_cast<size_t>(h.cols()), 0.0);
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) out[static_cast<size_t>(j)] += scores[static_cast<size_t>(i)] / z * h(i, j);
  }
  return out;
}

class TypeDetectorTest : public ::testing::Test {
 protected:
  explicit TypeDetectorTest(int dim = 2) : rng_(3), det_(store_, dim, PoolingMode::kAdaptive, rng_) {}
  ParameterStore store_;
  std::mt19937_64 rng_;
  TypeDetector det_;
};

TEST_F(TypeDetectorTest, ZeroProjectionGivesZero) {
  det_.projection()->value.setZero();
  Tape tape;
  Var d = det_.Similarity(tape.Constant(oracle::RandomMatrix(3, 2, rng_)),
                          tape.Constant(oracle::RandomMatrix(3, 2, rng_)));
  EXPECT_EQ(d.value(), Matrix::Zero(3, 1));
}

TEST_F(TypeDetectorTest, IdentityWeightClosedForm) {
  det_.weight()->value = Matrix::Identity(8, 8);
  det_.projection()->value = Matrix::Ones(8, 1);
  Tape tape;
  Matrix c(1, 2), h(1, 2);
  c << 1, 0;
  h << 0, 1;
  Var d = det_.Similarity(tape.Constant(c), tape.Constant(h));
  // Features (1, 0, 0, 1, 1, 1, 0, 0): four entries of tanh(1).
  EXPECT_NEAR(d.scalar(), 4.0 * std::tanh(1.0), 1e-9);
  EXPECT_NEAR(d.scalar(), OracleDelta({1, 0}, {0, 1}, det_.weight()->value, det_.projection()->value), 1e-12);
}

TEST_F(TypeDetectorTest, EqualInputsZeroTheDifferenceBlock) {
  // Only the |c - h| block feeds the output: it must vanish when c = h.
  det_.weight()->value.setZero();
  det_.weight()->value.block(4, 0, 2, 8).setOnes();
  Tape tape;
  const Matrix c = oracle::RandomMatrix(1, 2, rng_);
  EXPECT_EQ(det_.Similarity(tape.Constant(c), tape.Constant(c)).scalar(), 0.0);
}

TEST_F(TypeDetectorTest, SimilarityMatchesOracle) {
  Tape tape;
  const Matrix c = oracle::RandomMatrix(4, 2, rng_);
  const Matrix h = oracle::RandomMatrix(4, 2, rng_);
  Var d = det_.Similarity(tape.Constant(c), tape.Constant(h));
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(d.value()(i, 0),
                OracleDelta(oracle::Row(c, i), oracle::Row(h, i), det_.weight()->value,
                            det_.projection()->value),
                1e-12);
  }
}

TEST_F(TypeDetectorTest, PoolOverOneTokenReturnsIt) {
  Tape tape;
  const Matrix h = oracle::RandomMatrix(1, 2, rng_);
  auto pooled = det_.AttendPool(tape.Constant(oracle::RandomMatrix(3, 2, rng_)), tape.Constant(h));
  for (int t = 0; t < 3; ++t) EXPECT_LT((pooled.sentence.value().row(t) - h.row(0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST_F(TypeDetectorTest, EqualScoresGiveTheMean) {
  det_.projection()->value.setZero();
  Tape tape;
  const Matrix h = oracle::RandomMatrix(5, 2, rng_);
  auto pooled = det_.AttendPool(tape.Constant(oracle::RandomMatrix(2, 2, rng_)), tape.Constant(h));
  const Matrix mean = h.colwise().mean();
  EXPECT_LT((pooled.sentence.value().row(1) - mean.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(TypeDetectorTest, PoolMatchesOracleAndWeightsSumToOne) {
  Tape tape;
  const Matrix types = oracle::RandomMatrix(2, 2, rng_);
  const Matrix h = oracle::RandomMatrix(3, 2, rng_);
  auto pooled = det_.AttendPool(tape.Constant(types), tape.Constant(h));
  for (int t = 0; t < 2; ++t) {
    const auto want = OraclePool(oracle::Row(types, t), h, det_.weight()->value, det_.projection()->value);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(pooled.sentence.value()(t, j), want[static_cast<size_t>(j)], 1e-9);
    EXPECT_NEAR(pooled.weights.value().row(t).sum(), 1.0, 1e-12);
  }
}

TEST_F(TypeDetectorTest, ProbabilitiesMatchOracleForEveryPooling) {
  const Matrix types = oracle::RandomMatrix(3, 2, rng_);
  const Matrix h = oracle::RandomMatrix(4, 2, rng_);
  const Matrix cls = oracle::RandomMatrix(1, 2, rng_);
  for (auto mode : {PoolingMode::kAdaptive, PoolingMode::kMaxPool, PoolingMode::kMeanPool,
                    PoolingMode::kCls}) {
    ParameterStore store;
    std::mt19937_64 rng(4);
    TypeDetector det(store, 2, mode, rng);
    Tape tape;
    EncoderOutput enc{tape.Constant(h), tape.Constant(cls)};
    const Matrix probs = det.TypeProbabilities(tape.Constant(types), enc).value();
    for (int t = 0; t < 3; ++t) {
      std::vector<double> s;
      switch (mode) {
        case PoolingMode::kAdaptive:
          s = OraclePool(oracle::Row(types, t), h, det.weight()->value, det.projection()->value);
          break;
        case PoolingMode::kMaxPool:
          for (int j = 0; j < 2; ++j) s.push_back(h.col(j).maxCoeff());
          break;
        case PoolingMode::kMeanPool:
          for (int j = 0; j < 2; ++j) s.push_back(h.col(j).mean());
          break;
        case PoolingMode::kCls:
          s = oracle::Row(cls, 0);
          break;
      }
      const double want = oracle::Logistic(
          OracleDelta(oracle::Row(types, t), s, det.weight()->value, det.projection()->value));
      EXPECT_NEAR(probs(t, 0), want, 1e-12) << PoolingModeName(mode);
    }
  }
}

TEST_F(TypeDetectorTest, ClsPoolingNeedsSentenceToken) {
  ParameterStore store;
  std::mt19937_64 rng(4);
  TypeDetector det(store, 2, PoolingMode::kCls, rng);
  Tape tape;
  EncoderOutput enc{tape.Constant(oracle::RandomMatrix(3, 2, rng)), std::nullopt};
  EXPECT_THROW(det.TypeProbabilities(tape.Constant(oracle::RandomMatrix(2, 2, rng)), enc),
               ConfigError);
}

TEST(DetectTypes, HalfProbabilityIsNotDetected) {
  Tape tape;
  ParameterStore store;
  std::mt19937_64 rng(1);
  TypeDetector det(store, 2, PoolingMode::kAdaptive, rng);
  det.projection()->value.setZero();
  EncoderOutput enc{tape.Constant(oracle::RandomMatrix(3, 2, rng)), std::nullopt};
  const Matrix probs = det.TypeProbabilities(tape.Constant(oracle::RandomMatrix(4, 2, rng)), enc).value();
  for (int t = 0; t < 4; ++t) EXPECT_EQ(probs(t, 0), 0.5);
  EXPECT_TRUE(DetectTypes(probs, 0.5).empty());
}

TEST(DetectTypes, ThresholdOneDetectsNothing) {
  Matrix p(3, 1);
  p << 0.2, 0.999999, 0.7;
  EXPECT_TRUE(DetectTypes(p, 1.0).empty());
  const auto got = DetectTypes(p, 0.5);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].first, 1);
  EXPECT_EQ(got[1].first, 2);
}

TEST(DetectTypes, HigherThresholdGivesSubset) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix p(10, 1);
  for (int i = 0; i < 10; ++i) p(i, 0) = u(rng);
  const auto lo = DetectTypes(p, 0.3);
  const auto hi = DetectTypes(p, 0.8);
  for (const auto& x : hi) EXPECT_NE(std::find(lo.begin(), lo.end(), x), lo.end());
}

TEST(Pooling, NamesRoundTrip) {
  for (auto m : {PoolingMode::kAdaptive, PoolingMode::kMaxPool, PoolingMode::kMeanPool,
                 PoolingMode::kCls}) {
    EXPECT_EQ(ParsePoolingMode(PoolingModeName(m)), m);
  }
  EXPECT_THROW(ParsePoolingMode("sum"), ConfigError);
}

}  // namespace
}  // namespace cascade
