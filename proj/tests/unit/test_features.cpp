// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "movesort/features.hpp"

using namespace movesort;

namespace {

std::vector<Observation> random_track(std::mt19937_64& rng, int n, bool gaps) {
  std::uniform_real_distribution<double> pos(0.0, 0.8), size(0.05, 0.3);
  std::uniform_int_distribution<int> step(1, gaps ? 4 : 1);
  std::vector<Observation> obs;
  int t = 3;
  for (int i = 0; i < n; ++i) {
    obs.push_back({t, {pos(rng), pos(rng), size(rng), size(rng)}});
    t += step(rng);
  }
  return obs;
}

}  // namespace

TEST(MeasurementBuffer, DenseHistoryKeepsInclusiveWindow) {
  MeasurementBuffer buf(30, 5);
  for (int t = 0; t < 40; ++t) buf.push({t, {0.1, 0.1, 0.1, 0.1}});
  std::size_t expected = 0;
  for (int t = 0; t < 40; ++t) expected += (t >= 39 - 30);
  EXPECT_EQ(buf.size(), expected);
  EXPECT_EQ(buf.size(), 31u);
  EXPECT_EQ(buf.entries().front().t, 9);
}

TEST(MeasurementBuffer, SparseHistoryKeepsMinimum) {
  MeasurementBuffer buf(30, 5);
  for (int t : {0, 50, 100}) buf.push({t, {}});
  EXPECT_EQ(buf.size(), 3u);

  MeasurementBuffer longer(30, 5);
  for (int t = 0; t < 10; ++t) longer.push({t * 50, {}});
  EXPECT_EQ(longer.size(), 5u);
  EXPECT_EQ(longer.entries().front().t, 250);
}

TEST(MeasurementBuffer, RejectsNonIncreasingFrames) {
  MeasurementBuffer buf;
  buf.push({4, {}});
  EXPECT_THROW(buf.push({4, {}}), std::invalid_argument);
  EXPECT_THROW(buf.push({2, {}}), std::invalid_argument);
}

TEST(MeasurementBuffer, NeverBelowMinOfMinSizeAndTotal) {
  std::mt19937_64 rng(47);
  std::uniform_int_distribution<int> gap(1, 40);
  MeasurementBuffer buf(30, 5);
  int t = 0;
  for (int k = 1; k <= 300; ++k) {
    t += gap(rng);
    buf.push({t, {}});
    ASSERT_GE(buf.size(), std::min<std::size_t>(5, k));
    for (std::size_t i = 1; i < buf.size(); ++i) ASSERT_LT(buf.entries()[i - 1].t, buf.entries()[i].t);
  }
}

TEST(Encode, FirstDifferenceExample) {
  const std::vector<Observation> obs{{0, {0, 0, 1, 1}}, {2, {2, 0, 1, 1}}};
  const Eigen::MatrixXd y = encode_raw(FeatureMode::kFirstDifference, obs);
  ASSERT_EQ(y.rows(), 1);
  EXPECT_EQ(y.row(0).head<4>(), Eigen::RowVector4d(1, 0, 0, 0));
  EXPECT_EQ(y(0, 4), 1.0);
}

TEST(Encode, RelativeToLastExample) {
  const std::vector<Observation> obs{{0, {0, 0, 1, 1}}, {2, {2, 0, 1, 1}}};
  const Eigen::MatrixXd y = encode_raw(FeatureMode::kRelativeToLast, obs);
  ASSERT_EQ(y.rows(), 1);
  EXPECT_EQ(y.row(0).head<4>(), Eigen::RowVector4d(2, 0, 0, 0));
}

TEST(Encode, TimeFeatureCountsFromFirstObservation) {
  const std::vector<Observation> obs{{5, {}}, {6, {}}, {9, {}}};
  const Eigen::MatrixXd y = encode_raw(FeatureMode::kAbsolute, obs);
  EXPECT_EQ(y.col(4), Eigen::Vector3d(1, 2, 5));
}

TEST(Encode, StandardizationIsAffine) {
  std::mt19937_64 rng(53);
  const auto obs = random_track(rng, 8, true);
  FeatureCodec codec;
  codec.mode = FeatureMode::kRelativeToLast;
  codec.std = Vec5::Constant(2.0);
  const Eigen::MatrixXd raw = encode_raw(codec.mode, obs);
  EXPECT_LT((encode(codec, obs) - raw / 2.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Encode, TooFewObservationsThrow) {
  const std::vector<Observation> one{{0, {}}};
  FeatureCodec codec;
  codec.mode = FeatureMode::kFirstDifference;
  EXPECT_THROW(encode(codec, one), std::invalid_argument);
  codec.mode = FeatureMode::kAbsolute;
  EXPECT_NO_THROW(encode(codec, one));
}

TEST(Encode, DifferenceModesAreTranslationInvariant) {
  std::mt19937_64 rng(59);
  for (int c = 0; c < 100; ++c) {
    auto obs = random_track(rng, 12, true);
    // Dyadic coordinates and offsets keep every sum and difference exact.
    for (auto& o : obs) {
      o.box = {std::ldexp(std::round(std::ldexp(o.box.left, 10)), -10),
               std::ldexp(std::round(std::ldexp(o.box.top, 10)), -10), o.box.width, o.box.height};
    }
    auto shifted = obs;
    for (auto& o : shifted) o.box = o.box.translated(0.25, -0.125);
    for (FeatureMode m : {FeatureMode::kFirstDifference, FeatureMode::kRelativeToLast,
                          FeatureMode::kRelativeToFirst}) {
      EXPECT_EQ(encode_raw(m, obs), encode_raw(m, shifted));
    }
  }
}

TEST(Decode, RelativeToLastAddsAnchor) {
  FeatureCodec codec;
  codec.standardize = false;
  const std::vector<FeatureMoments> out{{Vec4(0.1, 0, 0, 0), Vec4::Constant(0.01)}};
  const std::vector<int> times{11};
  const auto g = decode(codec, out, {10, {0.5, 0.5, 0.2, 0.2}}, times);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_NEAR((g[0].mean - Vec4(0.6, 0.5, 0.2, 0.2)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_EQ(g[0].var, Vec4::Constant(0.01));
}

TEST(Decode, FirstDifferenceAccumulatesMeansAndVariances) {
  FeatureCodec codec;
  codec.mode = FeatureMode::kFirstDifference;
  codec.standardize = false;
  const Vec4 step_var(0.01, 0.01, 0.01, 0.01);
  const std::vector<FeatureMoments> out(2, {Vec4(0.1, 0, 0, 0), step_var});
  const std::vector<int> times{11, 12};
  const Observation anchor{10, {0.3, 0.3, 0.1, 0.1}};
  const auto g = decode(codec, out, anchor, times);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(g[1].mean[0], 0.5, 1e-15);
  EXPECT_NEAR(g[1].var[0], 0.02, 1e-15);

  // Sampling the increments independently and summing them reproduces the
  // propagated variance.
  std::mt19937_64 rng(61);
  std::normal_distribution<double> inc(0.1, 0.1);
  const int draws = 100000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = anchor.box.left + inc(rng) + inc(rng);
    s += x;
    ss += x * x;
  }
  const double mean = s / draws;
  const double var = ss / draws - mean * mean;
  EXPECT_NEAR(var, g[1].var[0], 0.05 * g[1].var[0]);
}

TEST(Decode, StandardizedVarianceScalesBySquaredStd) {
  FeatureCodec codec;
  codec.mean << 0.1, 0, 0, 0, 0;
  codec.std << 2, 1, 1, 1, 1;
  const std::vector<FeatureMoments> out{{Vec4(1, 0, 0, 0), Vec4::Ones()}};
  const std::vector<int> times{1};
  const auto g = decode(codec, out, {0, {0, 0, 0.1, 0.1}}, times);
  EXPECT_NEAR(g[0].mean[0], 2.1, 1e-15);
  EXPECT_EQ(g[0].var[0], 4.0);
}

TEST(RoundTrip, EncodeTargetsThenDecodeIsIdentity) {
  std::mt19937_64 rng(67);
  for (FeatureMode m : {FeatureMode::kAbsolute, FeatureMode::kFirstDifference,
                        FeatureMode::kRelativeToLast, FeatureMode::kRelativeToFirst}) {
    std::vector<std::vector<Observation>> train;
    for (int i = 0; i < 10; ++i) train.push_back(random_track(rng, 15, true));
    const Standardizer st = fit_standardizer(m, train);
    FeatureCodec codec{m, true, st.mean, st.std};
    const auto track = random_track(rng, 20, true);
    const std::span<const Observation> all(track);
    const Observation anchor = m == FeatureMode::kRelativeToFirst ? track.front() : track[9];
    const auto future = all.subspan(10);
    const auto targets = encode_targets(codec, anchor, future);
    std::vector<FeatureMoments> outs;
    std::vector<int> times;
    for (std::size_t k = 0; k < future.size(); ++k) {
      outs.push_back({targets[k], Vec4::Ones()});
      times.push_back(future[k].t);
    }
    const auto g = decode(codec, outs, anchor, times);
    for (std::size_t k = 0; k < future.size(); ++k) {
      EXPECT_LT((g[k].mean - future[k].box.vec()).cwiseAbs().maxCoeff(), 1e-9) << to_string(m);
    }
  }
}

TEST(FitStandardizer, PopulationStatistics) {
  const std::vector<std::vector<Observation>> seqs{{{0, {0, 0.5, 0.2, 0.2}}}, {{0, {2, 0.5, 0.2, 0.2}}}};
  const Standardizer st = fit_standardizer(FeatureMode::kAbsolute, seqs);
  EXPECT_DOUBLE_EQ(st.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(st.std[0], 1.0);
  EXPECT_DOUBLE_EQ(st.mean[1], 0.5);
  EXPECT_EQ(st.std[1], 1e-8);
}

TEST(FitStandardizer, StandardizedRowsHaveZeroMeanUnitStd) {
  std::mt19937_64 rng(71);
  std::vector<std::vector<Observation>> train;
  for (int i = 0; i < 20; ++i) train.push_back(random_track(rng, 10, true));
  const Standardizer st = fit_standardizer(FeatureMode::kFirstDifference, train);
  FeatureCodec codec{FeatureMode::kFirstDifference, true, st.mean, st.std};
  Eigen::MatrixXd all(0, 5);
  for (const auto& seq : train) {
    const Eigen::MatrixXd e = encode(codec, seq);
    Eigen::MatrixXd grown(all.rows() + e.rows(), 5);
    grown << all, e;
    all = grown;
  }
  const Eigen::RowVectorXd mean = all.colwise().mean();
  const Eigen::RowVectorXd var = (all.rowwise() - mean).array().square().colwise().mean();
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((var.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(FitStandardizer, EmptyInputThrows) {
  const std::vector<std::vector<Observation>> none;
  EXPECT_THROW(fit_standardizer(FeatureMode::kAbsolute, none), std::invalid_argument);
}

TEST(FeatureMode, ParsesNames) {
  EXPECT_EQ(parse_feature_mode("sfod"), FeatureMode::kFirstDifference);
  EXPECT_EQ(parse_feature_mode("rloc"), FeatureMode::kRelativeToLast);
  EXPECT_THROW(parse_feature_mode("polar"), std::invalid_argument);
}
