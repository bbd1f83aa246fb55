// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "movesort/motion.hpp"
#include "movesort/synthetic.hpp"

using namespace movesort;

namespace {

std::vector<Observation> line(int n, double dx, double dy, int t0 = 0) {
  std::vector<Observation> obs;
  for (int i = 0; i < n; ++i) obs.push_back({t0 + i, {0.2 + dx * i, 0.3 + dy * i, 0.1, 0.2}});
  return obs;
}

std::vector<Trajectory> cv_scene(int objects, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kConstantVelocity;
  spec.n_objects = objects;
  spec.n_frames = 40;
  spec.speed = 0.01;
  spec.seed = seed;
  return generate(spec).truth;
}

TrainConfig fast_clean_training() {
  TrainConfig tc = TrainConfig{}.without_augmentation();
  tc.epochs = 12;
  tc.max_batches_per_epoch = 80;
  tc.batch_size = 64;
  tc.lr = 1e-2;
  tc.lr_period = 6;
  tc.seed = 3;
  return tc;
}

MotionModelConfig small_config(MotionArch arch) {
  MotionModelConfig mc;
  mc.arch = arch;
  mc.history_len = 10;
  return mc;
}

}  // namespace

class EveryArch : public ::testing::TestWithParam<MotionArch> {};

INSTANTIATE_TEST_SUITE_P(Motion, EveryArch,
                         ::testing::Values(MotionArch::kArRnn, MotionArch::kRnnCnp, MotionArch::kRnnOde),
                         [](const auto& info) {
                           std::string s(to_string(info.param));
                           std::erase(s, '-');
                           return s;
                         });

TEST_P(EveryArch, UntrainedVariancesRespectFloor) {
  const MotionModel m(small_config(GetParam()), 7);
  const auto hist = line(6, 0.01, -0.02);
  const std::vector<int> targets{6, 7, 9};
  for (const auto& g : m.predict(hist, targets)) {
    EXPECT_TRUE((g.var.array() >= kVarianceFloor).all());
    EXPECT_TRUE(g.mean.allFinite());
  }
}

TEST_P(EveryArch, TranslatingHistoryTranslatesMeans) {
  const MotionModel m(small_config(GetParam()), 11);
  const auto hist = line(8, 0.013, 0.004);
  auto moved = hist;
  for (auto& o : moved) o.box = o.box.translated(0.31, -0.17);
  const std::vector<int> targets{8, 10};
  const auto a = m.predict(hist, targets);
  const auto b = m.predict(moved, targets);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_LT((b[k].mean - a[k].mean - Vec4(0.31, -0.17, 0, 0)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((b[k].var - a[k].var).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST_P(EveryArch, RejectsBadQueries) {
  const MotionModel m(small_config(GetParam()), 1);
  const auto hist = line(5, 0.01, 0.0);
  const std::vector<int> stale{4};
  EXPECT_THROW(m.predict(hist, stale), std::invalid_argument);
  const std::vector<int> unordered{7, 6};
  EXPECT_THROW(m.predict(hist, unordered), std::invalid_argument);
  const std::vector<int> ok{5};
  EXPECT_THROW(m.predict(std::span(hist).first(1), ok), std::invalid_argument);
}

TEST_P(EveryArch, CleanConstantVelocityOneStepError) {
  const auto train = cv_scene(100, 1);
  const auto test = cv_scene(30, 2);
  TrainReport report;
  const MotionModel m = train_motion(small_config(GetParam()), train, fast_clean_training(), &report);
  ASSERT_FALSE(report.epoch_loss.empty());
  EXPECT_LT(report.epoch_loss.back(), report.epoch_loss.front());

  Vec4 err = Vec4::Zero();
  int n = 0;
  for (const auto& tr : test) {
    for (std::size_t s = 0; s + 11 <= tr.obs.size(); s += 5) {
      const std::span<const Observation> hist(tr.obs.data() + s, 10);
      const std::vector<int> target{tr.obs[s + 10].t};
      err += (m.predict(hist, target)[0].mean - tr.obs[s + 10].box.vec()).cwiseAbs();
      ++n;
    }
  }
  err /= n;
  for (int c = 0; c < 4; ++c) EXPECT_LT(err[c], 0.002) << "coordinate " << c;
}

TEST(RnnCnp, RepeatedQueriesAreIdentical) {
  const MotionModel m(small_config(MotionArch::kRnnCnp), 5);
  const auto hist = line(7, 0.02, 0.01);
  const std::vector<int> targets{7, 8, 12};
  const auto a = m.predict(hist, targets);
  const auto b = m.predict(hist, targets);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].mean, b[k].mean);
    EXPECT_EQ(a[k].var, b[k].var);
  }
}

TEST(RnnCnp, TargetsAreDecodedIndependently) {
  const MotionModel m(small_config(MotionArch::kRnnCnp), 5);
  const auto hist = line(7, 0.02, 0.01);
  const std::vector<int> both{8, 12}, only{12};
  EXPECT_EQ(m.predict(hist, both)[1].mean, m.predict(hist, only)[0].mean);
}

TEST(ArRnn, MultiStepEqualsRecursiveOneStep) {
  const MotionModel m(small_config(MotionArch::kArRnn), 9);
  auto hist = line(6, 0.01, 0.02);
  const std::vector<int> two{6, 7};
  const auto joint = m.predict(hist, two);
  const std::vector<int> first{6};
  const GaussianState step1 = m.predict(hist, first)[0];
  hist.push_back({6, Box::from_vec(step1.mean)});
  const std::vector<int> second{7};
  const GaussianState step2 = m.predict(hist, second)[0];
  EXPECT_LT((joint[0].mean - step1.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((joint[1].mean - step2.mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Augment, ZeroProbabilitiesLeaveBatchUnchanged) {
  const TrainConfig cfg = TrainConfig{}.without_augmentation();
  std::vector<std::vector<Observation>> batch{line(9, 0.01, 0.0), line(3, -0.02, 0.01, 5)};
  const auto before = batch;
  nn::Rng rng(1);
  augment(batch, cfg, rng);
  ASSERT_EQ(batch.size(), before.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ASSERT_EQ(batch[i].size(), before[i].size());
    for (std::size_t k = 0; k < batch[i].size(); ++k) {
      EXPECT_EQ(batch[i][k].t, before[i][k].t);
      EXPECT_EQ(batch[i][k].box, before[i][k].box);
    }
  }
}

TEST(Augment, FullDropKeepsTwoPoints) {
  TrainConfig cfg = TrainConfig{}.without_augmentation();
  cfg.drop_prob = 1.0;
  nn::Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    auto hist = line(5, 0.01, 0.0);
    augment_one(hist, cfg, rng);
    ASSERT_EQ(hist.size(), 2u);
    EXPECT_LT(hist[0].t, hist[1].t);
  }
}

TEST(Augment, ShorteningNeverBelowTwo) {
  TrainConfig cfg = TrainConfig{}.without_augmentation();
  cfg.shorten_prob = 1.0;
  nn::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto hist = line(8, 0.01, 0.0);
    augment_one(hist, cfg, rng);
    ASSERT_GE(hist.size(), 2u);
    EXPECT_EQ(hist.back().t, 7);
  }
}

TEST(Augment, NoiseIsProportionalToBoxSize) {
  TrainConfig cfg = TrainConfig{}.without_augmentation();
  cfg.noise_schedule = {{1.0, 0.05}};
  nn::Rng rng(4);
  const Observation base{0, {0.4, 0.4, 0.2, 0.1}};
  const int draws = 100000;
  double s = 0.0, ss = 0.0, sy = 0.0, ssy = 0.0;
  for (int i = 0; i < draws; ++i) {
    std::vector<Observation> one{base};
    augment_one(one, cfg, rng);
    const double dx = one[0].box.left - base.box.left, dy = one[0].box.top - base.box.top;
    s += dx;
    ss += dx * dx;
    sy += dy;
    ssy += dy * dy;
  }
  const double sx = std::sqrt(ss / draws - (s / draws) * (s / draws));
  const double sdy = std::sqrt(ssy / draws - (sy / draws) * (sy / draws));
  EXPECT_NEAR(sx, 0.01, 0.03 * 0.01);
  EXPECT_NEAR(sdy, 0.005, 0.03 * 0.005);
}

TEST(TrainConfig, ValidateRejectsBadProbabilities) {
  TrainConfig cfg;
  cfg.drop_prob = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.noise_schedule = {{0.7, 0.05}, {0.6, 0.1}};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Training, SameSeedGivesIdenticalModelFile) {
  const auto train = cv_scene(20, 5);
  TrainConfig tc = fast_clean_training();
  tc.epochs = 2;
  tc.max_batches_per_epoch = 5;
  tc.noise_schedule = TrainConfig{}.noise_schedule;
  tc.drop_prob = 0.2;
  auto bytes = [&](const MotionModel& m) {
    std::stringstream ss;
    nn::write_model(ss, m.to_file());
    return ss.str();
  };
  const std::string a = bytes(train_motion(small_config(MotionArch::kRnnOde), train, tc));
  const std::string b = bytes(train_motion(small_config(MotionArch::kRnnOde), train, tc));
  EXPECT_EQ(a, b);
  tc.seed += 1;
  EXPECT_NE(a, bytes(train_motion(small_config(MotionArch::kRnnOde), train, tc)));
}

TEST(Training, ModelFileRoundTrip) {
  const auto train = cv_scene(10, 6);
  TrainConfig tc = fast_clean_training();
  tc.epochs = 1;
  tc.max_batches_per_epoch = 3;
  const MotionModel m = train_motion(small_config(MotionArch::kRnnCnp), train, tc);
  std::stringstream ss;
  nn::write_model(ss, m.to_file());
  const MotionModel back = MotionModel::from_file(nn::read_model(ss));
  EXPECT_TRUE(back.params().same_values(m.params()));
  EXPECT_EQ(back.seed(), m.seed());
  EXPECT_EQ(back.final_loss(), m.final_loss());
  const auto hist = line(10, 0.01, 0.0);
  const std::vector<int> t{10, 11};
  EXPECT_EQ(back.predict(hist, t)[1].mean, m.predict(hist, t)[1].mean);
}

TEST(Training, TooShortDatasetThrows) {
  SyntheticSpec spec;
  spec.n_frames = 5;
  spec.n_objects = 3;
  const auto data = generate(spec).truth;
  EXPECT_THROW(train_motion(small_config(MotionArch::kRnnCnp), data, TrainConfig{}), std::invalid_argument);
}
