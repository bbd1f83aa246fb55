// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>

#include "movesort/io.hpp"
#include "movesort/metrics.hpp"

using namespace movesort;

namespace {

FrameAnnotations fixture(const std::string& name) {
  return to_annotations(read_mot(std::string(MOVESORT_FIXTURES) + "/" + name), ImageSize{});
}

FrameAnnotations relabel(const FrameAnnotations& ann, int offset) {
  FrameAnnotations out;
  for (const auto& [f, objs] : ann) {
    for (const auto& [id, b] : objs) out[f].emplace_back(id * 3 + offset, b);
  }
  return out;
}

void expect_same(const MotMetrics& a, const MotMetrics& b) {
  EXPECT_EQ(a.mota, b.mota);
  EXPECT_EQ(a.idf1, b.idf1);
  EXPECT_EQ(a.idsw, b.idsw);
  EXPECT_EQ(a.fp, b.fp);
  EXPECT_EQ(a.fn, b.fn);
  EXPECT_EQ(a.num_gt, b.num_gt);
}

}  // namespace

TEST(FilterAccuracy, HandExample) {
  const std::vector<Box> truth{Box(0, 0, 1, 1), Box(0, 0, 1, 1)};
  const std::vector<Box> preds{Box(0, 0, 1, 1), Box(0.5, 0.5, 1, 1)};
  const FilterAccuracy a = filter_accuracy(preds, truth);
  EXPECT_NEAR(a.accuracy, (1.0 + 1.0 / 7.0) / 2.0, 1e-15);
  EXPECT_NEAR(a.mse, (0.25 + 0.25) / 4.0 / 2.0, 1e-15);
}

TEST(FilterAccuracy, DisjointIdenticalAndEmpty) {
  const std::vector<Box> a{Box(0, 0, 0.1, 0.1)};
  const std::vector<Box> b{Box(0.5, 0.5, 0.1, 0.1)};
  EXPECT_EQ(filter_accuracy(a, b).accuracy, 0.0);
  EXPECT_EQ(filter_accuracy(a, a).accuracy, 1.0);
  EXPECT_EQ(filter_accuracy(a, a).mse, 0.0);
  const std::vector<Box> none;
  EXPECT_EQ(filter_accuracy(none, none).accuracy, 0.0);
  EXPECT_THROW(filter_accuracy(a, none), std::invalid_argument);
}

TEST(MotMetrics, PerfectTracking) {
  const MotMetrics m = mot_metrics(fixture("perfect_hyp.txt"), fixture("perfect_gt.txt"));
  EXPECT_EQ(m.mota, 1.0);
  EXPECT_EQ(m.idf1, 1.0);
  EXPECT_EQ(m.idsw, 0);
  EXPECT_EQ(m.fp, 0);
  EXPECT_EQ(m.fn, 0);
  EXPECT_EQ(m.num_gt, 20);
  EXPECT_EQ(m.idtp, 20);
}

TEST(MotMetrics, MidpointIdSplit) {
  const MotMetrics m = mot_metrics(fixture("split_hyp.txt"), fixture("split_gt.txt"));
  EXPECT_EQ(m.idsw, 1);
  EXPECT_EQ(m.idf1, 0.5);
  EXPECT_DOUBLE_EQ(m.mota, 0.9);
  EXPECT_EQ(m.idtp, 5);
  EXPECT_EQ(m.idfp, 5);
  EXPECT_EQ(m.idfn, 5);
}

TEST(MotMetrics, AlternatingMisses) {
  const MotMetrics m = mot_metrics(fixture("alternating_hyp.txt"), fixture("alternating_gt.txt"));
  EXPECT_EQ(m.mota, 0.5);
  EXPECT_DOUBLE_EQ(m.idf1, 2.0 / 3.0);
  EXPECT_EQ(m.idsw, 0);
  EXPECT_EQ(m.fn, 5);
  EXPECT_EQ(m.fp, 0);
}

TEST(MotMetrics, EmptyHypothesis) {
  const FrameAnnotations gt = fixture("split_gt.txt");
  const MotMetrics m = mot_metrics({}, gt);
  EXPECT_EQ(m.mota, 0.0);
  EXPECT_EQ(m.fn, 10);
  EXPECT_EQ(m.idf1, 0.0);
}

TEST(MotMetrics, FalsePositivesCount) {
  FrameAnnotations gt, hyp;
  gt[1] = {{1, Box(0.1, 0.1, 0.1, 0.1)}};
  hyp[1] = {{4, Box(0.1, 0.1, 0.1, 0.1)}, {5, Box(0.6, 0.6, 0.1, 0.1)}};
  hyp[2] = {{5, Box(0.6, 0.6, 0.1, 0.1)}};
  const MotMetrics m = mot_metrics(hyp, gt);
  EXPECT_EQ(m.fp, 2);
  EXPECT_EQ(m.fn, 0);
  EXPECT_EQ(m.mota, -1.0);
}

TEST(MotMetrics, SwitchAcrossGapIsCounted) {
  FrameAnnotations gt, hyp;
  const Box b(0.2, 0.2, 0.1, 0.2);
  for (int f = 1; f <= 6; ++f) gt[f] = {{1, b}};
  for (int f = 1; f <= 2; ++f) hyp[f] = {{1, b}};
  for (int f = 5; f <= 6; ++f) hyp[f] = {{2, b}};
  const MotMetrics m = mot_metrics(hyp, gt);
  EXPECT_EQ(m.idsw, 1);
  EXPECT_EQ(m.fn, 2);
}

TEST(MotMetrics, ExistingCorrespondenceIsKept) {
  FrameAnnotations gt, hyp;
  const Box g(0.2, 0.2, 0.1, 0.1);
  gt[1] = {{1, g}};
  gt[2] = {{1, g}};
  hyp[1] = {{7, g}};
  hyp[2] = {{7, g.translated(0.02, 0.0)}, {8, g}};
  const MotMetrics m = mot_metrics(hyp, gt);
  EXPECT_EQ(m.idsw, 0);
  EXPECT_EQ(m.fp, 1);
}

TEST(MotMetrics, InvariantUnderRelabeling) {
  for (const char* name : {"perfect", "split", "alternating"}) {
    const FrameAnnotations gt = fixture(std::string(name) + "_gt.txt");
    const FrameAnnotations hyp = fixture(std::string(name) + "_hyp.txt");
    expect_same(mot_metrics(relabel(hyp, 11), relabel(gt, 2)), mot_metrics(hyp, gt));
  }
}

TEST(MotMetrics, RandomHypothesesStayBounded) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 0.8);
  std::uniform_int_distribution<int> count(0, 4), ids(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    FrameAnnotations gt, hyp;
    for (int f = 1; f <= 8; ++f) {
      for (int k = count(rng); k > 0; --k) gt[f].emplace_back(k, Box(u(rng), u(rng), 0.15, 0.15));
      for (int k = count(rng); k > 0; --k) hyp[f].emplace_back(ids(rng), Box(u(rng), u(rng), 0.15, 0.15));
    }
    const MotMetrics m = mot_metrics(hyp, gt);
    EXPECT_LE(m.mota, 1.0);
    EXPECT_GE(m.idf1, 0.0);
    EXPECT_LE(m.idf1, 1.0);
    EXPECT_EQ(m.matches + m.fn, m.num_gt);
    EXPECT_LE(m.idtp, m.matches + m.fp);
  }
}

TEST(MotMetrics, WriteMetricsLines) {
  std::ostringstream os;
  write_metrics(os, mot_metrics(fixture("split_hyp.txt"), fixture("split_gt.txt")));
  const std::string s = os.str();
  EXPECT_NE(s.find("mota,0.9\n"), std::string::npos);
  EXPECT_NE(s.find("idf1,0.5\n"), std::string::npos);
  EXPECT_NE(s.find("idsw,1\n"), std::string::npos);
}
