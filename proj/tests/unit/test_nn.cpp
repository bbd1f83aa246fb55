// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gradient_cases.hpp"
#include "movesort/nn/optim.hpp"
#include "movesort/nn/serialize.hpp"

using namespace movesort;
using nn::Matrix;
using nn::Vector;

namespace t = movesort::testing;

TEST(Dense, IdentityWeightsPassThrough) {
  nn::Rng rng(1);
  nn::ParamStore ps;
  nn::Dense d(ps, "d", 3, 3, rng);
  ps[d.weight_index()].value = Matrix::Identity(3, 3);
  ps[d.bias_index()].value.setZero();
  const Matrix x = t::random_matrix(4, 3, rng);
  EXPECT_EQ(d.forward(ps, x), x);
}

TEST(Dense, BiasGradientOfSumIsOnes) {
  nn::Rng rng(2);
  nn::ParamStore ps;
  nn::Dense d(ps, "d", 3, 5, rng);
  ps.zero_grad();
  d.backward(ps, t::random_matrix(1, 3, rng), Matrix::Ones(1, 5));
  EXPECT_EQ(ps.grad(d.bias_index()), Matrix::Ones(1, 5));
}

TEST(Dense, ShapeMismatchThrows) {
  nn::Rng rng(3);
  nn::ParamStore ps;
  nn::Dense d(ps, "d", 3, 2, rng);
  EXPECT_THROW(d.forward(ps, Matrix::Zero(2, 4)), std::invalid_argument);
}

TEST(Dense, GradientsMatchFiniteDifferences) {
  nn::Rng rng(4);
  for (int c = 0; c < 20; ++c) EXPECT_LT(t::dense_case(rng), 1e-5);
}

TEST(LayerNorm, ConstantRowGivesBias) {
  nn::ParamStore ps;
  nn::LayerNorm ln(ps, "ln", 4);
  ps[0].value << 2, 3, 4, 5;
  ps[1].value << 0.1, 0.2, 0.3, 0.4;
  const Matrix y = ln.forward(ps, Matrix::Constant(2, 4, 7.0), nullptr);
  for (int r = 0; r < 2; ++r) EXPECT_EQ(y.row(r), ps[1].value.row(0));
}

TEST(LayerNorm, GradientsMatchFiniteDifferences) {
  nn::Rng rng(5);
  for (int c = 0; c < 20; ++c) EXPECT_LT(t::layernorm_case(rng), 1e-4);
}

TEST(LeakyRelu, Definition) {
  Matrix x(1, 4);
  x << -2.0, -0.5, 0.0, 3.0;
  Matrix expected(1, 4);
  expected << -0.02, -0.005, 0.0, 3.0;
  EXPECT_LT((nn::leaky_relu(x) - expected).cwiseAbs().maxCoeff(), 1e-17);
  EXPECT_EQ(nn::leaky_relu(x, 0.5)(0, 0), -1.0);
}

TEST(LeakyRelu, GradientsMatchFiniteDifferences) {
  nn::Rng rng(6);
  for (int c = 0; c < 20; ++c) EXPECT_LT(t::leaky_relu_case(rng), 1e-4);
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  nn::Rng rng(7);
  for (int c = 0; c < 20; ++c) EXPECT_LT(t::mlp_case(rng), 1e-4);
}

TEST(Gru, SaturatedUpdateGateKeepsHidden) {
  nn::Rng rng(8);
  nn::ParamStore ps;
  nn::GruCell cell(ps, "g", 3, 4, rng);
  // Columns [hidden, 2*hidden) of the input bias drive the update gate.
  ps[cell.input_bias_index()].value.block(0, 4, 1, 4).setConstant(50.0);
  const Matrix h = t::random_matrix(2, 4, rng);
  const Matrix next = cell.forward(ps, t::random_matrix(2, 3, rng), h, nullptr);
  EXPECT_LT((next - h).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gru, ZeroEverythingStaysZero) {
  nn::Rng rng(9);
  nn::ParamStore ps;
  nn::GruCell cell(ps, "g", 3, 4, rng);
  for (auto& p : ps) p.value.setZero();
  EXPECT_EQ(cell.forward(ps, Matrix::Zero(1, 3), Matrix::Zero(1, 4), nullptr), Matrix::Zero(1, 4));
}

TEST(Gru, MaskedStepLeavesPaddedRows) {
  nn::Rng rng(10);
  nn::ParamStore ps;
  nn::GruCell cell(ps, "g", 2, 3, rng);
  const Matrix h = t::random_matrix(2, 3, rng);
  Vector mask(2);
  mask << 0.0, 1.0;
  const Matrix next = nn::gru_masked_step(cell, ps, t::random_matrix(2, 2, rng), h, mask, nullptr);
  EXPECT_EQ(next.row(0), h.row(0));
  EXPECT_NE(next.row(1), h.row(1));
}

TEST(Gru, FiveStepGradientsMatchFiniteDifferences) {
  nn::Rng rng(11);
  for (int c = 0; c < 20; ++c) EXPECT_LT(t::gru_case(rng, 5), 1e-4);
}

namespace {

struct Linear {
  struct Cache {};
  double a = 0.0;
  double c = 0.0;
  Matrix forward(const Matrix& z, const Vector&, Cache*) const {
    return (a * z.array() + c).matrix();
  }
  Matrix backward(const Cache&, const Matrix& g) const { return a * g; }
};

}  // namespace

TEST(Rk4, ZeroFieldIsExact) {
  const Matrix z0 = Matrix::Constant(2, 3, 0.7);
  EXPECT_EQ(nn::rk4_integrate(Linear{0.0, 0.0}, z0, 0.0, 1.3, 0.25), z0);
}

TEST(Rk4, ConstantFieldIsExact) {
  const Matrix z0 = Matrix::Constant(1, 2, 0.5);
  const Matrix z1 = nn::rk4_integrate(Linear{0.0, 2.0}, z0, 0.0, 1.0, 0.25);
  EXPECT_EQ(z1, Matrix::Constant(1, 2, 2.5));
}

TEST(Rk4, ExponentialMatchesAnalyticValue) {
  const Matrix z1 = nn::rk4_integrate(Linear{1.0, 0.0}, Matrix::Ones(1, 1), 0.0, 1.0, 0.25);
  EXPECT_NEAR(z1(0, 0), std::exp(1.0), 1e-4);
}

TEST(Rk4, PartialFinalStepLandsOnEndTime) {
  const Matrix z1 = nn::rk4_integrate(Linear{0.0, 1.0}, Matrix::Zero(1, 1), 0.0, 0.6, 0.25);
  EXPECT_NEAR(z1(0, 0), 0.6, 1e-15);
}

TEST(Rk4, TimeAdditiveOnStepMultiples) {
  nn::Rng rng(12);
  nn::ParamStore ps;
  nn::Mlp field(ps, "f", 3, {8}, 3, rng);
  const nn::MlpDynamics dyn(field, ps);
  const Matrix z0 = t::random_matrix(2, 3, rng);
  const Matrix direct = nn::rk4_integrate(dyn, z0, 0.0, 2.0, 0.25);
  const Matrix split = nn::rk4_integrate(dyn, nn::rk4_integrate(dyn, z0, 0.0, 0.75, 0.25), 0.75, 2.0, 0.25);
  EXPECT_EQ(direct, split);
}

TEST(Rk4, PerRowIntervals) {
  Vector t0(2), t1(2);
  t0 << 0.0, 1.0;
  t1 << 1.0, 1.0;
  const Matrix z1 = nn::rk4_integrate(Linear{0.0, 1.0}, Matrix::Zero(2, 1), t0, t1, 0.25);
  EXPECT_EQ(z1(0, 0), 1.0);
  EXPECT_EQ(z1(1, 0), 0.0);
  EXPECT_THROW(nn::rk4_integrate(Linear{}, Matrix::Zero(2, 1), t1, t0, 0.25), std::invalid_argument);
}

TEST(Rk4, GradientsMatchFiniteDifferences) {
  nn::Rng rng(13);
  for (int c = 0; c < 20; ++c) EXPECT_LT(t::rk4_case(rng), 1e-4);
}

TEST(AdamW, ZeroGradientsAndNoDecayLeaveParameters) {
  nn::ParamStore ps;
  ps.add("w", Matrix::Constant(2, 2, 1.5));
  nn::AdamW opt(ps, {.lr = 0.1, .weight_decay = 0.0});
  ps.zero_grad();
  for (int i = 0; i < 10; ++i) opt.step(ps);
  EXPECT_EQ(ps.value(0), Matrix::Constant(2, 2, 1.5));
}

TEST(AdamW, ConstantGradientDescends) {
  nn::ParamStore ps;
  ps.add("w", Matrix::Zero(1, 2));
  nn::AdamW opt(ps, {.lr = 0.01, .weight_decay = 0.0});
  for (int i = 0; i < 50; ++i) {
    ps.grad(0) << 2.0, -3.0;
    opt.step(ps);
  }
  EXPECT_LT(ps.value(0)(0, 0), 0.0);
  EXPECT_GT(ps.value(0)(0, 1), 0.0);
}

TEST(AdamW, MinimizesConvexQuadratic) {
  nn::ParamStore ps;
  ps.add("w", Matrix::Zero(1, 1));
  nn::AdamW opt(ps, {.lr = 0.01, .weight_decay = 0.0});
  int steps = 0;
  while (steps < 2000 && std::abs(ps.value(0)(0, 0) - 3.0) >= 1e-3) {
    ps.grad(0)(0, 0) = 2.0 * (ps.value(0)(0, 0) - 3.0);
    opt.step(ps);
    ++steps;
  }
  EXPECT_LT(std::abs(ps.value(0)(0, 0) - 3.0), 1e-3) << "after " << steps << " steps";
}

TEST(StepScheduler, DecaysEveryPeriod) {
  const nn::StepScheduler s(1e-3);
  EXPECT_DOUBLE_EQ(s.lr_for_epoch(0), 1e-3);
  EXPECT_DOUBLE_EQ(s.lr_for_epoch(3), 1e-3);
  EXPECT_DOUBLE_EQ(s.lr_for_epoch(4), 1e-4);
  EXPECT_NEAR(s.lr_for_epoch(9), 1e-5, 1e-20);
}

TEST(ParamStore, DuplicateNameThrows) {
  nn::ParamStore ps;
  ps.add("a", Matrix::Zero(1, 1));
  EXPECT_THROW(ps.add("a", Matrix::Zero(1, 1)), std::invalid_argument);
  EXPECT_EQ(ps[0].grad.rows(), 1);
}

TEST(ParamStore, SerializationRoundTripsBitExactly) {
  nn::Rng rng(14);
  nn::ParamStore ps;
  nn::GruCell cell(ps, "enc", 5, 7, rng);
  nn::Mlp head(ps, "head", 7, {6}, 8, rng);
  ps[0].value(0, 0) = std::nextafter(1.0, 2.0);
  ps[0].value(0, 1) = -0.0;
  std::stringstream ss;
  nn::write_params(ss, ps);
  const nn::ParamStore back = nn::read_params(ss);
  EXPECT_TRUE(back.same_values(ps));
  EXPECT_TRUE(std::signbit(back.value(0)(0, 1)));
}

TEST(ModelFile, TruncatedInputIsFormatError) {
  nn::ModelFile m;
  m.kind = "motion";
  m.params.add("w", Matrix::Ones(3, 3));
  std::stringstream ss;
  nn::write_model(ss, m);
  const std::string bytes = ss.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(nn::read_model(cut), nn::FormatError);
  std::stringstream bad("XXXX" + bytes.substr(4));
  EXPECT_THROW(nn::read_model(bad), nn::FormatError);
}
