#include "trajsal/common/errors.hpp"
#include "trajsal/common/random.hpp"
#include "trajsal/numkernel/adam.hpp"
#include "trajsal/numkernel/gradient_check.hpp"
#include "trajsal/numkernel/ops.hpp"
#include "trajsal/numkernel/tape.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace trajsal;
using namespace trajsal::nk;

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng) {
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = uniform(rng, -1, 1);
  return m;
}

}  // namespace

TEST(Random, DerivedStreamsAreReproducibleAndDistinct) {
  Rng a = derive_rng(7, {1, 2});
  Rng b = derive_rng(7, {1, 2});
  Rng c = derive_rng(7, {1, 3});
  Rng d = derive_rng(8, {1, 2});
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(Random, UniformIntIsInclusive) {
  Rng r(3);
  bool lo = false, hi = false;
  for (int i = 0; i < 1000; ++i) {
    const int v = uniform_int(r, 2, 4);
    ASSERT_GE(v, 2);
    ASSERT_LE(v, 4);
    lo |= v == 2;
    hi |= v == 4;
  }
  EXPECT_TRUE(lo && hi);
}

TEST(Ops, LeakyReluKeepsPositivesAndScalesNegatives) {
  Matrix x(1, 3);
  x << -2.0, 0.0, 3.0;
  const Matrix y = nk::leaky_relu(x, 0.01);
  EXPECT_DOUBLE_EQ(y(0, 0), -0.02);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(y(0, 2), 3.0);
}

TEST(Ops, LinearMatchesLoop) {
  Rng r(1);
  const RowMatrix w = random_matrix(3, 4, r);
  const Vector b = random_matrix(3, 1, r);
  const Matrix x = random_matrix(4, 5, r);
  const Matrix y = linear_forward(x, w, b);
  for (Index j = 0; j < 5; ++j)
    for (Index i = 0; i < 3; ++i) {
      double acc = b(i);
      for (Index k = 0; k < 4; ++k) acc += w(i, k) * x(k, j);
      EXPECT_NEAR(y(i, j), acc, 1e-14);
    }
}

TEST(Ops, LstmStepMatchesHandComputedGates) {
  // One unit, one input: every gate pre-activation is w x + u h + b1 + b2.
  auto p = LstmWeights::zeros(1, 1);
  p.w_ih << 0.5, -0.3, 0.8, 0.1;
  p.w_hh << 0.2, 0.4, -0.6, 0.7;
  p.b_ih << 0.1, 0.0, 0.05, -0.2;
  p.b_hh << 0.0, 0.3, 0.0, 0.1;
  Matrix x(1, 1), h(1, 1), c(1, 1);
  x << 1.5;
  h << -0.4;
  c << 0.25;
  const auto s = lstm_step(x, h, c, p.view());
  const double i = sigmoid(0.5 * 1.5 + 0.2 * -0.4 + 0.1);
  const double f = sigmoid(-0.3 * 1.5 + 0.4 * -0.4 + 0.3);
  const double g = std::tanh(0.8 * 1.5 - 0.6 * -0.4 + 0.05);
  const double o = sigmoid(0.1 * 1.5 + 0.7 * -0.4 - 0.1);
  const double c1 = f * 0.25 + i * g;
  EXPECT_NEAR(s.c(0, 0), c1, 1e-15);
  EXPECT_NEAR(s.h(0, 0), o * std::tanh(c1), 1e-15);
}

TEST(Ops, NonFiniteIsRejected) {
  Matrix m = Matrix::Zero(2, 2);
  EXPECT_NO_THROW(require_finite(m, "m"));
  m(1, 0) = std::nan("");
  EXPECT_THROW(require_finite(m, "m"), NumericError);
  EXPECT_THROW(require_shape(false, "x"), ShapeError);
}

TEST(Tape, GradientOfSquaredNormOfLinearLayer) {
  Rng r(2);
  ParameterLayout layout;
  const auto d = layout.add_dense("fc", 3, 2);
  std::vector<double> theta(static_cast<std::size_t>(layout.size()));
  for (double& v : theta) v = uniform(r, -1, 1);
  const Matrix x = random_matrix(3, 4, r);

  LossFn loss = [&](std::span<const double> th, std::span<double> g) {
    Tape t;
    const auto p = dense_view(layout, th, d);
    std::optional<DenseGrads> gv;
    if (!g.empty()) {
      std::fill(g.begin(), g.end(), 0.0);
      gv = dense_view(layout, g, d);
    }
    const Var y = squared_norm(t, nk::leaky_relu(t, linear(t, t.constant(x), p, gv ? &*gv : nullptr), 0.1));
    if (!g.empty()) t.backward(y);
    return t.value(y)(0, 0);
  };
  const auto res = gradient_check(loss, theta, 1e-6);
  EXPECT_EQ(res.checked, theta.size());
  EXPECT_LT(res.max_rel_err, 1e-6);
}

TEST(Tape, LstmUnrolledGradientsMatchFiniteDifferences) {
  Rng r(4);
  ParameterLayout layout;
  const auto l = layout.add_lstm("lstm", 3, 4);
  std::vector<double> theta(static_cast<std::size_t>(layout.size()));
  for (double& v : theta) v = uniform(r, -0.5, 0.5);
  const Matrix x = random_matrix(3, 2, r), h0 = random_matrix(4, 2, r), c0 = random_matrix(4, 2, r);
  const Matrix target = random_matrix(4, 2, r);

  LossFn loss = [&](std::span<const double> th, std::span<double> g) {
    Tape t;
    const auto p = lstm_view(layout, th, l);
    std::optional<LstmGrads> gv;
    if (!g.empty()) {
      std::fill(g.begin(), g.end(), 0.0);
      gv = lstm_view(layout, g, l);
    }
    Var h = t.constant(h0), c = t.constant(c0);
    for (int step = 0; step < 3; ++step) {
      const auto s = nk::lstm(t, t.constant(x * (step + 1)), h, c, p, gv ? &*gv : nullptr);
      h = s.h;
      c = s.c;
    }
    const Var y = sum_squared_error(t, h, target);
    if (!g.empty()) t.backward(y);
    return t.value(y)(0, 0);
  };
  EXPECT_LT(gradient_check(loss, theta, 1e-6).max_rel_err, 1e-6);
}

TEST(Tape, StructuralOpsRouteGradients) {
  Tape t;
  Matrix a(2, 2), b(2, 1);
  a << 1, 2, 3, 4;
  b << 5, 6;
  const Var va = t.variable(a), vb = t.variable(b);
  const Var parts[] = {va, vb};
  const Var cat = concat_cols(t, parts);  // 2x3
  const Var top = slice_rows(t, cat, 0, 1);
  const Var mid = slice_cols(t, cat, 1, 2);
  const Var sum = weighted_sum(t, squared_norm(t, top), 2.0, squared_norm(t, scale(t, mid, 3.0)), 1.0);
  t.backward(sum);
  // d/da00 = 4 a00; d/da01 = 4 a01 + 18 a01; d/da11 = 18 a11; d/db = 4 b0 + 18 b0, 18 b1.
  const Matrix ga = t.grad(va), gb = t.grad(vb);
  EXPECT_DOUBLE_EQ(ga(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(ga(0, 1), 44.0);
  EXPECT_DOUBLE_EQ(ga(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(ga(1, 1), 72.0);
  EXPECT_DOUBLE_EQ(gb(0, 0), 110.0);
  EXPECT_DOUBLE_EQ(gb(1, 0), 108.0);
}

TEST(Tape, AddNSumsOperands) {
  Tape t;
  const Var a = t.variable(Matrix::Constant(1, 2, 1.0));
  const Var b = t.variable(Matrix::Constant(1, 2, 2.0));
  const Var parts[] = {a, b, a};
  const Var s = squared_norm(t, add_n(t, parts));
  EXPECT_DOUBLE_EQ(t.value(s)(0, 0), 32.0);
  t.backward(s);
  EXPECT_DOUBLE_EQ(t.grad(a)(0, 0), 16.0);
  EXPECT_DOUBLE_EQ(t.grad(b)(0, 1), 8.0);
}

TEST(Tape, BackwardNeedsScalarRoot) {
  Tape t;
  const Var a = t.variable(Matrix::Zero(2, 1));
  EXPECT_THROW(t.backward(a), ShapeError);
}

TEST(Adam, MatchesScalarReference) {
  AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  std::vector<double> p{1.0, -2.0, 0.5};
  AdamState s(cfg, p.size());
  std::vector<double> rp = p, m(3, 0.0), v(3, 0.0);
  Rng r(9);
  for (int step = 1; step <= 25; ++step) {
    std::vector<double> g{uniform(r, -1, 1), uniform(r, -1, 1), uniform(r, -1, 1)};
    adam_step(p, g, s);
    for (std::size_t i = 0; i < 3; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, step));
      const double vh = v[i] / (1 - std::pow(0.999, step));
      rp[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    }
    for (std::size_t i = 0; i < 3; ++i) ASSERT_NEAR(p[i], rp[i], 1e-12) << "step " << step;
  }
  EXPECT_EQ(s.step, 25);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> p{0.0, 0.0};
  AdamState s({0.1, 0.9, 0.999, 1e-8}, 2);
  adam_step(p, std::vector<double>{3.0, -0.001}, s);
  EXPECT_NEAR(p[0], -0.1, 1e-8);
  EXPECT_NEAR(p[1], 0.1, 1e-4);
}

TEST(Adam, NonFiniteGradientLeavesStateUntouched) {
  std::vector<double> p{1.0, 2.0};
  AdamState s({0.1, 0.9, 0.999, 1e-8}, 2);
  adam_step(p, std::vector<double>{1.0, 1.0}, s);
  const auto before = p;
  const auto m = s.first_moment;
  EXPECT_THROW(adam_step(p, std::vector<double>{std::nan(""), 1.0}, s), NumericError);
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.first_moment, m);
  EXPECT_EQ(s.step, 1);
}

TEST(GradientCheck, DetectsAWrongGradient) {
  LossFn wrong = [](std::span<const double> th, std::span<double> g) {
    if (!g.empty()) g[0] = 3.0 * th[0];  // should be 2 x
    return th[0] * th[0];
  };
  std::vector<double> th{1.0};
  EXPECT_GT(gradient_check(wrong, th, 1e-5).max_rel_err, 0.3);
  const std::vector<std::vector<double>> dirs{{1.0}};
  EXPECT_GT(directional_check(wrong, th, 1e-5, dirs).max_rel_err, 0.3);
  EXPECT_DOUBLE_EQ(th[0], 1.0);  // parameters restored
}
