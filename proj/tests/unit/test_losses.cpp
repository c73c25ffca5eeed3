#include "oracles.hpp"
#include "trajsal/autoencoder/losses.hpp"
#include "trajsal/autoencoder/network.hpp"
#include "trajsal/common/errors.hpp"
#include "trajsal/numkernel/gradient_check.hpp"
#include "trajsal/stms/generator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace trajsal;
using namespace trajsal::ae;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.encoder_dims = {6, 5};
  c.code_dim = 4;
  c.decoder_hidden = 5;
  c.decoder_dims = {4, 2};
  return c;
}

nk::Matrix random_codes(Rng& r, Index dim, Index n) {
  nk::Matrix m(dim, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < dim; ++i) m(i, j) = uniform(r, -2, 2);
  return m;
}

Batch small_batch(std::uint64_t seed) {
  Rng r(seed);
  Batch b;
  for (int k = 0; k < 2; ++k) {
    auto spec = stms::random_scenario_spec(r, 3, 1.0);
    spec.base.length = stms::kMinLength;
    spec.base.turn_instant = spec.base.length / 2;
    spec.jitter.length_frac = 0.2;
    b.add(stms::gen_scenario(spec, r, "s" + std::to_string(k)));
  }
  return b;
}

std::vector<std::vector<double>> random_directions(Rng& r, std::size_t n, int count) {
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < count; ++k) {
    std::vector<double> v(n);
    double ss = 0;
    for (double& x : v) {
      x = standard_normal(r);
      ss += x * x;
    }
    for (double& x : v) x /= std::sqrt(ss);
    dirs.push_back(std::move(v));
  }
  return dirs;
}

}  // namespace

TEST(MedianCode, OddAndEvenCounts) {
  nk::Matrix c(2, 4);
  c << 1, 5, 3, 9,  //
      4, 2, 8, 6;
  const std::size_t odd[] = {0, 1, 2};
  EXPECT_EQ(median_code(c, odd), (Code(2) << 3, 4).finished());
  EXPECT_EQ(median_code(c), (Code(2) << 4, 5).finished());
  const std::size_t none[] = {9};
  EXPECT_THROW(median_code(c, none), Error);
}

TEST(MedianCode, PermutationInvariant) {
  Rng r(1);
  for (int k = 0; k < 200; ++k) {
    const Index n = uniform_int(r, 1, 12);
    const auto c = random_codes(r, 6, n);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), r);
    nk::Matrix p(6, n);
    for (Index j = 0; j < n; ++j) p.col(j) = c.col(perm[static_cast<std::size_t>(j)]);
    ASSERT_EQ(median_code(c), median_code(p));
  }
}

TEST(ConsistencyLoss, MatchesOracle) {
  Rng r(2);
  for (int k = 0; k < 100; ++k) {
    const Index n = uniform_int(r, 2, 15);
    const auto c = random_codes(r, 5, n);
    Groups g(static_cast<std::size_t>(uniform_int(r, 1, static_cast<int>(std::min<Index>(n, 3)))));
    for (Index j = 0; j < n; ++j) g[static_cast<std::size_t>(j) % g.size()].push_back(static_cast<std::size_t>(j));
    std::vector<oracle::Vec> cols;
    for (Index j = 0; j < n; ++j) cols.emplace_back(c.col(j).data(), c.col(j).data() + c.rows());
    ASSERT_NEAR(consistency_loss(c, g), oracle::consistency_loss(cols, g), 1e-9);
  }
}

TEST(ConsistencyLoss, ZeroForIdenticalCodes) {
  nk::Matrix c = nk::Matrix::Ones(3, 5);
  EXPECT_EQ(consistency_loss(c, {{0, 1, 2, 3, 4}}), 0.0);
}

TEST(ConsistencyGradient, ThroughModeMatchesFiniteDifferences) {
  Rng r(3);
  for (int k = 0; k < 20; ++k) {
    const Index n = uniform_int(r, 2, 9);
    const auto c0 = random_codes(r, 4, n);
    Groups g{{}, {}};
    for (Index j = 0; j < n; ++j) g[static_cast<std::size_t>(j % 2)].push_back(static_cast<std::size_t>(j));
    if (g[1].empty()) g.pop_back();
    nk::LossFn f = [&](std::span<const double> th, std::span<double> grad) {
      nk::Tape t;
      const auto codes = t.variable(Eigen::Map<const nk::Matrix>(th.data(), 4, n));
      const auto y = consistency(t, codes, g, MedianGradient::through);
      if (!grad.empty()) {
        t.backward(y);
        Eigen::Map<nk::Matrix>(grad.data(), 4, n) = t.grad(codes);
      }
      return t.value(y)(0, 0);
    };
    std::vector<double> th(c0.data(), c0.data() + c0.size());
    ASSERT_LT(nk::gradient_check(f, th, 1e-7).max_rel_err, 1e-5);
  }
}

TEST(ConsistencyGradient, StopModeSumsUnitResiduals) {
  Rng r(4);
  const auto c = random_codes(r, 3, 5);
  nk::Tape t;
  const auto codes = t.variable(c);
  t.backward(consistency(t, codes, {{0, 1, 2, 3, 4}}, MedianGradient::stop));
  const Code med = median_code(c);
  const nk::Matrix g = t.grad(codes);
  for (Index j = 0; j < 5; ++j) {
    const nk::Vector res = c.col(j) - med;
    const nk::Vector expect = res.norm() > 0 ? nk::Vector(res / res.norm()) : nk::Vector(nk::Vector::Zero(3));
    EXPECT_LT((g.col(j) - expect).norm(), 1e-12);
  }
}

TEST(ReconstructionLoss, MatchesOracle) {
  Rng r(5);
  for (int k = 0; k < 10; ++k) {
    const auto m = Model::initialized(tiny(), r);
    const auto b = small_batch(static_cast<std::uint64_t>(100 + k));
    Rng a(static_cast<std::uint64_t>(k)), o(static_cast<std::uint64_t>(k));
    const double lr = reconstruction_loss(m, b.trajectories, a);
    ASSERT_NEAR(lr, oracle::reconstruction_loss(m, b.trajectories, o), 1e-9 * lr);
  }
}

TEST(ReconstructionError, SumOfSquaredPositionErrors) {
  const Trajectory a("a", {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}});
  const Trajectory b("b", {{0, 0, 0}, {1, 2, 1}, {2, 2, 5}});
  EXPECT_DOUBLE_EQ(reconstruction_error(a, b), 1.0 + 9.0);
  const Trajectory c("c", {{0, 0, 0}, {1, 2, 1}});
  EXPECT_THROW(reconstruction_error(a, c), Error);
}

TEST(TotalLoss, CombinesTermsWithBeta) {
  Rng r(6);
  const auto m = Model::initialized(tiny(), r);
  const auto b = small_batch(7);
  Rng a(1), o(1), c(1);
  const auto l0 = total_loss(m, b, 0.0, a);
  EXPECT_NEAR(l0.reconstruction, oracle::reconstruction_loss(m, b.trajectories, o), 1e-9 * l0.reconstruction);
  EXPECT_EQ(l0.total, l0.reconstruction);
  const auto l5 = total_loss(m, b, 1e5, c);
  EXPECT_EQ(l5.reconstruction, l0.reconstruction);
  EXPECT_NEAR(l5.total, l5.reconstruction + 1e5 * l5.consistency, 1e-9 * l5.total);
  EXPECT_GT(l5.consistency, 0.0);
}

TEST(TotalLoss, ConsistencyUsesCodesOfTheSameDraw) {
  Rng r(8);
  const auto m = Model::initialized(tiny(), r);
  const auto b = small_batch(9);
  Rng a(3), e(3);
  const auto l = total_loss(m, b, 1.0, a);
  const auto codes = encode_all(m, b.trajectories, e);  // same first draws: encoder h, c
  EXPECT_NEAR(l.consistency, consistency_loss(codes, b.groups()), 1e-9);
}

class FullGradient : public ::testing::TestWithParam<double> {};

TEST_P(FullGradient, DirectionalAndCoordinateChecks) {
  const double beta = GetParam();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng r(seed);
    auto m = Model::initialized(tiny(), r);
    const auto b = small_batch(seed + 10);
    nk::LossFn f = [&](std::span<const double> th, std::span<double> g) {
      std::copy(th.begin(), th.end(), m.params().begin());
      Rng s(seed + 20);
      return total_loss(m, b, beta, s, g).total;
    };
    std::vector<double> th(m.params().begin(), m.params().end());
    const auto dirs = random_directions(r, th.size(), 8);
    EXPECT_LT(nk::directional_check(f, th, 1e-5, dirs).max_rel_err, 1e-6) << "seed " << seed;

    std::vector<double> g(th.size());
    f(th, g);
    double gmax = 0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    std::vector<std::size_t> coords;
    for (const auto& s : m.layout().slots())
      for (int k = 0; k < 3; ++k) coords.push_back(static_cast<std::size_t>(s.offset + uniform_int(r, 0, static_cast<int>(s.size()) - 1)));
    EXPECT_LT(nk::gradient_check(f, th, 1e-5, coords, 1e-5 * gmax).max_rel_err, 1e-4) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Beta, FullGradient, ::testing::Values(0.0, 1e5));

TEST(TotalLoss, GradientBufferIsOverwritten) {
  Rng r(11);
  const auto m = Model::initialized(tiny(), r);
  const auto b = small_batch(12);
  std::vector<double> g1(m.param_count()), g2(m.param_count(), 123.0);
  Rng a(1), c(1);
  total_loss(m, b, 1.0, a, g1);
  total_loss(m, b, 1.0, c, g2);
  EXPECT_EQ(g1, g2);
  std::vector<double> bad(3);
  Rng d(1);
  EXPECT_THROW(total_loss(m, b, 1.0, d, bad), ShapeError);
}
