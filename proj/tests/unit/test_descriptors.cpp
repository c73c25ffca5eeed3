#include "oracles.hpp"
#include "trajsal/common/errors.hpp"
#include "trajsal/saliency/descriptors.hpp"
#include "trajsal/saliency/detect.hpp"

#include <gtest/gtest.h>

using namespace trajsal;
using namespace trajsal::sal;

namespace {

nk::Matrix random_codes(Rng& r, Index dim, Index n) {
  nk::Matrix m(dim, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < dim; ++i) m(i, j) = uniform(r, -3, 3);
  return m;
}

std::vector<double> q_of(const nk::Matrix& codes) {
  const auto d = distances(codes, median_code(codes));
  return descriptors(d);
}

Scenario unlabeled(Index n) {
  Scenario s{"s", "", {}};
  for (Index i = 0; i < n; ++i) s.trajectories.emplace_back("t" + std::to_string(i), std::vector<TrajPoint>{{0, 0, 0}, {1, 1, 1}});
  return s;
}

}  // namespace

TEST(Distances, EuclideanToTheMedian) {
  nk::Matrix c(2, 3);
  c << 0, 3, 0,  //
      0, 4, 1;
  const auto d = distances(c, median_code(c));  // median (0, 1)
  EXPECT_DOUBLE_EQ(d[0], 1.0);
  EXPECT_DOUBLE_EQ(d[1], std::hypot(3.0, 3.0));
  EXPECT_DOUBLE_EQ(d[2], 0.0);
  EXPECT_THROW(distances(c, Code::Zero(3)), ShapeError);
}

TEST(Descriptors, Examples) {
  const std::vector<double> d{1, 1, 1, 1};
  for (double q : descriptors(d)) EXPECT_EQ(q, 0.0);
  const std::vector<double> e{1, 3};  // mean 2, population sd 1
  EXPECT_EQ(descriptors(e), (std::vector<double>{1.0, 1.0}));
  const std::vector<double> one{1};
  EXPECT_THROW(descriptors(one), DataError);
}

TEST(Descriptors, MatchOracle) {
  Rng r(1);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> d(static_cast<std::size_t>(uniform_int(r, 2, 30)));
    for (double& v : d) v = uniform(r, 0, 10);
    const auto q = descriptors(d);
    const auto ref = oracle::descriptors(d);
    for (std::size_t i = 0; i < d.size(); ++i) ASSERT_NEAR(q[i], ref[i], 1e-9);
  }
}

TEST(Descriptors, RobustStatistics) {
  const std::vector<double> d{1, 2, 3, 4, 100};
  const auto s = robust_stats(d);
  EXPECT_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.sigma, 1.4826 * 1.0);
  EXPECT_THROW(robust_stats(std::vector<double>{}), DataError);
}

TEST(Descriptors, InvariantToScalingAndTranslationOfCodes) {
  Rng r(2);
  for (int k = 0; k < 1000; ++k) {
    const Index n = uniform_int(r, 3, 25);
    const auto c = random_codes(r, 8, n);
    const double a = std::exp(uniform(r, -3, 3));
    nk::Vector shift(8);
    for (Index i = 0; i < 8; ++i) shift(i) = uniform(r, -50, 50);
    const nk::Matrix moved = (a * c).colwise() + shift;
    const auto q = q_of(c), p = q_of(moved);
    for (std::size_t i = 0; i < q.size(); ++i) ASSERT_NEAR(q[i], p[i], 1e-9) << "case " << k;
  }
}

TEST(Descriptors, InvariantToMemberOrder) {
  Rng r(3);
  for (int k = 0; k < 200; ++k) {
    const Index n = uniform_int(r, 3, 20);
    const auto c = random_codes(r, 6, n);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), r);
    nk::Matrix p(6, n);
    for (Index j = 0; j < n; ++j) p.col(j) = c.col(perm[static_cast<std::size_t>(j)]);
    const auto q = q_of(c), qp = q_of(p);
    for (Index j = 0; j < n; ++j)
      ASSERT_NEAR(qp[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])], 1e-12);
  }
}

TEST(Verdicts, MonotoneInLambda) {
  Rng r(4);
  for (int k = 0; k < 200; ++k) {
    const Index n = uniform_int(r, 3, 25);
    const auto c = random_codes(r, 5, n);
    const auto sc = unlabeled(n);
    double l1 = uniform(r, 0, 4), l2 = uniform(r, 0, 4);
    if (l1 > l2) std::swap(l1, l2);
    const auto v1 = detect_codes(c, sc, l1).verdicts();
    const auto v2 = detect_codes(c, sc, l2).verdicts();
    for (std::size_t i = 0; i < v1.size(); ++i) ASSERT_TRUE(!v2[i] || v1[i]);  // flagged at l2 implies flagged at l1
  }
}
