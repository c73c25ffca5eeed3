#include "trajsal/common/errors.hpp"
#include "trajsal/stms/generator.hpp"
#include "trajsal/trajdata/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace trajsal;
using namespace trajsal::stms;

namespace {

double heading(const Trajectory& t, std::size_t i) { return std::atan2(t[i].y - t[i - 1].y, t[i].x - t[i - 1].x); }

double wrap(double a) {
  while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2 * std::numbers::pi;
  return a;
}

}  // namespace

TEST(Generator, NoiselessLineFollowsKinematics) {
  ClassParams p;
  p.cls = TrajClass::line;
  p.speed = 10;
  p.direction = 0;
  p.length = 20;
  p.noise_scale = 0;
  Rng r(1);
  const auto t = gen_trajectory(p, r);
  ASSERT_EQ(t.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_NEAR(t[i].x, 10.0 * static_cast<double>(i), 1e-9);
    EXPECT_NEAR(t[i].y, 0.0, 1e-9);
  }
}

TEST(Generator, CircularWithoutRotationIsALine) {
  ClassParams p;
  p.cls = TrajClass::circular;
  p.angular_velocity = 0;
  p.direction = 1.0;
  p.noise_scale = 0;
  Rng r(2);
  const auto t = gen_trajectory(p, r);
  for (std::size_t i = 2; i < t.size(); ++i) EXPECT_NEAR(wrap(heading(t, i) - heading(t, i - 1)), 0.0, 1e-9);
}

TEST(Generator, NoiselessCircularTurnsAtConstantRate) {
  Rng r(3);
  for (int k = 0; k < 50; ++k) {
    ClassParams p;
    p.cls = TrajClass::circular;
    p.speed = uniform(r, kMinSpeed, kMaxSpeed);
    p.direction = uniform(r, 0, 2 * std::numbers::pi);
    p.angular_velocity = uniform(r, -kMaxAngularVelocity, kMaxAngularVelocity);
    p.length = uniform_int(r, kMinLength, kMaxLength);
    p.noise_scale = 0;
    const auto t = gen_trajectory(p, r);
    for (std::size_t i = 1; i < t.size(); ++i)
      ASSERT_NEAR(std::hypot(t[i].x - t[i - 1].x, t[i].y - t[i - 1].y), p.speed, 1e-9);
    for (std::size_t i = 2; i < t.size(); ++i)
      ASSERT_NEAR(wrap(heading(t, i) - heading(t, i - 1)), p.angular_velocity, 1e-9);
  }
}

TEST(Generator, NoiselessSharpTurnChangesDirectionOnce) {
  Rng r(4);
  for (int k = 0; k < 50; ++k) {
    ClassParams p;
    p.cls = TrajClass::sharp_turn;
    p.length = uniform_int(r, kMinLength, kMaxLength);
    p.turn_instant = uniform_int(r, 1, p.length - 2);
    p.turn_angle = (k % 2 ? 1 : -1) * uniform(r, min_turn_angle(), max_turn_angle());
    p.speed = uniform(r, kMinSpeed, kMaxSpeed);
    p.noise_scale = 0;
    const auto t = gen_trajectory(p, r);
    int changes = 0;
    double total = 0;
    for (std::size_t i = 2; i < t.size(); ++i) {
      const double d = wrap(heading(t, i) - heading(t, i - 1));
      if (std::abs(d) > 1e-9) {
        ++changes;
        total += d;
      }
    }
    ASSERT_EQ(changes, 1);
    ASSERT_NEAR(total, p.turn_angle, 1e-9);
  }
}

TEST(Generator, StartsAtOriginAndNoiseIsSmooth) {
  Rng r(5);
  for (int k = 0; k < 200; ++k) {
    ClassParams p;
    p.cls = TrajClass::line;
    p.speed = uniform(r, kMinSpeed, kMaxSpeed);
    p.direction = uniform(r, 0, 6.28);
    p.length = kMaxLength;
    p.noise_scale = 0.3;
    const auto t = gen_trajectory(p, r);
    ASSERT_EQ(t.front().x, 0.0);
    ASSERT_EQ(t.front().y, 0.0);
    // A noiseless line has zero second differences, so these are all noise.
    const double bound = noise_second_difference_bound(p.noise_scale);
    for (std::size_t i = 2; i < t.size(); ++i) {
      ASSERT_LE(std::abs(t[i].x - 2 * t[i - 1].x + t[i - 2].x), bound + 1e-9);
      ASSERT_LE(std::abs(t[i].y - 2 * t[i - 1].y + t[i - 2].y), bound + 1e-9);
    }
  }
}

TEST(Generator, RejectsOutOfRangeParameters) {
  Rng r(6);
  ClassParams p;
  p.speed = 25;
  EXPECT_THROW(gen_trajectory(p, r), DataError);
  p = {};
  p.length = 10;
  EXPECT_THROW(gen_trajectory(p, r), DataError);
  p = {};
  p.cls = TrajClass::sharp_turn;
  p.turn_angle = 0.1;
  p.turn_instant = 5;
  EXPECT_THROW(gen_trajectory(p, r), DataError);
  p.turn_angle = 1.0;
  p.turn_instant = 0;
  EXPECT_THROW(gen_trajectory(p, r), DataError);
}

TEST(Scenario, ZeroSalientProbabilityGivesOnlyNormals) {
  Rng r(7);
  for (int k = 0; k < 20; ++k) {
    const auto spec = random_scenario_spec(r, 10, 0.0);
    const auto s = gen_scenario(spec, r);
    ASSERT_EQ(s.size(), 10u);
    ASSERT_EQ(s.salient_count(), 0u);
  }
}

TEST(Scenario, SalientMemberIsLastAndSameClass) {
  Rng r(8);
  for (int k = 0; k < 30; ++k) {
    const auto spec = random_scenario_spec(r, 10, 1.0);
    const auto s = gen_scenario(spec, r);
    ASSERT_EQ(s.size(), 11u);
    ASSERT_EQ(s.trajectories.back().label(), Label::salient);
    ASSERT_EQ(s.salient_count(), 1u);
    for (const auto& t : s.trajectories) {
      ASSERT_EQ(t.front().x, 0.0);
      ASSERT_GE(t.size(), static_cast<std::size_t>(kMinLength));
      ASSERT_LE(t.size(), static_cast<std::size_t>(kMaxLength));
    }
  }
}

TEST(Batch, SizeAndScenarioPartition) {
  Rng r(9);
  for (int k = 0; k < 50; ++k) {
    const auto b = gen_training_batch(r);
    ASSERT_GE(b.size(), 60u);
    ASSERT_LE(b.size(), 66u);
    ASSERT_EQ(b.scenario_ids.size(), 6u);
    std::size_t total = 0;
    for (const auto& g : b.groups()) {
      ASSERT_TRUE(g.size() == 10 || g.size() == 11);
      total += g.size();
    }
    ASSERT_EQ(total, b.size());
  }
  std::vector<ScenarioSpec> specs;
  for (int i = 0; i < 6; ++i) specs.push_back(random_scenario_spec(r, 10, 0.0));
  EXPECT_EQ(gen_training_batch(specs, r).size(), 60u);
  EXPECT_THROW(gen_training_batch(std::span(specs).first(5), r), DataError);
}

TEST(EvalSet, SizesAndLongRunSalientRate) {
  Rng r(10);
  const auto set = gen_eval_set(10000, r);
  ASSERT_EQ(set.size(), 10000u);
  std::size_t salient = 0, total = 0;
  for (const auto& s : set) {
    ASSERT_TRUE(s.size() == 20 || s.size() == 21);
    salient += s.salient_count();
    total += s.size();
  }
  const double rate = static_cast<double>(salient) / static_cast<double>(total);
  EXPECT_NEAR(rate, 0.025, 0.005);
  EXPECT_THROW(gen_eval_set(0, r), DataError);
}

TEST(EvalSet, SeededRegenerationIsIdentical) {
  const auto a = gen_split(Split::val, 50, 42);
  const auto b = gen_split(Split::val, 50, 42);
  EXPECT_EQ(flatten(a), flatten(b));
  const auto c = gen_split(Split::test, 50, 42);
  EXPECT_NE(flatten(a), flatten(c));
  EXPECT_EQ(a.size(), 50u);
  std::set<std::string> ids;
  for (const auto& t : flatten(a)) ids.insert(t.id());
  EXPECT_EQ(ids.size(), flatten(a).size());
}
