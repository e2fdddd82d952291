#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "limit/env.hpp"

using namespace limit::env;

TEST(Step, AddsActionToState) {
  EXPECT_EQ(step(Vec{1.0, -2.0}, Vec{0.5, 0.5}), (Vec{1.5, -1.5}));
  EXPECT_EQ(step(Vec{0.0}, Vec{-3.0}), Vec{-3.0});
  EXPECT_THROW(step(Vec{0.0}, Vec{1.0, 1.0}), std::invalid_argument);
}

TEST(Reward, NegativeSquaredDistance) {
  EXPECT_EQ(goal_reward(Vec{3.0, 4.0}, Vec{0.0, 0.0}), -25.0);
  EXPECT_EQ(goal_reward(Vec{2.0}, Vec{2.0}), 0.0);
  InteractionLog log;
  log.theta = {1.0};
  log.final_state = {4.0};
  EXPECT_EQ(reward(log), -9.0);
}

TEST(Reward, UnderActuatedUsesNearestGoal) {
  // theta packs two 2D goals; the nearer one counts.
  const Vec theta{5.0, 5.0, -1.0, 0.0};
  EXPECT_EQ(goal_gap_squared(Vec{0.0, 0.0}, theta), 1.0);
  EXPECT_EQ(goal_gap_squared(Vec{4.0, 5.0}, theta), 1.0);
  EXPECT_EQ(goal_gap_squared(Vec{5.0, 5.0}, theta), 0.0);
  EXPECT_THROW(goal_gap_squared(Vec{0.0, 0.0}, Vec{1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST(Metrics, ErrorDistanceTime) {
  InteractionLog log;
  log.theta = {3.0, 0.0};
  log.steps = {{Vec{0.0, 0.0}, Vec{}, Vec{3.0, 4.0}}, {Vec{3.0, 4.0}, Vec{}, Vec{0.0, -4.0}}};
  log.final_state = {3.0, 0.0};
  log.duration = 2.0;
  const auto m = metrics(log);
  EXPECT_EQ(m.error, 0.0);
  EXPECT_EQ(m.distance, 9.0);
  EXPECT_EQ(m.time, 2.0);
}

TEST(SampleTheta, UniformInBoxWithinThreeSigma) {
  auto c = preset("sim2d");
  std::mt19937_64 rng(123);
  constexpr int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec th = sample_theta(c, rng);
    ASSERT_EQ(th.size(), 2u);
    for (double v : th) {
      ASSERT_GE(v, -10.0);
      ASSERT_LE(v, 10.0);
    }
    sum += th[0];
    sum_sq += th[0] * th[0];
  }
  // U(-10, 10): mean 0, variance 100/3.
  const double sigma_mean = std::sqrt(100.0 / 3.0 / n);
  EXPECT_LE(std::abs(sum / n), 3 * sigma_mean);
  EXPECT_NEAR(sum_sq / n, 100.0 / 3.0, 0.5);
}

TEST(SampleTheta, DegenerateBoxIsConstant) {
  auto c = preset("sim1d");
  c.theta_low = {4.0};
  c.theta_high = {4.0};
  c.validate();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_theta(c, rng), Vec{4.0});
}

TEST(Presets, Dimensions) {
  struct Want {
    const char* name;
    int s, x, th, n;
  };
  for (const auto& w : {Want{"sim1d", 1, 1, 1, 40}, Want{"sim2d", 2, 2, 2, 100}, Want{"over4x2", 2, 4, 2, 100},
                        Want{"under2x4", 2, 2, 4, 100}}) {
    const auto c = preset(w.name);
    EXPECT_EQ(c.state_dim, w.s);
    EXPECT_EQ(c.signal_dim, w.x);
    EXPECT_EQ(c.theta_dim, w.th);
    EXPECT_EQ(c.interactions, w.n);
    EXPECT_EQ(c.horizon, 10);
    EXPECT_EQ(c.start_state, Vec(w.s, 0.0));
    EXPECT_EQ(c.theta_low, Vec(w.th, -10.0));
    EXPECT_EQ(c.theta_high, Vec(w.th, 10.0));
    EXPECT_NO_THROW(c.validate());
  }
  EXPECT_EQ(preset("under2x4").goal_count(), 2);
  EXPECT_THROW(preset("sim3d"), std::invalid_argument);
  EXPECT_EQ(preset_names().size(), 4u);
}

TEST(EnvConfig, ValidationAndJson) {
  auto c = preset("sim2d");
  const auto back = EnvConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json(), c.to_json());

  auto bad = c;
  bad.theta_dim = 3;
  bad.theta_low.assign(3, -1.0);
  bad.theta_high.assign(3, 1.0);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.theta_low = {1.0, 1.0};
  bad.theta_high = {0.0, 2.0};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.horizon = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.start_state = {0.0};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
