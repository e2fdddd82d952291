#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "limit/human.hpp"

using namespace limit::human;
using Vec = std::vector<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Replay and score written out by hand for 2D, matching dims only.
double oracle_reward(const std::vector<AdaptationRecord>& records, double angle, double scale) {
  double total = 0.0;
  for (const auto& r : records) {
    double sx = r.start_state[0], sy = r.start_state[1];
    for (const auto& x : r.signals) {
      sx += scale * (std::cos(angle) * x[0] - std::sin(angle) * x[1]);
      sy += scale * (std::sin(angle) * x[0] + std::cos(angle) * x[1]);
    }
    total -= (sx - r.theta[0]) * (sx - r.theta[0]) + (sy - r.theta[1]) * (sy - r.theta[1]);
  }
  return total;
}

// Records produced by an interface that assumes the human applies `truth`:
// each signal is the inverse rotation of a step toward theta.
std::vector<AdaptationRecord> records_for(double truth, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<AdaptationRecord> out;
  for (int i = 0; i < n; ++i) {
    AdaptationRecord r;
    r.start_state = {0.0, 0.0};
    r.theta = {u(rng), u(rng)};
    const double dx = r.theta[0] / 10.0, dy = r.theta[1] / 10.0;
    for (int t = 0; t < 10; ++t)
      r.signals.push_back({std::cos(truth) * dx + std::sin(truth) * dy, -std::sin(truth) * dx + std::cos(truth) * dy});
    out.push_back(std::move(r));
  }
  return out;
}

double angle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

}  // namespace

TEST(Act, Examples) {
  SimulatedHuman identity(HumanKind::Align, 2, 2, {0.0, 1.0});
  const Vec a = identity.act(Vec{0.0, 0.0}, Vec{0.5, 0.2});
  EXPECT_NEAR(a[0], 0.5, 1e-15);
  EXPECT_NEAR(a[1], 0.2, 1e-15);

  SimulatedHuman flip(HumanKind::Rotate, 1, 1, {kPi, 1.0});
  EXPECT_EQ(flip.act(Vec{0.0}, Vec{0.7}), Vec{-0.7});

  SimulatedHuman quarter(HumanKind::Rotate, 2, 2, {kPi / 2, 1.0});
  const Vec q = quarter.act(Vec{0.0, 0.0}, Vec{1.0, 0.0});
  EXPECT_NEAR(q[0], 0.0, 1e-15);
  EXPECT_NEAR(q[1], 1.0, 1e-15);

  SimulatedHuman half(HumanKind::Align, 1, 1, {0.0, -0.5});
  EXPECT_EQ(half.act(Vec{3.0}, Vec{0.4}), Vec{-0.2});
}

TEST(Act, RotateIgnoresScaleAndRejectsBadDims) {
  SimulatedHuman h(HumanKind::Rotate, 2, 2, {0.3, 0.2});
  EXPECT_EQ(h.interpretation().scale, 1.0);
  EXPECT_THROW(h.act(Vec{0.0}, Vec{1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(h.act(Vec{0.0, 0.0}, Vec{1.0}), std::invalid_argument);
  EXPECT_THROW(SimulatedHuman(HumanKind::Rotate, 3, 3, {}), std::invalid_argument);
  EXPECT_THROW(SimulatedHuman(HumanKind::Rotate, 2, 3, {}), std::invalid_argument);
}

TEST(Act, NormPreservedByRotateAndContractedByAlign) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto norm = [](const Vec& v) { return std::hypot(v[0], v[1]); };
  for (int i = 0; i < 500; ++i) {
    const Vec x{u(rng), u(rng)};
    auto r = SimulatedHuman::random(HumanKind::Rotate, 2, 2, rng);
    auto a = SimulatedHuman::random(HumanKind::Align, 2, 2, rng);
    EXPECT_NEAR(norm(r.act(Vec{0.0, 0.0}, x)), norm(x), 1e-12);
    EXPECT_LE(norm(a.act(Vec{0.0, 0.0}, x)), norm(x) + 1e-12);
    auto r1 = SimulatedHuman::random(HumanKind::Rotate, 1, 1, rng);
    EXPECT_EQ(std::abs(r1.act(Vec{0.0}, Vec{x[0]})[0]), std::abs(x[0]));
  }
}

TEST(Candidates, GridShapes) {
  EXPECT_EQ(SimulatedHuman(HumanKind::Rotate, 1, 1, {}).candidates().size(), 2u);
  EXPECT_EQ(SimulatedHuman(HumanKind::Align, 1, 1, {}).candidates().size(), 2u * 21u);
  EXPECT_EQ(SimulatedHuman(HumanKind::Rotate, 2, 2, {}).candidates().size(), 72u);
  const auto align = SimulatedHuman(HumanKind::Align, 2, 2, {}).candidates();
  ASSERT_EQ(align.size(), 72u * 21u);
  EXPECT_EQ(align.front(), (Interpretation{0.0, -1.0}));
  EXPECT_NEAR(align[1].scale, -0.9, 1e-12);
  EXPECT_NEAR(align[21].angle, 2.0 * kPi / 72.0, 1e-15);
}

TEST(Adapt, EmptyRecordsAreANoOp) {
  SimulatedHuman h(HumanKind::Align, 2, 2, {1.0, 0.5});
  std::mt19937_64 rng(0);
  EXPECT_TRUE(h.adapt({}, rng).empty());
  EXPECT_EQ(h.interpretation(), (Interpretation{1.0, 0.5}));
}

TEST(Adapt, OneDimensionalFlip) {
  // Under sign +1 these signals walk toward -theta.
  AdaptationRecord r{{0.0}, {Vec{-0.5}, Vec{-0.5}, Vec{-0.5}}, {3.0}, 0.0};
  SimulatedHuman h(HumanKind::Rotate, 1, 1, {0.0, 1.0});
  std::mt19937_64 rng(0);
  const std::vector<AdaptationRecord> records{r};
  h.adapt(records, rng);
  EXPECT_NEAR(h.interpretation().angle, kPi, 1e-15);
}

TEST(Adapt, RecoversKnownAngleWithinOneCell) {
  const double truth = kPi / 3;
  const double cell = 2.0 * kPi / 72.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const auto records = records_for(truth, 10, rng);
    SimulatedHuman h(HumanKind::Rotate, 2, 2, {4.0, 1.0});
    h.adapt(records, rng);
    EXPECT_LE(angle_gap(h.interpretation().angle, truth), cell + 1e-12) << "seed " << seed;
  }
}

TEST(Adapt, MatchesBruteForceReplayOracle) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<AdaptationRecord> records;
    for (int i = 0; i < 5; ++i) {
      AdaptationRecord r{{u(rng), u(rng)}, {}, {10 * u(rng), 10 * u(rng)}, 0.0};
      for (int t = 0; t < 10; ++t) r.signals.push_back({u(rng), u(rng)});
      records.push_back(r);
    }
    HumanConfig cfg;
    cfg.adapt_samples = 5;
    cfg.adapt_window = 5;
    SimulatedHuman h(HumanKind::Align, 2, 2, {}, cfg);
    h.adapt(records, rng);  // samples all five

    double best = -INFINITY, best_angle = 0.0, best_scale = 0.0;
    for (int i = 0; i < 72; ++i) {
      for (int j = 0; j < 21; ++j) {
        const double angle = 2.0 * kPi * i / 72.0, scale = -1.0 + 0.1 * j;
        const double r = oracle_reward(records, angle, scale);
        if (std::isinf(best) || r > best + 1e-9 * std::max(1.0, std::abs(best))) {
          best = r;
          best_angle = angle;
          best_scale = scale;
        }
      }
    }
    EXPECT_NEAR(h.interpretation().angle, best_angle, 1e-12) << "seed " << seed;
    EXPECT_NEAR(h.interpretation().scale, best_scale, 1e-12) << "seed " << seed;
    EXPECT_NEAR(h.retrospective_reward(records, h.interpretation()), best, 1e-9);
  }
}

TEST(Adapt, RetrospectivelyOptimalOnItsSample) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::mt19937_64 rng(42);
  std::vector<AdaptationRecord> records;
  for (int i = 0; i < 20; ++i) {
    AdaptationRecord r{{0.0, 0.0}, {}, {10 * u(rng), 10 * u(rng)}, 0.0};
    for (int t = 0; t < 10; ++t) r.signals.push_back({u(rng), u(rng)});
    records.push_back(r);
  }
  SimulatedHuman h(HumanKind::Align, 2, 2, {});
  const auto chosen = h.adapt(records, rng);
  ASSERT_EQ(chosen.size(), 5u);
  std::vector<AdaptationRecord> sample;
  for (size_t i : chosen) {
    EXPECT_GE(i, 10u);  // drawn from the last ten
    sample.push_back(records[i]);
  }
  const double mine = h.retrospective_reward(sample, h.interpretation());
  for (const auto& c : h.candidates())
    EXPECT_LE(h.retrospective_reward(sample, c), mine + 1e-9 * std::max(1.0, std::abs(mine)));
}

TEST(Adapt, EndInteractionAppendsHistory) {
  SimulatedHuman h(HumanKind::Rotate, 1, 1, {0.0, 1.0});
  std::mt19937_64 rng(0);
  h.end_interaction({{0.0}, {Vec{-1.0}}, {2.0}, -9.0}, rng);
  EXPECT_EQ(h.history().size(), 1u);
  EXPECT_NEAR(h.interpretation().angle, kPi, 1e-15);
}

TEST(Random, InitialInterpretationIsOnTheGridAndSeeded) {
  std::mt19937_64 a(5), b(5);
  auto ha = SimulatedHuman::random(HumanKind::Align, 2, 2, a);
  auto hb = SimulatedHuman::random(HumanKind::Align, 2, 2, b);
  EXPECT_EQ(ha.interpretation(), hb.interpretation());
  const auto grid = ha.candidates();
  EXPECT_NE(std::find(grid.begin(), grid.end(), ha.interpretation()), grid.end());
}

TEST(Fold, SumsBlocksAndContracts) {
  EXPECT_EQ(fold_signal(Vec{0.3, -0.2}, 2), (Vec{0.3, -0.2}));
  const Vec f = fold_signal(Vec{1.0, 2.0, 3.0, 4.0}, 2);
  EXPECT_NEAR(f[0], 4.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(f[1], 6.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(fold_signal(Vec{1.0, 2.0, 3.0}, 2), std::invalid_argument);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec x{u(rng), u(rng), u(rng), u(rng)};
    const Vec y = fold_signal(x, 2);
    EXPECT_LE(y[0] * y[0] + y[1] * y[1], x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3] + 1e-12);
  }
}

TEST(HumanConfig, JsonRoundTrip) {
  HumanConfig c;
  c.adapt_samples = 3;
  c.angle_steps = 36;
  const auto back = HumanConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.adapt_samples, 3);
  EXPECT_EQ(back.angle_steps, 36);
  EXPECT_EQ(back.scale_steps, 21);
  EXPECT_EQ(to_string(human_kind_from_string("align")), "align");
  EXPECT_THROW(human_kind_from_string("mirror"), std::invalid_argument);
}
