#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "limit/baselines.hpp"

using namespace limit::baselines;

TEST(Linear, ZeroMatrixGivesZeroSignal) {
  const auto iface = linear_from_vector(Vec(2 * 4, 0.0), 2, 2, 2);
  EXPECT_EQ(iface.signal(Vec{1.0, 2.0}, Vec{-3.0, 4.0}), (Vec{0.0, 0.0}));
}

TEST(Linear, ClampsEachComponent) {
  const auto iface = linear_from_vector({1.0, 1.0}, 1, 1, 1);
  EXPECT_EQ(iface.signal(Vec{0.5}, Vec{10.0}), Vec{1.0});
  EXPECT_EQ(iface.signal(Vec{-0.5}, Vec{-10.0}), Vec{-1.0});
  EXPECT_EQ(iface.signal(Vec{0.25}, Vec{0.25}), Vec{0.5});
}

TEST(Linear, MatchesHandMatrixMultiply) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto iface = naive_init(rng, 4, 2, 2);
    const Vec s{u(rng), u(rng)}, th{u(rng), u(rng)};
    const Vec in{s[0], s[1], th[0], th[1]};
    const Vec x = iface.signal(s, th);
    for (int r = 0; r < 4; ++r) {
      double acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += iface.weights[r * 4 + c] * in[c];
      EXPECT_NEAR(x[r], std::clamp(acc, -1.0, 1.0), 1e-15);
    }
  }
  EXPECT_THROW(naive_init(rng, 1, 1, 1).signal(Vec{0.0, 0.0}, Vec{0.0}), std::invalid_argument);
}

TEST(Naive, SeededEntriesInBox) {
  std::mt19937_64 a(9), b(9), c(10);
  const auto wa = naive_init(a, 2, 2, 4);
  const auto wb = naive_init(b, 2, 2, 4);
  const auto wc = naive_init(c, 2, 2, 4);
  EXPECT_EQ(wa.weights, wb.weights);
  EXPECT_NE(wa.weights, wc.weights);
  ASSERT_EQ(wa.weights.size(), 12u);
  for (double w : wa.weights) {
    EXPECT_GE(w, -1.0);
    EXPECT_LE(w, 1.0);
  }
}

TEST(ExpectedImprovement, ClosedForm) {
  // sd = 0 degenerates to max(mean - best, 0).
  EXPECT_EQ(expected_improvement(3.0, 0.0, 1.0), 2.0);
  EXPECT_EQ(expected_improvement(0.0, 0.0, 1.0), 0.0);
  // mean == best: sd * phi(0).
  EXPECT_NEAR(expected_improvement(1.0, 2.0, 1.0), 2.0 / std::sqrt(2.0 * M_PI), 1e-12);
  // Hand evaluation at z = 0.5.
  const double z = 0.5, pdf = std::exp(-z * z / 2) / std::sqrt(2 * M_PI), cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  EXPECT_NEAR(expected_improvement(1.5, 1.0, 1.0), 0.5 * cdf + pdf, 1e-12);
}

TEST(GaussianProcess, InterpolatesObservations) {
  const std::vector<Observation> data{{{-0.5}, -100.0}, {{0.5}, -1.0}};
  GaussianProcess gp(data, 0.5, 1e-3);
  for (const auto& o : data) {
    const auto [mean, sd] = gp.predict(o.point);
    EXPECT_NEAR(mean, o.reward, 0.5);
    EXPECT_LT(sd, 2.0);
  }
  // EI near the better point beats EI far from both.
  EXPECT_GT(gp.expected_improvement(Vec{0.5}, -1.0), gp.expected_improvement(Vec{-0.5}, -1.0));
  EXPECT_GT(gp.expected_improvement(Vec{0.6}, -1.0), 0.0);
}

TEST(Bayes, WarmupProposalsAreUniformInBox) {
  BayesState state(6);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    const Vec p = state.propose(rng);
    ASSERT_EQ(p.size(), 6u);
    for (double v : p) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
    state.observe(p, -static_cast<double>(i));
  }
  EXPECT_EQ(state.observations().size(), 5u);
}

TEST(Bayes, ProposalsStayInBoxAfterWarmup) {
  BayesState state(3);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 15; ++i) {
    const Vec p = state.propose(rng);
    for (double v : p) {
      ASSERT_GE(v, -1.0);
      ASSERT_LE(v, 1.0);
    }
    state.observe(p, -(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
  }
}

TEST(Bayes, ObserveKeepsDuplicatesAndRoundTrips) {
  BayesState state(2);
  state.observe({0.1, 0.2}, -3.0);
  state.observe({0.1, 0.2}, -5.0);
  EXPECT_EQ(state.observations().size(), 2u);
  EXPECT_THROW(state.observe({0.1}, 0.0), std::invalid_argument);
  EXPECT_THROW(state.observe({0.1, NAN}, 0.0), std::invalid_argument);

  const auto back = BayesState::from_json(nlohmann::json::parse(state.to_json().dump()));
  EXPECT_EQ(back.dim(), 2);
  ASSERT_EQ(back.observations().size(), 2u);
  EXPECT_EQ(back.observations()[1].reward, -5.0);
  EXPECT_EQ(back.to_json(), state.to_json());
  std::mt19937_64 a(4), b(4);
  EXPECT_EQ(state.propose(a), back.propose(b));
}

// 1D toy with optimum 0.37 inside the box: Bayes's median best-after-40 beats
// random search's median over 20 seeds.
TEST(Bayes, BeatsRandomSearchOnToyObjective) {
  auto f = [](double w) { return -(w - 0.37) * (w - 0.37); };
  std::vector<double> bayes_best, random_best;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    BayesState state(1);
    std::mt19937_64 rng(seed);
    double best = -INFINITY;
    for (int i = 0; i < 40; ++i) {
      const Vec p = state.propose(rng);
      const double r = f(p[0]);
      best = std::max(best, r);
      state.observe(p, r);
    }
    bayes_best.push_back(best);

    std::mt19937_64 rrng(seed + 1000);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double rbest = -INFINITY;
    for (int i = 0; i < 40; ++i) rbest = std::max(rbest, f(u(rrng)));
    random_best.push_back(rbest);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[9] + v[10]);
  };
  EXPECT_GT(median(bayes_best), median(random_best));
}
