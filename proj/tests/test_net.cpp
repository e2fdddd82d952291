#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "limit/net.hpp"

using namespace limit::net;

namespace {

// Standalone forward pass used as an oracle; shares no code with DenseNet.
Vec oracle_forward(const std::vector<DenseLayer>& layers, Vec x) {
  for (const auto& L : layers) {
    Vec y(L.out);
    for (int r = 0; r < L.out; ++r) {
      double acc = L.b[r];
      for (int c = 0; c < L.in; ++c) acc += L.w[r * L.in + c] * x[c];
      y[r] = L.act == Activation::Tanh ? std::tanh(acc) : acc;
    }
    x = std::move(y);
  }
  return x;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

DenseNet small_net(std::mt19937_64& rng) {
  const int widths[] = {3, 5, 4, 2};
  return DenseNet::random(widths, Activation::Tanh, Activation::Identity, rng);
}

}  // namespace

TEST(DenseNet, ZeroNetworkReturnsFinalBias) {
  DenseLayer L{2, 3, Vec(6, 0.0), {0.5, -1.0, 2.0}, Activation::Identity};
  DenseNet net({L});
  EXPECT_EQ(net.predict(Vec{7.0, -3.0}), (Vec{0.5, -1.0, 2.0}));
}

TEST(DenseNet, OneByOneLinear) {
  DenseNet net({DenseLayer{1, 1, {2.0}, {1.0}, Activation::Identity}});
  EXPECT_EQ(net.predict(Vec{3.0}), Vec{7.0});
}

TEST(DenseNet, ForwardMatchesOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto net = small_net(rng);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Vec x{u(rng), u(rng), u(rng)};
    const Vec got = net.predict(x);
    const Vec want = oracle_forward(net.layers(), x);
    for (size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(DenseNet, InitWithinFanInBound) {
  std::mt19937_64 rng(3);
  const int widths[] = {16, 9, 1};
  auto net = DenseNet::random(widths, Activation::Tanh, Activation::Tanh, rng);
  for (const auto& L : net.layers()) {
    const double bound = 1.0 / std::sqrt(L.in);
    for (double w : L.w) EXPECT_LE(std::abs(w), bound);
    for (double b : L.b) EXPECT_LE(std::abs(b), bound);
  }
}

TEST(DenseNet, ShapeErrors) {
  std::mt19937_64 rng(1);
  auto net = small_net(rng);
  EXPECT_THROW(net.predict(Vec{1.0, 2.0}), ShapeError);
  auto fwd = net.forward(Vec{1.0, 2.0, 3.0});
  EXPECT_THROW(net.backward(fwd.tape, Vec{1.0}), ShapeError);

  // A tape from a differently shaped net is stale.
  const int other_widths[] = {3, 6, 2};
  auto other = DenseNet::random(other_widths, Activation::Tanh, Activation::Identity, rng);
  auto other_fwd = other.forward(Vec{1.0, 2.0, 3.0});
  EXPECT_THROW(net.backward(other_fwd.tape, Vec{1.0, 1.0}), ShapeError);

  std::vector<DenseLayer> broken{DenseLayer{2, 3, Vec(6), Vec(3), Activation::Tanh},
                                 DenseLayer{4, 1, Vec(4), Vec(1), Activation::Identity}};
  EXPECT_THROW(DenseNet{broken}, ShapeError);
}

TEST(DenseNet, LinearLayerGradients) {
  DenseNet net({DenseLayer{2, 2, {1.0, 2.0, 3.0, 4.0}, {0.0, 0.0}, Activation::Identity}});
  const Vec v{0.5, -1.5};
  const Vec u{2.0, -1.0};
  auto fwd = net.forward(v);
  auto back = net.backward(fwd.tape, u);
  // dW = u v^T, dx = W^T u
  EXPECT_EQ(back.params.layers[0].dw, (Vec{1.0, -3.0, -0.5, 1.5}));
  EXPECT_EQ(back.params.layers[0].db, u);
  EXPECT_EQ(back.input_grad, (Vec{2.0 - 3.0, 4.0 - 4.0}));
}

TEST(DenseNet, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(5);
  auto net = small_net(rng);
  auto fwd = net.forward(Vec{0.1, 0.2, 0.3});
  auto back = net.backward(fwd.tape, Vec{0.0, 0.0});
  EXPECT_EQ(back.params.squared_norm(), 0.0);
  for (double g : back.input_grad) EXPECT_EQ(g, 0.0);
}

// Every parameter and input coordinate against central differences, on
// nets with at most 100 parameters.
TEST(DenseNet, BackwardMatchesFiniteDifferences) {
  constexpr double h = 1e-5;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    auto net = small_net(rng);
    ASSERT_LE(net.parameter_count(), 100u);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    Vec x{u(rng), u(rng), u(rng)};
    Vec up{u(rng), u(rng)};
    auto fwd = net.forward(x);
    auto back = net.backward(fwd.tape, up);
    const Vec analytic = net.flatten(back.params);

    for (size_t i = 0; i < net.parameter_count(); ++i) {
      const double saved = net.parameter(i);
      net.parameter(i) = saved + h;
      const double plus = dot(up, net.predict(x));
      net.parameter(i) = saved - h;
      const double minus = dot(up, net.predict(x));
      net.parameter(i) = saved;
      EXPECT_LE(rel_err(analytic[i], (plus - minus) / (2 * h)), 1e-4) << "seed " << seed << " param " << i;
    }
    for (size_t i = 0; i < x.size(); ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (dot(up, net.predict(xp)) - dot(up, net.predict(xm))) / (2 * h);
      EXPECT_LE(rel_err(back.input_grad[i], fd), 1e-4);
    }
  }
}

// d/dv of g(v, f(v)) where both nets see v: checks chaining input gradients
// across two networks the way H(s, R(s, theta)) is composed.
TEST(DenseNet, ComposedGradient) {
  std::mt19937_64 rng(11);
  const int fw[] = {2, 4, 1};
  const int gw[] = {3, 4, 1};
  auto f = DenseNet::random(fw, Activation::Tanh, Activation::Tanh, rng);
  auto g = DenseNet::random(gw, Activation::Tanh, Activation::Identity, rng);
  auto loss = [&](const Vec& v) {
    const double x = f.predict(v)[0];
    return g.predict(Vec{v[0], v[1], x})[0];
  };
  const Vec v{0.3, -0.7};
  auto ff = f.forward(v);
  auto gf = g.forward(Vec{v[0], v[1], ff.output[0]});
  auto gb = g.backward(gf.tape, Vec{1.0});
  auto fb = f.backward(ff.tape, Vec{gb.input_grad[2]});
  for (int i = 0; i < 2; ++i) {
    Vec vp = v, vm = v;
    vp[i] += 1e-6;
    vm[i] -= 1e-6;
    const double fd = (loss(vp) - loss(vm)) / 2e-6;
    EXPECT_LE(rel_err(gb.input_grad[i] + fb.input_grad[i], fd), 1e-6);
  }
}

TEST(DenseNet, JsonRoundTripIsExact) {
  std::mt19937_64 rng(9);
  auto net = small_net(rng);
  const auto j = net.to_json();
  ASSERT_TRUE(j.contains("layers"));
  EXPECT_EQ(j["layers"][0]["act"], "tanh");
  EXPECT_EQ(j["layers"][2]["act"], "id");
  const auto back = DenseNet::from_json(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(back == net);
}

TEST(DenseNet, SameSeedSameOutputs) {
  std::mt19937_64 a(77), b(77);
  auto na = small_net(a);
  auto nb = small_net(b);
  EXPECT_EQ(na.predict(Vec{0.1, 0.2, 0.3}), nb.predict(Vec{0.1, 0.2, 0.3}));
}

TEST(Adam, ZeroGradientsLeaveNetUnchanged) {
  std::mt19937_64 rng(2);
  auto net = small_net(rng);
  const auto before = net;
  Adam opt(net);
  EXPECT_TRUE(opt.step(net, net.zero_gradients(), 1e-2));
  EXPECT_TRUE(net == before);
}

TEST(Adam, QuadraticConverges) {
  // f(w) = (w - 1.5)^2 on the single weight of a 1x1 layer (bias gradient 0).
  DenseNet net({DenseLayer{1, 1, {0.0}, {0.0}, Activation::Identity}});
  Adam opt(net);
  for (int i = 0; i < 500; ++i) {
    auto g = net.zero_gradients();
    g.layers[0].dw[0] = 2.0 * (net.layers()[0].w[0] - 1.5);
    ASSERT_TRUE(opt.step(net, g, 1e-2));
  }
  EXPECT_NEAR(net.layers()[0].w[0], 1.5, 1e-3);
  EXPECT_EQ(opt.steps(), 500);
}

TEST(Adam, NonFiniteGradientsAreSkipped) {
  std::mt19937_64 rng(4);
  auto net = small_net(rng);
  const auto before = net;
  Adam opt(net);
  auto g = net.zero_gradients();
  g.layers[1].dw[3] = std::nan("");
  EXPECT_FALSE(opt.step(net, g, 1e-2));
  EXPECT_TRUE(net == before);
  EXPECT_EQ(opt.steps(), 0);
  g.layers[1].dw[3] = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(opt.step(net, g, 1e-2));
  EXPECT_TRUE(net == before);
}

TEST(Adam, JsonRoundTripContinuesIdentically) {
  std::mt19937_64 rng(6);
  auto a = small_net(rng);
  Adam opt(a);
  auto grad_at = [](const DenseNet& n) {
    auto fwd = n.forward(Vec{0.2, -0.1, 0.4});
    return n.backward(fwd.tape, Vec{1.0, -1.0}).params;
  };
  for (int i = 0; i < 3; ++i) opt.step(a, grad_at(a), 1e-2);
  auto b = a;
  Adam opt_b = Adam::from_json(nlohmann::json::parse(opt.to_json().dump()));
  for (int i = 0; i < 3; ++i) {
    opt.step(a, grad_at(a), 1e-2);
    opt_b.step(b, grad_at(b), 1e-2);
  }
  EXPECT_TRUE(a == b);
}
