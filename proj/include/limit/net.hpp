#pragma once

// Dense feed-forward networks with hand-written backprop and Adam.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace limit::net {

using Vec = std::vector<double>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Activation { Tanh, Identity };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  int in = 0;
  int out = 0;
  Vec w;  // row-major, out x in
  Vec b;
  Activation act = Activation::Identity;

  double& weight(int row, int col) { return w[static_cast<size_t>(row) * in + col]; }
  double weight(int row, int col) const { return w[static_cast<size_t>(row) * in + col]; }
};

// Inputs and pre-activations cached by one forward pass.
struct GradientTape {
  std::vector<Vec> inputs;
  std::vector<Vec> pre;
};

struct LayerGrad {
  Vec dw;
  Vec db;
};

struct Gradients {
  std::vector<LayerGrad> layers;

  void add(const Gradients& other);
  void scale(double factor);
  bool all_finite() const;
  double squared_norm() const;
};

struct ForwardResult {
  Vec output;
  GradientTape tape;
};

struct BackwardResult {
  Gradients params;
  Vec input_grad;
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  // Layer widths {in, h1, ..., out}; hidden layers use `hidden`, the last
  // layer uses `output`. Weights uniform in +-1/sqrt(fan_in).
  static DenseNet random(std::span<const int> widths, Activation hidden, Activation output,
                         std::mt19937_64& rng);
  static DenseNet zeros(std::span<const int> widths, Activation hidden, Activation output);

  int input_dim() const;
  int output_dim() const;
  size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  Vec predict(std::span<const double> input) const;
  ForwardResult forward(std::span<const double> input) const;
  // Gradients of dot(upstream, output) w.r.t. parameters and input.
  BackwardResult backward(const GradientTape& tape, std::span<const double> upstream) const;

  Gradients zero_gradients() const;
  bool all_finite() const;

  // Flat parameter access in layer order (w then b); used by gradient checks.
  double& parameter(size_t index);
  Vec flat_parameters() const;
  Vec flatten(const Gradients& grads) const;

  nlohmann::json to_json() const;
  static DenseNet from_json(const nlohmann::json& j);

  bool operator==(const DenseNet& other) const;

 private:
  void validate() const;

  std::vector<DenseLayer> layers_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(const DenseNet& net, AdamConfig config = {});

  // Returns false (and leaves the net untouched) when grads contain NaN/Inf.
  bool step(DenseNet& net, const Gradients& grads, double learning_rate);

  std::int64_t steps() const { return t_; }

  nlohmann::json to_json() const;
  static Adam from_json(const nlohmann::json& j);

 private:
  AdamConfig config_;
  Gradients m_;
  Gradients v_;
  std::int64_t t_ = 0;
};

}  // namespace limit::net
