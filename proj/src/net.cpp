#include "limit/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace limit::net {

std::string to_string(Activation act) { return act == Activation::Tanh ? "tanh" : "id"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "id") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

namespace {

bool finite(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

DenseNet build(std::span<const int> widths, Activation hidden, Activation output,
               std::mt19937_64* rng) {
  if (widths.size() < 2) throw ShapeError("network needs at least input and output widths");
  std::vector<DenseLayer> layers;
  for (size_t i = 0; i + 1 < widths.size(); ++i) {
    DenseLayer layer;
    layer.in = widths[i];
    layer.out = widths[i + 1];
    layer.act = (i + 2 == widths.size()) ? output : hidden;
    layer.w.assign(static_cast<size_t>(layer.in) * layer.out, 0.0);
    layer.b.assign(layer.out, 0.0);
    if (rng) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (double& v : layer.w) v = dist(*rng);
      for (double& v : layer.b) v = dist(*rng);
    }
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

}  // namespace

void Gradients::add(const Gradients& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("gradient layer count mismatch");
  for (size_t l = 0; l < layers.size(); ++l) {
    auto& dst = layers[l];
    const auto& src = other.layers[l];
    if (dst.dw.size() != src.dw.size() || dst.db.size() != src.db.size())
      throw ShapeError("gradient shape mismatch");
    for (size_t i = 0; i < dst.dw.size(); ++i) dst.dw[i] += src.dw[i];
    for (size_t i = 0; i < dst.db.size(); ++i) dst.db[i] += src.db[i];
  }
}

void Gradients::scale(double factor) {
  for (auto& layer : layers) {
    for (double& v : layer.dw) v *= factor;
    for (double& v : layer.db) v *= factor;
  }
}

bool Gradients::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const LayerGrad& g) { return finite(g.dw) && finite(g.db); });
}

double Gradients::squared_norm() const {
  double total = 0.0;
  for (const auto& layer : layers) {
    for (double v : layer.dw) total += v * v;
    for (double v : layer.db) total += v * v;
  }
  return total;
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { validate(); }

void DenseNet::validate() const {
  if (layers_.empty()) throw ShapeError("network has no layers");
  for (size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.in <= 0 || layer.out <= 0) throw ShapeError("layer dimensions must be positive");
    if (layer.w.size() != static_cast<size_t>(layer.in) * layer.out ||
        layer.b.size() != static_cast<size_t>(layer.out))
      throw ShapeError("layer " + std::to_string(i) + " parameter sizes do not match its shape");
    if (i > 0 && layers_[i - 1].out != layer.in)
      throw ShapeError("layer " + std::to_string(i) + " input does not chain with previous output");
  }
}

DenseNet DenseNet::random(std::span<const int> widths, Activation hidden, Activation output,
                          std::mt19937_64& rng) {
  return build(widths, hidden, output, &rng);
}

DenseNet DenseNet::zeros(std::span<const int> widths, Activation hidden, Activation output) {
  return build(widths, hidden, output, nullptr);
}

int DenseNet::input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
int DenseNet::output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }

size_t DenseNet::parameter_count() const {
  size_t n = 0;
  for (const auto& layer : layers_) n += layer.w.size() + layer.b.size();
  return n;
}

Vec DenseNet::predict(std::span<const double> input) const { return forward(input).output; }

ForwardResult DenseNet::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_dim())
    throw ShapeError("forward: expected input of length " + std::to_string(input_dim()) +
                     ", got " + std::to_string(input.size()));
  ForwardResult result;
  result.tape.inputs.reserve(layers_.size());
  result.tape.pre.reserve(layers_.size());
  Vec activation(input.begin(), input.end());
  for (const auto& layer : layers_) {
    Vec pre(layer.b);
    for (int r = 0; r < layer.out; ++r) {
      const double* row = layer.w.data() + static_cast<size_t>(r) * layer.in;
      double acc = 0.0;
      for (int c = 0; c < layer.in; ++c) acc += row[c] * activation[c];
      pre[r] += acc;
    }
    Vec out(pre);
    if (layer.act == Activation::Tanh)
      for (double& v : out) v = std::tanh(v);
    result.tape.inputs.push_back(std::move(activation));
    result.tape.pre.push_back(std::move(pre));
    activation = std::move(out);
  }
  result.output = std::move(activation);
  return result;
}

BackwardResult DenseNet::backward(const GradientTape& tape, std::span<const double> upstream) const {
  if (tape.inputs.size() != layers_.size() || tape.pre.size() != layers_.size())
    throw ShapeError("backward: tape does not belong to this network");
  for (size_t l = 0; l < layers_.size(); ++l) {
    if (static_cast<int>(tape.inputs[l].size()) != layers_[l].in ||
        static_cast<int>(tape.pre[l].size()) != layers_[l].out)
      throw ShapeError("backward: stale tape for layer " + std::to_string(l));
  }
  if (static_cast<int>(upstream.size()) != output_dim())
    throw ShapeError("backward: upstream length does not match output dimension");

  BackwardResult result;
  result.params.layers.resize(layers_.size());
  Vec delta(upstream.begin(), upstream.end());
  for (size_t li = layers_.size(); li-- > 0;) {
    const auto& layer = layers_[li];
    if (layer.act == Activation::Tanh) {
      for (int r = 0; r < layer.out; ++r) {
        const double y = std::tanh(tape.pre[li][r]);
        delta[r] *= 1.0 - y * y;
      }
    }
    const Vec& input = tape.inputs[li];
    LayerGrad& grad = result.params.layers[li];
    grad.db = delta;
    grad.dw.assign(layer.w.size(), 0.0);
    Vec next(layer.in, 0.0);
    for (int r = 0; r < layer.out; ++r) {
      const double d = delta[r];
      const double* row = layer.w.data() + static_cast<size_t>(r) * layer.in;
      double* grow = grad.dw.data() + static_cast<size_t>(r) * layer.in;
      for (int c = 0; c < layer.in; ++c) {
        grow[c] = d * input[c];
        next[c] += row[c] * d;
      }
    }
    delta = std::move(next);
  }
  result.input_grad = std::move(delta);
  return result;
}

Gradients DenseNet::zero_gradients() const {
  Gradients g;
  for (const auto& layer : layers_) g.layers.push_back({Vec(layer.w.size(), 0.0), Vec(layer.b.size(), 0.0)});
  return g;
}

bool DenseNet::all_finite() const {
  return std::all_of(layers_.begin(), layers_.end(),
                     [](const DenseLayer& l) { return finite(l.w) && finite(l.b); });
}

double& DenseNet::parameter(size_t index) {
  for (auto& layer : layers_) {
    if (index < layer.w.size()) return layer.w[index];
    index -= layer.w.size();
    if (index < layer.b.size()) return layer.b[index];
    index -= layer.b.size();
  }
  throw std::out_of_range("parameter index out of range");
}

Vec DenseNet::flat_parameters() const {
  Vec flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.w.begin(), layer.w.end());
    flat.insert(flat.end(), layer.b.begin(), layer.b.end());
  }
  return flat;
}

Vec DenseNet::flatten(const Gradients& grads) const {
  if (grads.layers.size() != layers_.size()) throw ShapeError("gradient layer count mismatch");
  Vec flat;
  flat.reserve(parameter_count());
  for (const auto& g : grads.layers) {
    flat.insert(flat.end(), g.dw.begin(), g.dw.end());
    flat.insert(flat.end(), g.db.begin(), g.db.end());
  }
  return flat;
}

nlohmann::json DenseNet::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) {
    layers.push_back({{"in", layer.in}, {"out", layer.out}, {"w", layer.w}, {"b", layer.b},
                      {"act", to_string(layer.act)}});
  }
  return {{"layers", layers}};
}

DenseNet DenseNet::from_json(const nlohmann::json& j) {
  std::vector<DenseLayer> layers;
  for (const auto& item : j.at("layers")) {
    DenseLayer layer;
    layer.w = item.at("w").get<Vec>();
    layer.b = item.at("b").get<Vec>();
    layer.out = static_cast<int>(layer.b.size());
    if (item.contains("in")) {
      layer.in = item.at("in").get<int>();
    } else {
      layer.in = layer.out == 0 ? 0 : static_cast<int>(layer.w.size() / layer.out);
    }
    layer.act = activation_from_string(item.at("act").get<std::string>());
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

bool DenseNet::operator==(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.in != b.in || a.out != b.out || a.act != b.act || a.w != b.w || a.b != b.b) return false;
  }
  return true;
}

Adam::Adam(const DenseNet& net, AdamConfig config)
    : config_(config), m_(net.zero_gradients()), v_(net.zero_gradients()) {}

bool Adam::step(DenseNet& net, const Gradients& grads, double learning_rate) {
  auto& layers = net.layers();
  if (grads.layers.size() != layers.size() || m_.layers.size() != layers.size())
    throw ShapeError("adam: gradient layout does not match network");
  for (size_t l = 0; l < layers.size(); ++l) {
    if (grads.layers[l].dw.size() != layers[l].w.size() ||
        grads.layers[l].db.size() != layers[l].b.size())
      throw ShapeError("adam: gradient shape mismatch in layer " + std::to_string(l));
  }
  if (!grads.all_finite()) return false;

  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto update = [&](Vec& param, const Vec& g, Vec& m, Vec& v) {
    for (size_t i = 0; i < param.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      param[i] -= learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  };
  for (size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].w, grads.layers[l].dw, m_.layers[l].dw, v_.layers[l].dw);
    update(layers[l].b, grads.layers[l].db, m_.layers[l].db, v_.layers[l].db);
  }
  return true;
}

nlohmann::json Adam::to_json() const {
  auto moments = [](const Gradients& g) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& layer : g.layers) out.push_back({{"w", layer.dw}, {"b", layer.db}});
    return out;
  };
  return {{"beta1", config_.beta1}, {"beta2", config_.beta2}, {"epsilon", config_.epsilon},
          {"t", t_}, {"m", moments(m_)}, {"v", moments(v_)}};
}

Adam Adam::from_json(const nlohmann::json& j) {
  auto moments = [](const nlohmann::json& arr) {
    Gradients g;
    for (const auto& layer : arr) g.layers.push_back({layer.at("w").get<Vec>(), layer.at("b").get<Vec>()});
    return g;
  };
  Adam adam;
  adam.config_ = {j.at("beta1").get<double>(), j.at("beta2").get<double>(), j.at("epsilon").get<double>()};
  adam.t_ = j.at("t").get<std::int64_t>();
  adam.m_ = moments(j.at("m"));
  adam.v_ = moments(j.at("v"));
  return adam;
}

}  // namespace limit::net
