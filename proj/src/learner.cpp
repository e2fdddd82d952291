#include "limit/learner.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "limit/csv.hpp"

namespace limit::core {

namespace {

double squared_norm(const Vec& v) {
  double total = 0.0;
  for (double x : v) total += x * x;
  return total;
}

std::vector<int> widths(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

Vec concat_scaled(std::span<const double> a, double a_scale, std::span<const double> b, double b_scale) {
  Vec out;
  out.reserve(a.size() + b.size());
  for (double v : a) out.push_back(v / a_scale);
  for (double v : b) out.push_back(v / b_scale);
  return out;
}

void check_net(const DenseNet& net, int in, int out, const char* what) {
  if (net.input_dim() != in || net.output_dim() != out)
    throw net::ShapeError(std::string(what) + " network dimensions do not match the configuration");
}

}  // namespace

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(int state_dim, int signal_dim, int action_dim, int theta_dim)
    : state_dim_(state_dim), signal_dim_(signal_dim), action_dim_(action_dim), theta_dim_(theta_dim) {}

void Dataset::append(Experience e) {
  if (static_cast<int>(e.state.size()) != state_dim_ || static_cast<int>(e.signal.size()) != signal_dim_ ||
      static_cast<int>(e.action.size()) != action_dim_ || static_cast<int>(e.theta.size()) != theta_dim_)
    throw net::ShapeError("experience dimensions do not match the dataset");
  for (double x : e.signal)
    if (!(x >= -1.0 && x <= 1.0)) throw std::invalid_argument("signal component outside [-1, 1]");
  if (e.interaction < 0 || e.t < 0) throw std::invalid_argument("negative experience index");
  if (!items_.empty() && e.interaction < items_.back().interaction)
    throw std::invalid_argument("interaction index must be nondecreasing");
  items_.push_back(std::move(e));
}

void Dataset::write_csv(std::ostream& out) const {
  auto header = [&](const char* prefix, int n, bool& first) {
    for (int i = 0; i < n; ++i) {
      if (!first) out << ',';
      out << prefix << i;
      first = false;
    }
  };
  bool first = true;
  header("s_", state_dim_, first);
  header("x_", signal_dim_, first);
  header("a_", action_dim_, first);
  header("th_", theta_dim_, first);
  out << (first ? "" : ",") << "interaction,t\n";
  for (const auto& e : items_) {
    for (const Vec* v : {&e.state, &e.signal, &e.action, &e.theta})
      for (double x : *v) out << csv::format(x) << ',';
    out << e.interaction << ',' << e.t << '\n';
  }
}

Dataset Dataset::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset CSV is empty");
  const auto header = csv::split(line);
  int counts[4] = {0, 0, 0, 0};
  const char* prefixes[4] = {"s_", "x_", "a_", "th_"};
  size_t col = 0;
  for (int group = 0; group < 4; ++group) {
    while (col < header.size() && header[col] == prefixes[group] + std::to_string(counts[group])) {
      ++counts[group];
      ++col;
    }
  }
  if (col + 2 != header.size() || header[col] != "interaction" || header[col + 1] != "t")
    throw std::invalid_argument("dataset CSV header is malformed");

  Dataset data(counts[0], counts[1], counts[2], counts[3]);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) throw std::invalid_argument("dataset CSV row has wrong width");
    Experience e;
    size_t f = 0;
    for (int group = 0; group < 4; ++group) {
      Vec& v = group == 0 ? e.state : group == 1 ? e.signal : group == 2 ? e.action : e.theta;
      for (int i = 0; i < counts[group]; ++i) v.push_back(csv::parse_double(fields[f++]));
    }
    e.interaction = std::stoi(fields[f++]);
    e.t = std::stoi(fields[f++]);
    data.append(std::move(e));
  }
  return data;
}

// ---------------------------------------------------------------- Dynamics

Vec AdditiveDynamics::step(std::span<const double> state, std::span<const double> action) const {
  if (state.size() != action.size()) throw net::ShapeError("dynamics: state/action dimension mismatch");
  Vec next(state.begin(), state.end());
  for (size_t i = 0; i < next.size(); ++i) next[i] += action[i];
  return next;
}

std::pair<Vec, Vec> AdditiveDynamics::backward(std::span<const double>, std::span<const double>,
                                               std::span<const double> upstream) const {
  Vec g(upstream.begin(), upstream.end());
  return {g, g};
}

// ---------------------------------------------------------------- config

std::string to_string(LossMode mode) {
  switch (mode) {
    case LossMode::Full: return "full";
    case LossMode::ConveyOnly: return "convey-only";
    case LossMode::DistinguishOnly: return "distinguish-only";
  }
  return "full";
}

LossMode loss_mode_from_string(const std::string& name) {
  if (name == "full") return LossMode::Full;
  if (name == "convey-only") return LossMode::ConveyOnly;
  if (name == "distinguish-only") return LossMode::DistinguishOnly;
  throw std::invalid_argument("unknown loss mode '" + name + "'");
}

void LearnerConfig::validate() const {
  if (state_dim < 1 || signal_dim < 1 || action_dim < 1 || theta_dim < 1)
    throw std::invalid_argument("learner dimensions must be positive");
  if (state_dim != action_dim)
    throw std::invalid_argument("additive dynamics need matching state and action dimensions");
  if (horizon < 1) throw std::invalid_argument("rollout horizon must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (!(recency > 0.0 && recency <= 1.0)) throw std::invalid_argument("recency ratio must lie in (0, 1]");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(state_scale > 0.0) || !(theta_scale > 0.0)) throw std::invalid_argument("scales must be positive");
  if (!(human_fit_weight >= 0.0)) throw std::invalid_argument("human fit weight must be nonnegative");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("hidden widths must be positive");
}

nlohmann::json LearnerConfig::to_json() const {
  return {{"state_dim", state_dim},     {"signal_dim", signal_dim},   {"action_dim", action_dim},
          {"theta_dim", theta_dim},     {"hidden", hidden},           {"horizon", horizon},
          {"batch_size", batch_size},   {"recency", recency},         {"learning_rate", learning_rate},
          {"loss_mode", to_string(loss_mode)}, {"state_scale", state_scale},
          {"theta_scale", theta_scale}, {"human_fit_weight", human_fit_weight}, {"seed", seed}};
}

LearnerConfig LearnerConfig::from_json(const nlohmann::json& j) {
  LearnerConfig c;
  c.state_dim = j.value("state_dim", c.state_dim);
  c.signal_dim = j.value("signal_dim", c.signal_dim);
  c.action_dim = j.value("action_dim", c.action_dim);
  c.theta_dim = j.value("theta_dim", c.theta_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.horizon = j.value("horizon", c.horizon);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.recency = j.value("recency", c.recency);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.loss_mode = loss_mode_from_string(j.value("loss_mode", to_string(c.loss_mode)));
  c.state_scale = j.value("state_scale", c.state_scale);
  c.theta_scale = j.value("theta_scale", c.theta_scale);
  c.human_fit_weight = j.value("human_fit_weight", c.human_fit_weight);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

// ---------------------------------------------------------------- learner

LimitLearner::LimitLearner(LearnerConfig config) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const auto& c = config_;
  auto hw = widths(c.state_dim + c.signal_dim, c.hidden, c.action_dim);
  auto rw = widths(c.state_dim + c.theta_dim, c.hidden, c.signal_dim);
  auto dw = widths(c.horizon * (c.state_dim + c.action_dim), c.hidden, c.theta_dim);
  human_ = DenseNet::random(hw, net::Activation::Tanh, net::Activation::Identity, rng);
  interface_ = DenseNet::random(rw, net::Activation::Tanh, net::Activation::Tanh, rng);
  decoder_ = DenseNet::random(dw, net::Activation::Tanh, net::Activation::Identity, rng);
  human_opt_ = net::Adam(human_);
  interface_opt_ = net::Adam(interface_);
  decoder_opt_ = net::Adam(decoder_);
}

LimitLearner::LimitLearner(LearnerConfig config, DenseNet human, DenseNet interface, DenseNet decoder)
    : config_(std::move(config)),
      human_(std::move(human)),
      interface_(std::move(interface)),
      decoder_(std::move(decoder)) {
  config_.validate();
  const auto& c = config_;
  check_net(human_, c.state_dim + c.signal_dim, c.action_dim, "human model");
  check_net(interface_, c.state_dim + c.theta_dim, c.signal_dim, "interface");
  check_net(decoder_, c.horizon * (c.state_dim + c.action_dim), c.theta_dim, "decoder");
  if (interface_.layers().back().act != net::Activation::Tanh)
    throw net::ShapeError("interface network must end in tanh to bound signals");
  human_opt_ = net::Adam(human_);
  interface_opt_ = net::Adam(interface_);
  decoder_opt_ = net::Adam(decoder_);
}

void LimitLearner::check_dims(std::span<const double> state, std::span<const double> theta) const {
  if (static_cast<int>(state.size()) != config_.state_dim || static_cast<int>(theta.size()) != config_.theta_dim)
    throw net::ShapeError("state/theta dimensions do not match the learner configuration");
}

Vec LimitLearner::signal(std::span<const double> state, std::span<const double> theta) const {
  check_dims(state, theta);
  return interface_.predict(concat_scaled(state, config_.state_scale, theta, config_.theta_scale));
}

Vec LimitLearner::predict_action(std::span<const double> state, std::span<const double> signal) const {
  return human_.predict(concat_scaled(state, config_.state_scale, signal, 1.0));
}

double LimitLearner::loss_convey(std::span<const Experience> batch) const {
  if (batch.empty()) throw std::invalid_argument("convey loss needs a nonempty batch");
  double total = 0.0;
  for (const auto& e : batch) {
    const Vec x = signal(e.state, e.theta);
    const Vec p = predict_action(e.state, x);
    if (p.size() != e.action.size()) throw net::ShapeError("action dimension mismatch");
    for (size_t i = 0; i < p.size(); ++i) total += (e.action[i] - p[i]) * (e.action[i] - p[i]);
  }
  return total;
}

RolloutSequence LimitLearner::rollout(std::span<const double> state, std::span<const double> theta,
                                      const Dynamics& dynamics, int k) const {
  if (k < 1) throw std::invalid_argument("rollout horizon must be at least 1");
  check_dims(state, theta);
  RolloutSequence tau;
  Vec s(state.begin(), state.end());
  for (int i = 0; i < k; ++i) {
    Vec a = predict_action(s, signal(s, theta));
    Vec next = dynamics.step(s, a);
    tau.states.push_back(std::move(s));
    tau.actions.push_back(std::move(a));
    s = std::move(next);
  }
  return tau;
}

Vec LimitLearner::decoder_input(const RolloutSequence& tau) const {
  Vec in;
  in.reserve(tau.states.size() * (config_.state_dim + config_.action_dim));
  for (size_t i = 0; i < tau.states.size(); ++i) {
    for (double v : tau.states[i]) in.push_back(v / config_.state_scale);
    for (double v : tau.actions[i]) in.push_back(v);
  }
  return in;
}

Vec LimitLearner::decode(const RolloutSequence& tau) const {
  Vec out = decoder_.predict(decoder_input(tau));
  for (double& v : out) v *= config_.theta_scale;
  return out;
}

double LimitLearner::loss_distinguish(std::span<const Experience> batch, const Dynamics& dynamics) const {
  if (batch.empty()) throw std::invalid_argument("distinguish loss needs a nonempty batch");
  double total = 0.0;
  for (const auto& e : batch) total += distinguish_term(e, dynamics, nullptr);
  return total;
}

double LimitLearner::distinguish_term(const Experience& e, const Dynamics& dynamics,
                                      LearnerGradients* grads) const {
  check_dims(e.state, e.theta);
  const int k = config_.horizon;
  const int ds = config_.state_dim;
  const int da = config_.action_dim;
  const double ss = config_.state_scale;
  const double ts = config_.theta_scale;

  struct StepTape {
    Vec state;
    Vec action;
    net::ForwardResult interface;
    net::ForwardResult human;
  };
  std::vector<StepTape> steps;
  steps.reserve(k);
  Vec s = e.state;
  Vec dec_in;
  dec_in.reserve(static_cast<size_t>(k) * (ds + da));
  for (int i = 0; i < k; ++i) {
    StepTape st;
    st.interface = interface_.forward(concat_scaled(s, ss, e.theta, ts));
    st.human = human_.forward(concat_scaled(s, ss, st.interface.output, 1.0));
    st.action = st.human.output;
    for (double v : s) dec_in.push_back(v / ss);
    for (double v : st.action) dec_in.push_back(v);
    Vec next = dynamics.step(s, st.action);
    st.state = std::move(s);
    s = std::move(next);
    steps.push_back(std::move(st));
  }
  auto decoded = decoder_.forward(dec_in);
  Vec resid(config_.theta_dim);
  for (int i = 0; i < config_.theta_dim; ++i) resid[i] = ts * decoded.output[i] - e.theta[i];
  const double loss = squared_norm(resid);
  if (!grads) return loss;

  Vec upstream(resid.size());
  for (size_t i = 0; i < resid.size(); ++i) upstream[i] = 2.0 * resid[i] * ts;
  auto dec_back = decoder_.backward(decoded.tape, upstream);
  grads->decoder.add(dec_back.params);
  const Vec& g_in = dec_back.input_grad;

  // Walk the rollout backwards; g_next holds dL/ds_{i+1}.
  Vec g_next(ds, 0.0);
  for (int i = k - 1; i >= 0; --i) {
    const StepTape& st = steps[i];
    const size_t base = static_cast<size_t>(i) * (ds + da);
    Vec g_state(ds);
    Vec g_action(da);
    for (int j = 0; j < ds; ++j) g_state[j] = g_in[base + j] / ss;
    for (int j = 0; j < da; ++j) g_action[j] = g_in[base + ds + j];
    if (i + 1 < k) {
      auto [gs, ga] = dynamics.backward(st.state, st.action, g_next);
      for (int j = 0; j < ds; ++j) g_state[j] += gs[j];
      for (int j = 0; j < da; ++j) g_action[j] += ga[j];
    }
    auto h_back = human_.backward(st.human.tape, g_action);
    grads->human.add(h_back.params);
    for (int j = 0; j < ds; ++j) g_state[j] += h_back.input_grad[j] / ss;
    Vec g_signal(h_back.input_grad.begin() + ds, h_back.input_grad.end());
    auto r_back = interface_.backward(st.interface.tape, g_signal);
    grads->interface.add(r_back.params);
    for (int j = 0; j < ds; ++j) g_state[j] += r_back.input_grad[j] / ss;
    g_next = std::move(g_state);
  }
  return loss;
}

LossEvaluation LimitLearner::evaluate(std::span<const Experience> batch, const Dynamics& dynamics,
                                      LossMode mode) const {
  if (batch.empty()) throw std::invalid_argument("loss evaluation needs a nonempty batch");
  LossEvaluation ev;
  ev.grads.human = human_.zero_gradients();
  ev.grads.interface = interface_.zero_gradients();
  ev.grads.decoder = decoder_.zero_gradients();
  const int ds = config_.state_dim;

  if (mode != LossMode::DistinguishOnly) {
    for (const auto& e : batch) {
      check_dims(e.state, e.theta);
      if (static_cast<int>(e.action.size()) != config_.action_dim)
        throw net::ShapeError("action dimension mismatch");
      auto rf = interface_.forward(concat_scaled(e.state, config_.state_scale, e.theta, config_.theta_scale));
      auto hf = human_.forward(concat_scaled(e.state, config_.state_scale, rf.output, 1.0));
      Vec upstream(hf.output.size());
      for (size_t i = 0; i < upstream.size(); ++i) {
        const double r = hf.output[i] - e.action[i];
        ev.convey += r * r;
        upstream[i] = 2.0 * r;
      }
      auto hb = human_.backward(hf.tape, upstream);
      ev.grads.human.add(hb.params);
      Vec g_signal(hb.input_grad.begin() + ds, hb.input_grad.end());
      auto rb = interface_.backward(rf.tape, g_signal);
      ev.grads.interface.add(rb.params);
    }
  }
  if (mode != LossMode::ConveyOnly) {
    for (const auto& e : batch) ev.distinguish += distinguish_term(e, dynamics, &ev.grads);
  }
  if (config_.human_fit_weight > 0.0) {
    // Anchors H to the signals the human actually saw; touches phi only.
    const double w = config_.human_fit_weight;
    for (const auto& e : batch) {
      if (static_cast<int>(e.signal.size()) != config_.signal_dim)
        throw net::ShapeError("signal dimension mismatch");
      auto hf = human_.forward(concat_scaled(e.state, config_.state_scale, e.signal, 1.0));
      Vec upstream(hf.output.size());
      for (size_t i = 0; i < upstream.size(); ++i) {
        const double r = hf.output[i] - e.action[i];
        ev.human_fit += r * r;
        upstream[i] = 2.0 * w * r;
      }
      ev.grads.human.add(human_.backward(hf.tape, upstream).params);
    }
  }
  return ev;
}

LossReport LimitLearner::train_on_batch(std::span<const Experience> batch, const Dynamics& dynamics) {
  const LossMode mode = config_.loss_mode;
  LossEvaluation ev = evaluate(batch, dynamics, mode);
  LossReport report;
  report.convey = mode == LossMode::DistinguishOnly ? loss_convey(batch) : ev.convey;
  report.distinguish = mode == LossMode::ConveyOnly ? loss_distinguish(batch, dynamics) : ev.distinguish;
  switch (mode) {
    case LossMode::Full: report.total = report.convey + report.distinguish; break;
    case LossMode::ConveyOnly: report.total = report.convey; break;
    case LossMode::DistinguishOnly: report.total = report.distinguish; break;
  }
  report.human_fit = ev.human_fit;
  report.total += config_.human_fit_weight * ev.human_fit;
  if (!std::isfinite(report.total) || !ev.grads.human.all_finite() || !ev.grads.interface.all_finite() ||
      !ev.grads.decoder.all_finite()) {
    report.skipped = true;
    return report;
  }
  const double lr = config_.learning_rate;
  human_opt_.step(human_, ev.grads.human, lr);
  interface_opt_.step(interface_, ev.grads.interface, lr);
  decoder_opt_.step(decoder_, ev.grads.decoder, lr);
  ++updates_;
  return report;
}

std::optional<LossReport> LimitLearner::train_step(const Dataset& dataset, const Dynamics& dynamics,
                                                   std::mt19937_64& rng) {
  const size_t m = static_cast<size_t>(config_.batch_size);
  if (dataset.size() < m) return std::nullopt;
  const auto batch = recency_sample(dataset, m, config_.recency, rng);
  return train_on_batch(batch, dynamics);
}

nlohmann::json LimitLearner::to_json() const {
  return {{"config", config_.to_json()},
          {"human", human_.to_json()},
          {"interface", interface_.to_json()},
          {"decoder", decoder_.to_json()},
          {"optimizer", {{"human", human_opt_.to_json()},
                         {"interface", interface_opt_.to_json()},
                         {"decoder", decoder_opt_.to_json()}}},
          {"updates", updates_}};
}

LimitLearner LimitLearner::from_json(const nlohmann::json& j) {
  LimitLearner learner(LearnerConfig::from_json(j.at("config")), DenseNet::from_json(j.at("human")),
                       DenseNet::from_json(j.at("interface")), DenseNet::from_json(j.at("decoder")));
  if (j.contains("optimizer")) {
    const auto& opt = j.at("optimizer");
    learner.human_opt_ = net::Adam::from_json(opt.at("human"));
    learner.interface_opt_ = net::Adam::from_json(opt.at("interface"));
    learner.decoder_opt_ = net::Adam::from_json(opt.at("decoder"));
  }
  learner.updates_ = j.value("updates", std::int64_t{0});
  return learner;
}

// ---------------------------------------------------------------- sampling

std::vector<double> recency_weights(size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("recency ratio must lie in (0, 1]");
  std::vector<double> w(n);
  double current = 1.0;
  for (size_t i = n; i-- > 0;) {
    w[i] = current;
    current *= ratio;
  }
  return w;
}

std::vector<Experience> recency_sample(const Dataset& dataset, size_t m, double ratio,
                                       std::mt19937_64& rng) {
  if (m > dataset.size())
    throw std::invalid_argument("cannot sample " + std::to_string(m) + " from a dataset of " +
                                std::to_string(dataset.size()));
  const auto w = recency_weights(dataset.size(), ratio);
  std::discrete_distribution<size_t> pick(w.begin(), w.end());
  std::vector<Experience> batch;
  batch.reserve(m);
  for (size_t i = 0; i < m; ++i) batch.push_back(dataset[pick(rng)]);
  return batch;
}

}  // namespace limit::core
