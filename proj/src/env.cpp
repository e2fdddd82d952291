#include "limit/env.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace limit::env {

void EnvConfig::validate() const {
  if (state_dim < 1 || signal_dim < 1 || theta_dim < 1)
    throw std::invalid_argument("environment dimensions must be positive");
  if (theta_dim % state_dim != 0)
    throw std::invalid_argument("theta must pack whole goal positions of the state dimension");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (interactions < 0) throw std::invalid_argument("interaction count must be nonnegative");
  if (static_cast<int>(theta_low.size()) != theta_dim || static_cast<int>(theta_high.size()) != theta_dim)
    throw std::invalid_argument("theta prior box must have one bound per theta dimension");
  for (int i = 0; i < theta_dim; ++i)
    if (theta_low[i] > theta_high[i]) throw std::invalid_argument("theta prior box is inverted");
  if (static_cast<int>(start_state.size()) != state_dim)
    throw std::invalid_argument("start state does not match state dimension");
}

nlohmann::json EnvConfig::to_json() const {
  return {{"name", name},         {"state_dim", state_dim},     {"signal_dim", signal_dim},
          {"theta_dim", theta_dim}, {"theta_low", theta_low},   {"theta_high", theta_high},
          {"horizon", horizon},   {"start_state", start_state}, {"interactions", interactions}};
}

EnvConfig EnvConfig::from_json(const nlohmann::json& j) {
  EnvConfig c;
  c.name = j.value("name", std::string("custom"));
  c.state_dim = j.at("state_dim").get<int>();
  c.signal_dim = j.at("signal_dim").get<int>();
  c.theta_dim = j.at("theta_dim").get<int>();
  c.theta_low = j.at("theta_low").get<Vec>();
  c.theta_high = j.at("theta_high").get<Vec>();
  c.horizon = j.at("horizon").get<int>();
  c.start_state = j.at("start_state").get<Vec>();
  c.interactions = j.at("interactions").get<int>();
  c.validate();
  return c;
}

namespace {

EnvConfig make(std::string name, int state_dim, int signal_dim, int theta_dim, int interactions) {
  EnvConfig c;
  c.name = std::move(name);
  c.state_dim = state_dim;
  c.signal_dim = signal_dim;
  c.theta_dim = theta_dim;
  c.theta_low.assign(theta_dim, -10.0);
  c.theta_high.assign(theta_dim, 10.0);
  c.horizon = 10;
  c.start_state.assign(state_dim, 0.0);
  c.interactions = interactions;
  return c;
}

}  // namespace

EnvConfig preset(const std::string& name) {
  if (name == "sim1d") return make(name, 1, 1, 1, 40);
  if (name == "sim2d") return make(name, 2, 2, 2, 100);
  if (name == "over4x2") return make(name, 2, 4, 2, 100);
  if (name == "under2x4") return make(name, 2, 2, 4, 100);
  throw std::invalid_argument("unknown environment preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"sim1d", "sim2d", "over4x2", "under2x4"}; }

Vec step(std::span<const double> state, std::span<const double> action) {
  if (state.size() != action.size()) throw std::invalid_argument("step: state/action dimension mismatch");
  Vec next(state.begin(), state.end());
  for (size_t i = 0; i < next.size(); ++i) next[i] += action[i];
  return next;
}

double goal_gap_squared(std::span<const double> state, std::span<const double> theta) {
  const size_t d = state.size();
  if (d == 0 || theta.size() % d != 0)
    throw std::invalid_argument("theta does not pack whole goal positions");
  double best = std::numeric_limits<double>::infinity();
  for (size_t g = 0; g < theta.size() / d; ++g) {
    double sq = 0.0;
    for (size_t i = 0; i < d; ++i) {
      const double diff = state[i] - theta[g * d + i];
      sq += diff * diff;
    }
    best = std::min(best, sq);
  }
  return best;
}

double goal_reward(std::span<const double> final_state, std::span<const double> theta) {
  return -goal_gap_squared(final_state, theta);
}

double reward(const InteractionLog& log) { return goal_reward(log.final_state, log.theta); }

Metrics metrics(const InteractionLog& log) {
  Metrics m;
  m.error = std::sqrt(goal_gap_squared(log.final_state, log.theta));
  auto path_step = [](const Vec& a, const Vec& b) {
    double sq = 0.0;
    for (size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sq);
  };
  for (size_t t = 0; t < log.steps.size(); ++t) {
    const Vec& next = (t + 1 < log.steps.size()) ? log.steps[t + 1].state : log.final_state;
    m.distance += path_step(next, log.steps[t].state);
  }
  m.time = log.duration;
  return m;
}

Vec sample_theta(const EnvConfig& config, std::mt19937_64& rng) {
  Vec theta(config.theta_dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < config.theta_dim; ++i)
    theta[i] = config.theta_low[i] + (config.theta_high[i] - config.theta_low[i]) * unit(rng);
  return theta;
}

}  // namespace limit::env
