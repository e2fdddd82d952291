#pragma once

// Point-mass worlds with additive dynamics and hidden goal positions.

#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace limit::env {

using Vec = std::vector<double>;

struct EnvConfig {
  std::string name;
  int state_dim = 1;  // also the action dimension
  int signal_dim = 1;
  int theta_dim = 1;
  Vec theta_low;
  Vec theta_high;
  int horizon = 10;
  Vec start_state;
  int interactions = 40;

  // Number of independent goal positions packed into theta.
  int goal_count() const { return theta_dim / state_dim; }
  void validate() const;

  nlohmann::json to_json() const;
  static EnvConfig from_json(const nlohmann::json& j);
};

// sim1d, sim2d, over4x2, under2x4.
EnvConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct TimeStep {
  Vec state;
  Vec signal;
  Vec action;
};

// One interaction: theta is fixed, steps hold (s^t, x^t, a^t) for t = 0..T-1.
struct InteractionLog {
  Vec theta;
  std::vector<TimeStep> steps;
  Vec final_state;
  double duration = 0.0;  // seconds; simulations report the step count
};

struct Metrics {
  double error = 0.0;
  double distance = 0.0;
  double time = 0.0;
};

// s' = s + a.
Vec step(std::span<const double> state, std::span<const double> action);

// Squared distance from `state` to the nearest goal packed in `theta`.
double goal_gap_squared(std::span<const double> state, std::span<const double> theta);
double goal_reward(std::span<const double> final_state, std::span<const double> theta);

double reward(const InteractionLog& log);
Metrics metrics(const InteractionLog& log);

Vec sample_theta(const EnvConfig& config, std::mt19937_64& rng);

}  // namespace limit::env
