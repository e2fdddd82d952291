#pragma once

// The LIMIT learner: a human model H(s, x) -> a, an interface policy
// R(s, theta) -> x and a decoder D(tau) -> theta, trained jointly on
//
//   L_conv = sum ||a - H(s, R(s, theta))||^2
//   L_dist = sum ||theta - D(tau(s, theta))||^2
//
// where tau is a k-step counterfactual rollout of H o R under the true
// environment dynamics. The learner never sees task rewards.

#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "limit/net.hpp"

namespace limit::core {

using Vec = std::vector<double>;
using net::DenseNet;
using net::Gradients;

struct Experience {
  Vec state;
  Vec signal;
  Vec action;
  Vec theta;
  int interaction = 0;
  int t = 0;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(int state_dim, int signal_dim, int action_dim, int theta_dim);

  void append(Experience e);
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Experience& operator[](size_t i) const { return items_[i]; }
  const std::vector<Experience>& items() const { return items_; }

  int state_dim() const { return state_dim_; }
  int signal_dim() const { return signal_dim_; }
  int action_dim() const { return action_dim_; }
  int theta_dim() const { return theta_dim_; }

  // Header: s_0..,x_0..,a_0..,th_0..,interaction,t
  void write_csv(std::ostream& out) const;
  static Dataset read_csv(std::istream& in);

 private:
  int state_dim_ = 0;
  int signal_dim_ = 0;
  int action_dim_ = 0;
  int theta_dim_ = 0;
  std::vector<Experience> items_;
};

// Environment transition with its vector-Jacobian product, so counterfactual
// rollouts can be differentiated through.
class Dynamics {
 public:
  virtual ~Dynamics() = default;
  virtual Vec step(std::span<const double> state, std::span<const double> action) const = 0;
  // Given dL/ds', returns (dL/ds, dL/da).
  virtual std::pair<Vec, Vec> backward(std::span<const double> state, std::span<const double> action,
                                       std::span<const double> upstream) const = 0;
};

class AdditiveDynamics final : public Dynamics {
 public:
  Vec step(std::span<const double> state, std::span<const double> action) const override;
  std::pair<Vec, Vec> backward(std::span<const double> state, std::span<const double> action,
                               std::span<const double> upstream) const override;
};

enum class LossMode { Full, ConveyOnly, DistinguishOnly };

std::string to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& name);

struct LearnerConfig {
  int state_dim = 1;
  int signal_dim = 1;
  int action_dim = 1;
  int theta_dim = 1;
  std::vector<int> hidden{64, 64};
  int horizon = 5;
  int batch_size = 32;
  double recency = 0.995;
  double learning_rate = 1e-3;
  LossMode loss_mode = LossMode::Full;
  // Fixed input normalisation: states enter the networks divided by
  // state_scale, theta divided by theta_scale; the decoder output is
  // multiplied by theta_scale. Losses stay in raw units.
  double state_scale = 1.0;
  double theta_scale = 1.0;
  // Weight of sum ||a - H(s, x_observed)||^2, a fit of the human model to the
  // recorded signals (phi only). 0 trains on L_conv + L_dist alone.
  double human_fit_weight = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static LearnerConfig from_json(const nlohmann::json& j);
};

struct RolloutSequence {
  std::vector<Vec> states;
  std::vector<Vec> actions;
};

struct LossReport {
  double convey = 0.0;
  double distinguish = 0.0;
  double human_fit = 0.0;  // unweighted; counted in total only when enabled
  double total = 0.0;
  bool skipped = false;  // non-finite loss or gradient; no update applied
};

struct LearnerGradients {
  Gradients human;
  Gradients interface;
  Gradients decoder;
};

struct LossEvaluation {
  double convey = 0.0;
  double distinguish = 0.0;
  double human_fit = 0.0;
  LearnerGradients grads;
};

class LimitLearner {
 public:
  explicit LimitLearner(LearnerConfig config);
  LimitLearner(LearnerConfig config, DenseNet human, DenseNet interface, DenseNet decoder);

  const LearnerConfig& config() const { return config_; }
  const DenseNet& human_model() const { return human_; }
  const DenseNet& interface_policy() const { return interface_; }
  const DenseNet& decoder() const { return decoder_; }
  DenseNet& human_model() { return human_; }
  DenseNet& interface_policy() { return interface_; }
  DenseNet& decoder() { return decoder_; }

  Vec signal(std::span<const double> state, std::span<const double> theta) const;
  Vec predict_action(std::span<const double> state, std::span<const double> signal) const;

  double loss_convey(std::span<const Experience> batch) const;
  RolloutSequence rollout(std::span<const double> state, std::span<const double> theta,
                          const Dynamics& dynamics, int k) const;
  // Decoder input for a rollout: (s_i / state_scale, a_i) pairs, flattened.
  Vec decoder_input(const RolloutSequence& tau) const;
  Vec decode(const RolloutSequence& tau) const;
  double loss_distinguish(std::span<const Experience> batch, const Dynamics& dynamics) const;

  // Loss values and analytic gradients for every network. Terms excluded by
  // `mode` contribute neither value nor gradient.
  LossEvaluation evaluate(std::span<const Experience> batch, const Dynamics& dynamics,
                          LossMode mode) const;

  // One Adam step on a recency-weighted batch. Returns nothing when the
  // dataset holds fewer than batch_size experiences.
  std::optional<LossReport> train_step(const Dataset& dataset, const Dynamics& dynamics,
                                       std::mt19937_64& rng);
  // One Adam step on an explicit batch.
  LossReport train_on_batch(std::span<const Experience> batch, const Dynamics& dynamics);

  std::int64_t updates() const { return updates_; }

  nlohmann::json to_json() const;
  static LimitLearner from_json(const nlohmann::json& j);

 private:
  void check_dims(std::span<const double> state, std::span<const double> theta) const;
  double distinguish_term(const Experience& e, const Dynamics& dynamics,
                          LearnerGradients* grads) const;

  LearnerConfig config_;
  DenseNet human_;
  DenseNet interface_;
  DenseNet decoder_;
  net::Adam human_opt_;
  net::Adam interface_opt_;
  net::Adam decoder_opt_;
  std::int64_t updates_ = 0;
};

// Samples m experiences with replacement; position i (0 = oldest) has weight
// ratio^(N-1-i).
std::vector<Experience> recency_sample(const Dataset& dataset, size_t m, double ratio,
                                       std::mt19937_64& rng);
std::vector<double> recency_weights(size_t n, double ratio);

}  // namespace limit::core
