#pragma once

// Simulated co-adaptive humans. A human reads a signal x, folds it into the
// action space, and applies its interpretation: a rotation (a sign flip in
// 1D) and, for Align humans, a scale in [-1, 1]. Between interactions the
// human replays a few recent interactions under every candidate
// interpretation on a fixed grid and keeps the one with the best total reward.

#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace limit::human {

using Vec = std::vector<double>;

enum class HumanKind { Rotate, Align };

std::string to_string(HumanKind kind);
HumanKind human_kind_from_string(const std::string& name);

struct Interpretation {
  double angle = 0.0;  // radians; in 1D only 0 (+1) or pi (-1)
  double scale = 1.0;

  bool operator==(const Interpretation&) const = default;
};

struct HumanConfig {
  int adapt_samples = 5;  // interactions replayed per adaptation
  int adapt_window = 10;  // replayed interactions are drawn from this many most recent ones
  int angle_steps = 72;
  int scale_steps = 21;

  nlohmann::json to_json() const;
  static HumanConfig from_json(const nlohmann::json& j);
};

struct AdaptationRecord {
  Vec start_state;
  std::vector<Vec> signals;
  Vec theta;
  double final_reward = 0.0;
};

class SimulatedHuman {
 public:
  SimulatedHuman(HumanKind kind, int action_dim, int signal_dim, Interpretation initial,
                 HumanConfig config = {});

  // Initial interpretation drawn uniformly from the candidate grid.
  static SimulatedHuman random(HumanKind kind, int action_dim, int signal_dim, std::mt19937_64& rng,
                               HumanConfig config = {});

  HumanKind kind() const { return kind_; }
  int action_dim() const { return action_dim_; }
  int signal_dim() const { return signal_dim_; }
  const Interpretation& interpretation() const { return interp_; }
  void set_interpretation(Interpretation interp) { interp_ = interp; }
  const HumanConfig& config() const { return config_; }

  Vec act(std::span<const double> state, std::span<const double> signal) const;

  // Candidate interpretations in search order.
  std::vector<Interpretation> candidates() const;

  // Final state after replaying a record's signals under `interp` with s' = s + a.
  Vec replay(const AdaptationRecord& record, const Interpretation& interp) const;
  double retrospective_reward(std::span<const AdaptationRecord> records,
                              const Interpretation& interp) const;

  // Re-fit the interpretation on a uniform sample of recent records.
  // Returns the indices of the records that were replayed.
  std::vector<size_t> adapt(std::span<const AdaptationRecord> records, std::mt19937_64& rng);

  // Appends to the human's own history and adapts on it.
  void end_interaction(AdaptationRecord record, std::mt19937_64& rng);
  const std::vector<AdaptationRecord>& history() const { return history_; }

 private:
  Vec apply(const Interpretation& interp, std::span<const double> signal) const;

  HumanKind kind_;
  int action_dim_;
  int signal_dim_;
  Interpretation interp_;
  HumanConfig config_;
  std::vector<AdaptationRecord> history_;
};

// Folds a signal into `action_dim` components by summing consecutive blocks
// and dividing by sqrt(block count); ||fold(x)|| <= ||x||.
Vec fold_signal(std::span<const double> signal, int action_dim);

}  // namespace limit::human
