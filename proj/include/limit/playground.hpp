#pragma once

// Colored-bar guessing game served over HTTP: each session shows nine
// single-step trials. The active policy (a pretrained LIMIT learner or a
// random linear map) turns the hidden 2D phone position into two signal
// values, each drawn as a bar whose hue runs from blue (-1) to red (+1).
// The player clicks once to guess the position and is shown the truth.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "limit/baselines.hpp"
#include "limit/env.hpp"
#include "limit/human.hpp"
#include "limit/learner.hpp"

namespace httplib {
class Server;
}

namespace limit::playground {

using Vec = std::vector<double>;

inline constexpr int kTrialsPerSession = 9;

enum class Mode { PretrainedFrozen, PretrainedOnline };
enum class PlaygroundAlgo { Naive, Limit };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);
std::string to_string(PlaygroundAlgo algo);
PlaygroundAlgo playground_algo_from_string(const std::string& name);

// Channel value in [-1, 1] -> hue in degrees, 240 (blue) down to 0 (red).
double hue_for(double value);
double value_for_hue(double hue);

struct Bar {
  double hue = 0.0;
  double value = 0.0;
};

struct TrialView {
  std::array<Bar, 2> bars;
  int trial_index = 0;
  Vec state{0.0, 0.0};

  nlohmann::json to_json() const;
};

struct TrialRecord {
  Vec theta;
  Vec signal;
  Vec guess;
  double error = 0.0;
};

struct SessionSummary {
  std::vector<double> errors;
  double mean_error = 0.0;

  nlohmann::json to_json() const;
};

struct GuessResult {
  Vec theta;
  double error = 0.0;
  std::optional<TrialView> next;
  std::optional<SessionSummary> summary;

  nlohmann::json to_json() const;
};

class UnknownSession : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class SubmissionRejected : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct PretrainedPolicy {
  core::LimitLearner learner;
  core::Dataset dataset;
};

// Trains a fresh learner against a simulated human for `interactions`
// interactions of the given environment.
PretrainedPolicy pretrain(core::LimitLearner learner, human::SimulatedHuman synthetic_human, int interactions,
                          std::uint64_t seed, const env::EnvConfig& env = env::preset("sim2d"));

class Session {
 public:
  Session(std::string id, Mode mode, PlaygroundAlgo algo, std::uint64_t seed, const PretrainedPolicy& policy,
          const env::EnvConfig& env);

  const std::string& id() const { return id_; }
  TrialView current_view() const;
  GuessResult submit(const Vec& guess, std::optional<int> trial_index);
  nlohmann::json snapshot() const;
  std::string summary_csv() const;
  const core::LimitLearner& learner() const { return learner_; }

  std::mutex& mutex() { return mu_; }

 private:
  Vec signal_for(const Vec& theta) const;
  void begin_trial();

  std::string id_;
  Mode mode_;
  PlaygroundAlgo algo_;
  std::uint64_t seed_;
  env::EnvConfig env_;
  core::LimitLearner learner_;
  core::Dataset dataset_;
  baselines::LinearInterface naive_;
  core::AdditiveDynamics dynamics_;
  std::mt19937_64 theta_rng_;
  std::mt19937_64 sample_rng_;
  int trial_ = 0;
  Vec theta_;
  Vec signal_;
  std::vector<TrialRecord> records_;
  std::mutex mu_;
};

class SessionManager {
 public:
  explicit SessionManager(PretrainedPolicy policy, env::EnvConfig env = env::preset("sim2d"));

  std::pair<std::string, TrialView> start(Mode mode, PlaygroundAlgo algo, std::uint64_t seed);
  GuessResult submit(const std::string& id, const Vec& guess, std::optional<int> trial_index = std::nullopt);
  nlohmann::json snapshot(const std::string& id) const;
  std::string summary_csv(const std::string& id) const;
  std::shared_ptr<Session> find(const std::string& id) const;

  const PretrainedPolicy& policy() const { return policy_; }

 private:
  const PretrainedPolicy policy_;
  const env::EnvConfig env_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

// POST /session, POST /session/{id}/guess, GET /session/{id},
// GET /session/{id}/summary.csv; static files from `static_dir` when nonempty.
void register_routes(httplib::Server& server, SessionManager& manager, const std::string& static_dir = "");

}  // namespace limit::playground
