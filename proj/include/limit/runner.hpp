#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "limit/baselines.hpp"
#include "limit/env.hpp"
#include "limit/human.hpp"
#include "limit/learner.hpp"

namespace limit::runner {

using Vec = std::vector<double>;

enum class Algorithm { Naive, Bayes, Convey, Distinguish, Limit };

std::string to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);
std::vector<Algorithm> all_algorithms();

// What an interface sees. Rewards are not part of this surface; only
// interfaces that also implement RewardListener ever receive them.
class InterfacePolicy {
 public:
  virtual ~InterfacePolicy() = default;
  virtual Vec signal(const Vec& state, const Vec& theta) const = 0;
  // Called before sensing at every timestep.
  virtual void before_step(int interaction, int t) { (void)interaction; (void)t; }
  virtual void record(const core::Experience& e) { (void)e; }
  virtual void end_interaction() {}
  // Bumped every time the signalling parameters change.
  virtual std::uint64_t version() const = 0;
  virtual std::optional<core::LossReport> last_losses() const { return std::nullopt; }
};

class RewardListener {
 public:
  virtual ~RewardListener() = default;
  virtual void observe_reward(double reward) = 0;
};

class NaiveInterface final : public InterfacePolicy {
 public:
  NaiveInterface(const env::EnvConfig& env, std::mt19937_64& rng);
  explicit NaiveInterface(baselines::LinearInterface iface) : iface_(std::move(iface)) {}
  Vec signal(const Vec& state, const Vec& theta) const override;
  std::uint64_t version() const override { return 0; }
  const baselines::LinearInterface& matrix() const { return iface_; }

 private:
  baselines::LinearInterface iface_;
};

class BayesInterface final : public InterfacePolicy, public RewardListener {
 public:
  BayesInterface(const env::EnvConfig& env, baselines::BayesConfig config, std::uint64_t seed);
  Vec signal(const Vec& state, const Vec& theta) const override;
  void end_interaction() override;
  void observe_reward(double reward) override;
  std::uint64_t version() const override { return version_; }
  const baselines::BayesState& state() const { return state_; }

 private:
  void activate(Vec entries);

  env::EnvConfig env_;
  baselines::BayesState state_;
  std::mt19937_64 rng_;
  Vec active_;
  baselines::LinearInterface iface_;
  std::optional<double> pending_reward_;
  std::uint64_t version_ = 0;
};

// LIMIT and its single-loss ablations. Holds the learner and dataset and trains
// once per timestep.
class LimitInterface final : public InterfacePolicy {
 public:
  LimitInterface(core::LimitLearner learner, std::uint64_t sample_seed);
  Vec signal(const Vec& state, const Vec& theta) const override;
  void before_step(int interaction, int t) override;
  void record(const core::Experience& e) override;
  std::uint64_t version() const override { return static_cast<std::uint64_t>(learner_.updates()); }
  std::optional<core::LossReport> last_losses() const override { return last_; }

  const core::LimitLearner& learner() const { return learner_; }
  core::LimitLearner& learner() { return learner_; }
  const core::Dataset& dataset() const { return dataset_; }

 private:
  core::LimitLearner learner_;
  core::Dataset dataset_;
  core::AdditiveDynamics dynamics_;
  std::mt19937_64 rng_;
  std::optional<core::LossReport> last_;
};

struct ExperimentConfig {
  std::string preset = "sim1d";
  std::optional<env::EnvConfig> env;  // overrides the preset when set
  Algorithm algo = Algorithm::Limit;
  human::HumanKind human = human::HumanKind::Align;
  std::vector<std::uint64_t> seeds{0};
  core::LearnerConfig learner;  // dimensions are filled from the environment
  human::HumanConfig human_config;
  baselines::BayesConfig bayes;
  std::string out;
  int threads = 1;

  // Preset-based config with the environment's default learner settings.
  static ExperimentConfig make(const std::string& preset, Algorithm algo, human::HumanKind human,
                               std::vector<std::uint64_t> seeds);

  env::EnvConfig environment() const;
  core::LearnerConfig learner_for(const env::EnvConfig& e, std::uint64_t seed) const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

// Learner defaults used by the CLI and experiments for a given environment.
core::LearnerConfig default_learner(const env::EnvConfig& e);

struct InteractionOutcome {
  env::InteractionLog log;
  env::Metrics metrics;
  double reward = 0.0;
  human::Interpretation interpretation;  // after adaptation
  std::optional<core::LossReport> losses;
  int train_steps = 0;
  int reward_deliveries = 0;
};

// Runs one interaction, then human adaptation and, for
// reward listeners, reward delivery. Throws std::logic_error when an interface
// changes its parameters outside its declared cadence.
InteractionOutcome run_interaction(const env::EnvConfig& env, human::SimulatedHuman& human,
                                   InterfacePolicy& iface, int interaction, std::mt19937_64& theta_rng,
                                   std::mt19937_64& human_rng);

struct ResultRow {
  std::string algo;
  std::string preset;
  std::string human;
  std::uint64_t seed = 0;
  int interaction = 0;
  double error = 0.0;
  double distance = 0.0;
  double reward = 0.0;
  double time = 0.0;
  double interp_angle = 0.0;
  double interp_scale = 1.0;
  std::optional<core::LossReport> losses;
  int reward_deliveries = 0;
};

struct RunResult {
  std::vector<ResultRow> rows;
};

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const ResultRow& row);
RunResult read_csv(std::istream& in);

// Per-seed streams derived from the seed so every algorithm sees the same
// theta sequence and initial human for a given seed.
struct SeedStreams {
  std::mt19937_64 theta;
  std::mt19937_64 human_init;
  std::mt19937_64 human_adapt;
  std::uint64_t interface_seed;
  std::uint64_t sample_seed;
};
SeedStreams seed_streams(std::uint64_t seed);

std::unique_ptr<InterfacePolicy> make_interface(const ExperimentConfig& config, const env::EnvConfig& env,
                                                std::uint64_t seed);

std::vector<ResultRow> run_seed(const ExperimentConfig& config, std::uint64_t seed);

// Runs every seed (in a worker pool when threads > 1) and streams rows in
// seed order to `out` when given. On a write failure the partial file ends
// with a "#incomplete" marker and std::runtime_error is thrown.
RunResult run_experiment(const ExperimentConfig& config, std::ostream* out = nullptr);

struct AlgorithmSummary {
  std::string algo;
  double mean = 0.0;
  double std_error = 0.0;
  std::map<std::uint64_t, double> per_seed;  // windowed mean error
};

struct PairedTest {
  std::string a;
  std::string b;
  double mean_diff = 0.0;  // mean(a - b)
  double t = 0.0;
  double p = 1.0;          // two-sided
  int n = 0;
  bool exact_difference = false;  // all per-seed differences equal and nonzero
};

PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct StatsReport {
  std::vector<AlgorithmSummary> summaries;
  std::vector<PairedTest> tests;
};

// Groups rows by algorithm, averages each seed's error over its last `window`
// interactions, and runs paired t-tests between every pair of algorithms.
StatsReport aggregate_stats(const std::vector<ResultRow>& rows, int window);
void print_stats(std::ostream& out, const StatsReport& report);

// Error-vs-interaction curves (mean +- standard error per algorithm) as SVG.
void write_svg(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& title);

}  // namespace limit::runner
