#pragma once

// Non-learning interface baselines: a fixed random linear map (Naive) and a
// linear map tuned once per interaction by Bayesian optimisation on the task
// reward (Bayes).

#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace limit::baselines {

using Vec = std::vector<double>;

struct LinearInterface {
  int signal_dim = 1;
  int input_dim = 2;  // dim(s) + dim(theta)
  Vec weights;        // row-major signal_dim x input_dim

  Vec signal(std::span<const double> state, std::span<const double> theta) const;
};

LinearInterface naive_init(std::mt19937_64& rng, int signal_dim, int state_dim, int theta_dim);
LinearInterface linear_from_vector(const Vec& entries, int signal_dim, int state_dim, int theta_dim);

struct BayesConfig {
  int warmup = 5;
  double length_scale = 0.5;
  double noise = 1e-3;
  int candidates = 256;
  int refine_steps = 64;
  double refine_radius = 0.1;

  nlohmann::json to_json() const;
  static BayesConfig from_json(const nlohmann::json& j);
};

struct Observation {
  Vec point;
  double reward = 0.0;
};

// Zero-mean GP on standardised rewards with an RBF kernel.
class GaussianProcess {
 public:
  GaussianProcess(const std::vector<Observation>& data, double length_scale, double noise);

  // Posterior mean and standard deviation in reward units.
  std::pair<double, double> predict(std::span<const double> point) const;
  double expected_improvement(std::span<const double> point, double best_reward) const;

 private:
  double kernel(std::span<const double> a, std::span<const double> b) const;

  std::vector<Vec> points_;
  double length_scale_;
  double mean_ = 0.0;
  double scale_ = 1.0;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> chol_;  // K + noise I
};

// Expected improvement of a Gaussian N(mean, sd^2) over `best` (maximisation).
double expected_improvement(double mean, double sd, double best);

class BayesState {
 public:
  BayesState() = default;
  BayesState(int dim, BayesConfig config = {});

  int dim() const { return dim_; }
  const BayesConfig& config() const { return config_; }
  const std::vector<Observation>& observations() const { return points_; }

  Vec propose(std::mt19937_64& rng) const;
  void observe(Vec point, double reward);

  nlohmann::json to_json() const;
  static BayesState from_json(const nlohmann::json& j);

 private:
  int dim_ = 0;
  BayesConfig config_;
  std::vector<Observation> points_;
};

}  // namespace limit::baselines
