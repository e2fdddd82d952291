#include "limit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace limit::baselines {

Vec LinearInterface::signal(std::span<const double> state, std::span<const double> theta) const {
  if (static_cast<int>(state.size() + theta.size()) != input_dim)
    throw std::invalid_argument("linear interface: input dimension mismatch");
  Vec x(signal_dim, 0.0);
  for (int r = 0; r < signal_dim; ++r) {
    const double* row = weights.data() + static_cast<size_t>(r) * input_dim;
    double acc = 0.0;
    size_t c = 0;
    for (double v : state) acc += row[c++] * v;
    for (double v : theta) acc += row[c++] * v;
    x[r] = std::clamp(acc, -1.0, 1.0);
  }
  return x;
}

LinearInterface linear_from_vector(const Vec& entries, int signal_dim, int state_dim, int theta_dim) {
  LinearInterface iface;
  iface.signal_dim = signal_dim;
  iface.input_dim = state_dim + theta_dim;
  if (entries.size() != static_cast<size_t>(iface.signal_dim) * iface.input_dim)
    throw std::invalid_argument("linear interface: wrong number of matrix entries");
  iface.weights = entries;
  return iface;
}

LinearInterface naive_init(std::mt19937_64& rng, int signal_dim, int state_dim, int theta_dim) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec entries(static_cast<size_t>(signal_dim) * (state_dim + theta_dim));
  for (double& v : entries) v = unit(rng);
  return linear_from_vector(entries, signal_dim, state_dim, theta_dim);
}

// ---------------------------------------------------------------- GP

nlohmann::json BayesConfig::to_json() const {
  return {{"warmup", warmup},         {"length_scale", length_scale}, {"noise", noise},
          {"candidates", candidates}, {"refine_steps", refine_steps}, {"refine_radius", refine_radius}};
}

BayesConfig BayesConfig::from_json(const nlohmann::json& j) {
  BayesConfig c;
  c.warmup = j.value("warmup", c.warmup);
  c.length_scale = j.value("length_scale", c.length_scale);
  c.noise = j.value("noise", c.noise);
  c.candidates = j.value("candidates", c.candidates);
  c.refine_steps = j.value("refine_steps", c.refine_steps);
  c.refine_radius = j.value("refine_radius", c.refine_radius);
  return c;
}

GaussianProcess::GaussianProcess(const std::vector<Observation>& data, double length_scale, double noise)
    : length_scale_(length_scale) {
  if (data.empty()) throw std::invalid_argument("gaussian process needs at least one observation");
  const auto n = static_cast<Eigen::Index>(data.size());
  for (const auto& obs : data) {
    points_.push_back(obs.point);
    mean_ += obs.reward;
  }
  mean_ /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& obs : data) var += (obs.reward - mean_) * (obs.reward - mean_);
  var /= static_cast<double>(n);
  if (var > 0.0) scale_ = std::sqrt(var);

  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = (data[i].reward - mean_) / scale_;
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel(points_[i], points_[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
    k(i, i) += noise;
  }
  chol_.compute(k);
  if (chol_.info() != Eigen::Success) throw std::runtime_error("gaussian process kernel is not positive definite");
  alpha_ = chol_.solve(y);
}

double GaussianProcess::kernel(std::span<const double> a, std::span<const double> b) const {
  double sq = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-sq / (2.0 * length_scale_ * length_scale_));
}

std::pair<double, double> GaussianProcess::predict(std::span<const double> point) const {
  const auto n = static_cast<Eigen::Index>(points_.size());
  Eigen::VectorXd kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) kstar(i) = kernel(point, points_[i]);
  const double mean = mean_ + scale_ * kstar.dot(alpha_);
  const Eigen::VectorXd v = chol_.matrixL().solve(kstar);
  const double var = std::max(1.0 - v.squaredNorm(), 1e-12);
  return {mean, std::sqrt(var) * scale_};
}

double GaussianProcess::expected_improvement(std::span<const double> point, double best_reward) const {
  const auto [mean, sd] = predict(point);
  return baselines::expected_improvement(mean, sd, best_reward);
}

double expected_improvement(double mean, double sd, double best) {
  const double gain = mean - best;
  if (sd <= 0.0) return std::max(gain, 0.0);
  const double z = gain / sd;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return gain * cdf + sd * pdf;
}

// ---------------------------------------------------------------- Bayes

BayesState::BayesState(int dim, BayesConfig config) : dim_(dim), config_(config) {
  if (dim_ < 1) throw std::invalid_argument("bayes search dimension must be positive");
}

Vec BayesState::propose(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto uniform_point = [&] {
    Vec p(dim_);
    for (double& v : p) v = unit(rng);
    return p;
  };
  if (static_cast<int>(points_.size()) < config_.warmup) return uniform_point();

  const GaussianProcess gp(points_, config_.length_scale, config_.noise);
  double best_reward = -std::numeric_limits<double>::infinity();
  const Vec* best_point = nullptr;
  for (const auto& obs : points_) {
    if (obs.reward > best_reward) {
      best_reward = obs.reward;
      best_point = &obs.point;
    }
  }

  Vec best = uniform_point();
  double best_ei = gp.expected_improvement(best, best_reward);
  for (int i = 1; i < config_.candidates; ++i) {
    Vec p = uniform_point();
    const double ei = gp.expected_improvement(p, best_reward);
    if (ei > best_ei) {
      best_ei = ei;
      best = std::move(p);
    }
  }

  // Local refinement around the best candidate and the incumbent.
  std::normal_distribution<double> jitter(0.0, config_.refine_radius);
  for (const Vec* start : std::initializer_list<const Vec*>{&best, best_point}) {
    Vec current = *start;
    double current_ei = gp.expected_improvement(current, best_reward);
    for (int step = 0; step < config_.refine_steps; ++step) {
      Vec p = current;
      for (double& v : p) v = std::clamp(v + jitter(rng), -1.0, 1.0);
      const double ei = gp.expected_improvement(p, best_reward);
      if (ei > current_ei) {
        current_ei = ei;
        current = std::move(p);
      }
    }
    if (current_ei > best_ei) {
      best_ei = current_ei;
      best = current;
    }
  }
  return best;
}

void BayesState::observe(Vec point, double reward) {
  if (static_cast<int>(point.size()) != dim_) throw std::invalid_argument("bayes observation has wrong dimension");
  if (!std::isfinite(reward)) throw std::invalid_argument("bayes observation reward is not finite");
  for (double v : point)
    if (!std::isfinite(v)) throw std::invalid_argument("bayes observation point is not finite");
  points_.push_back({std::move(point), reward});
}

nlohmann::json BayesState::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& obs : points_) pts.push_back({{"point", obs.point}, {"reward", obs.reward}});
  return {{"dim", dim_}, {"config", config_.to_json()}, {"observations", pts}};
}

BayesState BayesState::from_json(const nlohmann::json& j) {
  BayesState state(j.at("dim").get<int>(), BayesConfig::from_json(j.at("config")));
  for (const auto& obs : j.at("observations"))
    state.observe(obs.at("point").get<Vec>(), obs.at("reward").get<double>());
  return state;
}

}  // namespace limit::baselines
