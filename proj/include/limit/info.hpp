#pragma once

// Exact conditional mutual information I(a; theta | s) on small finite spaces.
//
// The joint is P(s, theta, x, a) = P(s) P(theta) P(x | s, theta) P(a | s, x).
// `cond_mutual_info_direct` marginalises that joint and evaluates
// sum P(s, a, theta) log P(a | theta, s) / P(a | s); the factored form
// evaluates sum P(s, theta) T_conv log(T_conv / T_dist) straight from the
// policy tables, with
//   T_conv = sum_x P(a | s, x) P(x | s, theta)
//   T_dist = sum_x P(a | s, x) sum_theta' P(x | s, theta') P(theta').
// Logs are natural; 0 log 0 = 0.

#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace limit::core {
class LimitLearner;
}

namespace limit::info {

using Vec = std::vector<double>;

class TabularPolicy {
 public:
  TabularPolicy(size_t states, size_t thetas, size_t signals, size_t actions);

  size_t states() const { return ns_; }
  size_t thetas() const { return nt_; }
  size_t signals() const { return nx_; }
  size_t actions() const { return na_; }

  // P(x | s, theta), axis order [s][theta][x].
  double& interface(size_t s, size_t th, size_t x) { return interface_[(s * nt_ + th) * nx_ + x]; }
  double interface(size_t s, size_t th, size_t x) const { return interface_[(s * nt_ + th) * nx_ + x]; }
  // P(a | s, x), axis order [s][x][a].
  double& human(size_t s, size_t x, size_t a) { return human_[(s * nx_ + x) * na_ + a]; }
  double human(size_t s, size_t x, size_t a) const { return human_[(s * nx_ + x) * na_ + a]; }

  Vec& state_prior() { return state_prior_; }
  const Vec& state_prior() const { return state_prior_; }
  Vec& theta_prior() { return theta_prior_; }
  const Vec& theta_prior() const { return theta_prior_; }

  // Throws std::invalid_argument unless every slice is a distribution (1e-12).
  void validate() const;
  size_t joint_size() const { return ns_ * na_ * nx_ * nt_; }

  // {"state_prior", "theta_prior", "interface": [s][theta][x], "human": [s][x][a]}
  nlohmann::json to_json() const;
  static TabularPolicy from_json(const nlohmann::json& j);

 private:
  size_t ns_, nt_, nx_, na_;
  Vec interface_;
  Vec human_;
  Vec state_prior_;
  Vec theta_prior_;
};

inline constexpr size_t kMaxJointSize = 1'000'000;

double cond_mutual_info_direct(const TabularPolicy& pol);
double cond_mutual_info_factored(const TabularPolicy& pol);

// Grid cell index of `value` on a sorted axis: the nearest point, with exact
// midpoints going to the lower index.
size_t nearest_cell(std::span<const double> axis, double value);

struct Grids {
  std::vector<Vec> states;           // explicit state points, uniform prior
  std::vector<Vec> thetas;           // explicit theta points, uniform prior
  std::vector<Vec> signal_axes;      // one sorted axis per signal dimension
  std::vector<Vec> action_axes;      // one sorted axis per action dimension
};

// Flattened product-grid index of a point (first axis slowest).
size_t product_cell(const std::vector<Vec>& axes, std::span<const double> point);
// Cell centre for a flattened product-grid index.
Vec product_point(const std::vector<Vec>& axes, size_t index);
size_t product_size(const std::vector<Vec>& axes);

using HumanFn = std::function<Vec(std::span<const double> state, std::span<const double> signal)>;

// Deterministic learner -> one-hot tables. The interface table comes from the
// learner's interface policy; the human table from `human` evaluated at each
// signal cell centre, or from the learner's own human model when empty.
TabularPolicy tabularize(const core::LimitLearner& learner, const Grids& grids, const HumanFn& human = {});

}  // namespace limit::info
