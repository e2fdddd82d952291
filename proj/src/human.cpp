#include "limit/human.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "limit/env.hpp"

namespace limit::human {

namespace {
constexpr double kTieTolerance = 1e-9;
}

std::string to_string(HumanKind kind) { return kind == HumanKind::Rotate ? "rotate" : "align"; }

HumanKind human_kind_from_string(const std::string& name) {
  if (name == "rotate") return HumanKind::Rotate;
  if (name == "align") return HumanKind::Align;
  throw std::invalid_argument("unknown human type '" + name + "'");
}

nlohmann::json HumanConfig::to_json() const {
  return {{"adapt_samples", adapt_samples},
          {"adapt_window", adapt_window},
          {"angle_steps", angle_steps},
          {"scale_steps", scale_steps}};
}

HumanConfig HumanConfig::from_json(const nlohmann::json& j) {
  HumanConfig c;
  c.adapt_samples = j.value("adapt_samples", c.adapt_samples);
  c.adapt_window = j.value("adapt_window", c.adapt_window);
  c.angle_steps = j.value("angle_steps", c.angle_steps);
  c.scale_steps = j.value("scale_steps", c.scale_steps);
  return c;
}

Vec fold_signal(std::span<const double> signal, int action_dim) {
  const size_t d = static_cast<size_t>(action_dim);
  if (d == 0 || signal.size() % d != 0)
    throw std::invalid_argument("signal dimension must be a multiple of the action dimension");
  const size_t blocks = signal.size() / d;
  Vec out(d, 0.0);
  for (size_t b = 0; b < blocks; ++b)
    for (size_t i = 0; i < d; ++i) out[i] += signal[b * d + i];
  if (blocks > 1) {
    const double norm = 1.0 / std::sqrt(static_cast<double>(blocks));
    for (double& v : out) v *= norm;
  }
  return out;
}

SimulatedHuman::SimulatedHuman(HumanKind kind, int action_dim, int signal_dim, Interpretation initial,
                               HumanConfig config)
    : kind_(kind), action_dim_(action_dim), signal_dim_(signal_dim), interp_(initial), config_(config) {
  if (action_dim != 1 && action_dim != 2)
    throw std::invalid_argument("simulated humans act in 1 or 2 dimensions");
  if (signal_dim < 1 || signal_dim % action_dim != 0)
    throw std::invalid_argument("signal dimension must be a multiple of the action dimension");
  if (config_.adapt_samples < 1 || config_.adapt_window < 1 || config_.angle_steps < 1 ||
      config_.scale_steps < 1)
    throw std::invalid_argument("human adaptation settings must be positive");
  if (kind_ == HumanKind::Rotate) interp_.scale = 1.0;
}

SimulatedHuman SimulatedHuman::random(HumanKind kind, int action_dim, int signal_dim,
                                      std::mt19937_64& rng, HumanConfig config) {
  SimulatedHuman human(kind, action_dim, signal_dim, {}, config);
  const auto grid = human.candidates();
  std::uniform_int_distribution<size_t> pick(0, grid.size() - 1);
  human.interp_ = grid[pick(rng)];
  return human;
}

std::vector<Interpretation> SimulatedHuman::candidates() const {
  std::vector<double> angles;
  if (action_dim_ == 1) {
    angles = {0.0, std::numbers::pi};
  } else {
    for (int i = 0; i < config_.angle_steps; ++i)
      angles.push_back(2.0 * std::numbers::pi * i / config_.angle_steps);
  }
  std::vector<double> scales{1.0};
  if (kind_ == HumanKind::Align) {
    scales.clear();
    if (config_.scale_steps == 1) {
      scales.push_back(1.0);
    } else {
      for (int i = 0; i < config_.scale_steps; ++i)
        scales.push_back(-1.0 + 2.0 * i / (config_.scale_steps - 1));
    }
  }
  std::vector<Interpretation> out;
  out.reserve(angles.size() * scales.size());
  for (double angle : angles)
    for (double scale : scales) out.push_back({angle, scale});
  return out;
}

Vec SimulatedHuman::apply(const Interpretation& interp, std::span<const double> signal) const {
  if (static_cast<int>(signal.size()) != signal_dim_)
    throw std::invalid_argument("act: signal dimension mismatch");
  Vec x = fold_signal(signal, action_dim_);
  if (action_dim_ == 1) {
    const double sign = std::cos(interp.angle) >= 0.0 ? 1.0 : -1.0;
    return {interp.scale * sign * x[0]};
  }
  const double c = std::cos(interp.angle);
  const double s = std::sin(interp.angle);
  return {interp.scale * (c * x[0] - s * x[1]), interp.scale * (s * x[0] + c * x[1])};
}

Vec SimulatedHuman::act(std::span<const double> state, std::span<const double> signal) const {
  if (static_cast<int>(state.size()) != action_dim_)
    throw std::invalid_argument("act: state dimension mismatch");
  return apply(interp_, signal);
}

Vec SimulatedHuman::replay(const AdaptationRecord& record, const Interpretation& interp) const {
  Vec state = record.start_state;
  for (const Vec& x : record.signals) state = env::step(state, apply(interp, x));
  return state;
}

double SimulatedHuman::retrospective_reward(std::span<const AdaptationRecord> records,
                                            const Interpretation& interp) const {
  double total = 0.0;
  for (const auto& record : records) total += env::goal_reward(replay(record, interp), record.theta);
  return total;
}

std::vector<size_t> SimulatedHuman::adapt(std::span<const AdaptationRecord> records,
                                          std::mt19937_64& rng) {
  if (records.empty()) return {};
  const size_t window = std::min(records.size(), static_cast<size_t>(config_.adapt_window));
  std::vector<size_t> pool(window);
  std::iota(pool.begin(), pool.end(), records.size() - window);
  std::vector<size_t> chosen;
  std::sample(pool.begin(), pool.end(), std::back_inserter(chosen),
              std::min(window, static_cast<size_t>(config_.adapt_samples)), rng);

  std::vector<AdaptationRecord> sample;
  sample.reserve(chosen.size());
  for (size_t i : chosen) sample.push_back(records[i]);

  Interpretation best = interp_;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& candidate : candidates()) {
    const double score = retrospective_reward(sample, candidate);
    // (angle, c) and (angle + pi, -c) are the same map; round-off must not
    // decide between them, so near-equal scores keep the earlier candidate.
    if (std::isinf(best_score) || score > best_score + kTieTolerance * std::max(1.0, std::abs(best_score))) {
      best_score = score;
      best = candidate;
    }
  }
  interp_ = best;
  return chosen;
}

void SimulatedHuman::end_interaction(AdaptationRecord record, std::mt19937_64& rng) {
  history_.push_back(std::move(record));
  adapt(history_, rng);
}

}  // namespace limit::human
