#include "limit/info.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "limit/learner.hpp"

namespace limit::info {

namespace {

constexpr double kTol = 1e-12;

void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(what + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTol) throw std::invalid_argument(what + " does not sum to 1");
}

double xlogy_ratio(double p, double num, double den) {
  if (p <= 0.0) return 0.0;
  return p * std::log(num / den);
}

}  // namespace

TabularPolicy::TabularPolicy(size_t states, size_t thetas, size_t signals, size_t actions)
    : ns_(states), nt_(thetas), nx_(signals), na_(actions) {
  if (ns_ == 0 || nt_ == 0 || nx_ == 0 || na_ == 0) throw std::invalid_argument("tabular spaces must be nonempty");
  if (ns_ * nt_ * nx_ * na_ > kMaxJointSize)
    throw std::invalid_argument("tabular policy exceeds the joint size limit");
  interface_.assign(ns_ * nt_ * nx_, 0.0);
  human_.assign(ns_ * nx_ * na_, 0.0);
  state_prior_.assign(ns_, 1.0 / static_cast<double>(ns_));
  theta_prior_.assign(nt_, 1.0 / static_cast<double>(nt_));
}

void TabularPolicy::validate() const {
  if (state_prior_.size() != ns_ || theta_prior_.size() != nt_)
    throw std::invalid_argument("prior sizes do not match the table axes");
  check_distribution(state_prior_, "state prior");
  check_distribution(theta_prior_, "theta prior");
  for (size_t s = 0; s < ns_; ++s) {
    for (size_t th = 0; th < nt_; ++th)
      check_distribution(std::span(interface_).subspan((s * nt_ + th) * nx_, nx_), "interface slice");
    for (size_t x = 0; x < nx_; ++x)
      check_distribution(std::span(human_).subspan((s * nx_ + x) * na_, na_), "human slice");
  }
}

nlohmann::json TabularPolicy::to_json() const {
  nlohmann::json iface = nlohmann::json::array();
  for (size_t s = 0; s < ns_; ++s) {
    nlohmann::json per_s = nlohmann::json::array();
    for (size_t th = 0; th < nt_; ++th) {
      auto first = interface_.begin() + static_cast<std::ptrdiff_t>((s * nt_ + th) * nx_);
      per_s.push_back(Vec(first, first + static_cast<std::ptrdiff_t>(nx_)));
    }
    iface.push_back(per_s);
  }
  nlohmann::json hum = nlohmann::json::array();
  for (size_t s = 0; s < ns_; ++s) {
    nlohmann::json per_s = nlohmann::json::array();
    for (size_t x = 0; x < nx_; ++x) {
      auto first = human_.begin() + static_cast<std::ptrdiff_t>((s * nx_ + x) * na_);
      per_s.push_back(Vec(first, first + static_cast<std::ptrdiff_t>(na_)));
    }
    hum.push_back(per_s);
  }
  return {{"state_prior", state_prior_}, {"theta_prior", theta_prior_}, {"interface", iface}, {"human", hum}};
}

TabularPolicy TabularPolicy::from_json(const nlohmann::json& j) {
  const auto& iface = j.at("interface");
  const auto& hum = j.at("human");
  const size_t ns = iface.size();
  if (ns == 0 || hum.size() != ns) throw std::invalid_argument("table state axes disagree");
  const size_t nt = iface.at(0).size();
  const size_t nx = nt ? iface.at(0).at(0).size() : 0;
  const size_t na = hum.at(0).empty() ? 0 : hum.at(0).at(0).size();
  TabularPolicy pol(ns, nt, nx, na);
  for (size_t s = 0; s < ns; ++s) {
    if (iface[s].size() != nt || hum[s].size() != nx) throw std::invalid_argument("ragged table");
    for (size_t th = 0; th < nt; ++th) {
      const auto row = iface[s][th].get<Vec>();
      if (row.size() != nx) throw std::invalid_argument("ragged interface table");
      for (size_t x = 0; x < nx; ++x) pol.interface(s, th, x) = row[x];
    }
    for (size_t x = 0; x < nx; ++x) {
      const auto row = hum[s][x].get<Vec>();
      if (row.size() != na) throw std::invalid_argument("ragged human table");
      for (size_t a = 0; a < na; ++a) pol.human(s, x, a) = row[a];
    }
  }
  pol.state_prior() = j.at("state_prior").get<Vec>();
  pol.theta_prior() = j.at("theta_prior").get<Vec>();
  pol.validate();
  return pol;
}

double cond_mutual_info_direct(const TabularPolicy& pol) {
  pol.validate();
  const size_t ns = pol.states(), nt = pol.thetas(), nx = pol.signals(), na = pol.actions();
  // joint[s][a][theta] = sum_x P(s) P(theta) P(x|s,theta) P(a|s,x)
  Vec joint(ns * na * nt, 0.0);
  for (size_t s = 0; s < ns; ++s)
    for (size_t th = 0; th < nt; ++th) {
      const double pst = pol.state_prior()[s] * pol.theta_prior()[th];
      for (size_t x = 0; x < nx; ++x) {
        const double psx = pst * pol.interface(s, th, x);
        if (psx == 0.0) continue;
        for (size_t a = 0; a < na; ++a) joint[(s * na + a) * nt + th] += psx * pol.human(s, x, a);
      }
    }

  double total = 0.0;
  for (size_t s = 0; s < ns; ++s) {
    Vec p_st(nt, 0.0);  // P(s, theta)
    Vec p_sa(na, 0.0);  // P(s, a)
    double p_s = 0.0;
    for (size_t a = 0; a < na; ++a)
      for (size_t th = 0; th < nt; ++th) {
        const double p = joint[(s * na + a) * nt + th];
        p_st[th] += p;
        p_sa[a] += p;
        p_s += p;
      }
    for (size_t a = 0; a < na; ++a)
      for (size_t th = 0; th < nt; ++th) {
        const double p = joint[(s * na + a) * nt + th];
        if (p <= 0.0) continue;
        const double a_given_st = p / p_st[th];
        const double a_given_s = p_sa[a] / p_s;
        total += xlogy_ratio(p, a_given_st, a_given_s);
      }
  }
  return total;
}

double cond_mutual_info_factored(const TabularPolicy& pol) {
  pol.validate();
  const size_t ns = pol.states(), nt = pol.thetas(), nx = pol.signals(), na = pol.actions();
  double total = 0.0;
  for (size_t s = 0; s < ns; ++s) {
    // Signal marginal under the theta prior: sum_theta' P(x|s,theta') P(theta').
    Vec x_marginal(nx, 0.0);
    for (size_t th = 0; th < nt; ++th)
      for (size_t x = 0; x < nx; ++x) x_marginal[x] += pol.interface(s, th, x) * pol.theta_prior()[th];
    Vec t_dist(na, 0.0);
    for (size_t x = 0; x < nx; ++x)
      for (size_t a = 0; a < na; ++a) t_dist[a] += pol.human(s, x, a) * x_marginal[x];

    for (size_t th = 0; th < nt; ++th) {
      const double weight = pol.state_prior()[s] * pol.theta_prior()[th];
      if (weight == 0.0) continue;
      for (size_t a = 0; a < na; ++a) {
        double t_conv = 0.0;
        for (size_t x = 0; x < nx; ++x) t_conv += pol.human(s, x, a) * pol.interface(s, th, x);
        total += weight * xlogy_ratio(t_conv, t_conv, t_dist[a]);
      }
    }
  }
  return total;
}

size_t nearest_cell(std::span<const double> axis, double value) {
  if (axis.empty()) throw std::invalid_argument("grid axis is empty");
  size_t best = 0;
  double best_gap = std::abs(value - axis[0]);
  for (size_t i = 1; i < axis.size(); ++i) {
    const double gap = std::abs(value - axis[i]);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

size_t product_size(const std::vector<Vec>& axes) {
  if (axes.empty()) throw std::invalid_argument("product grid has no axes");
  size_t n = 1;
  for (const auto& axis : axes) {
    if (axis.empty()) throw std::invalid_argument("grid axis is empty");
    n *= axis.size();
  }
  return n;
}

size_t product_cell(const std::vector<Vec>& axes, std::span<const double> point) {
  if (point.size() != axes.size()) throw std::invalid_argument("point dimension does not match grid");
  size_t index = 0;
  for (size_t d = 0; d < axes.size(); ++d) index = index * axes[d].size() + nearest_cell(axes[d], point[d]);
  return index;
}

Vec product_point(const std::vector<Vec>& axes, size_t index) {
  Vec point(axes.size());
  for (size_t d = axes.size(); d-- > 0;) {
    point[d] = axes[d][index % axes[d].size()];
    index /= axes[d].size();
  }
  return point;
}

TabularPolicy tabularize(const core::LimitLearner& learner, const Grids& grids, const HumanFn& human) {
  if (grids.states.empty() || grids.thetas.empty()) throw std::invalid_argument("grid is empty");
  const size_t nx = product_size(grids.signal_axes);
  const size_t na = product_size(grids.action_axes);
  TabularPolicy pol(grids.states.size(), grids.thetas.size(), nx, na);
  for (size_t s = 0; s < grids.states.size(); ++s) {
    const Vec& state = grids.states[s];
    for (size_t th = 0; th < grids.thetas.size(); ++th)
      pol.interface(s, th, product_cell(grids.signal_axes, learner.signal(state, grids.thetas[th]))) = 1.0;
    for (size_t x = 0; x < nx; ++x) {
      const Vec signal = product_point(grids.signal_axes, x);
      const Vec action = human ? human(state, signal) : learner.predict_action(state, signal);
      pol.human(s, x, product_cell(grids.action_axes, action)) = 1.0;
    }
  }
  pol.validate();
  return pol;
}

}  // namespace limit::info
