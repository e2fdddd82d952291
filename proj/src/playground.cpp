#include "limit/playground.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <httplib.h>

#include "limit/csv.hpp"
#include "limit/runner.hpp"

namespace limit::playground {

std::string to_string(Mode mode) {
  return mode == Mode::PretrainedFrozen ? "pretrained-frozen" : "pretrained-online";
}

Mode mode_from_string(const std::string& name) {
  if (name == "pretrained-frozen") return Mode::PretrainedFrozen;
  if (name == "pretrained-online") return Mode::PretrainedOnline;
  throw std::invalid_argument("unknown playground mode: " + name);
}

std::string to_string(PlaygroundAlgo algo) { return algo == PlaygroundAlgo::Naive ? "naive" : "limit"; }

PlaygroundAlgo playground_algo_from_string(const std::string& name) {
  if (name == "naive") return PlaygroundAlgo::Naive;
  if (name == "limit") return PlaygroundAlgo::Limit;
  throw std::invalid_argument("unknown playground algorithm: " + name);
}

double hue_for(double value) { return 240.0 * (1.0 - (std::clamp(value, -1.0, 1.0) + 1.0) / 2.0); }

double value_for_hue(double hue) { return 1.0 - 2.0 * std::clamp(hue, 0.0, 240.0) / 240.0; }

nlohmann::json TrialView::to_json() const {
  nlohmann::json bs = nlohmann::json::array();
  for (const auto& b : bars) bs.push_back({{"hue", b.hue}, {"value", b.value}});
  return {{"bars", bs}, {"trial_index", trial_index}, {"state", state}};
}

nlohmann::json SessionSummary::to_json() const { return {{"errors", errors}, {"mean_error", mean_error}}; }

nlohmann::json GuessResult::to_json() const {
  nlohmann::json j{{"theta", theta}, {"error", error}};
  if (next) j["trial"] = next->to_json();
  if (summary) j["summary"] = summary->to_json();
  return j;
}

PretrainedPolicy pretrain(core::LimitLearner learner, human::SimulatedHuman synthetic_human, int interactions,
                          std::uint64_t seed, const env::EnvConfig& env) {
  const auto& c = learner.config();
  if (c.state_dim != env.state_dim || c.signal_dim != env.signal_dim || c.theta_dim != env.theta_dim)
    throw std::invalid_argument("pretrain: learner dimensions do not match the environment");
  auto streams = runner::seed_streams(seed);
  runner::LimitInterface iface(std::move(learner), streams.sample_seed);
  for (int i = 0; i < interactions; ++i)
    runner::run_interaction(env, synthetic_human, iface, i, streams.theta, streams.human_adapt);
  return {iface.learner(), iface.dataset()};
}

// ---------------------------------------------------------------- session

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), salt};
  return std::mt19937_64(seq);
}

}  // namespace

Session::Session(std::string id, Mode mode, PlaygroundAlgo algo, std::uint64_t seed, const PretrainedPolicy& policy,
                 const env::EnvConfig& env)
    : id_(std::move(id)),
      mode_(mode),
      algo_(algo),
      seed_(seed),
      env_(env),
      learner_(policy.learner),
      dataset_(policy.dataset),
      theta_rng_(stream(seed, 0x7468u)),
      sample_rng_(stream(seed, 0x736du)) {
  if (env_.state_dim != 2 || env_.signal_dim != 2)
    throw std::invalid_argument("playground needs a 2D state and a 2-channel signal");
  auto naive_rng = stream(seed, 0x6e76u);
  naive_ = baselines::naive_init(naive_rng, env_.signal_dim, env_.state_dim, env_.theta_dim);
  begin_trial();
}

Vec Session::signal_for(const Vec& theta) const {
  const Vec state(env_.state_dim, 0.0);
  return algo_ == PlaygroundAlgo::Limit ? learner_.signal(state, theta) : naive_.signal(state, theta);
}

void Session::begin_trial() {
  theta_ = env::sample_theta(env_, theta_rng_);
  signal_ = signal_for(theta_);
}

TrialView Session::current_view() const {
  TrialView view;
  view.trial_index = trial_;
  view.state.assign(env_.state_dim, 0.0);
  for (size_t i = 0; i < view.bars.size(); ++i) view.bars[i] = {hue_for(signal_[i]), signal_[i]};
  return view;
}

GuessResult Session::submit(const Vec& guess, std::optional<int> trial_index) {
  if (trial_ >= kTrialsPerSession) throw SubmissionRejected("session is finished");
  if (trial_index && *trial_index != trial_)
    throw SubmissionRejected("trial " + std::to_string(*trial_index) + " was already answered");
  if (static_cast<int>(guess.size()) != env_.state_dim) throw std::invalid_argument("guess must have 2 coordinates");
  for (double v : guess)
    if (!std::isfinite(v)) throw std::invalid_argument("guess coordinates must be finite");

  const Vec state(env_.state_dim, 0.0);
  const Vec final_state = env::step(state, guess);
  const double error = std::sqrt(env::goal_gap_squared(final_state, theta_));
  records_.push_back({theta_, signal_, guess, error});

  if (mode_ == Mode::PretrainedOnline && algo_ == PlaygroundAlgo::Limit) {
    const int interaction = dataset_.empty() ? 0 : dataset_.items().back().interaction + 1;
    dataset_.append({state, signal_, guess, theta_, interaction, 0});
    learner_.train_step(dataset_, dynamics_, sample_rng_);
  }

  GuessResult result;
  result.theta = theta_;
  result.error = error;
  ++trial_;
  if (trial_ < kTrialsPerSession) {
    begin_trial();
    result.next = current_view();
  } else {
    SessionSummary summary;
    for (const auto& r : records_) summary.errors.push_back(r.error);
    summary.mean_error =
        std::accumulate(summary.errors.begin(), summary.errors.end(), 0.0) / static_cast<double>(records_.size());
    result.summary = summary;
  }
  return result;
}

nlohmann::json Session::snapshot() const {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& r : records_)
    trials.push_back({{"theta", r.theta}, {"signal", r.signal}, {"guess", r.guess}, {"error", r.error}});
  nlohmann::json j{{"id", id_},         {"mode", to_string(mode_)}, {"algo", to_string(algo_)},
                   {"seed", seed_},     {"trials", trials},         {"finished", trial_ >= kTrialsPerSession},
                   {"updates", learner_.updates()}};
  if (trial_ < kTrialsPerSession) j["trial"] = current_view().to_json();
  return j;
}

std::string Session::summary_csv() const {
  std::ostringstream out;
  out << "trial,theta_0,theta_1,signal_0,signal_1,guess_0,guess_1,error\n";
  for (size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    out << i;
    for (const Vec* v : {&r.theta, &r.signal, &r.guess})
      for (double x : *v) out << ',' << csv::format(x);
    out << ',' << csv::format(r.error) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------- manager

SessionManager::SessionManager(PretrainedPolicy policy, env::EnvConfig env)
    : policy_(std::move(policy)), env_(std::move(env)) {}

std::pair<std::string, TrialView> SessionManager::start(Mode mode, PlaygroundAlgo algo, std::uint64_t seed) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "s" + std::to_string(next_id_++);
  }
  // Built outside the map lock; copying the learner is the slow part.
  auto session = std::make_shared<Session>(id, mode, algo, seed, policy_, env_);
  TrialView view = session->current_view();
  std::lock_guard lock(mu_);
  sessions_.emplace(id, std::move(session));
  return {id, view};
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession("no session " + id);
  return it->second;
}

GuessResult SessionManager::submit(const std::string& id, const Vec& guess, std::optional<int> trial_index) {
  auto session = find(id);
  std::lock_guard lock(session->mutex());
  return session->submit(guess, trial_index);
}

nlohmann::json SessionManager::snapshot(const std::string& id) const {
  auto session = find(id);
  std::lock_guard lock(session->mutex());
  return session->snapshot();
}

std::string SessionManager::summary_csv(const std::string& id) const {
  auto session = find(id);
  std::lock_guard lock(session->mutex());
  return session->summary_csv();
}

// ---------------------------------------------------------------- http

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const UnknownSession& e) {
    send_error(res, 404, e.what());
  } catch (const SubmissionRejected& e) {
    send_error(res, 409, e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("bad request: ") + e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

void register_routes(httplib::Server& server, SessionManager& manager, const std::string& static_dir) {
  server.Post("/session", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
      const Mode mode = mode_from_string(body.value("mode", std::string("pretrained-frozen")));
      const PlaygroundAlgo algo = playground_algo_from_string(body.value("algo", std::string("limit")));
      const auto seed = body.value("seed", std::uint64_t{0});
      auto [id, view] = manager.start(mode, algo, seed);
      send_json(res, 201, {{"id", id}, {"trial", view.to_json()}});
    });
  });

  server.Post(R"(/session/([^/]+)/guess)", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      const Vec guess{body.at("x").get<double>(), body.at("y").get<double>()};
      std::optional<int> trial_index;
      if (body.contains("trial_index")) trial_index = body.at("trial_index").get<int>();
      send_json(res, 200, manager.submit(req.matches[1], guess, trial_index).to_json());
    });
  });

  server.Get(R"(/session/([^/]+)/summary\.csv)", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { res.set_content(manager.summary_csv(req.matches[1]), "text/csv"); });
  });

  server.Get(R"(/session/([^/]+))", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, manager.snapshot(req.matches[1])); });
  });

  if (!static_dir.empty() && !server.set_mount_point("/", static_dir))
    throw std::runtime_error("cannot serve static files from " + static_dir);
}

}  // namespace limit::playground
