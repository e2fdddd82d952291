#include "limit/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "limit/csv.hpp"

namespace limit::runner {

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Naive: return "naive";
    case Algorithm::Bayes: return "bayes";
    case Algorithm::Convey: return "convey";
    case Algorithm::Distinguish: return "distinguish";
    case Algorithm::Limit: return "limit";
  }
  return "limit";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (Algorithm a : all_algorithms())
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::vector<Algorithm> all_algorithms() {
  return {Algorithm::Naive, Algorithm::Bayes, Algorithm::Convey, Algorithm::Distinguish, Algorithm::Limit};
}

// ---------------------------------------------------------------- interfaces

NaiveInterface::NaiveInterface(const env::EnvConfig& env, std::mt19937_64& rng)
    : iface_(baselines::naive_init(rng, env.signal_dim, env.state_dim, env.theta_dim)) {}

Vec NaiveInterface::signal(const Vec& state, const Vec& theta) const { return iface_.signal(state, theta); }

BayesInterface::BayesInterface(const env::EnvConfig& env, baselines::BayesConfig config, std::uint64_t seed)
    : env_(env), state_(env.signal_dim * (env.state_dim + env.theta_dim), config), rng_(seed) {
  activate(state_.propose(rng_));
}

void BayesInterface::activate(Vec entries) {
  active_ = std::move(entries);
  iface_ = baselines::linear_from_vector(active_, env_.signal_dim, env_.state_dim, env_.theta_dim);
  ++version_;
}

Vec BayesInterface::signal(const Vec& state, const Vec& theta) const { return iface_.signal(state, theta); }

void BayesInterface::end_interaction() {}

void BayesInterface::observe_reward(double reward) {
  state_.observe(active_, reward);
  activate(state_.propose(rng_));
}

LimitInterface::LimitInterface(core::LimitLearner learner, std::uint64_t sample_seed)
    : learner_(std::move(learner)), rng_(sample_seed) {
  const auto& c = learner_.config();
  dataset_ = core::Dataset(c.state_dim, c.signal_dim, c.action_dim, c.theta_dim);
}

Vec LimitInterface::signal(const Vec& state, const Vec& theta) const { return learner_.signal(state, theta); }

void LimitInterface::before_step(int, int) {
  if (auto report = learner_.train_step(dataset_, dynamics_, rng_)) last_ = report;
}

void LimitInterface::record(const core::Experience& e) { dataset_.append(e); }

// ---------------------------------------------------------------- config

core::LearnerConfig default_learner(const env::EnvConfig& e) {
  core::LearnerConfig c;
  c.state_dim = e.state_dim;
  c.action_dim = e.state_dim;
  c.signal_dim = e.signal_dim;
  c.theta_dim = e.theta_dim;
  // Tuned for the co-adaptive simulations. Without the human-model fit the
  // learned H drifts to a gain above the human's, and signals shrink until an
  // Align human (|c| <= 1) can no longer reach the goal.
  c.human_fit_weight = 10.0;
  c.batch_size = 16;
  c.learning_rate = 3e-3;
  double box = 0.0;
  for (int i = 0; i < e.theta_dim; ++i) box = std::max({box, std::abs(e.theta_low[i]), std::abs(e.theta_high[i])});
  if (box > 0.0) {
    c.state_scale = box;
    c.theta_scale = box;
  }
  return c;
}

ExperimentConfig ExperimentConfig::make(const std::string& preset, Algorithm algo, human::HumanKind human,
                                        std::vector<std::uint64_t> seeds) {
  ExperimentConfig c;
  c.preset = preset;
  c.algo = algo;
  c.human = human;
  c.seeds = std::move(seeds);
  c.learner = default_learner(c.environment());
  return c;
}

env::EnvConfig ExperimentConfig::environment() const {
  env::EnvConfig e = env ? *env : env::preset(preset);
  e.validate();
  return e;
}

core::LearnerConfig ExperimentConfig::learner_for(const env::EnvConfig& e, std::uint64_t seed) const {
  core::LearnerConfig c = learner;
  c.state_dim = e.state_dim;
  c.action_dim = e.state_dim;
  c.signal_dim = e.signal_dim;
  c.theta_dim = e.theta_dim;
  c.seed = seed;
  if (algo == Algorithm::Convey) c.loss_mode = core::LossMode::ConveyOnly;
  if (algo == Algorithm::Distinguish) c.loss_mode = core::LossMode::DistinguishOnly;
  if (algo == Algorithm::Limit) c.loss_mode = core::LossMode::Full;
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = {{"preset", preset},
                      {"algo", to_string(algo)},
                      {"human", human::to_string(human)},
                      {"seeds", seeds},
                      {"learner", learner.to_json()},
                      {"human_config", human_config.to_json()},
                      {"bayes", bayes.to_json()},
                      {"out", out},
                      {"threads", threads}};
  if (env) j["env"] = env->to_json();
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.preset = j.value("preset", c.preset);
  if (j.contains("env")) c.env = env::EnvConfig::from_json(j.at("env"));
  c.algo = algorithm_from_string(j.value("algo", to_string(c.algo)));
  c.human = human::human_kind_from_string(j.value("human", human::to_string(c.human)));
  c.seeds = j.value("seeds", c.seeds);
  const env::EnvConfig e = c.environment();
  c.learner = default_learner(e);
  if (j.contains("learner")) {
    nlohmann::json merged = c.learner.to_json();
    merged.update(j.at("learner"));
    c.learner = core::LearnerConfig::from_json(merged);
  }
  if (j.contains("human_config")) c.human_config = human::HumanConfig::from_json(j.at("human_config"));
  if (j.contains("bayes")) c.bayes = baselines::BayesConfig::from_json(j.at("bayes"));
  c.out = j.value("out", c.out);
  c.threads = j.value("threads", c.threads);
  return c;
}

// ---------------------------------------------------------------- interaction

InteractionOutcome run_interaction(const env::EnvConfig& env, human::SimulatedHuman& human,
                                   InterfacePolicy& iface, int interaction, std::mt19937_64& theta_rng,
                                   std::mt19937_64& human_rng) {
  if (human.action_dim() != env.state_dim || human.signal_dim() != env.signal_dim)
    throw std::invalid_argument("human dimensions do not match the environment");
  if (auto* limit = dynamic_cast<LimitInterface*>(&iface)) {
    const auto& c = limit->learner().config();
    if (c.state_dim != env.state_dim || c.signal_dim != env.signal_dim || c.theta_dim != env.theta_dim)
      throw std::invalid_argument("learner dimensions do not match the environment");
  }

  InteractionOutcome out;
  out.log.theta = env::sample_theta(env, theta_rng);
  const bool is_naive = dynamic_cast<NaiveInterface*>(&iface) != nullptr;
  const bool is_bayes = dynamic_cast<BayesInterface*>(&iface) != nullptr;
  const std::uint64_t start_version = iface.version();

  Vec state = env.start_state;
  std::vector<Vec> signals;
  for (int t = 0; t < env.horizon; ++t) {
    const std::uint64_t before = iface.version();
    iface.before_step(interaction, t);
    const std::uint64_t after = iface.version();
    if (after != before) ++out.train_steps;
    if ((is_naive || is_bayes) && after != start_version)
      throw std::logic_error(to_string(is_naive ? Algorithm::Naive : Algorithm::Bayes) +
                             " interface changed inside an interaction");

    Vec x = iface.signal(state, out.log.theta);
    if (static_cast<int>(x.size()) != env.signal_dim) throw std::invalid_argument("interface signal has wrong dimension");
    Vec a = human.act(state, x);
    iface.record({state, x, a, out.log.theta, interaction, t});
    if (iface.version() != after) throw std::logic_error("interface changed while signalling");
    out.log.steps.push_back({state, x, a});
    signals.push_back(std::move(x));
    state = env::step(state, a);
  }
  out.log.final_state = state;
  out.log.duration = static_cast<double>(env.horizon);
  out.metrics = env::metrics(out.log);
  out.reward = env::reward(out.log);
  out.losses = iface.last_losses();

  human.end_interaction({env.start_state, std::move(signals), out.log.theta, out.reward}, human_rng);
  out.interpretation = human.interpretation();

  iface.end_interaction();
  if (auto* listener = dynamic_cast<RewardListener*>(&iface)) {
    listener->observe_reward(out.reward);
    ++out.reward_deliveries;
  }
  if (is_naive && iface.version() != start_version) throw std::logic_error("naive interface changed");
  return out;
}

// ---------------------------------------------------------------- experiments

SeedStreams seed_streams(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x4c494d49u};
  std::vector<std::uint64_t> words(5);
  std::vector<std::uint32_t> raw(10);
  seq.generate(raw.begin(), raw.end());
  for (size_t i = 0; i < words.size(); ++i) words[i] = (std::uint64_t{raw[2 * i]} << 32) | raw[2 * i + 1];
  return {std::mt19937_64(words[0]), std::mt19937_64(words[1]), std::mt19937_64(words[2]), words[3], words[4]};
}

std::unique_ptr<InterfacePolicy> make_interface(const ExperimentConfig& config, const env::EnvConfig& env,
                                                std::uint64_t seed) {
  const SeedStreams streams = seed_streams(seed);
  switch (config.algo) {
    case Algorithm::Naive: {
      std::mt19937_64 rng(streams.interface_seed);
      return std::make_unique<NaiveInterface>(env, rng);
    }
    case Algorithm::Bayes:
      return std::make_unique<BayesInterface>(env, config.bayes, streams.interface_seed);
    case Algorithm::Convey:
    case Algorithm::Distinguish:
    case Algorithm::Limit:
      return std::make_unique<LimitInterface>(
          core::LimitLearner(config.learner_for(env, streams.interface_seed)), streams.sample_seed);
  }
  throw std::invalid_argument("unknown algorithm");
}

std::vector<ResultRow> run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  const env::EnvConfig env = config.environment();
  SeedStreams streams = seed_streams(seed);
  auto human = human::SimulatedHuman::random(config.human, env.state_dim, env.signal_dim, streams.human_init,
                                             config.human_config);
  auto iface = make_interface(config, env, seed);
  std::vector<ResultRow> rows;
  rows.reserve(env.interactions);
  for (int i = 0; i < env.interactions; ++i) {
    const auto outcome = run_interaction(env, human, *iface, i, streams.theta, streams.human_adapt);
    ResultRow row;
    row.algo = to_string(config.algo);
    row.preset = env.name;
    row.human = human::to_string(config.human);
    row.seed = seed;
    row.interaction = i;
    row.error = outcome.metrics.error;
    row.distance = outcome.metrics.distance;
    row.reward = outcome.reward;
    row.time = outcome.metrics.time;
    row.interp_angle = outcome.interpretation.angle;
    row.interp_scale = outcome.interpretation.scale;
    row.losses = outcome.losses;
    row.reward_deliveries = outcome.reward_deliveries;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv_header(std::ostream& out) {
  out << "algo,preset,human,seed,interaction,error,distance,reward,time,interp_angle,interp_scale,"
         "loss_convey,loss_distinguish,loss_human_fit,loss_total,reward_deliveries\n";
}

void write_csv_row(std::ostream& out, const ResultRow& r) {
  out << r.algo << ',' << r.preset << ',' << r.human << ',' << r.seed << ',' << r.interaction << ','
      << csv::format(r.error) << ',' << csv::format(r.distance) << ',' << csv::format(r.reward) << ','
      << csv::format(r.time) << ',' << csv::format(r.interp_angle) << ',' << csv::format(r.interp_scale) << ',';
  if (r.losses) {
    out << csv::format(r.losses->convey) << ',' << csv::format(r.losses->distinguish) << ','
        << csv::format(r.losses->human_fit) << ',' << csv::format(r.losses->total);
  } else {
    out << ",,,";
  }
  out << ',' << r.reward_deliveries << '\n';
}

RunResult read_csv(std::istream& in) {
  RunResult result;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("results CSV is empty");
  const auto header = csv::split(line);
  if (header.size() != 16 || header[0] != "algo") throw std::invalid_argument("results CSV header is malformed");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("#incomplete", 0) == 0) throw std::runtime_error("results CSV is flagged incomplete");
    const auto f = csv::split(line);
    if (f.size() != header.size()) throw std::invalid_argument("results CSV row has wrong width");
    ResultRow r;
    r.algo = f[0];
    r.preset = f[1];
    r.human = f[2];
    r.seed = std::stoull(f[3]);
    r.interaction = std::stoi(f[4]);
    r.error = csv::parse_double(f[5]);
    r.distance = csv::parse_double(f[6]);
    r.reward = csv::parse_double(f[7]);
    r.time = csv::parse_double(f[8]);
    r.interp_angle = csv::parse_double(f[9]);
    r.interp_scale = csv::parse_double(f[10]);
    if (!f[11].empty())
      r.losses = core::LossReport{.convey = csv::parse_double(f[11]),
                                  .distinguish = csv::parse_double(f[12]),
                                  .human_fit = csv::parse_double(f[13]),
                                  .total = csv::parse_double(f[14])};
    r.reward_deliveries = std::stoi(f[15]);
    result.rows.push_back(std::move(r));
  }
  return result;
}

RunResult run_experiment(const ExperimentConfig& config, std::ostream* out) {
  const size_t n = config.seeds.size();
  std::vector<std::optional<std::vector<ResultRow>>> done(n);
  std::mutex mu;
  size_t next_to_write = 0;
  bool write_failed = false;
  std::exception_ptr failure;
  RunResult result;

  if (out) {
    write_csv_header(*out);
    out->flush();
  }
  auto flush_ready = [&] {
    // Caller holds mu.
    while (next_to_write < n && done[next_to_write]) {
      for (const auto& row : *done[next_to_write]) {
        if (out && !write_failed) write_csv_row(*out, row);
        result.rows.push_back(row);
      }
      if (out && !write_failed) {
        out->flush();
        if (!*out) write_failed = true;
      }
      done[next_to_write].reset();
      ++next_to_write;
    }
  };

  std::atomic<size_t> next_seed{0};
  auto worker = [&] {
    while (true) {
      const size_t i = next_seed.fetch_add(1);
      if (i >= n) return;
      try {
        auto rows = run_seed(config, config.seeds[i]);
        std::lock_guard lock(mu);
        done[i] = std::move(rows);
        flush_ready();
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next_seed = n;
        return;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (write_failed) {
    out->clear();
    *out << "#incomplete\n";
    out->flush();
    throw std::runtime_error("failed writing results; partial file flagged #incomplete");
  }
  return result;
}

// ---------------------------------------------------------------- statistics

PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired test needs equally many observations");
  if (a.size() < 2) throw std::invalid_argument("paired test needs at least two pairs");
  PairedTest test;
  test.n = static_cast<int>(a.size());
  std::vector<double> d(a.size());
  for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(d.size() - 1));
  test.mean_diff = mean;
  const bool constant = std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); });
  if (constant || sd == 0.0) {
    if (mean == 0.0) {
      test.t = 0.0;
      test.p = 1.0;
    } else {
      test.exact_difference = true;
      test.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      test.p = 0.0;
    }
    return test;
  }
  test.t = mean / (sd / std::sqrt(static_cast<double>(d.size())));
  boost::math::students_t dist(static_cast<double>(d.size() - 1));
  test.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(test.t))));
  return test;
}

StatsReport aggregate_stats(const std::vector<ResultRow>& rows, int window) {
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  if (rows.empty()) throw std::invalid_argument("no result rows");
  std::vector<std::string> order;
  std::map<std::string, std::map<std::uint64_t, std::vector<std::pair<int, double>>>> grouped;
  std::set<std::string> presets;
  for (const auto& r : rows) {
    if (!grouped.count(r.algo)) order.push_back(r.algo);
    grouped[r.algo][r.seed].push_back({r.interaction, r.error});
    presets.insert(r.preset);
  }
  if (presets.size() != 1) throw std::invalid_argument("results mix several environments");

  StatsReport report;
  for (const auto& algo : order) {
    AlgorithmSummary summary;
    summary.algo = algo;
    for (auto& [seed, errors] : grouped[algo]) {
      std::sort(errors.begin(), errors.end());
      const size_t w = std::min(errors.size(), static_cast<size_t>(window));
      double sum = 0.0;
      for (size_t i = errors.size() - w; i < errors.size(); ++i) sum += errors[i].second;
      summary.per_seed[seed] = sum / static_cast<double>(w);
    }
    double mean = 0.0;
    for (const auto& [seed, v] : summary.per_seed) mean += v;
    mean /= static_cast<double>(summary.per_seed.size());
    double ss = 0.0;
    for (const auto& [seed, v] : summary.per_seed) ss += (v - mean) * (v - mean);
    const double n = static_cast<double>(summary.per_seed.size());
    summary.mean = mean;
    summary.std_error = n > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
    report.summaries.push_back(std::move(summary));
  }

  for (size_t i = 0; i < report.summaries.size(); ++i) {
    for (size_t j = i + 1; j < report.summaries.size(); ++j) {
      const auto& a = report.summaries[i];
      const auto& b = report.summaries[j];
      std::vector<double> va, vb;
      for (const auto& [seed, v] : a.per_seed) {
        auto it = b.per_seed.find(seed);
        if (it == b.per_seed.end()) throw std::invalid_argument("algorithms " + a.algo + " and " + b.algo + " do not share seeds");
        va.push_back(v);
        vb.push_back(it->second);
      }
      if (va.size() != b.per_seed.size())
        throw std::invalid_argument("algorithms " + a.algo + " and " + b.algo + " do not share seeds");
      PairedTest test = paired_t_test(va, vb);
      test.a = a.algo;
      test.b = b.algo;
      report.tests.push_back(test);
    }
  }
  return report;
}

void print_stats(std::ostream& out, const StatsReport& report) {
  out << std::fixed << std::setprecision(4);
  out << "algorithm      mean_error   std_error   seeds\n";
  for (const auto& s : report.summaries)
    out << std::left << std::setw(14) << s.algo << std::right << std::setw(11) << s.mean << std::setw(12)
        << s.std_error << std::setw(8) << s.per_seed.size() << '\n';
  out << "\npaired t-tests (a - b)\n";
  for (const auto& t : report.tests) {
    out << std::left << std::setw(12) << t.a << " vs " << std::setw(12) << t.b << std::right
        << " diff=" << std::setw(9) << t.mean_diff << " t=" << std::setw(9) << t.t << " p=" << std::setw(8)
        << t.p;
    if (t.exact_difference) out << "  (exact difference)";
    out << '\n';
  }
  out.unsetf(std::ios::fixed);
}

void write_svg(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& title) {
  std::vector<std::string> order;
  std::map<std::string, std::map<int, std::vector<double>>> curves;
  int max_interaction = 0;
  for (const auto& r : rows) {
    if (!curves.count(r.algo)) order.push_back(r.algo);
    curves[r.algo][r.interaction].push_back(r.error);
    max_interaction = std::max(max_interaction, r.interaction);
  }
  struct Point {
    int x;
    double mean, se;
  };
  std::map<std::string, std::vector<Point>> series;
  double ymax = 0.0;
  for (const auto& algo : order) {
    for (const auto& [i, errs] : curves[algo]) {
      double mean = 0.0;
      for (double e : errs) mean += e;
      mean /= static_cast<double>(errs.size());
      double ss = 0.0;
      for (double e : errs) ss += (e - mean) * (e - mean);
      const double n = static_cast<double>(errs.size());
      const double se = n > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
      series[algo].push_back({i, mean, se});
      ymax = std::max(ymax, mean + se);
    }
  }
  if (ymax <= 0.0) ymax = 1.0;

  const double width = 640, height = 400, left = 60, right = 140, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double i) { return left + (max_interaction > 0 ? i / max_interaction : 0.0) * pw; };
  auto py = [&](double v) { return top + ph - v / ymax * ph; };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = ymax * k / 4.0;
    out << "<text x=\"" << left - 8 << "\" y=\"" << py(v) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\" "
        << "text-anchor=\"end\">" << v << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">interaction</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << top + ph / 2 << ")\" text-anchor=\"middle\">error</text>\n";

  for (size_t a = 0; a < order.size(); ++a) {
    const char* color = colors[a % 6];
    const auto& pts = series[order[a]];
    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (const auto& p : pts) out << px(p.x) << ',' << py(p.mean + p.se) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) out << px(it->x) << ',' << py(std::max(0.0, it->mean - it->se)) << ' ';
    out << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) out << px(p.x) << ',' << py(p.mean) << ' ';
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(a);
    out << "<rect x=\"" << left + pw + 12 << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"" << color
        << "\"/>\n<text x=\"" << left + pw + 30 << "\" y=\"" << ly + 10
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << order[a] << "</text>\n";
  }
  out << "</svg>\n";
  out.unsetf(std::ios::fixed);
}

}  // namespace limit::runner
