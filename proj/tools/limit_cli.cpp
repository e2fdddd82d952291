// limit: run experiments, summarise results, plot curves, serve the playground.

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "limit/playground.hpp"
#include "limit/runner.hpp"

// After Eigen: <resolv.h> defines _res.
#include <httplib.h>

namespace {

using namespace limit;

// "0..19", "3", or "1,4,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw CLI::ValidationError("--seeds", "bad seed list: " + text);
    return v;
  };
  std::vector<std::uint64_t> seeds;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = number(std::string_view(text).substr(0, dots));
    const auto hi = number(std::string_view(text).substr(dots + 2));
    if (hi < lo) throw CLI::ValidationError("--seeds", "empty seed range: " + text);
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) seeds.push_back(number(part));
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  return seeds;
}

std::vector<runner::ResultRow> load_rows(const std::vector<std::string>& paths) {
  std::vector<runner::ResultRow> rows;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    auto result = runner::read_csv(in);
    rows.insert(rows.end(), result.rows.begin(), result.rows.end());
  }
  return rows;
}

nlohmann::json policy_to_json(const playground::PretrainedPolicy& policy) {
  std::ostringstream data;
  policy.dataset.write_csv(data);
  return {{"learner", policy.learner.to_json()}, {"dataset", data.str()}};
}

playground::PretrainedPolicy policy_from_json(const nlohmann::json& j) {
  std::istringstream data(j.at("dataset").get<std::string>());
  return {core::LimitLearner::from_json(j.at("learner")), core::Dataset::read_csv(data)};
}

playground::PretrainedPolicy make_policy(int interactions, std::uint64_t seed) {
  const auto env = env::preset("sim2d");
  auto cfg = runner::default_learner(env);
  cfg.seed = seed;
  std::mt19937_64 rng(seed);
  auto human = human::SimulatedHuman::random(human::HumanKind::Align, env.state_dim, env.signal_dim, rng);
  return playground::pretrain(core::LimitLearner(cfg), std::move(human), interactions, seed, env);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LIMIT online interface learning"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "simulate interactions and write per-interaction results");
  std::string config_path, preset = "sim1d", algo = "limit", human_kind = "align", seeds_text = "0", out;
  int threads = 1;
  run->add_option("--config", config_path, "JSON experiment config; flags given on the command line override it");
  run->add_option("--preset", preset)->check(CLI::IsMember(env::preset_names()));
  run->add_option("--algo", algo)->check(CLI::IsMember({"naive", "bayes", "convey", "distinguish", "limit"}));
  run->add_option("--human", human_kind)->check(CLI::IsMember({"rotate", "align"}));
  run->add_option("--seeds", seeds_text, "e.g. 0..19 or 1,2,3");
  run->add_option("--out", out, "results CSV (stdout when omitted)");
  run->add_option("--threads", threads)->check(CLI::PositiveNumber);

  // stats
  auto* stats = app.add_subcommand("stats", "windowed error means and paired t-tests");
  std::vector<std::string> inputs;
  int window = 5;
  stats->add_option("--in", inputs, "results CSV files")->required()->check(CLI::ExistingFile);
  stats->add_option("--window", window, "trailing interactions averaged per seed")->check(CLI::PositiveNumber);

  // plot
  auto* plot = app.add_subcommand("plot", "error-vs-interaction curves as SVG");
  std::vector<std::string> plot_inputs;
  std::string plot_out = "curves.svg", title = "error vs interaction";
  plot->add_option("--in", plot_inputs)->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out);
  plot->add_option("--title", title);

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "train a playground policy against a simulated Align human");
  int pre_interactions = 200;
  std::uint64_t pre_seed = 0;
  std::string pre_out = "policy.json";
  pre->add_option("--interactions", pre_interactions)->check(CLI::PositiveNumber);
  pre->add_option("--seed", pre_seed);
  pre->add_option("--out", pre_out);

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP+JSON playground backend");
  std::string host = "127.0.0.1", policy_path, static_dir;
  int port = 8080;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--policy", policy_path, "policy from `limit pretrain`; pretrains 200 interactions when omitted")
      ->check(CLI::ExistingFile);
  serve->add_option("--static", static_dir, "directory with the built UI")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      runner::ExperimentConfig config;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open " + config_path);
        config = runner::ExperimentConfig::from_json(nlohmann::json::parse(in));
      } else {
        config = runner::ExperimentConfig::make(preset, runner::algorithm_from_string(algo),
                                                human::human_kind_from_string(human_kind), {0});
      }
      if (run->count("--preset")) {
        config.preset = preset;
        config.env.reset();
        config.learner = runner::default_learner(config.environment());
      }
      if (run->count("--algo") || config_path.empty()) config.algo = runner::algorithm_from_string(algo);
      if (run->count("--human") || config_path.empty()) config.human = human::human_kind_from_string(human_kind);
      if (run->count("--seeds") || config_path.empty()) config.seeds = parse_seeds(seeds_text);
      if (run->count("--threads")) config.threads = threads;
      if (run->count("--out")) config.out = out;

      if (config.out.empty()) {
        runner::run_experiment(config, &std::cout);
      } else {
        std::ofstream file(config.out);
        if (!file) throw std::runtime_error("cannot write " + config.out);
        runner::run_experiment(config, &file);
      }
    } else if (*stats) {
      print_stats(std::cout, runner::aggregate_stats(load_rows(inputs), window));
    } else if (*plot) {
      std::ofstream file(plot_out);
      if (!file) throw std::runtime_error("cannot write " + plot_out);
      runner::write_svg(file, load_rows(plot_inputs), title);
    } else if (*pre) {
      const auto policy = make_policy(pre_interactions, pre_seed);
      std::ofstream file(pre_out);
      if (!file) throw std::runtime_error("cannot write " + pre_out);
      file << policy_to_json(policy).dump() << '\n';
      std::cerr << "pretrained " << pre_interactions << " interactions, " << policy.learner.updates()
                << " updates -> " << pre_out << '\n';
    } else if (*serve) {
      playground::PretrainedPolicy policy = [&] {
        if (policy_path.empty()) return make_policy(200, 0);
        std::ifstream in(policy_path);
        return policy_from_json(nlohmann::json::parse(in));
      }();
      playground::SessionManager manager(std::move(policy));
      httplib::Server server;
      playground::register_routes(server, manager, static_dir);
      std::cerr << "listening on http://" << host << ':' << port << '\n';
      if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const std::exception& e) {
    std::cerr << "limit: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
