// Copyright 2026 The uavh Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     https://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end:
//
//   uavh fit-channel  [--config cfg.json]            LoS sweep + logistic fit
//   uavh offline      --config cfg.json [--scheme]   offline design JSON
//   uavh simulate     --solution sol.json [--policy] one episode trace CSV
//   uavh evaluate     --config cfg.json              Monte-Carlo results
//   uavh plot-data    [--results results.csv]        per-figure CSV series
//
// Outputs go to --out, else $UAVH_OUT_DIR, else ./uavh_out. Exit codes: 0 ok,
// 1 runtime error, 2 usage error, 3 invariant violation.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "uavh/harness.hpp"
#include "uavh/io.hpp"
#include "uavh/offline.hpp"
#include "uavh/online.hpp"

namespace fs = std::filesystem;
using namespace uavh;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

fs::path output_dir(const GlobalFlags& g) {
  fs::path dir = g.out;
  if (dir.empty()) {
    const char* env = std::getenv("UAVH_OUT_DIR");
    dir = env != nullptr && *env != '\0' ? env : "uavh_out";
  }
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig load_config(const GlobalFlags& g) {
  ExperimentConfig cfg =
      g.config.empty() ? ExperimentConfig{} : experiment_from_json(Json::parse(read_text_file(g.config)));
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

void write_out(const fs::path& path, const std::string& text) {
  write_text_file(path.string(), text);
  std::cout << "wrote " << path.string() << "\n";
}

int cmd_fit_channel(const GlobalFlags& g) {
  const ExperimentConfig cfg = load_config(g);
  const LosSampleTable table =
      sample_los_probability(cfg.city, cfg.fit_cities, derive_seed(cfg.seed, 1));
  const LogisticFit fit = fit_logistic(table);
  const fs::path dir = output_dir(g);
  write_out(dir / "los_table.csv", los_table_to_csv(table));
  write_out(dir / "channel_fit.json", to_json(fit).dump(2) + "\n");
  return 0;
}

int cmd_offline(const GlobalFlags& g, const std::string& scheme, std::optional<double> t0,
                std::optional<int> sensors) {
  const ExperimentConfig cfg = load_config(g);
  const int k = sensors.value_or(cfg.sensor_counts.front());
  const double duration = t0.value_or(cfg.durations.front());
  const MissionConfig mission = mission_for_duration(cfg.mission, duration);
  const std::vector<Vec2> layout = sensor_layout(cfg, k);
  const ChannelParams params = with_sensor_count(experiment_channel(cfg), k);
  OfflineSolution sol;
  if (scheme == "PLB") {
    sol = bcd_optimize(mission, layout, params, cfg.offline);
  } else if (scheme == "PLLA") {
    sol = baseline_plla(mission, layout, params, cfg.offline);
  } else {
    sol = baseline_lb(mission, layout, params, cfg.offline);
  }
  check_trajectory(sol.trajectory, sol.mission);
  std::cout << "eta " << format_double(sol.eta) << " after " << sol.iterations
            << " iterations\n";
  write_out(output_dir(g) / ("offline_" + scheme + ".json"), to_json(sol).dump(2) + "\n");
  return 0;
}

int cmd_simulate(const GlobalFlags& g, const std::string& solution_path, const std::string& policy,
                 int realization) {
  const OfflineSolution sol =
      offline_solution_from_json(Json::parse(read_text_file(solution_path)));
  const ExperimentConfig cfg = load_config(g);
  // The episode is scored under the experiment model, not the design model
  // (which for LB assumes LoS everywhere).
  const ChannelParams params =
      with_sensor_count(experiment_channel(cfg), static_cast<int>(sol.sensors.size()));
  const CityRealization city = realization_city(cfg, sol.sensors, realization);
  EpisodeOptions opts;
  opts.iid_states = cfg.iid_states;
  opts.iid_seed = derive_seed(city.rng_seed, 1);
  const EpisodeResult ep = run_episode(sol, city, policy_from_string(policy), params, opts);
  std::vector<double> t_hat;
  for (const PathSegment& s : build_path(sol, params)) t_hat.push_back(s.t_hat);
  check_episode(ep, sol.mission.t0, t_hat);
  std::cout << "min-rate " << format_double(ep.min_rate) << " bps/Hz\n";
  write_out(output_dir(g) / ("trace_" + policy + "_" + std::to_string(realization) + ".csv"),
            episode_to_csv(ep));
  return 0;
}

int cmd_evaluate(const GlobalFlags& g) {
  const ExperimentConfig cfg = load_config(g);
  const MonteCarloResult res = run_monte_carlo(cfg);
  const fs::path dir = output_dir(g);
  write_out(dir / "results.csv", results_to_csv(res.rows));
  write_out(dir / "timings.csv", timings_to_csv(res.rows));
  write_out(dir / "aggregates.csv", aggregates_to_csv(res.aggregates));
  Json aggs = Json::array();
  for (const Aggregate& a : res.aggregates) {
    aggs.push_back({{"scheme", a.scheme},
                    {"sensors", a.sensors},
                    {"duration", a.duration},
                    {"count", a.count},
                    {"mean", a.mean},
                    {"stderr", a.stderr_mean}});
  }
  const Json summary = {{"config", to_json(cfg)},
                        {"channel", to_json(res.channel)},
                        {"aggregates", aggs}};
  write_out(dir / "summary.json", summary.dump(2) + "\n");
  for (const auto& [key, sol] : res.offline) {
    write_out(dir / ("offline_" + key + ".json"), to_json(sol).dump(2) + "\n");
  }
  return 0;
}

int cmd_plot_data(const GlobalFlags& g, std::string results_path) {
  const fs::path dir = output_dir(g);
  if (results_path.empty()) results_path = (dir / "results.csv").string();
  const std::vector<ResultRow> rows = results_from_csv(read_text_file(results_path));
  const fs::path src = fs::path(results_path).parent_path();
  const fs::path timings = src / "timings.csv";
  const std::string timings_csv = fs::exists(timings) ? read_text_file(timings.string()) : "";
  std::map<std::string, OfflineSolution> offline;
  if (fs::exists(src.empty() ? fs::path(".") : src)) {
    for (const auto& entry : fs::directory_iterator(src.empty() ? fs::path(".") : src)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("offline_", 0) == 0 && entry.path().extension() == ".json") {
        offline.emplace(entry.path().stem().string().substr(8),
                        offline_solution_from_json(Json::parse(read_text_file(entry.path().string()))));
      }
    }
  }
  for (const FigureSeries& s : figure_series(rows, timings_csv, offline)) {
    write_out(dir / (s.name + ".csv"), s.csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic-LoS UAV data collection: channel fitting, offline design, "
               "online adaptation and Monte-Carlo evaluation"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--out", g.out, "Output directory (default $UAVH_OUT_DIR or ./uavh_out)");

  auto* fit = app.add_subcommand("fit-channel", "Ray-traced LoS sweep and logistic fit");
  fit->add_option("--config", g.config, "Experiment config JSON")->check(CLI::ExistingFile);

  std::string scheme = "PLB";
  std::optional<double> t0;
  std::optional<int> sensors;
  auto* off = app.add_subcommand("offline", "Offline trajectory and schedule design");
  off->add_option("--config", g.config, "Experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  off->add_option("--scheme", scheme, "PLB, PLLA or LB")->check(CLI::IsMember({"PLB", "PLLA", "LB"}));
  off->add_option("--t0", t0, "Flight duration in s (default: first of the sweep)");
  off->add_option("--sensors", sensors, "Sensor count (default: first of the sweep)");

  std::string solution;
  std::string policy = "JA";
  int realization = 0;
  auto* sim = app.add_subcommand("simulate", "Run one online episode in a realized city");
  sim->add_option("--solution", solution, "Offline design JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--config", g.config, "Experiment config JSON")->check(CLI::ExistingFile);
  sim->add_option("--policy", policy, "PLB, ACS, JA or OJA")
      ->check(CLI::IsMember({"PLB", "ACS", "JA", "OJA"}));
  sim->add_option("--realization", realization, "City realization index")->check(CLI::NonNegativeNumber);

  auto* eval = app.add_subcommand("evaluate", "Monte-Carlo evaluation of all schemes");
  eval->add_option("--config", g.config, "Experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);

  std::string results;
  auto* plot = app.add_subcommand("plot-data", "Per-figure CSV series from evaluation output");
  plot->add_option("--results", results, "results.csv (default: <out>/results.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*fit) return cmd_fit_channel(g);
    if (*off) return cmd_offline(g, scheme, t0, sensors);
    if (*sim) return cmd_simulate(g, solution, policy, realization);
    if (*eval) return cmd_evaluate(g);
    if (*plot) return cmd_plot_data(g, results);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
