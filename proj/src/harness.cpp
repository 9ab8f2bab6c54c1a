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


#include "uavh/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace uavh {

namespace {

// Seed streams derived from the master seed.
constexpr std::uint64_t kFitStream = 1;
constexpr std::uint64_t kLayoutStream = 1000;
constexpr std::uint64_t kCityStream = 1u << 20;

constexpr double kAltitudeStep = 1.0;  // m, static-baseline sweep
constexpr double kDominanceTol = 1e-7;

bool is_adaptive(const std::string& scheme) { return scheme == "ACS" || scheme == "JA"; }

// Offline family whose design a scheme flies.
std::string family_of(const std::string& scheme) {
  if (scheme == "PLLA" || scheme == "LB") return scheme;
  if (scheme == "STATIC") return "";
  return "PLB";
}

Policy policy_of(const std::string& scheme) {
  if (scheme == "ACS") return Policy::kAcs;
  if (scheme == "JA") return Policy::kJa;
  if (scheme == "OJA") return Policy::kOja;
  return Policy::kPlb;
}

std::string offline_key(const std::string& family, int sensors, double t0) {
  return family + "_K" + std::to_string(sensors) + "_T" + format_double(t0);
}

std::string join(const std::vector<double>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> split_doubles(const std::string& s, char sep) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(std::stod(item));
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

struct Layout {
  int sensors = 0;
  std::vector<Vec2> positions;
  ChannelParams params;
};

}  // namespace

bool operator<(const ResultRow& a, const ResultRow& b) {
  return std::tie(a.sensors, a.duration, a.scheme, a.realization) <
         std::tie(b.sensors, b.duration, b.scheme, b.realization);
}

std::vector<std::string> known_schemes() {
  return {"PLB", "ACS", "JA", "OJA", "PLLA", "LB", "STATIC"};
}

void ExperimentConfig::validate() const {
  city.validate();
  mission.validate();
  if (realizations < 1) throw std::invalid_argument("experiment: need at least one realization");
  if (fit_channel && fit_cities < 1) throw std::invalid_argument("experiment: fit_cities < 1");
  if (sensor_counts.empty() || durations.empty() || schemes.empty()) {
    throw std::invalid_argument("experiment: sensor counts, durations and schemes must be set");
  }
  for (int k : sensor_counts) {
    if (k < 1) throw std::invalid_argument("experiment: sensor counts must be positive");
  }
  for (double d : durations) {
    if (!(d > 0.0)) throw std::invalid_argument("experiment: durations must be positive");
  }
  const std::vector<std::string> known = known_schemes();
  for (const std::string& s : schemes) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw std::invalid_argument("experiment: unknown scheme " + s);
    }
  }
}

ExperimentConfig experiment_from_json(const Json& j) {
  require_known_keys(j, {"city", "channel", "fit_channel", "fit_cities", "mission", "sensors",
                         "sensor_counts", "realizations", "seed", "schemes", "durations",
                         "iid_states"},
                     "experiment config");
  ExperimentConfig cfg;
  if (j.contains("city")) cfg.city = city_params_from_json(j.at("city"));
  if (j.contains("channel")) cfg.channel = channel_params_from_json(j.at("channel"), 1);
  if (j.contains("fit_channel")) cfg.fit_channel = j.at("fit_channel").get<bool>();
  if (j.contains("fit_cities")) cfg.fit_cities = j.at("fit_cities").get<int>();
  if (j.contains("mission")) cfg.mission = mission_from_json(j.at("mission"));
  if (j.contains("sensors")) cfg.sensor_counts = {j.at("sensors").get<int>()};
  if (j.contains("sensor_counts")) cfg.sensor_counts = j.at("sensor_counts").get<std::vector<int>>();
  if (j.contains("realizations")) cfg.realizations = j.at("realizations").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("schemes")) cfg.schemes = j.at("schemes").get<std::vector<std::string>>();
  if (j.contains("durations")) cfg.durations = j.at("durations").get<std::vector<double>>();
  if (j.contains("iid_states")) cfg.iid_states = j.at("iid_states").get<bool>();
  cfg.validate();
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  return {{"city", to_json(cfg.city)},
          {"channel", to_json(cfg.channel)},
          {"fit_channel", cfg.fit_channel},
          {"fit_cities", cfg.fit_cities},
          {"mission", to_json(cfg.mission)},
          {"sensor_counts", cfg.sensor_counts},
          {"realizations", cfg.realizations},
          {"seed", cfg.seed},
          {"schemes", cfg.schemes},
          {"durations", cfg.durations},
          {"iid_states", cfg.iid_states}};
}

MissionConfig mission_for_duration(const MissionConfig& base, double t0) {
  MissionConfig c = base;
  c.t0 = t0;
  c.n_slots = choose_slot_count(t0, c.v_xy_max, c.v_z_max, c.h_min, c.eps_max);
  c.delta = t0 / c.n_slots;
  c.validate();
  return c;
}

std::vector<Vec2> sensor_layout(const ExperimentConfig& cfg, int sensors) {
  const CityRealization geometry =
      CityRealization::empty(cfg.city.area_side, cfg.city.grid_cell);
  return place_sensors(geometry, sensors, derive_seed(cfg.seed, kLayoutStream + sensors));
}

std::vector<int> sensor_cells(const CityRealization& geometry, const std::vector<Vec2>& sensors) {
  std::vector<int> cells;
  cells.reserve(sensors.size());
  for (Vec2 w : sensors) cells.push_back(geometry.cell_index(w));
  return cells;
}

CityRealization realization_city(const ExperimentConfig& cfg, const std::vector<Vec2>& sensors,
                                 int index) {
  const CityRealization geometry =
      CityRealization::empty(cfg.city.area_side, cfg.city.grid_cell);
  const std::vector<int> reserved = sensor_cells(geometry, sensors);
  return generate_city(cfg.city, derive_seed(cfg.seed, kCityStream + index), reserved);
}

ChannelParams experiment_channel(const ExperimentConfig& cfg) {
  ChannelParams p = cfg.channel;
  if (cfg.fit_channel) {
    const LosSampleTable table =
        sample_los_probability(cfg.city, cfg.fit_cities, derive_seed(cfg.seed, kFitStream));
    const LogisticFit fit = fit_logistic(table);
    if (fit.degenerate) throw std::runtime_error("experiment: LoS statistics are degenerate");
    p.logistic = fit.params;
  }
  return p;
}

ChannelParams with_sensor_count(const ChannelParams& params, int sensors) {
  ChannelParams p = params;
  if (static_cast<int>(p.tx_power.size()) != sensors) {
    const double power = p.tx_power.empty() ? 0.1 : p.tx_power.front();
    p.tx_power.assign(sensors, power);
  }
  return p;
}

OfflineSolution baseline_lb(const MissionConfig& cfg, const std::vector<Vec2>& sensors,
                            const ChannelParams& params, const OfflineOptions& options) {
  ChannelParams los_only = params;
  los_only.logistic.b3 = 1.0;
  los_only.logistic.b4 = 0.0;
  OfflineSolution sol = bcd_optimize(cfg, sensors, los_only, options);
  sol.scheme = "LB";
  return sol;
}

OfflineSolution baseline_plla(const MissionConfig& cfg, const std::vector<Vec2>& sensors,
                              const ChannelParams& params, const OfflineOptions& options) {
  MissionConfig flat = cfg;
  flat.z_start = cfg.h_min;
  flat.z_end = cfg.h_min;
  OfflineOptions opts = options;
  opts.optimize_altitude = false;
  OfflineSolution sol = bcd_optimize(flat, sensors, params, opts);
  sol.scheme = "PLLA";
  return sol;
}

double static_altitude(Vec2 hover, const std::vector<Vec2>& sensors, const MissionConfig& cfg,
                       const ChannelParams& params) {
  const int steps = static_cast<int>(std::floor((cfg.h_max - cfg.h_min) / kAltitudeStep + 1e-9));
  double best_z = cfg.h_min;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double z = cfg.h_min + i * kAltitudeStep;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sensors.size(); ++k) {
      worst = std::min(worst, expected_rate_lb(hover, z, sensors[k], params.snr_ref(k), params));
    }
    if (worst > best) {
      best = worst;
      best_z = z;
    }
  }
  return best_z;
}

StaticPlacement baseline_static(const MissionConfig& cfg, const std::vector<Vec2>& sensors,
                                const ChannelParams& params, const CityRealization& city) {
  if (sensors.empty()) throw std::invalid_argument("baseline_static: no sensors");
  // k-means with a single cluster converges to the centroid in one step.
  Vec2 hover;
  for (Vec2 w : sensors) hover = hover + w;
  hover = (1.0 / static_cast<double>(sensors.size())) * hover;
  const double z = static_altitude(hover, sensors, cfg, params);

  StaticPlacement out;
  out.position = {hover.x, hover.y, z};
  const std::vector<std::uint8_t> c = sample_channel_states(city, out.position, sensors);
  Eigen::MatrixXd rates(static_cast<Eigen::Index>(sensors.size()), 1);
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    const double d = std::sqrt((hover - sensors[k]).squared_norm() + z * z);
    rates(static_cast<Eigen::Index>(k), 0) = rate_conditional(d, c[k] != 0, params.snr_ref(k), params);
  }
  const FullLpResult lp = solve_full_lp(rates, {0.0}, cfg.t0);
  out.min_rate = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out.rates.push_back(lp.tau(i, 0) * rates(i, 0) / cfg.t0);
    out.min_rate = std::min(out.min_rate, out.rates.back());
  }
  return out;
}

namespace {

MonteCarloResult run_monte_carlo_impl(const ExperimentConfig& cfg, bool parallel) {
  cfg.validate();
  MonteCarloResult result;
  result.channel = experiment_channel(cfg);

  std::set<std::string> families;
  for (const std::string& s : cfg.schemes) {
    if (!family_of(s).empty()) families.insert(family_of(s));
  }

  // Offline designs: one per (K, duration, family), independent of the city.
  std::vector<Layout> layouts;
  for (int k : cfg.sensor_counts) {
    Layout layout;
    layout.sensors = k;
    layout.positions = sensor_layout(cfg, k);
    layout.params = with_sensor_count(result.channel, k);
    for (double t0 : cfg.durations) {
      const MissionConfig mission = mission_for_duration(cfg.mission, t0);
      for (const std::string& fam : families) {
        OfflineSolution sol;
        if (fam == "PLB") {
          sol = bcd_optimize(mission, layout.positions, layout.params, cfg.offline);
          sol.scheme = "PLB";
        } else if (fam == "PLLA") {
          sol = baseline_plla(mission, layout.positions, layout.params, cfg.offline);
        } else {
          sol = baseline_lb(mission, layout.positions, layout.params, cfg.offline);
        }
        result.offline.emplace(offline_key(fam, k, t0), std::move(sol));
      }
    }
    layouts.push_back(std::move(layout));
  }

  struct Job {
    std::size_t layout;
    int realization;
  };
  std::vector<Job> jobs;
  for (std::size_t l = 0; l < layouts.size(); ++l) {
    for (int i = 0; i < cfg.realizations; ++i) jobs.push_back({l, i});
  }
  std::vector<std::vector<ResultRow>> job_rows(jobs.size());
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t jb = 0; jb < jobs.size(); ++jb) {
    try {
      const Layout& layout = layouts[jobs[jb].layout];
      const int i = jobs[jb].realization;
      const CityRealization city = realization_city(cfg, layout.positions, i);
      EpisodeOptions ep_opts;
      ep_opts.iid_states = cfg.iid_states;
      ep_opts.iid_seed = derive_seed(city.rng_seed, 1);
      for (double t0 : cfg.durations) {
        std::map<std::string, double> min_rates;
        for (const std::string& scheme : cfg.schemes) {
          ResultRow row;
          row.scheme = scheme;
          row.sensors = layout.sensors;
          row.duration = t0;
          row.realization = i;
          row.city_seed = city.rng_seed;
          if (scheme == "STATIC") {
            const StaticPlacement st = baseline_static(mission_for_duration(cfg.mission, t0),
                                                       layout.positions, layout.params, city);
            row.rates = st.rates;
            row.min_rate = st.min_rate;
          } else {
            const OfflineSolution& sol =
                result.offline.at(offline_key(family_of(scheme), layout.sensors, t0));
            const EpisodeResult ep =
                run_episode(sol, city, policy_of(scheme), layout.params, ep_opts);
            std::vector<double> t_hat;
            for (const PathSegment& seg : build_path(sol, layout.params)) t_hat.push_back(seg.t_hat);
            check_episode(ep, t0, t_hat);
            row.rates = ep.rates;
            row.min_rate = ep.min_rate;
            row.offline_iterations = sol.iterations;
            if (is_adaptive(scheme)) row.wall_times_s = ep.wall_times_s;
          }
          min_rates[scheme] = row.min_rate;
          job_rows[jb].push_back(std::move(row));
        }
        // The causal JA plan is feasible for the non-causal LP.
        if (min_rates.count("JA") && min_rates.count("OJA") &&
            min_rates["OJA"] < min_rates["JA"] - kDominanceTol * std::max(1.0, min_rates["JA"])) {
          throw InvariantViolation("experiment: OJA below JA on realization " +
                                   std::to_string(i));
        }
      }
    } catch (...) {
#pragma omp critical(uavh_mc_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& rows : job_rows) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  std::sort(result.rows.begin(), result.rows.end());
  result.aggregates = aggregate_rows(result.rows);
  return result;
}

}  // namespace

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg) {
  return run_monte_carlo_impl(cfg, true);
}

MonteCarloResult run_monte_carlo_serial(const ExperimentConfig& cfg) {
  return run_monte_carlo_impl(cfg, false);
}

std::vector<Aggregate> aggregate_rows(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<int, double, std::string>, std::vector<double>> groups;
  for (const ResultRow& r : rows) groups[{r.sensors, r.duration, r.scheme}].push_back(r.min_rate);
  std::vector<Aggregate> out;
  for (const auto& [key, values] : groups) {
    Aggregate a;
    std::tie(a.sensors, a.duration, a.scheme) = key;
    a.count = static_cast<int>(values.size());
    a.mean = mean_of(values);
    if (a.count > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - a.mean) * (v - a.mean);
      a.stderr_mean = std::sqrt(ss / (a.count - 1) / a.count);
    }
    out.push_back(a);
  }
  return out;
}

namespace {

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> columns{"scheme",   "sensors",  "duration",
                                                "realization", "city_seed", "min_rate",
                                                "offline_iterations", "rates"};
  return columns;
}

}  // namespace

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = csv_row(result_columns());
  for (const ResultRow& r : rows) {
    out += csv_row({r.scheme, std::to_string(r.sensors), format_double(r.duration),
                    std::to_string(r.realization), std::to_string(r.city_seed),
                    format_double(r.min_rate), std::to_string(r.offline_iterations),
                    join(r.rates, ';')});
  }
  return out;
}

std::vector<ResultRow> results_from_csv(const std::string& text) {
  const auto records = parse_csv(text);
  if (records.empty() || records.front() != result_columns()) {
    throw std::invalid_argument("results CSV: missing or unexpected header");
  }
  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != result_columns().size()) throw std::invalid_argument("results CSV: malformed record");
    ResultRow r;
    r.scheme = f[0];
    r.sensors = std::stoi(f[1]);
    r.duration = std::stod(f[2]);
    r.realization = std::stoi(f[3]);
    r.city_seed = std::stoull(f[4]);
    r.min_rate = std::stod(f[5]);
    r.offline_iterations = std::stoi(f[6]);
    r.rates = split_doubles(f[7], ';');
    if (!r.rates.empty() &&
        r.min_rate != *std::min_element(r.rates.begin(), r.rates.end())) {
      throw InvariantViolation("results CSV: min_rate differs from the per-sensor minimum");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string timings_to_csv(const std::vector<ResultRow>& rows) {
  std::string out =
      csv_row({"scheme", "sensors", "duration", "realization", "segment", "wall_time_s"});
  for (const ResultRow& r : rows) {
    for (std::size_t n = 0; n < r.wall_times_s.size(); ++n) {
      out += csv_row({r.scheme, std::to_string(r.sensors), format_double(r.duration),
                      std::to_string(r.realization), std::to_string(n),
                      format_double(r.wall_times_s[n])});
    }
  }
  return out;
}

std::string aggregates_to_csv(const std::vector<Aggregate>& aggs) {
  std::string out = csv_row({"scheme", "sensors", "duration", "count", "mean", "stderr"});
  for (const Aggregate& a : aggs) {
    out += csv_row({a.scheme, std::to_string(a.sensors), format_double(a.duration),
                    std::to_string(a.count), format_double(a.mean), format_double(a.stderr_mean)});
  }
  return out;
}

namespace {

// Wide table: one record per (first key, second key), mean and stderr of
// each listed scheme that has data.
std::string wide_series(const std::vector<Aggregate>& aggs, const std::vector<std::string>& schemes,
                        bool by_duration) {
  std::map<std::pair<double, double>, std::map<std::string, const Aggregate*>> table;
  std::set<std::string> present;
  for (const Aggregate& a : aggs) {
    if (std::find(schemes.begin(), schemes.end(), a.scheme) == schemes.end()) continue;
    const std::pair<double, double> key =
        by_duration ? std::make_pair(static_cast<double>(a.sensors), a.duration)
                    : std::make_pair(a.duration, static_cast<double>(a.sensors));
    table[key][a.scheme] = &a;
    present.insert(a.scheme);
  }
  std::vector<std::string> header = by_duration ? std::vector<std::string>{"sensors", "duration"}
                                                : std::vector<std::string>{"duration", "sensors"};
  for (const std::string& s : schemes) {
    if (!present.count(s)) continue;
    header.push_back(s + "_mean");
    header.push_back(s + "_stderr");
  }
  std::string out = csv_row(header);
  for (const auto& [key, cols] : table) {
    std::vector<std::string> row;
    if (by_duration) {
      row = {std::to_string(static_cast<int>(key.first)), format_double(key.second)};
    } else {
      row = {format_double(key.first), std::to_string(static_cast<int>(key.second))};
    }
    for (const std::string& s : schemes) {
      if (!present.count(s)) continue;
      const auto it = cols.find(s);
      row.push_back(it == cols.end() ? "" : format_double(it->second->mean));
      row.push_back(it == cols.end() ? "" : format_double(it->second->stderr_mean));
    }
    out += csv_row(row);
  }
  return out;
}

}  // namespace

std::vector<FigureSeries> figure_series(const std::vector<ResultRow>& rows,
                                        const std::string& timings_csv,
                                        const std::map<std::string, OfflineSolution>& offline) {
  const std::vector<Aggregate> aggs = aggregate_rows(rows);
  std::vector<FigureSeries> out;
  out.push_back({"fig5_offline_rate_vs_duration", wide_series(aggs, {"PLB", "PLLA", "LB"}, true)});
  out.push_back(
      {"fig7a_online_rate_vs_duration", wide_series(aggs, {"PLB", "ACS", "JA", "OJA"}, true)});
  out.push_back({"fig8b_rate_vs_sensors",
                 wide_series(aggs, {"PLB", "ACS", "JA", "OJA", "STATIC"}, false)});

  if (!timings_csv.empty()) {
    // Mean decision time per segment over realizations.
    std::map<std::tuple<int, double, int>, std::map<std::string, std::vector<double>>> groups;
    const auto records = parse_csv(timings_csv);
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& f = records[i];
      if (f.size() != 6) throw std::invalid_argument("timings CSV: malformed record");
      groups[{std::stoi(f[1]), std::stod(f[2]), std::stoi(f[4])}][f[0]].push_back(std::stod(f[5]));
    }
    std::string csv = csv_row({"sensors", "duration", "segment", "ACS_mean_s", "JA_mean_s"});
    for (const auto& [key, by_scheme] : groups) {
      const auto acs = by_scheme.find("ACS");
      const auto ja = by_scheme.find("JA");
      csv += csv_row({std::to_string(std::get<0>(key)), format_double(std::get<1>(key)),
                      std::to_string(std::get<2>(key)),
                      acs == by_scheme.end() ? "" : format_double(mean_of(acs->second)),
                      ja == by_scheme.end() ? "" : format_double(mean_of(ja->second))});
    }
    out.push_back({"fig8a_online_time_per_segment", csv});
  }

  if (!offline.empty()) {
    std::string conv = csv_row({"design", "iteration", "eta"});
    std::string traj = csv_row({"design", "waypoint", "x", "y", "z"});
    for (const auto& [key, sol] : offline) {
      for (std::size_t it = 0; it < sol.eta_trace.size(); ++it) {
        conv += csv_row({key, std::to_string(it), format_double(sol.eta_trace[it])});
      }
      for (std::size_t n = 0; n < sol.trajectory.q.size(); ++n) {
        traj += csv_row({key, std::to_string(n), format_double(sol.trajectory.q[n].x),
                         format_double(sol.trajectory.q[n].y), format_double(sol.trajectory.z[n])});
      }
    }
    out.push_back({"fig4_offline_convergence", conv});
    out.push_back({"fig6_offline_trajectory", traj});
  }
  return out;
}

}  // namespace uavh
