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


// Experiment orchestration: offline baselines, the static-hover baseline and
// the Monte-Carlo evaluation of every scheme over seeded city realizations.
//
// Scheme names: "PLB", "ACS", "JA", "OJA" run the corresponding online policy
// on the probabilistic-LoS offline design; "PLLA" (altitude pinned at H_min)
// and "LB" (LoS assumed everywhere) execute their own offline designs
// without online adaptation; "STATIC" hovers at the sensor centroid.

#ifndef UAVH_HARNESS_HPP_
#define UAVH_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uavh/channel.hpp"
#include "uavh/citygen.hpp"
#include "uavh/io.hpp"
#include "uavh/offline.hpp"
#include "uavh/online.hpp"

namespace uavh {

struct ExperimentConfig {
  CityParams city;
  // Channel model; tx_power is resized to the sensor count as needed.
  ChannelParams channel = ChannelParams::urban(0);
  // Replace the LoS-probability parameters by a fit to the city generator.
  bool fit_channel = true;
  int fit_cities = 200;
  // Template for every flight duration: speeds, altitudes, endpoints and slot
  // length; T0 and N are derived per duration.
  MissionConfig mission = MissionConfig::preset(10.6);
  std::vector<int> sensor_counts{4};
  int realizations = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> schemes{"PLB", "ACS", "JA", "OJA", "PLLA", "LB", "STATIC"};
  std::vector<double> durations{10.6, 13.6, 16.6, 19.6, 22.6, 25.6};
  bool iid_states = false;
  OfflineOptions offline;

  // Throws std::invalid_argument on unknown schemes or empty sweeps.
  void validate() const;
};

// Every field is optional and defaults as above; "channel" takes the keys of
// the channel-parameter document, "mission" those of the mission document.
ExperimentConfig experiment_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);

std::vector<std::string> known_schemes();

// Mission for one flight duration: the template with T0 replaced and the
// slot count and slot length re-derived.
MissionConfig mission_for_duration(const MissionConfig& base, double t0);

// Fixed sensor layout for K sensors, drawn on an empty city of the
// configured geometry.
std::vector<Vec2> sensor_layout(const ExperimentConfig& cfg, int sensors);

// Cell indices of the sensors, kept building-free in every realization.
std::vector<int> sensor_cells(const CityRealization& geometry, const std::vector<Vec2>& sensors);

// City realization `index` of the experiment for the given sensor layout.
CityRealization realization_city(const ExperimentConfig& cfg, const std::vector<Vec2>& sensors,
                                 int index);

// Channel model of the experiment (LoS parameters fitted to the city
// generator when configured), with the configured per-sensor powers.
ChannelParams experiment_channel(const ExperimentConfig& cfg);

// The model resized to K sensors; every sensor gets the first listed power
// (0.1 W when none is listed) unless exactly K powers are listed.
ChannelParams with_sensor_count(const ChannelParams& params, int sensors);

// Offline design under P_L = 1 (B3 = 1, B4 = 0); the returned model is the
// LoS-only one it was optimized against.
OfflineSolution baseline_lb(const MissionConfig& cfg, const std::vector<Vec2>& sensors,
                            const ChannelParams& params, const OfflineOptions& options = {});

// Offline design with every altitude held at H_min.
OfflineSolution baseline_plla(const MissionConfig& cfg, const std::vector<Vec2>& sensors,
                              const ChannelParams& params, const OfflineOptions& options = {});

struct StaticPlacement {
  Vec3 position;
  std::vector<double> rates;  // per sensor average rate over T0
  double min_rate = 0.0;
};

// Hover at the sensor centroid for all of T0, altitude from a 1 m sweep of
// the min-k LoS-weighted expected rate over [H_min, H_max], time shared by
// an LP over the realized rates at the hover point.
StaticPlacement baseline_static(const MissionConfig& cfg, const std::vector<Vec2>& sensors,
                                const ChannelParams& params, const CityRealization& city);

// Altitude of the static baseline (exposed for tests).
double static_altitude(Vec2 hover, const std::vector<Vec2>& sensors, const MissionConfig& cfg,
                       const ChannelParams& params);

struct ResultRow {
  std::string scheme;
  int sensors = 0;
  double duration = 0.0;
  int realization = 0;
  std::uint64_t city_seed = 0;
  double min_rate = 0.0;
  std::vector<double> rates;
  int offline_iterations = 0;
  // Not part of the reproducible CSV; exported separately.
  std::vector<double> wall_times_s;

  // Sort key: (sensors, duration, scheme, realization).
  friend bool operator<(const ResultRow& a, const ResultRow& b);
};

struct Aggregate {
  std::string scheme;
  int sensors = 0;
  double duration = 0.0;
  int count = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
};

struct MonteCarloResult {
  std::vector<ResultRow> rows;
  std::vector<Aggregate> aggregates;
  // Offline designs keyed "<family>_K<k>_T<t0>" (family PLB, PLLA or LB).
  std::map<std::string, OfflineSolution> offline;
  ChannelParams channel;  // model used, as returned by experiment_channel
};

// Rows are sorted and identical for both variants; the parallel one runs
// the realizations concurrently.
MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg);
MonteCarloResult run_monte_carlo_serial(const ExperimentConfig& cfg);

std::vector<Aggregate> aggregate_rows(const std::vector<ResultRow>& rows);

// Result rows as CSV; wall times are excluded so that reruns are
// byte-identical.
std::string results_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> results_from_csv(const std::string& text);
// Per-segment online decision times of the adaptive schemes.
std::string timings_to_csv(const std::vector<ResultRow>& rows);
std::string aggregates_to_csv(const std::vector<Aggregate>& aggs);

struct FigureSeries {
  std::string name;  // file stem
  std::string csv;
};

// Per-figure series from result rows (rate versus duration and versus K)
// plus, when given, timing CSV text and offline designs (convergence trace
// and trajectory).
std::vector<FigureSeries> figure_series(const std::vector<ResultRow>& rows,
                                        const std::string& timings_csv,
                                        const std::map<std::string, OfflineSolution>& offline);

}  // namespace uavh

#endif  // UAVH_HARNESS_HPP_
