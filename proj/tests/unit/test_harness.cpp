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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "uavh/harness.hpp"

using namespace uavh;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.fit_channel = false;
  cfg.sensor_counts = {2};
  cfg.realizations = 3;
  cfg.durations = {10.6};
  cfg.seed = 5;
  return cfg;
}

// Serial and parallel runs of the small configuration, computed once.
const MonteCarloResult& small_run(bool parallel) {
  static const MonteCarloResult serial = run_monte_carlo_serial(small_config());
  static const MonteCarloResult par = run_monte_carlo(small_config());
  return parallel ? par : serial;
}

}  // namespace

TEST_CASE("experiment config JSON round trip and validation") {
  ExperimentConfig cfg;
  cfg.sensor_counts = {2, 6};
  cfg.realizations = 7;
  cfg.seed = 99;
  cfg.schemes = {"JA", "STATIC"};
  cfg.durations = {12.0};
  cfg.iid_states = true;
  const ExperimentConfig back = experiment_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.sensor_counts == cfg.sensor_counts);
  CHECK(back.durations == cfg.durations);

  const ExperimentConfig defaults = experiment_from_json(Json::object());
  CHECK(defaults.realizations == 100);
  CHECK(defaults.sensor_counts == std::vector<int>{4});
  CHECK(defaults.schemes.size() == known_schemes().size());

  CHECK_THROWS_AS(experiment_from_json(Json{{"schemes", {"XYZ"}}}), std::invalid_argument);
  CHECK_THROWS_AS(experiment_from_json(Json{{"durations", Json::array()}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(experiment_from_json(Json{{"realisations", 3}}), std::invalid_argument);
  CHECK_THROWS_AS(experiment_from_json(Json{{"mission", {{"vxy", 3}}}}), std::invalid_argument);
  CHECK(experiment_from_json(Json{{"sensors", 3}}).sensor_counts == std::vector<int>{3});
}

TEST_CASE("mission per duration and channel per sensor count") {
  const MissionConfig m = mission_for_duration(MissionConfig::preset(10.6), 25.6);
  CHECK(m.n_slots == 128);
  CHECK(m.delta == doctest::Approx(0.2));
  const ChannelParams p = with_sensor_count(ChannelParams::urban(0), 5);
  CHECK(p.tx_power == std::vector<double>(5, 0.1));
  ChannelParams listed = ChannelParams::urban(3);
  listed.tx_power = {0.1, 0.2, 0.3};
  CHECK(with_sensor_count(listed, 3).tx_power == listed.tx_power);
  CHECK(with_sensor_count(listed, 2).tx_power == std::vector<double>{0.1, 0.1});
}

TEST_CASE("sensor layout and realization cities keep sensor cells free") {
  const ExperimentConfig cfg = small_config();
  const std::vector<Vec2> sn = sensor_layout(cfg, 4);
  CHECK(sn == sensor_layout(cfg, 4));
  const CityRealization geometry = CityRealization::empty(300, 30);
  const std::vector<int> cells = sensor_cells(geometry, sn);
  for (int i = 0; i < 5; ++i) {
    const CityRealization city = realization_city(cfg, sn, i);
    for (int c : cells) CHECK(city.occupied.at(c) == 0);
    CHECK(to_json(city) == to_json(realization_city(cfg, sn, i)));
  }
  CHECK(to_json(realization_city(cfg, sn, 0)) != to_json(realization_city(cfg, sn, 1)));
}

TEST_CASE("baseline designs") {
  const MissionConfig m = MissionConfig::preset(10.6);
  const std::vector<Vec2> sn = sensor_layout(small_config(), 2);
  const ChannelParams p = ChannelParams::urban(2);
  const OfflineSolution lb = baseline_lb(m, sn, p);
  CHECK(lb.scheme == "LB");
  CHECK(lb.model.logistic.b3 == 1.0);
  CHECK(lb.model.logistic.b4 == 0.0);
  const OfflineSolution plla = baseline_plla(m, sn, p);
  CHECK(plla.scheme == "PLLA");
  for (double z : plla.trajectory.z) CHECK(z == m.h_min);
  CHECK_NOTHROW(check_trajectory(plla.trajectory, m));
}

TEST_CASE("static hover: centroid, swept altitude and harmonic rate split") {
  const MissionConfig m = MissionConfig::preset(10.6);
  const std::vector<Vec2> sn{{30.0, 40.0}, {200.0, 260.0}, {120.0, 90.0}};
  const ChannelParams p = ChannelParams::urban(3);
  const Vec2 centroid{350.0 / 3.0, 130.0};

  // Altitude oracle: best min-k LoS-weighted rate on a 1 m grid.
  double best_z = 0.0, best = -1.0;
  for (int z = 50; z <= 300; ++z) {
    double worst = 1e300;
    for (int k = 0; k < 3; ++k) {
      worst = std::min(worst, expected_rate_lb(centroid, z, sn[k], p.snr_ref(k), p));
    }
    if (worst > best) best = worst, best_z = z;
  }
  CHECK(static_altitude(centroid, sn, m, p) == best_z);

  const CityRealization city = CityRealization::empty(300, 30);
  const StaticPlacement st = baseline_static(m, sn, p, city);
  CHECK(st.position.x == doctest::Approx(centroid.x));
  CHECK(st.position.y == doctest::Approx(centroid.y));
  CHECK(st.position.z == best_z);
  // All sensors in LoS; time shares equalize tau_k r_k, so the common rate
  // is the harmonic combination 1 / sum_k (1 / r_k).
  double inv = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = std::sqrt((centroid - sn[k]).squared_norm() + best_z * best_z);
    inv += 1.0 / rate_conditional(d, true, p.snr_ref(k), p);
  }
  CHECK(st.min_rate == doctest::Approx(1.0 / inv).epsilon(1e-9));
  for (double r : st.rates) CHECK(r == doctest::Approx(1.0 / inv).epsilon(1e-7));
}

TEST_CASE("aggregates match a direct computation") {
  std::vector<ResultRow> rows;
  const std::vector<double> values{0.3, 0.5, 0.9, 0.4};
  for (int i = 0; i < 4; ++i) {
    ResultRow r;
    r.scheme = "JA";
    r.sensors = 4;
    r.duration = 10.6;
    r.realization = i;
    r.min_rate = values[i];
    rows.push_back(r);
  }
  rows.push_back(rows[0]);
  rows.back().scheme = "ACS";
  const std::vector<Aggregate> aggs = aggregate_rows(rows);
  REQUIRE(aggs.size() == 2);
  const Aggregate& ja = aggs[0].scheme == "JA" ? aggs[0] : aggs[1];
  const double mean = (0.3 + 0.5 + 0.9 + 0.4) / 4.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  CHECK(ja.count == 4);
  CHECK(std::abs(ja.mean - mean) <= 1e-12);
  CHECK(std::abs(ja.stderr_mean - std::sqrt(ss / 3.0) / 2.0) <= 1e-12);
  const Aggregate& acs = aggs[0].scheme == "ACS" ? aggs[0] : aggs[1];
  CHECK(acs.count == 1);
  CHECK(acs.stderr_mean == 0.0);
}

TEST_CASE("Monte-Carlo: parallel equals serial, CSV round trip, row composition") {
  const MonteCarloResult& serial = small_run(false);
  const MonteCarloResult& par = small_run(true);
  const std::string csv = results_to_csv(serial.rows);
  CHECK(csv == results_to_csv(par.rows));
  CHECK(aggregates_to_csv(serial.aggregates) == aggregates_to_csv(par.aggregates));
  REQUIRE(serial.rows.size() == 3 * known_schemes().size());
  CHECK(std::is_sorted(serial.rows.begin(), serial.rows.end()));

  // Reload.
  const std::vector<ResultRow> back = results_from_csv(csv);
  REQUIRE(back.size() == serial.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].scheme == serial.rows[i].scheme);
    CHECK(back[i].min_rate == serial.rows[i].min_rate);
    CHECK(back[i].rates == serial.rows[i].rates);
    CHECK(back[i].city_seed == serial.rows[i].city_seed);
  }
  CHECK(results_to_csv(back) == csv);

  // Each adaptive row is one episode on the PLB design in its city.
  const ExperimentConfig cfg = small_config();
  const std::vector<Vec2> sn = sensor_layout(cfg, 2);
  const OfflineSolution& design = serial.offline.at("PLB_K2_T10.6");
  std::set<std::string> seen;
  for (const ResultRow& row : serial.rows) {
    seen.insert(row.scheme);
    CHECK(row.min_rate == *std::min_element(row.rates.begin(), row.rates.end()));
    if (row.scheme != "JA" || row.realization != 1) continue;
    const CityRealization city = realization_city(cfg, sn, 1);
    const EpisodeResult ep =
        run_episode(design, city, Policy::kJa, with_sensor_count(serial.channel, 2));
    CHECK(ep.min_rate == row.min_rate);
    CHECK(ep.rates == row.rates);
  }
  CHECK(seen.size() == known_schemes().size());
  for (const ResultRow& row : serial.rows) {
    if (row.scheme != "OJA") continue;
    for (const ResultRow& other : serial.rows) {
      if (other.scheme == "JA" && other.realization == row.realization) {
        CHECK(row.min_rate >= other.min_rate - 1e-7);
      }
    }
  }
}

TEST_CASE("malformed result CSV is rejected") {
  const std::string header = "scheme,sensors,duration,realization,city_seed,min_rate,"
                             "offline_iterations,rates\r\n";
  CHECK_NOTHROW(results_from_csv(header + "JA,2,10.6,0,1,0.5,3,0.5;0.7\r\n"));
  CHECK_THROWS(results_from_csv(header + "JA,2,10.6,0,1,0.6,3,0.5;0.7\r\n"));
  CHECK_THROWS(results_from_csv("bad,header\r\n"));
}

TEST_CASE("figure series") {
  const MonteCarloResult& serial = small_run(false);
  const std::vector<FigureSeries> figs =
      figure_series(serial.rows, timings_to_csv(serial.rows), serial.offline);
  std::set<std::string> names;
  for (const auto& f : figs) {
    names.insert(f.name);
    CHECK_FALSE(f.csv.empty());
  }
  for (const char* n : {"fig5_offline_rate_vs_duration", "fig7a_online_rate_vs_duration",
                        "fig8b_rate_vs_sensors", "fig8a_online_time_per_segment",
                        "fig4_offline_convergence", "fig6_offline_trajectory"}) {
    CHECK(names.count(n) == 1);
  }
}
