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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "uavh/citygen.hpp"

using namespace uavh;

TEST_CASE("generated city honours the built fraction, height cap and reserved cells") {
  CityParams p;
  const std::vector<int> reserved{0, 5, 57, 99};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const CityRealization city = generate_city(p, seed, reserved);
    CHECK(city.cells_per_side() == 10);
    CHECK(city.buildings.size() == 30);
    const long occupied = std::count(city.occupied.begin(), city.occupied.end(), 1);
    CHECK(occupied == 30);
    for (int r : reserved) CHECK(city.occupied[r] == 0);
    for (const Building& b : city.buildings) {
      CHECK(b.height > 0.0);
      CHECK(b.height <= p.height_cap);
      CHECK(b.footprint_max.x - b.footprint_min.x == doctest::Approx(24.0));
      CHECK(city.occupied[city.cell_index(0.5 * (b.footprint_min + b.footprint_max))] == 1);
    }
  }
}

TEST_CASE("city generation is deterministic in the seed") {
  const CityRealization a = generate_city(CityParams{}, 42);
  const CityRealization b = generate_city(CityParams{}, 42);
  const CityRealization c = generate_city(CityParams{}, 43);
  REQUIRE(a.buildings.size() == b.buildings.size());
  for (std::size_t i = 0; i < a.buildings.size(); ++i) {
    CHECK(a.buildings[i].height == b.buildings[i].height);
    CHECK(a.buildings[i].footprint_min == b.buildings[i].footprint_min);
  }
  CHECK(a.occupied != c.occupied);
}

TEST_CASE("invalid city parameters are rejected") {
  CityParams p;
  p.built_fraction = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = CityParams{};
  p.grid_cell = 35.0;  // 300 is not a multiple
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(generate_city(CityParams{}, 1, std::vector<int>{100}), std::invalid_argument);
}

TEST_CASE("truncated Rayleigh heights match the truncated mean") {
  // Mean of a Rayleigh(sigma) truncated at c, by numerical integration.
  const double sigma = 20.0, cap = 100.0;
  double num = 0.0, den = 0.0;
  const int steps = 200000;
  for (int i = 0; i < steps; ++i) {
    const double h = (i + 0.5) * cap / steps;
    const double pdf = h / (sigma * sigma) * std::exp(-h * h / (2 * sigma * sigma));
    num += h * pdf;
    den += pdf;
  }
  const double expected = num / den;
  double sum = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (const Building& b : generate_city(CityParams{}, seed).buildings) {
      sum += b.height;
      ++count;
    }
  }
  // 6000 draws, standard deviation about 10.5 m: standard error 0.14 m.
  CHECK(sum / count == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("sensors occupy distinct building-free cells") {
  const CityRealization city = generate_city(CityParams{}, 9);
  const std::vector<Vec2> s = place_sensors(city, 10, 3);
  std::set<int> cells;
  for (Vec2 w : s) {
    const int c = city.cell_index(w);
    CHECK(city.occupied[c] == 0);
    cells.insert(c);
  }
  CHECK(cells.size() == 10);
  CHECK_THROWS_AS(place_sensors(city, 71, 3), std::invalid_argument);
}

TEST_CASE("line of sight against a single box") {
  CityRealization city = CityRealization::empty(300, 30);
  const Vec3 ground{15.0, 15.0, 0.0};
  CHECK(los_visible(city, {200.0, 200.0, 50.0}, ground));

  // A 40 m wall between x = 100 and x = 120 across the whole y range.
  city.buildings.push_back({{100.0, 0.0}, {120.0, 300.0}, 40.0});
  CHECK_FALSE(los_visible(city, {200.0, 15.0, 30.0}, ground));
  // Ray crossing the wall above its roof: at x in [100, 120] the height is
  // 15.8..18.9 m for a 30 m UAV at x = 190 -> blocked, at 300 m altitude clear.
  CHECK(los_visible(city, {200.0, 15.0, 300.0}, ground));
  // Symmetry and repeatability.
  for (double z : {10.0, 45.0, 80.0, 200.0}) {
    const Vec3 uav{250.0, 40.0, z};
    CHECK(los_visible(city, uav, ground) == los_visible(city, ground, uav));
    CHECK(los_visible(city, uav, ground) == los_visible(city, uav, ground));
  }
  // Buildings are closed boxes: a ray lying in the roof plane touches the
  // building and is blocked; one a centimetre above clears it.
  CHECK_FALSE(los_visible(city, {90.0, 15.0, 40.0}, {130.0, 15.0, 40.0}));
  CHECK(los_visible(city, {90.0, 15.0, 40.01}, {130.0, 15.0, 40.01}));
}

TEST_CASE("LoS blocking matches an analytic wall crossing height") {
  CityRealization city = CityRealization::empty(300, 30);
  city.buildings.push_back({{100.0, 0.0}, {120.0, 300.0}, 40.0});
  const Vec3 ground{15.0, 15.0, 0.0};
  // The ray from the ground point to (x_u, 15, z) rises with x, so its lowest
  // point over the wall is at the face nearest the ground point, x = 100, at
  // height z * (100 - 15) / (x_u - 15); it clears the wall iff that height
  // exceeds 40 m.
  for (double z = 10.0; z <= 300.0; z += 7.0) {
    const double xu = 250.0;
    const double crossing = z * (100.0 - 15.0) / (xu - 15.0);
    if (std::abs(crossing - 40.0) < 1e-6) continue;
    CHECK(los_visible(city, {xu, 15.0, z}, ground) == (crossing > 40.0));
  }
}

TEST_CASE("parallel LoS sweep equals the serial reference") {
  LosSweepGrid grid = LosSweepGrid::standard();
  const LosSampleTable a = sample_los_probability(CityParams{}, 6, 11, grid);
  const LosSampleTable b = sample_los_probability_serial(CityParams{}, 6, 11, grid);
  REQUIRE(a.rows.size() == b.rows.size());
  REQUIRE(a.rows.size() == grid.elevations_deg.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].p_los == b.rows[i].p_los);
    CHECK(a.rows[i].sample_count == 6 * 10 * 12);
    CHECK(a.rows[i].p_los >= 0.0);
    CHECK(a.rows[i].p_los <= 1.0);
  }
  // Straight overhead always sees the sensor: its cell is free of buildings.
  CHECK(a.rows.back().elevation_deg == 90.0);
  CHECK(a.rows.back().p_los == 1.0);
}

TEST_CASE("LoS probability rises with elevation on a large sweep") {
  const LosSampleTable t = sample_los_probability(CityParams{}, 40, 5);
  CHECK(t.rows.front().p_los < t.rows[t.rows.size() / 2].p_los);
  CHECK(t.rows[t.rows.size() / 2].p_los < t.rows.back().p_los);
  const std::string csv = los_table_to_csv(t);
  CHECK(csv.rfind("elevation_deg", 0) == 0);
}
