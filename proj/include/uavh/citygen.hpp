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

// Manhattan-type city synthesis and ray-traced LoS statistics.
//
// A city is a square area split into uniform grid cells. A fixed fraction of
// the cells carries one building each: an axis-aligned box over a centered
// sub-square of the cell, rooted at the ground, with a truncated-Rayleigh
// height. Sensors live on the ground of cells without a building.

#ifndef UAVH_CITYGEN_HPP_
#define UAVH_CITYGEN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uavh/common.hpp"

namespace uavh {

struct Building {
  Vec2 footprint_min;
  Vec2 footprint_max;
  double height = 0.0;
};

struct CityParams {
  double area_side = 300.0;
  double grid_cell = 30.0;
  double built_fraction = 0.3;
  double rayleigh_scale = 20.0;
  double height_cap = 100.0;
  // Side of the building footprint relative to its cell; the rest is street.
  double footprint_ratio = 0.8;

  void validate() const;
  int cells_per_side() const;
  int cell_count() const { return cells_per_side() * cells_per_side(); }
};

struct CityRealization {
  double area_side = 0.0;
  double grid_cell = 0.0;
  std::vector<Building> buildings;
  // Row-major occupancy flags, cells_per_side^2 entries; cell (i, j) covers
  // [i*grid_cell, (i+1)*grid_cell] x [j*grid_cell, (j+1)*grid_cell].
  std::vector<std::uint8_t> occupied;
  std::uint64_t rng_seed = 0;

  int cells_per_side() const;
  int cell_index(Vec2 p) const;
  // An empty city of the given geometry.
  static CityRealization empty(double area_side, double grid_cell);
};

struct LosSampleRow {
  double elevation_deg = 0.0;
  double p_los = 0.0;
  std::int64_t sample_count = 0;
};

struct LosSampleTable {
  std::vector<LosSampleRow> rows;
};

// Builds a city from `params`; deterministic given `seed`. Cells listed in
// `reserved` (indices as in CityRealization::occupied) never carry a
// building, which lets a fixed sensor layout stay on open ground.
CityRealization generate_city(const CityParams& params, std::uint64_t seed,
                              std::span<const int> reserved = {});

// K sensors in K distinct building-free cells, each uniform within its cell.
std::vector<Vec2> place_sensors(const CityRealization& city, int count,
                                std::uint64_t seed);

// True iff the open segment between the two points crosses no building box.
bool los_visible(const CityRealization& city, Vec3 a, Vec3 b);

struct LosSweepGrid {
  std::vector<double> altitudes_m;
  std::vector<double> elevations_deg;
  std::vector<double> azimuths_deg;

  // Altitudes 30..300 m step 30, elevations 5..90 deg step 5, azimuths
  // 0..330 deg step 30.
  static LosSweepGrid standard();
};

// Empirical LoS probability per elevation bin pooled over altitudes,
// azimuths and `n_cities` realizations with one sensor each. The serial
// variant is the reference the parallel kernel is checked against.
LosSampleTable sample_los_probability(const CityParams& params, int n_cities,
                                      std::uint64_t seed,
                                      const LosSweepGrid& grid = LosSweepGrid::standard());
LosSampleTable sample_los_probability_serial(
    const CityParams& params, int n_cities, std::uint64_t seed,
    const LosSweepGrid& grid = LosSweepGrid::standard());

std::string los_table_to_csv(const LosSampleTable& table);

}  // namespace uavh

#endif  // UAVH_CITYGEN_HPP_
