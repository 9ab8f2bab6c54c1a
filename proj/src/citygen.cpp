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

#include "uavh/citygen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavh/io.hpp"

namespace uavh {
namespace {

constexpr double kEndpointTolerance = 1e-9;  // metres

// Partial Fisher-Yates: the first `take` entries of `pool` become a uniform
// sample without replacement.
void partial_shuffle(std::vector<int>& pool, std::size_t take, Rng& rng) {
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
}

double truncated_rayleigh(double scale, double cap, Rng& rng) {
  const double cdf_cap = -std::expm1(-cap * cap / (2.0 * scale * scale));
  const double u = 1.0 - rng.uniform();  // (0, 1]
  return scale * std::sqrt(-2.0 * std::log1p(-u * cdf_cap));
}

bool segment_hits_box(const Vec3& a, const Vec3& b, const Building& box) {
  const double lo[3] = {box.footprint_min.x, box.footprint_min.y, 0.0};
  const double hi[3] = {box.footprint_max.x, box.footprint_max.y, box.height};
  const double p[3] = {a.x, a.y, a.z};
  const double d[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
  const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (len == 0.0) return false;

  double t0 = 0.0;
  double t1 = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) {
      if (p[axis] < lo[axis] || p[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - p[axis]) / d[axis];
    double tb = (hi[axis] - p[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  const double eps_t = kEndpointTolerance / len;
  t0 = std::max(t0, eps_t);
  t1 = std::min(t1, 1.0 - eps_t);
  return t0 <= t1;
}

bool lexicographic_less(const Vec3& a, const Vec3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

}  // namespace

void CityParams::validate() const {
  if (!(area_side > 0.0) || !(grid_cell > 0.0) || grid_cell > area_side) {
    throw std::invalid_argument("CityParams: need 0 < grid_cell <= area_side");
  }
  if (!(built_fraction > 0.0 && built_fraction < 1.0)) {
    throw std::invalid_argument("CityParams: built_fraction must lie in (0, 1)");
  }
  if (!(rayleigh_scale > 0.0) || !(height_cap > 0.0)) {
    throw std::invalid_argument("CityParams: rayleigh_scale and height_cap must be positive");
  }
  if (!(footprint_ratio > 0.0 && footprint_ratio <= 1.0)) {
    throw std::invalid_argument("CityParams: footprint_ratio must lie in (0, 1]");
  }
  const double ratio = area_side / grid_cell;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw std::invalid_argument("CityParams: area_side must be a multiple of grid_cell");
  }
}

int CityParams::cells_per_side() const {
  return static_cast<int>(std::lround(area_side / grid_cell));
}

int CityRealization::cells_per_side() const {
  return static_cast<int>(std::lround(area_side / grid_cell));
}

int CityRealization::cell_index(Vec2 p) const {
  const int n = cells_per_side();
  const int i = std::clamp(static_cast<int>(std::floor(p.x / grid_cell)), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.y / grid_cell)), 0, n - 1);
  return i * n + j;
}

CityRealization CityRealization::empty(double area_side, double grid_cell) {
  CityRealization city;
  city.area_side = area_side;
  city.grid_cell = grid_cell;
  const int n = city.cells_per_side();
  city.occupied.assign(static_cast<std::size_t>(n) * n, 0);
  return city;
}

CityRealization generate_city(const CityParams& params, std::uint64_t seed,
                              std::span<const int> reserved) {
  params.validate();
  CityRealization city = CityRealization::empty(params.area_side, params.grid_cell);
  city.rng_seed = seed;
  const int n = params.cells_per_side();
  const int cells = n * n;

  std::vector<std::uint8_t> blocked(cells, 0);
  for (int r : reserved) {
    if (r < 0 || r >= cells) throw std::invalid_argument("generate_city: reserved cell out of range");
    blocked[r] = 1;
  }
  std::vector<int> pool;
  pool.reserve(cells);
  for (int c = 0; c < cells; ++c) {
    if (!blocked[c]) pool.push_back(c);
  }
  const auto wanted = static_cast<std::size_t>(std::lround(params.built_fraction * cells));
  if (wanted > pool.size()) {
    throw std::invalid_argument("generate_city: not enough free cells for the built fraction");
  }

  Rng rng(seed);
  partial_shuffle(pool, wanted, rng);
  std::vector<int> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(wanted));
  std::sort(chosen.begin(), chosen.end());

  const double inset = 0.5 * (1.0 - params.footprint_ratio) * params.grid_cell;
  city.buildings.reserve(chosen.size());
  for (int c : chosen) {
    const int i = c / n;
    const int j = c % n;
    Building b;
    b.footprint_min = {i * params.grid_cell + inset, j * params.grid_cell + inset};
    b.footprint_max = {(i + 1) * params.grid_cell - inset, (j + 1) * params.grid_cell - inset};
    b.height = truncated_rayleigh(params.rayleigh_scale, params.height_cap, rng);
    city.buildings.push_back(b);
    city.occupied[c] = 1;
  }
  return city;
}

std::vector<Vec2> place_sensors(const CityRealization& city, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("place_sensors: need at least one sensor");
  std::vector<int> free_cells;
  for (std::size_t c = 0; c < city.occupied.size(); ++c) {
    if (!city.occupied[c]) free_cells.push_back(static_cast<int>(c));
  }
  if (free_cells.size() < static_cast<std::size_t>(count)) {
    throw std::invalid_argument("place_sensors: fewer free cells than sensors");
  }
  Rng rng(seed);
  partial_shuffle(free_cells, static_cast<std::size_t>(count), rng);
  const int n = city.cells_per_side();
  std::vector<Vec2> sensors;
  sensors.reserve(count);
  for (int s = 0; s < count; ++s) {
    const int c = free_cells[s];
    const double u = rng.uniform();
    const double v = rng.uniform();
    sensors.push_back({(c / n + u) * city.grid_cell, (c % n + v) * city.grid_cell});
  }
  return sensors;
}

bool los_visible(const CityRealization& city, Vec3 a, Vec3 b) {
  // Canonical endpoint order makes the predicate exactly symmetric.
  if (lexicographic_less(b, a)) std::swap(a, b);
  for (const Building& box : city.buildings) {
    if (segment_hits_box(a, b, box)) return false;
  }
  return true;
}

LosSweepGrid LosSweepGrid::standard() {
  LosSweepGrid g;
  for (int h = 30; h <= 300; h += 30) g.altitudes_m.push_back(h);
  for (int e = 5; e <= 90; e += 5) g.elevations_deg.push_back(e);
  for (int a = 0; a < 360; a += 30) g.azimuths_deg.push_back(a);
  return g;
}

namespace {

// LoS hit counts per elevation bin for a single city realization.
std::vector<std::int64_t> sweep_one_city(const CityParams& params, std::uint64_t seed,
                                         int city_index, const LosSweepGrid& grid) {
  const CityRealization city = generate_city(params, derive_seed(seed, 2 * city_index));
  const Vec2 sn = place_sensors(city, 1, derive_seed(seed, 2 * city_index + 1)).front();
  std::vector<std::int64_t> hits(grid.elevations_deg.size(), 0);
  for (double h : grid.altitudes_m) {
    for (std::size_t e = 0; e < grid.elevations_deg.size(); ++e) {
      const double radius = h / std::tan(grid.elevations_deg[e] / kRadToDeg);
      for (double az : grid.azimuths_deg) {
        const double phi = az / kRadToDeg;
        const Vec3 uav{sn.x + radius * std::cos(phi), sn.y + radius * std::sin(phi), h};
        if (los_visible(city, uav, {sn.x, sn.y, 0.0})) ++hits[e];
      }
    }
  }
  return hits;
}

LosSampleTable assemble_table(const std::vector<std::int64_t>& hits, int n_cities,
                              const LosSweepGrid& grid) {
  const std::int64_t per_bin = static_cast<std::int64_t>(n_cities) *
                               static_cast<std::int64_t>(grid.altitudes_m.size()) *
                               static_cast<std::int64_t>(grid.azimuths_deg.size());
  LosSampleTable table;
  for (std::size_t e = 0; e < grid.elevations_deg.size(); ++e) {
    table.rows.push_back({grid.elevations_deg[e],
                          static_cast<double>(hits[e]) / static_cast<double>(per_bin), per_bin});
  }
  return table;
}

void check_sweep_args(const CityParams& params, int n_cities, const LosSweepGrid& grid) {
  params.validate();
  if (n_cities < 1) throw std::invalid_argument("sample_los_probability: n_cities must be >= 1");
  if (grid.altitudes_m.empty() || grid.elevations_deg.empty() || grid.azimuths_deg.empty()) {
    throw std::invalid_argument("sample_los_probability: empty sweep grid");
  }
}

}  // namespace

LosSampleTable sample_los_probability_serial(const CityParams& params, int n_cities,
                                             std::uint64_t seed, const LosSweepGrid& grid) {
  check_sweep_args(params, n_cities, grid);
  std::vector<std::int64_t> hits(grid.elevations_deg.size(), 0);
  for (int c = 0; c < n_cities; ++c) {
    const auto city_hits = sweep_one_city(params, seed, c, grid);
    for (std::size_t e = 0; e < hits.size(); ++e) hits[e] += city_hits[e];
  }
  return assemble_table(hits, n_cities, grid);
}

LosSampleTable sample_los_probability(const CityParams& params, int n_cities,
                                      std::uint64_t seed, const LosSweepGrid& grid) {
  check_sweep_args(params, n_cities, grid);
  const std::size_t bins = grid.elevations_deg.size();
  std::vector<std::int64_t> hits(bins, 0);
  // Integer counts make the reduction order-independent.
#pragma omp parallel
  {
    std::vector<std::int64_t> local(bins, 0);
#pragma omp for schedule(dynamic)
    for (int c = 0; c < n_cities; ++c) {
      const auto city_hits = sweep_one_city(params, seed, c, grid);
      for (std::size_t e = 0; e < bins; ++e) local[e] += city_hits[e];
    }
#pragma omp critical
    for (std::size_t e = 0; e < bins; ++e) hits[e] += local[e];
  }
  return assemble_table(hits, n_cities, grid);
}

std::string los_table_to_csv(const LosSampleTable& table) {
  std::string out = csv_row({"elevation_deg", "p_los", "n"});
  for (const auto& row : table.rows) {
    out += csv_row({format_double(row.elevation_deg), format_double(row.p_los),
                    std::to_string(row.sample_count)});
  }
  return out;
}

}  // namespace uavh
