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

#include "uavh/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uavh {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char ch : f) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  out += "\r\n";
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool touched = false;  // current record has any content
  auto end_record = [&] {
    if (touched) {
      fields.push_back(std::move(field));
      records.push_back(std::move(fields));
    }
    fields.clear();
    field.clear();
    touched = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch != '"') {
        field += ch;
      } else if (i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else {
        quoted = false;
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        touched = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        touched = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field += ch;
        touched = true;
    }
  }
  if (quoted) throw std::invalid_argument("parse_csv: unterminated quoted field");
  end_record();
  return records;
}

namespace {

Json vec2_json(Vec2 v) { return Json::array({v.x, v.y}); }
Vec2 vec2_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) {
      throw std::invalid_argument("matrix_from: ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

template <typename T>
void read_opt(const Json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

void require_known_keys(const Json& j, const std::vector<std::string>& known,
                        const std::string& what) {
  if (!j.is_object()) throw std::invalid_argument(what + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw std::invalid_argument(what + ": unknown key \"" + item.key() + "\"");
    }
  }
}

Json to_json(const CityParams& p) {
  return {{"area_side", p.area_side},         {"grid_cell", p.grid_cell},
          {"built_fraction", p.built_fraction}, {"rayleigh_scale", p.rayleigh_scale},
          {"height_cap", p.height_cap},       {"footprint_ratio", p.footprint_ratio}};
}

CityParams city_params_from_json(const Json& j) {
  require_known_keys(j, {"area_side", "grid_cell", "built_fraction", "rayleigh_scale",
                         "height_cap", "footprint_ratio"},
                     "city");
  CityParams p;
  read_opt(j, "area_side", p.area_side);
  read_opt(j, "grid_cell", p.grid_cell);
  read_opt(j, "built_fraction", p.built_fraction);
  read_opt(j, "rayleigh_scale", p.rayleigh_scale);
  read_opt(j, "height_cap", p.height_cap);
  read_opt(j, "footprint_ratio", p.footprint_ratio);
  p.validate();
  return p;
}

Json to_json(const CityRealization& city) {
  Json buildings = Json::array();
  for (const auto& b : city.buildings) {
    buildings.push_back({{"footprint_min", vec2_json(b.footprint_min)},
                         {"footprint_max", vec2_json(b.footprint_max)},
                         {"height", b.height}});
  }
  return {{"area_side", city.area_side},
          {"grid_cell", city.grid_cell},
          {"rng_seed", city.rng_seed},
          {"buildings", buildings}};
}

CityRealization city_from_json(const Json& j) {
  CityRealization city =
      CityRealization::empty(j.at("area_side").get<double>(), j.at("grid_cell").get<double>());
  read_opt(j, "rng_seed", city.rng_seed);
  for (const auto& b : j.at("buildings")) {
    Building bld{vec2_from(b.at("footprint_min")), vec2_from(b.at("footprint_max")),
                 b.at("height").get<double>()};
    const Vec2 center = 0.5 * (bld.footprint_min + bld.footprint_max);
    city.occupied.at(city.cell_index(center)) = 1;
    city.buildings.push_back(bld);
  }
  return city;
}

Json to_json(const LosSampleTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"elevation_deg", r.elevation_deg}, {"p_los", r.p_los}, {"n", r.sample_count}});
  }
  return {{"rows", rows}};
}

Json to_json(const ChannelParams& p) {
  const auto& l = p.logistic;
  return {{"B1", l.b1},
          {"B2", l.b2},
          {"B3", l.b3},
          {"B4", l.b4},
          {"beta0", p.beta0},
          {"mu", p.mu},
          {"alpha_los", p.alpha_los},
          {"alpha_nlos", p.alpha_nlos},
          {"gamma_gap", p.gamma_gap},
          {"noise_power_w", p.noise_power},
          {"tx_power_w", p.tx_power},
          {"derived_snr_ref_db",
           [&] {
             Json out = Json::array();
             for (double g : p.snr_ref_all()) out.push_back(linear_to_db(g));
             return out;
           }()}};
}

ChannelParams channel_params_from_json(const Json& j, std::size_t sensors) {
  // derived_snr_ref_db is written for inspection and ignored on input.
  require_known_keys(j, {"B1", "B2", "B3", "B4", "beta0", "beta0_db", "mu", "mu_db",
                         "alpha_los", "alpha_nlos", "gamma_gap", "gamma_gap_db",
                         "noise_power_w", "noise_dbm", "tx_power_w", "derived_snr_ref_db"},
                     "channel");
  ChannelParams p = ChannelParams::urban(sensors);
  read_opt(j, "B1", p.logistic.b1);
  read_opt(j, "B2", p.logistic.b2);
  read_opt(j, "B3", p.logistic.b3);
  read_opt(j, "B4", p.logistic.b4);
  // Linear values take precedence over the dB spellings.
  if (j.contains("beta0_db")) p.beta0 = db_to_linear(j.at("beta0_db").get<double>());
  if (j.contains("mu_db")) p.mu = db_to_linear(j.at("mu_db").get<double>());
  read_opt(j, "alpha_los", p.alpha_los);
  read_opt(j, "alpha_nlos", p.alpha_nlos);
  if (j.contains("gamma_gap_db")) p.gamma_gap = db_to_linear(j.at("gamma_gap_db").get<double>());
  if (j.contains("noise_dbm")) p.noise_power = dbm_to_watt(j.at("noise_dbm").get<double>());
  read_opt(j, "beta0", p.beta0);
  read_opt(j, "mu", p.mu);
  read_opt(j, "gamma_gap", p.gamma_gap);
  read_opt(j, "noise_power_w", p.noise_power);
  if (j.contains("tx_power_w")) {
    const Json& tx = j.at("tx_power_w");
    if (tx.is_array()) {
      p.tx_power = tx.get<std::vector<double>>();
    } else {
      p.tx_power.assign(sensors, tx.get<double>());
    }
  }
  p.validate();
  return p;
}

Json to_json(const LogisticFit& fit) {
  return {{"B1", fit.params.b1},         {"B2", fit.params.b2},
          {"B3", fit.params.b3},         {"B4", fit.params.b4},
          {"r_squared", fit.r_squared},  {"residuals", fit.residuals},
          {"gradient_norm", fit.gradient_norm}, {"iterations", fit.iterations},
          {"degenerate", fit.degenerate}, {"converged", fit.converged}};
}

Json to_json(const MissionConfig& c) {
  return {{"t0", c.t0},
          {"delta", c.delta},
          {"n_slots", c.n_slots},
          {"q_start", vec2_json(c.q_start)},
          {"q_end", vec2_json(c.q_end)},
          {"z_start", c.z_start},
          {"z_end", c.z_end},
          {"v_xy_max", c.v_xy_max},
          {"v_z_max", c.v_z_max},
          {"h_min", c.h_min},
          {"h_max", c.h_max},
          {"eps_max", c.eps_max},
          {"eps_bcd", c.eps_bcd},
          {"max_bcd_iterations", c.max_bcd_iterations}};
}

MissionConfig mission_from_json(const Json& j) {
  require_known_keys(j, {"t0", "delta", "n_slots", "q_start", "q_end", "z_start", "z_end",
                         "v_xy_max", "v_z_max", "h_min", "h_max", "eps_max", "eps_bcd",
                         "max_bcd_iterations"},
                     "mission");
  MissionConfig c;
  read_opt(j, "t0", c.t0);
  read_opt(j, "v_xy_max", c.v_xy_max);
  read_opt(j, "v_z_max", c.v_z_max);
  read_opt(j, "h_min", c.h_min);
  read_opt(j, "h_max", c.h_max);
  read_opt(j, "eps_max", c.eps_max);
  read_opt(j, "eps_bcd", c.eps_bcd);
  read_opt(j, "max_bcd_iterations", c.max_bcd_iterations);
  read_opt(j, "z_start", c.z_start);
  read_opt(j, "z_end", c.z_end);
  if (j.contains("q_start")) c.q_start = vec2_from(j.at("q_start"));
  if (j.contains("q_end")) c.q_end = vec2_from(j.at("q_end"));
  if (j.contains("n_slots")) {
    c.n_slots = j.at("n_slots").get<int>();
  } else {
    c.n_slots = choose_slot_count(c.t0, c.v_xy_max, c.v_z_max, c.h_min, c.eps_max);
  }
  if (j.contains("delta")) {
    c.delta = j.at("delta").get<double>();
  } else {
    c.delta = c.t0 / c.n_slots;
  }
  c.validate();
  return c;
}

Json to_json(const OfflineSolution& sol) {
  Json waypoints = Json::array();
  for (std::size_t i = 0; i < sol.trajectory.q.size(); ++i) {
    waypoints.push_back({sol.trajectory.q[i].x, sol.trajectory.q[i].y, sol.trajectory.z[i]});
  }
  Json sensors = Json::array();
  for (Vec2 w : sol.sensors) sensors.push_back(vec2_json(w));
  return {{"scheme", sol.scheme},
          {"mission", to_json(sol.mission)},
          {"sensors", sensors},
          {"channel", to_json(sol.model)},
          {"waypoints", waypoints},
          {"schedule", matrix_json(sol.schedule)},
          {"fractional_schedule", matrix_json(sol.fractional)},
          {"eta", sol.eta},
          {"eta_fractional", sol.eta_fractional},
          {"eta_trace", sol.eta_trace},
          {"iterations", sol.iterations},
          {"converged", sol.converged}};
}

OfflineSolution offline_solution_from_json(const Json& j) {
  OfflineSolution sol;
  sol.scheme = j.at("scheme").get<std::string>();
  sol.mission = mission_from_json(j.at("mission"));
  for (const auto& w : j.at("sensors")) sol.sensors.push_back(vec2_from(w));
  // The LB design carries B4 = 0, which the validating reader would reject,
  // so the logistic part is restored directly.
  const Json& ch = j.at("channel");
  Json relaxed = ch;
  relaxed["B3"] = -0.63;
  relaxed["B4"] = 1.63;
  sol.model = channel_params_from_json(relaxed, sol.sensors.size());
  sol.model.logistic = {ch.at("B1").get<double>(), ch.at("B2").get<double>(),
                        ch.at("B3").get<double>(), ch.at("B4").get<double>()};
  for (const auto& wp : j.at("waypoints")) {
    sol.trajectory.q.push_back({wp.at(0).get<double>(), wp.at(1).get<double>()});
    sol.trajectory.z.push_back(wp.at(2).get<double>());
  }
  sol.schedule = matrix_from(j.at("schedule"));
  sol.fractional = matrix_from(j.at("fractional_schedule"));
  sol.eta = j.at("eta").get<double>();
  sol.eta_fractional = j.at("eta_fractional").get<double>();
  sol.eta_trace = j.at("eta_trace").get<std::vector<double>>();
  sol.iterations = j.at("iterations").get<int>();
  sol.converged = j.at("converged").get<bool>();
  check_trajectory(sol.trajectory, sol.mission);
  return sol;
}

Json to_json(const SolveReport& r) {
  return {{"status", to_string(r.status)},
          {"objective", r.objective},
          {"x", r.x},
          {"max_violation", r.max_violation},
          {"kkt_residual", r.kkt_residual},
          {"iterations", r.iterations},
          {"wall_time_s", r.wall_time_s},
          {"dual_objective", r.dual_objective},
          {"duals", r.duals},
          {"objective_trace", r.objective_trace}};
}

Json to_json(const SmoothConvexProgram& prog) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json lower = Json::array(), upper = Json::array();
  for (int i = 0; i < prog.num_vars; ++i) {
    lower.push_back(finite_or_null(prog.lower[i]));
    upper.push_back(finite_or_null(prog.upper[i]));
  }
  Json constraints = Json::array();
  for (std::size_t i = 0; i < prog.constraints.size(); ++i) {
    const auto& c = prog.constraints[i];
    Eigen::VectorXd local(static_cast<Eigen::Index>(c.support.size()));
    for (std::size_t a = 0; a < c.support.size(); ++a) local[a] = prog.start[c.support[a]];
    Eigen::VectorXd g;
    const double v = c.fn(local, &g, nullptr);
    constraints.push_back({{"name", c.name},
                           {"support", c.support},
                           {"value_at_start", v},
                           {"gradient_at_start", std::vector<double>(g.data(), g.data() + g.size())}});
  }
  Json meta = Json::object();
  for (const auto& [k, v] : prog.metadata) meta[k] = v;
  Eigen::VectorXd fg;
  const double f = prog.objective(prog.start, &fg, nullptr);
  return {{"num_vars", prog.num_vars},
          {"lower", lower},
          {"upper", upper},
          {"a_eq", matrix_json(prog.a_eq)},
          {"b_eq", std::vector<double>(prog.b_eq.data(), prog.b_eq.data() + prog.b_eq.size())},
          {"start", std::vector<double>(prog.start.data(), prog.start.data() + prog.start.size())},
          {"objective_at_start", f},
          {"objective_gradient_at_start", std::vector<double>(fg.data(), fg.data() + fg.size())},
          {"constraints", constraints},
          {"metadata", meta}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace uavh
