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


#include "uavh/online.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "uavh/io.hpp"

namespace uavh {

namespace {

// Relative slack accepted on the remaining-time feasibility invariant.
constexpr double kBudgetTol = 1e-9;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Max-min LP over segments j = 0..M-1 of a window. Variable layout: per
// segment the K transmission times, then (unless durations are frozen) the
// segment duration; eta last.
struct WindowLp {
  LinearProgram lp;
  int k = 0;
  int m = 0;
  bool free_durations = true;

  int stride() const { return free_durations ? k + 1 : k; }
  int tau_index(int sensor, int seg) const { return seg * stride() + sensor; }
  int t_index(int seg) const { return seg * stride() + k; }
  int eta_index() const { return m * stride(); }
};

// rates(k, j): rate credited to tau[k][j]. With `frozen_slot` > 0 every
// duration is fixed at that value and the budget row is dropped.
WindowLp build_window_lp(const Eigen::MatrixXd& rates, const std::vector<double>& r_ac,
                         const std::vector<double>& t_hat, double t_remaining, double t0,
                         double frozen_slot) {
  WindowLp w;
  w.k = static_cast<int>(rates.rows());
  w.m = static_cast<int>(rates.cols());
  w.free_durations = !(frozen_slot > 0.0);
  const int n_vars = w.eta_index() + 1;
  w.lp = LinearProgram::with_variables(n_vars, /*maximize=*/true);
  w.lp.objective[w.eta_index()] = 1.0;

  const int n_rows = w.k + w.m + (w.free_durations ? 1 : 0);
  w.lp.a_ineq = Eigen::MatrixXd::Zero(n_rows, n_vars);
  w.lp.b_ineq = Eigen::VectorXd::Zero(n_rows);
  // Rate rows, scaled by T0: eta * T0 - sum_j tau r <= r_ac.
  for (int s = 0; s < w.k; ++s) {
    for (int j = 0; j < w.m; ++j) w.lp.a_ineq(s, w.tau_index(s, j)) = -rates(s, j);
    w.lp.a_ineq(s, w.eta_index()) = t0;
    w.lp.b_ineq[s] = r_ac[s];
  }
  // Time sharing within each segment.
  for (int j = 0; j < w.m; ++j) {
    const int row = w.k + j;
    for (int s = 0; s < w.k; ++s) w.lp.a_ineq(row, w.tau_index(s, j)) = 1.0;
    if (w.free_durations) {
      w.lp.a_ineq(row, w.t_index(j)) = -1.0;
    } else {
      w.lp.b_ineq[row] = frozen_slot;
    }
  }
  if (w.free_durations) {
    const int row = w.k + w.m;
    for (int j = 0; j < w.m; ++j) {
      w.lp.a_ineq(row, w.t_index(j)) = 1.0;
      w.lp.lower[w.t_index(j)] = t_hat[j];
    }
    w.lp.b_ineq[row] = t_remaining;
  }
  return w;
}

void require_remaining_time(double t_remaining, const std::vector<double>& t_hat,
                            std::size_t from) {
  double need = 0.0;
  for (std::size_t m = from; m < t_hat.size(); ++m) need += t_hat[m];
  if (t_remaining < need - kBudgetTol * std::max(1.0, need)) {
    std::ostringstream msg;
    msg << "online: remaining time " << t_remaining << " s below the minimum " << need
        << " s needed to finish the path";
    throw InvariantViolation(msg.str());
  }
}

std::vector<double> t_hat_of(const std::vector<PathSegment>& segments) {
  std::vector<double> out;
  out.reserve(segments.size());
  for (const PathSegment& s : segments) out.push_back(s.t_hat);
  return out;
}

}  // namespace

double min_traversal_time(double h_len, double v_len, double v_xy_max, double v_z_max) {
  if (h_len < 0.0 || v_len < 0.0 || !(v_xy_max > 0.0) || !(v_z_max > 0.0)) {
    throw std::invalid_argument("min_traversal_time: negative length or non-positive speed");
  }
  return std::max(h_len / v_xy_max, v_len / v_z_max);
}

std::vector<PathSegment> build_path(const OfflineSolution& sol, const ChannelParams& params) {
  const Trajectory& traj = sol.trajectory;
  const int n = traj.n_slots();
  if (n < 1) throw std::invalid_argument("build_path: trajectory has no segments");
  if (params.tx_power.size() != sol.sensors.size()) {
    throw std::invalid_argument("build_path: channel parameters do not match the sensor count");
  }
  const std::vector<double> snr = params.snr_ref_all();
  std::vector<PathSegment> segments(n);
  for (int m = 0; m < n; ++m) {
    PathSegment& seg = segments[m];
    seg.index = m;
    seg.h_len = distance(traj.q[m + 1], traj.q[m]);
    seg.v_len = std::abs(traj.z[m + 1] - traj.z[m]);
    seg.t_hat = min_traversal_time(seg.h_len, seg.v_len, sol.mission.v_xy_max,
                                   sol.mission.v_z_max);
    seg.start = {traj.q[m].x, traj.q[m].y, traj.z[m]};
    for (std::size_t k = 0; k < sol.sensors.size(); ++k) {
      const RateTerms rt = rate_terms(traj.q[m], traj.z[m], sol.sensors[k], snr[k], params);
      const double p_los = std::clamp(rt.p_los, 0.0, 1.0);
      seg.expected_rates.push_back(expected_rate_from(p_los, rt.rate_los, rt.rate_nlos));
      seg.distances.push_back(
          std::sqrt((traj.q[m] - sol.sensors[k]).squared_norm() + traj.z[m] * traj.z[m]));
    }
  }
  return segments;
}

std::vector<std::uint8_t> sample_channel_states(const CityRealization& city, Vec3 waypoint,
                                                const std::vector<Vec2>& sensors) {
  std::vector<std::uint8_t> c;
  c.reserve(sensors.size());
  for (Vec2 w : sensors) c.push_back(los_visible(city, waypoint, {w.x, w.y, 0.0}) ? 1 : 0);
  return c;
}

std::vector<std::uint8_t> sample_channel_states_iid(Vec3 waypoint,
                                                    const std::vector<Vec2>& sensors,
                                                    const LogisticParams& logistic, Rng& rng) {
  std::vector<std::uint8_t> c;
  c.reserve(sensors.size());
  for (Vec2 w : sensors) {
    const double theta = elevation_angle({waypoint.x, waypoint.y}, waypoint.z, w);
    c.push_back(rng.uniform() < los_probability_clamped(theta, logistic) ? 1 : 0);
  }
  return c;
}

std::string to_string(Policy p) {
  switch (p) {
    case Policy::kPlb: return "PLB";
    case Policy::kAcs: return "ACS";
    case Policy::kJa: return "JA";
    case Policy::kOja: return "OJA";
  }
  return "?";
}

Policy policy_from_string(const std::string& name) {
  if (name == "PLB") return Policy::kPlb;
  if (name == "ACS") return Policy::kAcs;
  if (name == "JA") return Policy::kJa;
  if (name == "OJA") return Policy::kOja;
  throw std::invalid_argument("unknown policy: " + name);
}

std::vector<double> realized_rates(const PathSegment& seg, const std::vector<std::uint8_t>& c,
                                   const ChannelParams& params) {
  if (c.size() != seg.distances.size()) {
    throw std::invalid_argument("realized_rates: state count does not match the sensors");
  }
  std::vector<double> r(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    r[k] = rate_conditional(seg.distances[k], c[k] != 0, params.snr_ref(k), params);
  }
  return r;
}

OnlineStep solve_online_step(const OnlineState& state, const std::vector<PathSegment>& segments,
                             Policy policy, const ChannelParams& params, double t0, double slot,
                             const LpOptions& options) {
  if (policy != Policy::kAcs && policy != Policy::kJa) {
    throw std::invalid_argument("solve_online_step: only ACS and JA re-solve per segment");
  }
  const int n_seg = static_cast<int>(segments.size());
  if (state.n < 0 || state.n >= n_seg) throw std::out_of_range("solve_online_step: segment");
  const int k = static_cast<int>(state.r_ac.size());
  const int m = n_seg - state.n;
  std::vector<double> t_hat(m);
  for (int j = 0; j < m; ++j) t_hat[j] = segments[state.n + j].t_hat;
  if (policy == Policy::kJa) {
    require_remaining_time(state.t_remaining, t_hat, 0);
  }

  Eigen::MatrixXd rates(k, m);
  const std::vector<double> now = realized_rates(segments[state.n], state.c, params);
  for (int s = 0; s < k; ++s) {
    rates(s, 0) = now[s];
    for (int j = 1; j < m; ++j) rates(s, j) = segments[state.n + j].expected_rates[s];
  }
  const WindowLp w = build_window_lp(rates, state.r_ac, t_hat, state.t_remaining, t0,
                                     policy == Policy::kAcs ? slot : 0.0);
  OnlineStep step;
  step.report = solve_lp(w.lp, options);
  if (!step.report.optimal()) {
    throw InvariantViolation("online: step LP not solved to optimality (" +
                             to_string(step.report.status) + ")");
  }
  step.tau.resize(k);
  for (int s = 0; s < k; ++s) step.tau[s] = step.report.x[w.tau_index(s, 0)];
  step.t = w.free_durations ? step.report.x[w.t_index(0)] : slot;
  step.eta = step.report.x[w.eta_index()];
  return step;
}

FullLpResult solve_full_lp(const Eigen::MatrixXd& rates, const std::vector<double>& t_hat,
                           double t0, const LpOptions& options) {
  if (static_cast<Eigen::Index>(t_hat.size()) != rates.cols()) {
    throw std::invalid_argument("solve_full_lp: t_hat size does not match the segments");
  }
  require_remaining_time(t0, t_hat, 0);
  const std::vector<double> zero(rates.rows(), 0.0);
  const WindowLp w = build_window_lp(rates, zero, t_hat, t0, t0, 0.0);
  FullLpResult out;
  out.report = solve_lp(w.lp, options);
  if (!out.report.optimal()) {
    throw InvariantViolation("online: full LP not solved to optimality (" +
                             to_string(out.report.status) + ")");
  }
  out.tau.resize(w.k, w.m);
  out.t.resize(w.m);
  for (int j = 0; j < w.m; ++j) {
    for (int s = 0; s < w.k; ++s) out.tau(s, j) = out.report.x[w.tau_index(s, j)];
    out.t[j] = out.report.x[w.t_index(j)];
  }
  out.eta = out.report.x[w.eta_index()];
  return out;
}

EpisodeResult run_episode(const OfflineSolution& sol, const CityRealization& city, Policy policy,
                          const ChannelParams& params, const EpisodeOptions& options) {
  const std::vector<PathSegment> segments = build_path(sol, params);
  const int n_seg = static_cast<int>(segments.size());
  const int k = static_cast<int>(sol.sensors.size());
  const double t0 = sol.mission.t0;
  const double slot = sol.mission.delta;
  if (policy == Policy::kPlb &&
      (sol.schedule.rows() != k || sol.schedule.cols() != n_seg)) {
    throw std::invalid_argument("run_episode: offline schedule does not match the path");
  }

  EpisodeResult ep;
  ep.policy = policy;
  ep.states = Eigen::MatrixXd::Zero(k, n_seg);
  ep.segment_rates = Eigen::MatrixXd::Zero(k, n_seg);
  ep.tau = Eigen::MatrixXd::Zero(k, n_seg);

  // The environment: states along the whole path. Causal policies only ever
  // read column n at segment n.
  Rng rng(options.iid_seed);
  for (int m = 0; m < n_seg; ++m) {
    const std::vector<std::uint8_t> c =
        options.iid_states
            ? sample_channel_states_iid(segments[m].start, sol.sensors, params.logistic, rng)
            : sample_channel_states(city, segments[m].start, sol.sensors);
    const std::vector<double> r = realized_rates(segments[m], c, params);
    for (int s = 0; s < k; ++s) {
      ep.states(s, m) = c[s];
      ep.segment_rates(s, m) = r[s];
    }
  }

  FullLpResult oja;
  if (policy == Policy::kOja) {
    const auto start = std::chrono::steady_clock::now();
    oja = solve_full_lp(ep.segment_rates, t_hat_of(segments), t0, options.lp);
    ep.wall_times_s.assign(n_seg, 0.0);
    ep.wall_times_s[0] = seconds_since(start);
  }

  OnlineState state;
  state.t_remaining = t0;
  state.r_ac.assign(k, 0.0);
  for (int n = 0; n < n_seg; ++n) {
    state.n = n;
    state.c.assign(k, 0);
    for (int s = 0; s < k; ++s) state.c[s] = static_cast<std::uint8_t>(ep.states(s, n));
    ep.t_remaining.push_back(state.t_remaining);

    double t_n = 0.0;
    double eta = 0.0;
    switch (policy) {
      case Policy::kPlb: {
        t_n = slot;
        for (int s = 0; s < k; ++s) ep.tau(s, n) = slot * sol.schedule(s, n);
        // Projected average rate of the fixed plan under expected future rates.
        eta = std::numeric_limits<double>::infinity();
        for (int s = 0; s < k; ++s) {
          double total = state.r_ac[s] + ep.tau(s, n) * ep.segment_rates(s, n);
          for (int m = n + 1; m < n_seg; ++m) {
            total += slot * sol.schedule(s, m) * segments[m].expected_rates[s];
          }
          eta = std::min(eta, total / t0);
        }
        break;
      }
      case Policy::kAcs:
      case Policy::kJa: {
        const auto start = std::chrono::steady_clock::now();
        const OnlineStep step =
            solve_online_step(state, segments, policy, params, t0, slot, options.lp);
        ep.wall_times_s.push_back(seconds_since(start));
        t_n = step.t;
        eta = step.eta;
        for (int s = 0; s < k; ++s) ep.tau(s, n) = step.tau[s];
        break;
      }
      case Policy::kOja: {
        t_n = oja.t[n];
        eta = oja.eta;
        for (int s = 0; s < k; ++s) ep.tau(s, n) = oja.tau(s, n);
        break;
      }
    }
    ep.durations.push_back(t_n);
    ep.eta_trace.push_back(eta);
    for (int s = 0; s < k; ++s) state.r_ac[s] += ep.tau(s, n) * ep.segment_rates(s, n);
    state.t_remaining -= t_n;
  }
  if (policy == Policy::kPlb) ep.wall_times_s.assign(n_seg, 0.0);

  ep.rates.resize(k);
  for (int s = 0; s < k; ++s) ep.rates[s] = state.r_ac[s] / t0;
  ep.min_rate = k > 0 ? *std::min_element(ep.rates.begin(), ep.rates.end()) : 0.0;
  return ep;
}

void check_episode(const EpisodeResult& ep, double t0, const std::vector<double>& t_hat,
                   double tol) {
  const int n_seg = static_cast<int>(ep.durations.size());
  const int k = static_cast<int>(ep.rates.size());
  if (static_cast<int>(t_hat.size()) != n_seg || static_cast<int>(ep.t_remaining.size()) != n_seg) {
    throw InvariantViolation("episode: trace lengths do not match the path");
  }
  double used = 0.0;
  for (int n = 0; n < n_seg; ++n) {
    if (std::abs(ep.t_remaining[n] + used - t0) > tol) {
      throw InvariantViolation("episode: remaining-time identity violated at segment " +
                               std::to_string(n));
    }
    if (ep.durations[n] < t_hat[n] - tol) {
      throw InvariantViolation("episode: segment " + std::to_string(n) +
                               " flown faster than the speed caps allow");
    }
    double shared = 0.0;
    for (int s = 0; s < k; ++s) {
      if (ep.tau(s, n) < -tol) throw InvariantViolation("episode: negative transmission time");
      shared += ep.tau(s, n);
    }
    if (shared > ep.durations[n] + tol) {
      throw InvariantViolation("episode: transmission times exceed segment " +
                               std::to_string(n));
    }
    used += ep.durations[n];
  }
  if (used > t0 + tol) throw InvariantViolation("episode: total duration exceeds the budget");
  double min_rate = std::numeric_limits<double>::infinity();
  for (int s = 0; s < k; ++s) {
    double data = 0.0;
    for (int n = 0; n < n_seg; ++n) data += ep.tau(s, n) * ep.segment_rates(s, n);
    if (std::abs(data / t0 - ep.rates[s]) > tol * std::max(1.0, ep.rates[s])) {
      throw InvariantViolation("episode: rate accounting mismatch for sensor " +
                               std::to_string(s));
    }
    min_rate = std::min(min_rate, data / t0);
  }
  if (k > 0 && std::abs(min_rate - ep.min_rate) > tol * std::max(1.0, min_rate)) {
    throw InvariantViolation("episode: min-rate does not match the per-sensor rates");
  }
}

std::string episode_to_csv(const EpisodeResult& ep) {
  const int k = static_cast<int>(ep.rates.size());
  const int n_seg = static_cast<int>(ep.durations.size());
  std::vector<std::string> header{"segment", "t"};
  for (int s = 0; s < k; ++s) header.push_back("tau_" + std::to_string(s));
  for (int s = 0; s < k; ++s) header.push_back("c_" + std::to_string(s));
  for (int s = 0; s < k; ++s) header.push_back("cumrate_" + std::to_string(s));
  header.push_back("eta");
  std::string out = csv_row(header);
  std::vector<double> acc(k, 0.0);
  const double t0 = ep.t_remaining.empty() ? 1.0 : ep.t_remaining.front();
  for (int n = 0; n < n_seg; ++n) {
    std::vector<std::string> row{std::to_string(n), format_double(ep.durations[n])};
    for (int s = 0; s < k; ++s) row.push_back(format_double(ep.tau(s, n)));
    for (int s = 0; s < k; ++s) row.push_back(std::to_string(static_cast<int>(ep.states(s, n))));
    for (int s = 0; s < k; ++s) {
      acc[s] += ep.tau(s, n) * ep.segment_rates(s, n);
      row.push_back(format_double(acc[s] / t0));
    }
    row.push_back(format_double(ep.eta_trace[n]));
    out += csv_row(row);
  }
  return out;
}

}  // namespace uavh
