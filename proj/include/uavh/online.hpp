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


// In-flight adaptation along a fixed offline path. The path is split into N
// line segments (waypoint m to m + 1, m = 0..N-1). At the start of segment n
// the UAV observes the LoS state of every sensor, then re-solves a small LP
// over the transmission times tau[k][m] and segment durations t[m] of the
// remaining segments:
//
//   maximize eta
//   s.t.  (r_ac[k] + tau[k][n] r[k][n] + sum_{m>n} tau[k][m] E[r[k][m]]) / T0 >= eta
//         t[m] >= t_hat[m],  sum_m t[m] <= T_re,  sum_k tau[k][m] <= t[m],  tau >= 0
//
// and commits only the decisions for segment n. r[k][n] is the rate under
// the observed state, held constant over the segment.

#ifndef UAVH_ONLINE_HPP_
#define UAVH_ONLINE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "uavh/channel.hpp"
#include "uavh/citygen.hpp"
#include "uavh/lp.hpp"
#include "uavh/offline.hpp"

namespace uavh {

struct PathSegment {
  int index = 0;
  double h_len = 0.0;  // m
  double v_len = 0.0;  // m
  double t_hat = 0.0;  // s, shortest traversal time under the speed caps
  std::vector<double> expected_rates;   // per sensor, LoS/NLoS mixture
  std::vector<double> distances;        // per sensor, 3D at the start waypoint
  Vec3 start;                           // start waypoint
};

// Minimum traversal time of a segment: max(h_len / V_xy, v_len / V_z).
double min_traversal_time(double h_len, double v_len, double v_xy_max, double v_z_max);

std::vector<PathSegment> build_path(const OfflineSolution& sol, const ChannelParams& params);

// LoS flags of all sensors seen from one waypoint, ray traced in `city`.
std::vector<std::uint8_t> sample_channel_states(const CityRealization& city, Vec3 waypoint,
                                                const std::vector<Vec2>& sensors);

// Independent Bernoulli draws with the model LoS probability; ablation mode
// that ignores the spatial correlation of the realized city.
std::vector<std::uint8_t> sample_channel_states_iid(Vec3 waypoint,
                                                    const std::vector<Vec2>& sensors,
                                                    const LogisticParams& logistic, Rng& rng);

enum class Policy { kPlb, kAcs, kJa, kOja };

std::string to_string(Policy p);
// Accepts "PLB", "ACS", "JA", "OJA"; throws std::invalid_argument otherwise.
Policy policy_from_string(const std::string& name);

struct OnlineState {
  int n = 0;                  // current segment
  double t_remaining = 0.0;   // s
  std::vector<double> r_ac;   // per sensor, bits/Hz accumulated
  std::vector<std::uint8_t> c;  // observed LoS flags for segment n
};

struct OnlineStep {
  std::vector<double> tau;  // per sensor, for the current segment
  double t = 0.0;           // committed duration of the current segment
  double eta = 0.0;         // optimum of the step LP
  SolveReport report;
};

// Rates of the current segment under the observed states.
std::vector<double> realized_rates(const PathSegment& seg, const std::vector<std::uint8_t>& c,
                                   const ChannelParams& params);

// One step of a causal policy (ACS or JA) at state.n. `slot` is the offline
// slot length that ACS freezes the durations at. Throws InvariantViolation
// when the state leaves no feasible completion of the path.
OnlineStep solve_online_step(const OnlineState& state, const std::vector<PathSegment>& segments,
                             Policy policy, const ChannelParams& params, double t0, double slot,
                             const LpOptions& options = {});

// Non-causal benchmark: one LP over all segments with known rates
// rates(k, m). Returns tau (K x N) and t (N).
struct FullLpResult {
  Eigen::MatrixXd tau;
  Eigen::VectorXd t;
  double eta = 0.0;
  SolveReport report;
};
FullLpResult solve_full_lp(const Eigen::MatrixXd& rates, const std::vector<double>& t_hat,
                           double t0, const LpOptions& options = {});

struct EpisodeOptions {
  bool iid_states = false;     // ablation: Bernoulli states instead of ray tracing
  std::uint64_t iid_seed = 0;
  LpOptions lp;
};

struct EpisodeResult {
  Policy policy = Policy::kPlb;
  double min_rate = 0.0;
  std::vector<double> rates;          // per sensor average rate over T0
  std::vector<double> durations;      // committed t_n
  Eigen::MatrixXd tau;                // K x N committed transmission times
  Eigen::MatrixXd states;             // K x N LoS flags (0/1)
  Eigen::MatrixXd segment_rates;      // K x N rates under the states
  std::vector<double> eta_trace;      // step-LP optimum per segment
  std::vector<double> t_remaining;    // T_re at the start of each segment
  std::vector<double> wall_times_s;   // per-segment decision time
};

EpisodeResult run_episode(const OfflineSolution& sol, const CityRealization& city, Policy policy,
                          const ChannelParams& params, const EpisodeOptions& options = {});

// Throws InvariantViolation unless the time budget, remaining-time identity
// and rate accounting of the episode hold to `tol`.
void check_episode(const EpisodeResult& ep, double t0, const std::vector<double>& t_hat,
                   double tol = 1e-7);

// CSV trace: segment, t, tau_k..., c_k..., cumrate_k..., eta.
std::string episode_to_csv(const EpisodeResult& ep);

}  // namespace uavh

#endif  // UAVH_ONLINE_HPP_
