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

// Pre-flight design: the mission is discretized into N slots of length
// delta, the UAV visits waypoints (q_n, z_n), n = 0..N, and slot n is served
// from waypoint n. The max-min LoS-weighted expected rate
//
//   eta = min_k (1/N) sum_n a[k][n] * P_L(theta_kn) * r_L(d_kn)
//
// is raised by block coordinate descent over the schedule (an LP), the
// horizontal waypoints and the altitudes (each a convex surrogate problem
// whose optimum lower-bounds the true objective).

#ifndef UAVH_OFFLINE_HPP_
#define UAVH_OFFLINE_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "uavh/channel.hpp"
#include "uavh/common.hpp"
#include "uavh/lp.hpp"
#include "uavh/smooth.hpp"

namespace uavh {

struct MissionConfig {
  double t0 = 10.6;
  double delta = 0.2;
  int n_slots = 53;
  Vec2 q_start{0.0, 150.0};
  Vec2 q_end{300.0, 150.0};
  double z_start = 50.0;
  double z_end = 50.0;
  double v_xy_max = 40.0;
  double v_z_max = 20.0;
  double h_min = 50.0;
  double h_max = 300.0;
  double eps_max = 0.16;
  double eps_bcd = 1e-3;
  int max_bcd_iterations = 50;

  double s_xy() const { return v_xy_max * delta; }
  double s_z() const { return v_z_max * delta; }
  // Throws std::invalid_argument when the configuration is inconsistent or
  // the straight start-to-end flight violates the per-slot speed caps.
  void validate() const;

  // Experimental preset for a flight duration: 300 m corridor at 50 m,
  // V_xy = 40 m/s, V_z = 20 m/s, altitudes 50..300 m, 0.2 s slots.
  static MissionConfig preset(double t0);
};

// N = ceil(T0 * max(V_xy, V_z) / (H_min * eps_max)), at least 1. Products
// that land within relative 1e-9 above an integer round down to it, so that
// decimal inputs such as T0 = 10.6 do not pick up a spurious extra slot.
int choose_slot_count(double t0, double v_xy_max, double v_z_max, double h_min,
                      double eps_max);

struct Trajectory {
  std::vector<Vec2> q;  // N + 1 horizontal waypoints
  std::vector<double> z;  // N + 1 altitudes

  int n_slots() const { return static_cast<int>(q.size()) - 1; }
};

// Throws InvariantViolation if the endpoints, speed caps or altitude band
// are violated by more than `tol` metres.
void check_trajectory(const Trajectory& traj, const MissionConfig& cfg, double tol = 1e-6);

Trajectory init_trajectory(const MissionConfig& cfg);

// K x N matrix of LoS-weighted expected rates at waypoints 0..N-1.
Eigen::MatrixXd rate_matrix(const Trajectory& traj, const std::vector<Vec2>& sensors,
                            const ChannelParams& params);

// min_k (1/N) sum_n a(k, n) rates(k, n).
double max_min_rate(const Eigen::MatrixXd& schedule, const Eigen::MatrixXd& rates);

struct SchedulingResult {
  Eigen::MatrixXd schedule;  // fractional, K x N
  double eta = 0.0;
  SolveReport report;
};

SchedulingResult optimize_scheduling(const Eigen::MatrixXd& rates, const LpOptions& options = {});

enum class VerticalAngleModel {
  kExact,        // exact concave arctan of the altitude
  kTaylorUpper,  // first-order expansion at the current altitude (affine)
};

struct OfflineOptions {
  LpOptions lp;
  SmoothOptions smooth;
  VerticalAngleModel vertical_angle = VerticalAngleModel::kExact;
  bool optimize_altitude = true;
};

struct BlockResult {
  Trajectory trajectory;
  double surrogate_eta = 0.0;  // optimum of the convex subproblem
  SolveReport report;
};

BlockResult optimize_horizontal(const Eigen::MatrixXd& schedule, const Trajectory& expansion,
                                const std::vector<Vec2>& sensors, const ChannelParams& params,
                                const MissionConfig& cfg, const OfflineOptions& options = {});

BlockResult optimize_vertical(const Eigen::MatrixXd& schedule, const Trajectory& expansion,
                              const std::vector<Vec2>& sensors, const ChannelParams& params,
                              const MissionConfig& cfg, const OfflineOptions& options = {});

// Greedy re-quantization of a fractional schedule: every slot goes to the
// eligible sensor (a > 0 in that slot) with the largest outstanding deficit
// of rate-weighted service; all-zero slots stay idle. With no rate matrix,
// deficits are measured in slots.
Eigen::MatrixXd reconstruct_binary_schedule(const Eigen::MatrixXd& fractional,
                                            const Eigen::MatrixXd* rates = nullptr);

struct OfflineSolution {
  std::string scheme = "PLB";
  MissionConfig mission;
  std::vector<Vec2> sensors;
  ChannelParams model;  // channel model the design optimized against
  Trajectory trajectory;
  Eigen::MatrixXd schedule;    // binary
  Eigen::MatrixXd fractional;  // last LP schedule
  double eta = 0.0;            // binary schedule, LoS-weighted objective under `model`
  double eta_fractional = 0.0;
  std::vector<double> eta_trace;  // fractional eta after each iteration
  int iterations = 0;
  bool converged = false;
};

OfflineSolution bcd_optimize(const MissionConfig& cfg, const std::vector<Vec2>& sensors,
                             const ChannelParams& params, const OfflineOptions& options = {});

}  // namespace uavh

#endif  // UAVH_OFFLINE_HPP_
