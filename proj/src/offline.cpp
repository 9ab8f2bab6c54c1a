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

#include "uavh/offline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace uavh {

void MissionConfig::validate() const {
  if (!(t0 > 0.0) || !(delta > 0.0) || n_slots < 1) {
    throw std::invalid_argument("MissionConfig: need T0 > 0, delta > 0, N >= 1");
  }
  if (std::abs(n_slots * delta - t0) > 1e-9 * std::max(1.0, t0)) {
    throw std::invalid_argument("MissionConfig: N * delta must equal T0");
  }
  if (!(v_xy_max >= 0.0) || !(v_z_max >= 0.0)) {
    throw std::invalid_argument("MissionConfig: speed caps must be non-negative");
  }
  if (!(h_min > 0.0) || h_min > h_max) {
    throw std::invalid_argument("MissionConfig: need 0 < H_min <= H_max");
  }
  for (double z : {z_start, z_end}) {
    if (z < h_min || z > h_max) {
      throw std::invalid_argument("MissionConfig: endpoint altitude outside [H_min, H_max]");
    }
  }
  const double slack = 1e-9;
  if (distance(q_start, q_end) > n_slots * s_xy() * (1.0 + slack) + slack ||
      std::abs(z_end - z_start) > n_slots * s_z() * (1.0 + slack) + slack) {
    throw std::invalid_argument(
        "MissionConfig: straight flight between the endpoints exceeds the speed caps");
  }
}

MissionConfig MissionConfig::preset(double t0) {
  MissionConfig cfg;
  cfg.t0 = t0;
  // eps_max chosen so that the slot-count rule yields 0.2 s slots.
  cfg.eps_max = std::max(cfg.v_xy_max, cfg.v_z_max) * 0.2 / cfg.h_min;
  cfg.n_slots = choose_slot_count(t0, cfg.v_xy_max, cfg.v_z_max, cfg.h_min, cfg.eps_max);
  cfg.delta = t0 / cfg.n_slots;
  return cfg;
}

int choose_slot_count(double t0, double v_xy_max, double v_z_max, double h_min,
                      double eps_max) {
  if (!(t0 > 0.0) || !(h_min > 0.0) || !(eps_max > 0.0)) {
    throw std::invalid_argument("choose_slot_count: need T0, H_min, eps_max > 0");
  }
  const double x = t0 * std::max(v_xy_max, v_z_max) / (h_min * eps_max);
  const double n = std::ceil(x - 1e-9 * x);
  return static_cast<int>(std::max(1.0, n));
}

void check_trajectory(const Trajectory& traj, const MissionConfig& cfg, double tol) {
  const int n = cfg.n_slots;
  std::ostringstream err;
  if (traj.n_slots() != n || traj.z.size() != traj.q.size()) {
    err << "trajectory has " << traj.q.size() << " waypoints, expected " << n + 1;
  } else if (distance(traj.q.front(), cfg.q_start) > tol ||
             distance(traj.q.back(), cfg.q_end) > tol ||
             std::abs(traj.z.front() - cfg.z_start) > tol ||
             std::abs(traj.z.back() - cfg.z_end) > tol) {
    err << "trajectory endpoints are not pinned";
  } else {
    for (int i = 0; i <= n && err.tellp() == 0; ++i) {
      if (traj.z[i] < cfg.h_min - tol || traj.z[i] > cfg.h_max + tol) {
        err << "altitude " << traj.z[i] << " at waypoint " << i << " outside band";
      }
      if (i < n && distance(traj.q[i + 1], traj.q[i]) > cfg.s_xy() + tol) {
        err << "horizontal step " << distance(traj.q[i + 1], traj.q[i]) << " at slot " << i
            << " exceeds " << cfg.s_xy();
      }
      if (i < n && std::abs(traj.z[i + 1] - traj.z[i]) > cfg.s_z() + tol) {
        err << "vertical step at slot " << i << " exceeds " << cfg.s_z();
      }
    }
  }
  if (err.tellp() != 0) throw InvariantViolation("check_trajectory: " + err.str());
}

Trajectory init_trajectory(const MissionConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  const int n = cfg.n_slots;
  for (int i = 0; i <= n; ++i) {
    const double f = static_cast<double>(i) / n;
    traj.q.push_back(cfg.q_start + f * (cfg.q_end - cfg.q_start));
    traj.z.push_back(cfg.z_start + f * (cfg.z_end - cfg.z_start));
  }
  traj.q.back() = cfg.q_end;
  traj.z.back() = cfg.z_end;
  return traj;
}

Eigen::MatrixXd rate_matrix(const Trajectory& traj, const std::vector<Vec2>& sensors,
                            const ChannelParams& params) {
  const int n = traj.n_slots();
  const auto k_count = static_cast<Eigen::Index>(sensors.size());
  Eigen::MatrixXd rates(k_count, n);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double snr = params.snr_ref(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
      rates(k, i) = expected_rate_lb(traj.q[i], traj.z[i], sensors[k], snr, params);
    }
  }
  return rates;
}

double max_min_rate(const Eigen::MatrixXd& schedule, const Eigen::MatrixXd& rates) {
  if (schedule.rows() == 0) return 0.0;
  return (schedule.cwiseProduct(rates).rowwise().sum() / static_cast<double>(rates.cols()))
      .minCoeff();
}

SchedulingResult optimize_scheduling(const Eigen::MatrixXd& rates, const LpOptions& options) {
  const Eigen::Index k_count = rates.rows();
  const Eigen::Index n = rates.cols();
  // Variables: a(k, i) at k * n + i, then eta. The bound a <= 1 is implied by
  // the per-slot sums and a >= 0, so it is not stated.
  const Eigen::Index nv = k_count * n + 1;
  LinearProgram lp = LinearProgram::with_variables(nv, true);
  lp.objective[nv - 1] = 1.0;
  lp.a_ineq = Eigen::MatrixXd::Zero(k_count + n, nv);
  lp.b_ineq = Eigen::VectorXd::Zero(k_count + n);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      lp.a_ineq(k, k * n + i) = -rates(k, i) / static_cast<double>(n);
    }
    lp.a_ineq(k, nv - 1) = 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < k_count; ++k) lp.a_ineq(k_count + i, k * n + i) = 1.0;
    lp.b_ineq[k_count + i] = 1.0;
  }
  SchedulingResult out;
  out.report = solve_lp(lp, options);
  if (!out.report.optimal()) {
    throw std::runtime_error("optimize_scheduling: LP ended with status " +
                             to_string(out.report.status));
  }
  out.schedule.resize(k_count, n);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out.schedule(k, i) = std::clamp(out.report.x[k * n + i], 0.0, 1.0);
    }
  }
  out.eta = max_min_rate(out.schedule, rates);
  return out;
}

namespace {

constexpr double kScheduleFloor = 1e-12;

// Relative amount the common rate floor may give up while the altitude
// block redistributes slack among sensors (see optimize_vertical), and the
// matching tolerance of the block acceptance test in bcd_optimize.
constexpr double kRefineSlack = 1e-6;

// The distance cone d >= sqrt(|q - w|^2 + kConeSmoothing^2) is imposed as
// d^2 - |q - w|^2 - kConeSmoothing^2 >= 0 together with d >= 0, whose log
// barrier is the self-concordant second-order-cone barrier. The smoothing
// keeps the cone strictly interior when the UAV passes straight over a
// sensor; overstating a distance only lowers the surrogate rate, so the
// bound stays conservative.
constexpr double kConeSmoothing = 1e-2;

double smoothed_distance(Vec2 a, Vec2 b) {
  return std::hypot(distance(a, b), kConeSmoothing);
}

struct RateTerm {
  int slot = 0;   // waypoint index
  double weight;  // a(k, i) / N
  SurrogateCoeffs c;
};

// Horizontal surrogate in two auxiliary variables per term: d stands in for
// the horizontal distance |q - w| through the cone d >= |q - w| (smoothed,
// see kConeSmoothing), and v for the NLoS-odds term exp(-phi) through the
// exponential-cone constraint log v + phi >= 0, with
//   phi = phi_hat - kappa * (d - d_hat),
//   s   = r_hat - omega_hat * (v - exp(-phi_hat))
//         - psi_hat * (d^2 - kConeSmoothing^2 + z^2 - y_hat).
// s is decreasing in both d >= 0 and v, so it never exceeds the surrogate at
// the actual distance and both cones are tight at the optimum. Moving the
// curvature into the cones keeps the rate rows linear in v and quadratic in
// d, and their log barriers are self-concordant.
double horizontal_term(const RateTerm& t, double d, double v, Eigen::Vector2d* grad,
                       double* hess_dd) {
  const double value =
      t.c.r_hat - t.c.omega_hat * (v - std::exp(-t.c.phi_hat)) -
      t.c.psi_hat * (d * d - kConeSmoothing * kConeSmoothing + t.c.z_hat * t.c.z_hat - t.c.y_hat);
  if (grad != nullptr) *grad = Eigen::Vector2d(-2.0 * t.c.psi_hat * d, -t.c.omega_hat);
  if (hess_dd != nullptr) *hess_dd = -2.0 * t.c.psi_hat;
  return value;
}

double horizontal_kappa(const RateTerm& t, const LogisticParams& lp) {
  return lp.b2 * kRadToDeg * t.c.lambda_hat;
}

// Vertical surrogate s(z) at fixed horizontal distance d.
double vertical_term(const RateTerm& t, const LogisticParams& lp, VerticalAngleModel model,
                     double z, double* grad, double* hess) {
  const double c = lp.b2 * kRadToDeg;
  const double d = t.c.d_hat;
  double phi, dphi, ddphi;
  if (model == VerticalAngleModel::kExact) {
    const double r2 = d * d + z * z;
    phi = lp.b1 + c * std::atan2(z, d);
    dphi = c * d / r2;
    ddphi = -c * 2.0 * z * d / (r2 * r2);
  } else {
    phi = t.c.phi_hat + c * t.c.vertical_slope * (z - t.c.z_hat);
    dphi = c * t.c.vertical_slope;
    ddphi = 0.0;
  }
  const double e = std::exp(-phi);
  const double value = t.c.r_hat - t.c.omega_hat * (e - std::exp(-t.c.phi_hat)) -
                       t.c.psi_hat * (z * z - t.c.z_hat * t.c.z_hat);
  if (grad != nullptr) *grad = t.c.omega_hat * e * dphi - 2.0 * t.c.psi_hat * z;
  if (hess != nullptr) *hess = t.c.omega_hat * e * (ddphi - dphi * dphi) - 2.0 * t.c.psi_hat;
  return value;
}

// Per-sensor list of scheduled slots with free waypoints, plus the constant
// contribution of slot 0 (whose waypoint is pinned).
struct SensorTerms {
  std::vector<RateTerm> terms;
  double constant = 0.0;
};

std::vector<SensorTerms> build_terms(const Eigen::MatrixXd& schedule, const Trajectory& traj,
                                     const std::vector<Vec2>& sensors,
                                     const ChannelParams& params) {
  const int n = traj.n_slots();
  std::vector<SensorTerms> out(sensors.size());
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    const double snr = params.snr_ref(k);
    for (int i = 0; i < n; ++i) {
      const double a = schedule(static_cast<Eigen::Index>(k), i);
      if (a <= kScheduleFloor) continue;
      const double weight = a / n;
      if (i == 0) {
        out[k].constant +=
            weight * expected_rate_lb(traj.q[0], traj.z[0], sensors[k], snr, params);
        continue;
      }
      out[k].terms.push_back(
          {i, weight, horizontal_surrogate(traj.q[i], traj.z[i], sensors[k], snr, params)});
    }
  }
  return out;
}

SolveReport failed_report(SolveStatus status) {
  SolveReport r;
  r.status = status;
  return r;
}

}  // namespace

BlockResult optimize_horizontal(const Eigen::MatrixXd& schedule, const Trajectory& expansion,
                                const std::vector<Vec2>& sensors, const ChannelParams& params,
                                const MissionConfig& cfg, const OfflineOptions& options) {
  const int n = cfg.n_slots;
  BlockResult out;
  out.trajectory = expansion;
  const double eta_hat = max_min_rate(schedule, rate_matrix(expansion, sensors, params));
  out.surrogate_eta = eta_hat;
  out.report = failed_report(SolveStatus::kOptimal);
  const int free_points = n - 1;
  if (free_points <= 0 || cfg.s_xy() <= 0.0) return out;

  const auto terms = build_terms(schedule, expansion, sensors, params);
  int term_count = 0;
  for (const auto& st : terms) term_count += static_cast<int>(st.terms.size());

  // Variables: q_1..q_{N-1} (two each), one distance and one odds variable
  // per scheduled term, eta.
  const int q_vars = 2 * free_points;
  const int d_base = q_vars;
  const int v_base = d_base + term_count;
  const int nv = v_base + term_count + 1;
  const int eta_index = nv - 1;
  auto var = [](int waypoint) { return 2 * (waypoint - 1); };

  SmoothConvexProgram prog;
  prog.num_vars = nv;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
  c[eta_index] = 1.0;
  prog.set_linear_objective(c);
  prog.lower = Eigen::VectorXd::Constant(nv, -LinearProgram::kInf);
  prog.upper = Eigen::VectorXd::Constant(nv, LinearProgram::kInf);
  prog.lower.segment(d_base, 2 * term_count).setZero();

  const LogisticParams lp = params.logistic;
  struct AuxTerm {
    int j;  // term number: d at d_base + j, v at v_base + j
    int q_index;
    Vec2 w;
    double phi_hat;
    double d_hat;
    double kappa;
  };
  std::vector<AuxTerm> aux;
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    SmoothConstraint con;
    con.name = "rate[" + std::to_string(k) + "]";
    for (const auto& t : terms[k].terms) {
      const int j = static_cast<int>(aux.size());
      con.support.push_back(d_base + j);
      con.support.push_back(v_base + j);
      aux.push_back({j, var(t.slot), sensors[k], t.c.phi_hat, t.c.d_hat, horizontal_kappa(t, lp)});
    }
    con.support.push_back(eta_index);
    const SensorTerms st = terms[k];
    con.fn = [st](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
      const auto m = x.size();
      if (g != nullptr) g->setZero(m);
      if (h != nullptr) h->setZero(m, m);
      double value = st.constant - x[m - 1];
      Eigen::Vector2d tg;
      double th = 0.0;
      for (std::size_t j = 0; j < st.terms.size(); ++j) {
        const auto& t = st.terms[j];
        const auto o = static_cast<Eigen::Index>(2 * j);
        value += t.weight * horizontal_term(t, x[o], x[o + 1], g != nullptr ? &tg : nullptr,
                                            h != nullptr ? &th : nullptr);
        if (g != nullptr) g->segment<2>(o) = t.weight * tg;
        if (h != nullptr) (*h)(o, o) = t.weight * th;
      }
      if (g != nullptr) (*g)[m - 1] = -1.0;
      return value;
    };
    prog.constraints.push_back(std::move(con));
  }
  for (const auto& a : aux) {
    SmoothConstraint con;
    con.name = "distance[" + std::to_string(a.j) + "]";
    con.support = {d_base + a.j, a.q_index, a.q_index + 1};
    const Vec2 w = a.w;
    con.fn = [w](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
      const double ux = x[1] - w.x;
      const double uy = x[2] - w.y;
      if (g != nullptr) *g = Eigen::Vector3d(2.0 * x[0], -2.0 * ux, -2.0 * uy);
      if (h != nullptr) *h = Eigen::Vector3d(2.0, -2.0, -2.0).asDiagonal();
      return x[0] * x[0] - ux * ux - uy * uy - kConeSmoothing * kConeSmoothing;
    };
    prog.constraints.push_back(std::move(con));
  }
  for (const auto& a : aux) {
    SmoothConstraint con;
    con.name = "nlos_odds[" + std::to_string(a.j) + "]";
    con.support = {d_base + a.j, v_base + a.j};
    const double phi_hat = a.phi_hat;
    const double d_hat = a.d_hat;
    const double kappa = a.kappa;
    con.fn = [phi_hat, d_hat, kappa](const Eigen::VectorXd& x, Eigen::VectorXd* g,
                                     Eigen::MatrixXd* h) {
      if (g != nullptr) *g = Eigen::Vector2d(-kappa, 1.0 / x[1]);
      if (h != nullptr) {
        h->setZero(2, 2);
        (*h)(1, 1) = -1.0 / (x[1] * x[1]);
      }
      if (!(x[1] > 0.0)) return -std::numeric_limits<double>::infinity();
      return std::log(x[1]) + phi_hat - kappa * (x[0] - d_hat);
    };
    prog.constraints.push_back(std::move(con));
  }

  // Speed caps S^2 - |q_{i+1} - q_i|^2 >= 0 with pinned endpoints folded in.
  const double s2 = cfg.s_xy() * cfg.s_xy();
  for (int i = 0; i < n; ++i) {
    SmoothConstraint con;
    con.name = "speed_xy[" + std::to_string(i) + "]";
    const bool a_free = i >= 1;
    const bool b_free = i + 1 <= n - 1;
    if (a_free) con.support = {var(i), var(i) + 1};
    if (b_free) {
      con.support.push_back(var(i + 1));
      con.support.push_back(var(i + 1) + 1);
    }
    const Vec2 qa = expansion.q[i];
    const Vec2 qb = expansion.q[i + 1];
    con.fn = [a_free, b_free, qa, qb, s2](const Eigen::VectorXd& x, Eigen::VectorXd* g,
                                          Eigen::MatrixXd* h) {
      Eigen::Index o = 0;
      Eigen::Vector2d pa(qa.x, qa.y), pb(qb.x, qb.y);
      if (a_free) {
        pa = x.segment<2>(0);
        o = 2;
      }
      if (b_free) pb = x.segment<2>(o);
      const Eigen::Vector2d dv = pb - pa;
      const auto m = x.size();
      if (g != nullptr) {
        g->setZero(m);
        if (a_free) g->segment<2>(0) = 2.0 * dv;
        if (b_free) g->segment<2>(o) = -2.0 * dv;
      }
      if (h != nullptr) {
        h->setZero(m, m);
        const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();
        if (a_free) h->block<2, 2>(0, 0) = -2.0 * eye;
        if (b_free) h->block<2, 2>(o, o) = -2.0 * eye;
        if (a_free && b_free) {
          h->block<2, 2>(0, o) = 2.0 * eye;
          h->block<2, 2>(o, 0) = 2.0 * eye;
        }
      }
      return s2 - dv.squaredNorm();
    };
    prog.constraints.push_back(std::move(con));
  }

  // Start: the expansion point, where every surrogate is tight. Interior:
  // halfway to the straight line (strictly inside the speed caps whenever
  // that line is shorter than N * S), auxiliaries slightly inside the cones.
  Eigen::VectorXd start(nv), interior(nv);
  const Trajectory line = init_trajectory(cfg);
  for (int i = 1; i <= free_points; ++i) {
    start[var(i)] = expansion.q[i].x;
    start[var(i) + 1] = expansion.q[i].y;
    interior[var(i)] = 0.5 * (expansion.q[i].x + line.q[i].x);
    interior[var(i) + 1] = 0.5 * (expansion.q[i].y + line.q[i].y);
  }
  for (const auto& a : aux) {
    const Vec2 qs{start[a.q_index], start[a.q_index + 1]};
    const Vec2 qi{interior[a.q_index], interior[a.q_index + 1]};
    start[d_base + a.j] = smoothed_distance(qs, a.w);
    interior[d_base + a.j] = smoothed_distance(qi, a.w) + 1e-2;
    start[v_base + a.j] = std::exp(-(a.phi_hat - a.kappa * (start[d_base + a.j] - a.d_hat)));
    interior[v_base + a.j] =
        std::exp(-(a.phi_hat - a.kappa * (interior[d_base + a.j] - a.d_hat)) + 1e-3);
  }
  auto min_rate_slack = [&](Eigen::VectorXd& x) {
    x[eta_index] = 0.0;
    double lo = LinearProgram::kInf;
    for (std::size_t k = 0; k < sensors.size(); ++k) {
      lo = std::min(lo, constraint_value(prog, k, x));
    }
    return lo;
  };
  start[eta_index] = min_rate_slack(start);
  const double eta_int = min_rate_slack(interior);
  interior[eta_index] = eta_int - 1e-3 * std::max(1.0, std::abs(eta_int));
  prog.start = start;
  prog.interior = interior;
  prog.metadata = {{"block", 0.0}, {"slots", static_cast<double>(n)},
                   {"expansion_eta", eta_hat}};

  out.report = solve_smooth(prog, options.smooth);
  out.surrogate_eta = out.report.objective;
  for (int i = 1; i <= free_points; ++i) {
    out.trajectory.q[i] = {out.report.x[var(i)], out.report.x[var(i) + 1]};
  }
  return out;
}

BlockResult optimize_vertical(const Eigen::MatrixXd& schedule, const Trajectory& expansion,
                              const std::vector<Vec2>& sensors, const ChannelParams& params,
                              const MissionConfig& cfg, const OfflineOptions& options) {
  const int n = cfg.n_slots;
  BlockResult out;
  out.trajectory = expansion;
  const double eta_hat = max_min_rate(schedule, rate_matrix(expansion, sensors, params));
  out.surrogate_eta = eta_hat;
  out.report = failed_report(SolveStatus::kOptimal);
  const int free_points = n - 1;
  if (free_points <= 0 || cfg.h_min >= cfg.h_max) {
    if (cfg.h_min >= cfg.h_max) std::fill(out.trajectory.z.begin(), out.trajectory.z.end(), cfg.h_min);
    return out;
  }
  const int k_count = static_cast<int>(sensors.size());
  auto var = [](int waypoint) { return waypoint - 1; };

  // Altitude variables first, then `extra` trailing variables. Constraint k
  // (k < K) is sensor k's surrogate rate minus the variable `floor_var(k)`.
  const auto terms = build_terms(schedule, expansion, sensors, params);
  const VerticalAngleModel model = options.vertical_angle;
  const LogisticParams lp = params.logistic;
  const double sz = cfg.s_z();
  auto make_program = [&](int extra, const std::function<int(int)>& floor_var) {
    SmoothConvexProgram prog;
    prog.num_vars = free_points + extra;
    prog.lower = Eigen::VectorXd::Constant(prog.num_vars, -LinearProgram::kInf);
    prog.upper = Eigen::VectorXd::Constant(prog.num_vars, LinearProgram::kInf);
    prog.lower.head(free_points).setConstant(cfg.h_min);
    prog.upper.head(free_points).setConstant(cfg.h_max);
    for (int k = 0; k < k_count; ++k) {
      SmoothConstraint con;
      con.name = "rate[" + std::to_string(k) + "]";
      for (const auto& t : terms[k].terms) con.support.push_back(var(t.slot));
      con.support.push_back(floor_var(k));
      const SensorTerms st = terms[k];
      con.fn = [st, lp, model](const Eigen::VectorXd& x, Eigen::VectorXd* g,
                               Eigen::MatrixXd* h) {
        const auto m = x.size();
        if (g != nullptr) g->setZero(m);
        if (h != nullptr) h->setZero(m, m);
        double value = st.constant - x[m - 1];
        for (std::size_t j = 0; j < st.terms.size(); ++j) {
          const auto& t = st.terms[j];
          double tg = 0.0, th = 0.0;
          value += t.weight * vertical_term(t, lp, model, x[static_cast<Eigen::Index>(j)],
                                            g != nullptr ? &tg : nullptr,
                                            h != nullptr ? &th : nullptr);
          if (g != nullptr) (*g)[static_cast<Eigen::Index>(j)] = t.weight * tg;
          if (h != nullptr) (*h)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) =
              t.weight * th;
        }
        if (g != nullptr) (*g)[m - 1] = -1.0;
        return value;
      };
      prog.constraints.push_back(std::move(con));
    }
    // |z_{i+1} - z_i| <= S_z as two affine constraints per slot.
    for (int i = 0; i < n; ++i) {
      const bool a_free = i >= 1;
      const bool b_free = i + 1 <= n - 1;
      const double za = expansion.z[i];
      const double zb = expansion.z[i + 1];
      for (double sign : {1.0, -1.0}) {
        SmoothConstraint con;
        con.name = std::string(sign > 0 ? "climb[" : "descend[") + std::to_string(i) + "]";
        if (a_free) con.support.push_back(var(i));
        if (b_free) con.support.push_back(var(i + 1));
        con.fn = [a_free, b_free, za, zb, sz, sign](const Eigen::VectorXd& x,
                                                    Eigen::VectorXd* g, Eigen::MatrixXd* h) {
          Eigen::Index o = 0;
          double a = za, b = zb;
          if (a_free) a = x[o++];
          if (b_free) b = x[o];
          const auto m = x.size();
          if (g != nullptr) {
            g->setZero(m);
            if (a_free) (*g)[0] = sign;
            if (b_free) (*g)[m - 1] = -sign;
          }
          if (h != nullptr) h->setZero(m, m);
          return sz - sign * (b - a);
        };
        prog.constraints.push_back(std::move(con));
      }
    }
    return prog;
  };
  // Surrogate rate of every sensor at the altitudes in x (trailing
  // variables ignored).
  auto sensor_rates = [&](const SmoothConvexProgram& prog, const Eigen::VectorXd& x) {
    Eigen::VectorXd probe = x;
    probe.tail(prog.num_vars - free_points).setZero();
    Eigen::VectorXd r(k_count);
    for (int k = 0; k < k_count; ++k) r[k] = constraint_value(prog, k, probe);
    return r;
  };

  // Stage 1: maximize the common floor eta.
  const int eta_index = free_points;
  SmoothConvexProgram prog = make_program(1, [eta_index](int) { return eta_index; });
  Eigen::VectorXd c = Eigen::VectorXd::Zero(prog.num_vars);
  c[eta_index] = 1.0;
  prog.set_linear_objective(c);

  // Interior: halfway between the expansion point and a profile that leaves
  // the straight line toward mid-band at half the spare climb rate.
  const double lin_step = std::abs(cfg.z_end - cfg.z_start) / n;
  const double spare = 0.5 * (sz - lin_step);
  const double mid = 0.5 * (cfg.h_min + cfg.h_max);
  Eigen::VectorXd start(prog.num_vars), interior(prog.num_vars);
  for (int i = 1; i <= free_points; ++i) {
    const double lin = cfg.z_start + (cfg.z_end - cfg.z_start) * static_cast<double>(i) / n;
    const double h = std::max(spare, 0.0) * std::min(i, n - i);
    const double center = std::clamp(mid, lin - h, lin + h);
    start[var(i)] = expansion.z[i];
    interior[var(i)] = 0.5 * (expansion.z[i] + center);
  }
  start[eta_index] = sensor_rates(prog, start).minCoeff();
  const double eta_int = sensor_rates(prog, interior).minCoeff();
  interior[eta_index] = eta_int - 1e-3 * std::max(1.0, std::abs(eta_int));
  prog.start = start;
  prog.interior = interior;
  prog.metadata = {{"block", 1.0}, {"slots", static_cast<double>(n)},
                   {"expansion_eta", eta_hat}};

  out.report = solve_smooth(prog, options.smooth);
  out.surrogate_eta = out.report.objective;
  Eigen::VectorXd z_best = Eigen::Map<const Eigen::VectorXd>(out.report.x.data(), free_points);

  // Stage 2: with every sensor held at the floor (less a small slack that
  // gives the barrier an interior), maximize the sum of the sensors' rates.
  // Max-min optima are rarely unique: sensors whose rows are slack could
  // still gain from a better altitude profile, and only this refinement
  // hands that gain to the next scheduling step.
  if (out.report.max_violation <= options.smooth.feas_tol) {
    const double eta1 = out.report.objective;
    const double floor = eta1 - kRefineSlack * std::max(1.0, std::abs(eta1));
    SmoothConvexProgram ref =
        make_program(k_count, [free_points](int k) { return free_points + k; });
    ref.lower.tail(k_count).setConstant(floor);
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(ref.num_vars);
    c2.tail(k_count).setConstant(1.0 / k_count);
    ref.set_linear_objective(c2);
    Eigen::VectorXd start2(ref.num_vars);
    start2.head(free_points) = z_best;
    start2.tail(k_count) = sensor_rates(ref, start2);
    // Strictly feasible point on the segment toward the stage-1 interior;
    // the rows are concave in z, so rates degrade at most linearly.
    Eigen::VectorXd interior2(ref.num_vars);
    bool have_interior = false;
    for (double theta = 0.5; theta > 1e-12; theta *= 0.5) {
      interior2.head(free_points) =
          z_best + theta * (interior.head(free_points) - z_best);
      const Eigen::VectorXd r = sensor_rates(ref, interior2);
      if (r.minCoeff() > floor) {
        interior2.tail(k_count) = 0.5 * (r.array() + floor).matrix();
        have_interior = true;
        break;
      }
    }
    if (have_interior && start2.tail(k_count).minCoeff() >= floor) {
      ref.start = start2;
      ref.interior = interior2;
      ref.metadata = {{"block", 2.0}, {"slots", static_cast<double>(n)}, {"floor", floor}};
      const SolveReport r2 = solve_smooth(ref, options.smooth);
      out.report.iterations += r2.iterations;
      if (r2.max_violation <= options.smooth.feas_tol) {
        z_best = Eigen::Map<const Eigen::VectorXd>(r2.x.data(), free_points);
      }
    }
  }
  for (int i = 1; i <= free_points; ++i) {
    out.trajectory.z[i] = std::clamp(z_best[var(i)], cfg.h_min, cfg.h_max);
  }
  return out;
}

Eigen::MatrixXd reconstruct_binary_schedule(const Eigen::MatrixXd& fractional,
                                            const Eigen::MatrixXd* rates) {
  const Eigen::Index k_count = fractional.rows();
  const Eigen::Index n = fractional.cols();
  if (rates != nullptr && (rates->rows() != k_count || rates->cols() != n)) {
    throw std::invalid_argument("reconstruct_binary_schedule: rate matrix shape mismatch");
  }
  Eigen::MatrixXd binary = Eigen::MatrixXd::Zero(k_count, n);
  Eigen::VectorXd deficit = Eigen::VectorXd::Zero(k_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = -1;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const double r = rates != nullptr ? (*rates)(k, i) : 1.0;
      deficit[k] += fractional(k, i) * r;
      if (fractional(k, i) <= kScheduleFloor) continue;
      if (best < 0 || deficit[k] > deficit[best]) best = k;
    }
    if (best < 0) continue;
    binary(best, i) = 1.0;
    deficit[best] -= rates != nullptr ? (*rates)(best, i) : 1.0;
  }
  return binary;
}

OfflineSolution bcd_optimize(const MissionConfig& cfg, const std::vector<Vec2>& sensors,
                             const ChannelParams& params, const OfflineOptions& options) {
  cfg.validate();
  if (sensors.empty()) throw std::invalid_argument("bcd_optimize: need at least one sensor");
  if (params.tx_power.size() != sensors.size()) {
    throw std::invalid_argument("bcd_optimize: one transmit power per sensor required");
  }
  OfflineSolution sol;
  sol.mission = cfg;
  sol.sensors = sensors;
  sol.model = params;

  Trajectory traj = init_trajectory(cfg);
  Eigen::MatrixXd rates = rate_matrix(traj, sensors, params);
  SchedulingResult sched = optimize_scheduling(rates, options.lp);
  Eigen::MatrixXd a = sched.schedule;
  double eta = sched.eta;
  sol.eta_trace.push_back(eta);

  for (int it = 1; it <= cfg.max_bcd_iterations; ++it) {
    const double eta_prev = eta;
    const Trajectory traj_prev = traj;
    const Eigen::MatrixXd a_prev = a;
    // A block is kept unless it lowers the true objective by more than the
    // refinement slack; the iteration as a whole never lowers it.
    const double slack = kRefineSlack * std::max(1.0, std::abs(eta));
    const BlockResult hor = optimize_horizontal(a, traj, sensors, params, cfg, options);
    const double eta_hor = max_min_rate(a, rate_matrix(hor.trajectory, sensors, params));
    if (eta_hor >= eta - slack) {
      traj = hor.trajectory;
      eta = eta_hor;
    }
    if (options.optimize_altitude) {
      const BlockResult ver = optimize_vertical(a, traj, sensors, params, cfg, options);
      const double eta_ver = max_min_rate(a, rate_matrix(ver.trajectory, sensors, params));
      if (eta_ver >= eta - slack) {
        traj = ver.trajectory;
        eta = eta_ver;
      }
    }
    rates = rate_matrix(traj, sensors, params);
    sched = optimize_scheduling(rates, options.lp);
    if (sched.eta >= eta) {
      a = sched.schedule;
      eta = sched.eta;
    }
    if (eta < eta_prev) {
      traj = traj_prev;
      a = a_prev;
      eta = eta_prev;
    }
    sol.eta_trace.push_back(eta);
    sol.iterations = it;
    if (eta - eta_prev < cfg.eps_bcd) {
      sol.converged = true;
      break;
    }
  }

  check_trajectory(traj, cfg);
  sol.trajectory = traj;
  sol.fractional = a;
  sol.eta_fractional = eta;
  rates = rate_matrix(traj, sensors, params);
  sol.schedule = reconstruct_binary_schedule(a, &rates);
  sol.eta = max_min_rate(sol.schedule, rates);
  return sol;
}

}  // namespace uavh
