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

// Air-to-ground propagation and rate model.
//
// The LoS probability is a generalized logistic function of the elevation
// angle (degrees):
//
//   P_L(theta) = B3 + B4 / (1 + exp(-(B1 + B2 * theta))),   B3 + B4 = 1.
//
// Conditional on the state, the power gain follows a LoS or NLoS path-loss
// law and the rate is log2(1 + gain * P / (sigma2 * Gamma)). All rates are in
// bps/Hz, angles in degrees, distances in metres.

#ifndef UAVH_CHANNEL_HPP_
#define UAVH_CHANNEL_HPP_

#include <string>
#include <vector>

#include "uavh/citygen.hpp"
#include "uavh/common.hpp"

namespace uavh {

struct LogisticParams {
  double b1 = -0.4568;
  double b2 = 0.0470;
  double b3 = -0.63;
  double b4 = 1.63;
};

struct ChannelParams {
  LogisticParams logistic;
  double beta0 = db_to_linear(-60.0);  // linear gain at 1 m
  double mu = db_to_linear(-20.0);     // extra NLoS attenuation, linear
  double alpha_los = 2.5;
  double alpha_nlos = 3.5;
  double gamma_gap = db_to_linear(8.2);  // SNR gap, linear
  double noise_power = dbm_to_watt(-109.0);
  std::vector<double> tx_power;                  // W, one entry per sensor

  void validate() const;
  // beta0 * P_k / (sigma2 * Gamma).
  double snr_ref(std::size_t sensor) const;
  std::vector<double> snr_ref_all() const;

  // Urban preset: B = (-0.4568, 0.0470, -0.63, 1.63), beta0 = -60 dB,
  // mu = -20 dB, alpha = 2.5 / 3.5, Gamma = 8.2 dB, sigma2 = -109 dBm and
  // 0.1 W per sensor.
  static ChannelParams urban(std::size_t sensors);
};

// (180/pi) * atan(z / |q - w|); 90 when the horizontal distance is zero.
double elevation_angle(Vec2 q, double z, Vec2 w);

double los_probability(double theta_deg, const LogisticParams& p);
// Value clamped to [0, 1] for display; optimization code uses the raw form.
double los_probability_clamped(double theta_deg, const LogisticParams& p);

double channel_gain(double distance, bool los, const ChannelParams& p);

// Rate conditioned on the channel state at 3D distance `distance`.
double rate_conditional(double distance, bool los, double snr_ref, const ChannelParams& p);

// Per-location rate quantities shared by the expected-rate family.
struct RateTerms {
  double theta_deg = 0.0;
  double p_los = 0.0;
  double rate_los = 0.0;
  double rate_nlos = 0.0;
};
RateTerms rate_terms(Vec2 q, double z, Vec2 w, double snr_ref, const ChannelParams& p);

double expected_rate(Vec2 q, double z, Vec2 w, double snr_ref, const ChannelParams& p);
double expected_rate_lb(Vec2 q, double z, Vec2 w, double snr_ref, const ChannelParams& p);
double expected_rate_jensen(Vec2 q, double z, Vec2 w, double snr_ref, const ChannelParams& p);

// The same three quantities from an explicit LoS probability.
double expected_rate_from(double p_los, double rate_los, double rate_nlos);
double expected_rate_lb_from(double p_los, double rate_los);
double expected_rate_jensen_from(double p_los, double distance, double snr_ref,
                                 const ChannelParams& p);

// (B3 + B4 / x) * log2(1 + gamma / y^(alpha/2)); convex for x, y > 0 when
// B3 >= 0 and alpha >= 2.
double psi(double x, double y, double snr_ref, double alpha, double b3, double b4);

// First-order expansion of the LoS-weighted rate around a UAV location
// (q_hat, z_hat). With X = 1 + exp(-phi_hat) and Y = |q_hat - w|^2 + z_hat^2:
//
//   rate_lb(phi, Y') >= r_hat - omega_hat * (exp(-phi) - exp(-phi_hat))
//                             - psi_hat * (Y' - Y)
//
// and the elevation angle (radians) is bounded below in the horizontal
// distance d by v_hat - lambda_hat * (d - d_hat).
struct SurrogateCoeffs {
  double r_hat = 0.0;
  double omega_hat = 0.0;
  double psi_hat = 0.0;
  double v_hat = 0.0;
  double lambda_hat = 0.0;
  double phi_hat = 0.0;
  // Expansion geometry.
  double d_hat = 0.0;  // horizontal distance |q_hat - w|
  double y_hat = 0.0;  // squared 3D distance
  double z_hat = 0.0;
  // d atan(z/d)/dz at z_hat: slope of the tangent (upper) bound in altitude.
  double vertical_slope = 0.0;
};

SurrogateCoeffs horizontal_surrogate(Vec2 q_hat, double z, Vec2 w, double snr_ref,
                                     const ChannelParams& p);
// Same expansion, anchored at the altitude z_hat for a fixed horizontal q.
SurrogateCoeffs vertical_surrogate(Vec2 q, double z_hat, Vec2 w, double snr_ref,
                                   const ChannelParams& p);

// Affine-in-deviation rate bound at a given phi and squared 3D distance.
double surrogate_rate(const SurrogateCoeffs& c, double phi, double y);
// Lower bound on the elevation angle in radians at horizontal distance d.
double surrogate_angle(const SurrogateCoeffs& c, double d);
// Full horizontal surrogate at q: phi from surrogate_angle, y = |q-w|^2 + z^2.
double horizontal_surrogate_value(const SurrogateCoeffs& c, const LogisticParams& lp,
                                  Vec2 q, Vec2 w);

// Least-squares fit of the logistic model to an empirical table.
struct LogisticFit {
  LogisticParams params;
  double r_squared = 0.0;
  std::vector<double> residuals;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool degenerate = false;
  bool converged = false;
};

struct FitOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 2000;
  LogisticParams initial{-0.5, 0.05, -0.5, 1.5};
};

// Minimizes the squared residuals subject to B3 + B4 = 1, B2 > 0, B4 > 0.
// A flat table (B2 unidentifiable) is returned with `degenerate` set; a
// non-degenerate table that fails to converge throws std::runtime_error.
LogisticFit fit_logistic(const LosSampleTable& table, const FitOptions& options = {});

}  // namespace uavh

#endif  // UAVH_CHANNEL_HPP_
