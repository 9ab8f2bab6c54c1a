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

#include "uavh/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uavh {

namespace {
constexpr double kLog2e = std::numbers::log2e;
}  // namespace

void ChannelParams::validate() const {
  const auto& l = logistic;
  if (std::abs(l.b3 + l.b4 - 1.0) > 1e-9) {
    throw std::invalid_argument("ChannelParams: B3 + B4 must equal 1");
  }
  if (!(l.b2 > 0.0) || !(l.b4 > 0.0)) {
    throw std::invalid_argument("ChannelParams: need B2 > 0 and B4 > 0");
  }
  if (!(alpha_los >= 2.0 && alpha_los < alpha_nlos && alpha_nlos <= 6.0)) {
    throw std::invalid_argument("ChannelParams: need 2 <= alpha_L < alpha_N <= 6");
  }
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("ChannelParams: need 0 < mu < 1");
  if (!(beta0 > 0.0) || !(noise_power > 0.0) || !(gamma_gap > 0.0)) {
    throw std::invalid_argument("ChannelParams: beta0, sigma2 and Gamma must be positive");
  }
  for (double pk : tx_power) {
    if (!(pk > 0.0)) throw std::invalid_argument("ChannelParams: transmit powers must be positive");
  }
}

double ChannelParams::snr_ref(std::size_t sensor) const {
  return beta0 * tx_power.at(sensor) / (noise_power * gamma_gap);
}

std::vector<double> ChannelParams::snr_ref_all() const {
  std::vector<double> out;
  out.reserve(tx_power.size());
  for (std::size_t k = 0; k < tx_power.size(); ++k) out.push_back(snr_ref(k));
  return out;
}

ChannelParams ChannelParams::urban(std::size_t sensors) {
  ChannelParams p;
  p.logistic = LogisticParams{-0.4568, 0.0470, -0.63, 1.63};
  p.beta0 = db_to_linear(-60.0);
  p.mu = db_to_linear(-20.0);
  p.alpha_los = 2.5;
  p.alpha_nlos = 3.5;
  p.gamma_gap = db_to_linear(8.2);
  p.noise_power = dbm_to_watt(-109.0);
  p.tx_power.assign(sensors, 0.1);
  return p;
}

double elevation_angle(Vec2 q, double z, Vec2 w) {
  if (!(z > 0.0)) throw std::invalid_argument("elevation_angle: altitude must be positive");
  return kRadToDeg * std::atan2(z, distance(q, w));
}

double los_probability(double theta_deg, const LogisticParams& p) {
  return p.b3 + p.b4 / (1.0 + std::exp(-(p.b1 + p.b2 * theta_deg)));
}

double los_probability_clamped(double theta_deg, const LogisticParams& p) {
  return std::clamp(los_probability(theta_deg, p), 0.0, 1.0);
}

double channel_gain(double distance, bool los, const ChannelParams& p) {
  if (!(distance > 0.0)) throw std::invalid_argument("channel_gain: distance must be positive");
  return los ? p.beta0 * std::pow(distance, -p.alpha_los)
             : p.mu * p.beta0 * std::pow(distance, -p.alpha_nlos);
}

double rate_conditional(double distance, bool los, double snr_ref, const ChannelParams& p) {
  if (!(distance > 0.0)) throw std::invalid_argument("rate_conditional: distance must be positive");
  if (los) return std::log2(1.0 + snr_ref / std::pow(distance, p.alpha_los));
  return std::log2(1.0 + p.mu * snr_ref / std::pow(distance, p.alpha_nlos));
}

RateTerms rate_terms(Vec2 q, double z, Vec2 w, double snr_ref, const ChannelParams& p) {
  RateTerms t;
  t.theta_deg = elevation_angle(q, z, w);
  t.p_los = los_probability(t.theta_deg, p.logistic);
  const double dist = std::sqrt((q - w).squared_norm() + z * z);
  t.rate_los = rate_conditional(dist, true, snr_ref, p);
  t.rate_nlos = rate_conditional(dist, false, snr_ref, p);
  return t;
}

double expected_rate_from(double p_los, double rate_los, double rate_nlos) {
  return p_los * rate_los + (1.0 - p_los) * rate_nlos;
}

double expected_rate_lb_from(double p_los, double rate_los) { return p_los * rate_los; }

double expected_rate_jensen_from(double p_los, double distance, double snr_ref,
                                 const ChannelParams& p) {
  // E[h] * P / (sigma2 Gamma) = snr_ref * (P_L d^-aL + (1 - P_L) mu d^-aN).
  const double mean_gain = p_los * std::pow(distance, -p.alpha_los) +
                           (1.0 - p_los) * p.mu * std::pow(distance, -p.alpha_nlos);
  return std::log2(1.0 + snr_ref * mean_gain);
}

double expected_rate(Vec2 q, double z, Vec2 w, double snr_ref, const ChannelParams& p) {
  const RateTerms t = rate_terms(q, z, w, snr_ref, p);
  return expected_rate_from(t.p_los, t.rate_los, t.rate_nlos);
}

double expected_rate_lb(Vec2 q, double z, Vec2 w, double snr_ref, const ChannelParams& p) {
  const double theta = elevation_angle(q, z, w);
  const double dist = std::sqrt((q - w).squared_norm() + z * z);
  return expected_rate_lb_from(los_probability(theta, p.logistic),
                               rate_conditional(dist, true, snr_ref, p));
}

double expected_rate_jensen(Vec2 q, double z, Vec2 w, double snr_ref, const ChannelParams& p) {
  const double theta = elevation_angle(q, z, w);
  const double dist = std::sqrt((q - w).squared_norm() + z * z);
  return expected_rate_jensen_from(los_probability(theta, p.logistic), dist, snr_ref, p);
}

double psi(double x, double y, double snr_ref, double alpha, double b3, double b4) {
  return (b3 + b4 / x) * std::log2(1.0 + snr_ref / std::pow(y, 0.5 * alpha));
}

SurrogateCoeffs horizontal_surrogate(Vec2 q_hat, double z, Vec2 w, double snr_ref,
                                     const ChannelParams& p) {
  const auto& lp = p.logistic;
  SurrogateCoeffs c;
  c.d_hat = distance(q_hat, w);
  c.z_hat = z;
  c.y_hat = c.d_hat * c.d_hat + z * z;
  c.v_hat = std::atan2(z, c.d_hat);
  c.phi_hat = lp.b1 + lp.b2 * (kRadToDeg * c.v_hat);
  c.lambda_hat = z / c.y_hat;
  c.vertical_slope = c.d_hat / c.y_hat;

  const double x_hat = 1.0 + std::exp(-c.phi_hat);
  const double y_pow = std::pow(c.y_hat, 0.5 * p.alpha_los);
  c.r_hat = expected_rate_lb(q_hat, z, w, snr_ref, p);
  c.omega_hat = lp.b4 * kLog2e / (x_hat * x_hat) * std::log1p(snr_ref / y_pow);
  c.psi_hat = (lp.b3 + lp.b4 / x_hat) * snr_ref * (0.5 * p.alpha_los) * kLog2e /
              (c.y_hat * (y_pow + snr_ref));
  return c;
}

SurrogateCoeffs vertical_surrogate(Vec2 q, double z_hat, Vec2 w, double snr_ref,
                                   const ChannelParams& p) {
  return horizontal_surrogate(q, z_hat, w, snr_ref, p);
}

double surrogate_rate(const SurrogateCoeffs& c, double phi, double y) {
  return c.r_hat - c.omega_hat * (std::exp(-phi) - std::exp(-c.phi_hat)) -
         c.psi_hat * (y - c.y_hat);
}

double surrogate_angle(const SurrogateCoeffs& c, double d) {
  return c.v_hat - c.lambda_hat * (d - c.d_hat);
}

double horizontal_surrogate_value(const SurrogateCoeffs& c, const LogisticParams& lp, Vec2 q,
                                  Vec2 w) {
  const double d = distance(q, w);
  const double phi = lp.b1 + lp.b2 * (kRadToDeg * surrogate_angle(c, d));
  return surrogate_rate(c, phi, d * d + c.z_hat * c.z_hat);
}

}  // namespace uavh
