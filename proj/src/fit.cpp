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

// Levenberg-Marquardt fit of the generalized logistic LoS model. The
// equality B3 + B4 = 1 is removed by substitution, leaving (B1, B2, B3) free
// with B2 > 0 and B3 < 1 enforced by rejecting steps that leave that region.

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "uavh/channel.hpp"

namespace uavh {
namespace {

struct Sample {
  double x;
  double y;
};

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double model(const Eigen::Vector3d& b, double x) {
  return b[2] + (1.0 - b[2]) * sigmoid(b[0] + b[1] * x);
}

double sum_squares(const Eigen::Vector3d& b, const std::vector<Sample>& data) {
  double s = 0.0;
  for (const auto& d : data) {
    const double r = model(b, d.x) - d.y;
    s += r * r;
  }
  return s;
}

void jacobian(const Eigen::Vector3d& b, const std::vector<Sample>& data, Eigen::MatrixXd& jac,
              Eigen::VectorXd& res) {
  const auto n = static_cast<Eigen::Index>(data.size());
  jac.resize(n, 3);
  res.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = data[i].x;
    const double s = sigmoid(b[0] + b[1] * x);
    const double ds = (1.0 - b[2]) * s * (1.0 - s);
    jac(i, 0) = ds;
    jac(i, 1) = ds * x;
    jac(i, 2) = 1.0 - s;
    res[i] = b[2] + (1.0 - b[2]) * s - data[i].y;
  }
}

bool admissible(const Eigen::Vector3d& b) { return b[1] > 0.0 && b[2] < 1.0; }

}  // namespace

LogisticFit fit_logistic(const LosSampleTable& table, const FitOptions& options) {
  std::vector<Sample> data;
  std::set<double> bins;
  for (const auto& row : table.rows) {
    data.push_back({row.elevation_deg, row.p_los});
    bins.insert(row.elevation_deg);
  }
  if (bins.size() < 4) {
    throw std::invalid_argument("fit_logistic: need at least 4 distinct elevation bins");
  }

  double mean = 0.0;
  for (const auto& d : data) mean += d.y;
  mean /= static_cast<double>(data.size());
  double ss_tot = 0.0;
  for (const auto& d : data) ss_tot += (d.y - mean) * (d.y - mean);

  LogisticFit fit;
  Eigen::Vector3d b(options.initial.b1, options.initial.b2, options.initial.b3);

  auto finish = [&](const Eigen::Vector3d& sol) {
    fit.params = {sol[0], sol[1], sol[2], 1.0 - sol[2]};
    fit.residuals.clear();
    for (const auto& d : data) fit.residuals.push_back(model(sol, d.x) - d.y);
    const double ss_res = sum_squares(sol, data);
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  };

  // A flat table carries no information about the slope.
  if (ss_tot <= 1e-14 * static_cast<double>(data.size())) {
    fit.degenerate = true;
    finish(b);
    return fit;
  }

  Eigen::MatrixXd jac;
  Eigen::VectorXd res;
  double lambda = 1e-3;
  double cost = sum_squares(b, data);
  for (int it = 0; it < options.max_iterations; ++it) {
    fit.iterations = it;
    jacobian(b, data, jac, res);
    const Eigen::Vector3d grad = jac.transpose() * res;
    fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (fit.gradient_norm <= options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    bool stepped = false;
    while (lambda < 1e16) {
      Eigen::Matrix3d damped = jtj;
      for (int d = 0; d < 3; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      const Eigen::Vector3d step = damped.ldlt().solve(-grad);
      const Eigen::Vector3d trial = b + step;
      if (admissible(trial)) {
        const double trial_cost = sum_squares(trial, data);
        if (trial_cost <= cost) {
          b = trial;
          cost = trial_cost;
          lambda = std::max(lambda * 0.2, 1e-15);
          stepped = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!stepped) break;  // no descent direction left at machine precision
  }
  if (!fit.converged) {
    jacobian(b, data, jac, res);
    fit.gradient_norm = (jac.transpose() * res).lpNorm<Eigen::Infinity>();
    fit.converged = fit.gradient_norm <= options.gradient_tolerance;
  }

  // Near-singular normal matrix: slope and offset not separately identifiable.
  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(jtj);
  const double cond = eig.eigenvalues().maxCoeff() / std::max(eig.eigenvalues().minCoeff(), 1e-300);
  if (cond > 1e14) fit.degenerate = true;

  finish(b);
  if (!fit.converged && !fit.degenerate) {
    throw std::runtime_error("fit_logistic: optimizer did not reach the gradient tolerance");
  }
  return fit;
}

}  // namespace uavh
