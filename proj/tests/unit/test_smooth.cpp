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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "uavh/channel.hpp"
#include "uavh/smooth.hpp"

using namespace uavh;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// maximize -|x - c|^2.
SmoothFunction negative_distance(const Eigen::VectorXd& c) {
  return [c](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    if (g) *g = -2.0 * (x - c);
    if (h) *h = -2.0 * Eigen::MatrixXd::Identity(x.size(), x.size());
    return -(x - c).squaredNorm();
  };
}

// r^2 - |x - center|^2 >= 0 on a two-variable support.
SmoothConstraint disc(const std::string& name, std::vector<int> support, Eigen::Vector2d center,
                      double radius) {
  return {name, std::move(support),
          [center, radius](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
            if (g) *g = -2.0 * (x - center);
            if (h) *h = -2.0 * Eigen::MatrixXd::Identity(2, 2);
            return radius * radius - (x - center).squaredNorm();
          }};
}

SmoothConvexProgram box_program(const Eigen::VectorXd& c, const Eigen::VectorXd& start) {
  SmoothConvexProgram prog;
  prog.num_vars = static_cast<int>(c.size());
  prog.objective = negative_distance(c);
  prog.lower = Eigen::VectorXd::Constant(c.size(), -2.0);
  prog.upper = Eigen::VectorXd::Constant(c.size(), 3.0);
  prog.start = start;
  return prog;
}

}  // namespace

TEST_CASE("nearest point in a box containing the target") {
  Eigen::VectorXd c(3);
  c << 0.5, -1.0, 2.5;
  const SmoothConvexProgram prog = box_program(c, Eigen::VectorXd::Zero(3));
  const SolveReport r = solve_smooth(prog);
  REQUIRE(r.optimal());
  for (int i = 0; i < 3; ++i) CHECK(r.x[i] == doctest::Approx(c[i]).epsilon(1e-5).scale(1.0));
  CHECK(r.kkt_residual <= 1e-5);
  CHECK(r.max_violation <= 1e-7);
}

TEST_CASE("optimal start returns immediately with an unchanged objective") {
  Eigen::VectorXd c(2);
  c << 1.0, 1.0;
  const SmoothConvexProgram prog = box_program(c, c);
  const SolveReport r = solve_smooth(prog);
  REQUIRE(r.optimal());
  CHECK(r.iterations <= 2);
  CHECK(r.objective == 0.0);
  CHECK(r.x[0] == 1.0);
  CHECK(r.x[1] == 1.0);
}

TEST_CASE("target outside a disc: projection, monotone central path, cap safety") {
  SmoothConvexProgram prog;
  prog.num_vars = 2;
  Eigen::VectorXd c(2);
  c << 4.0, 3.0;
  prog.objective = negative_distance(c);
  prog.constraints.push_back(disc("disc", {0, 1}, Eigen::Vector2d::Zero(), 1.0));
  prog.lower = Eigen::VectorXd::Constant(2, -kInf);
  prog.upper = Eigen::VectorXd::Constant(2, kInf);
  prog.start = Eigen::VectorXd::Zero(2);

  const SolveReport r = solve_smooth(prog);
  REQUIRE(r.optimal());
  CHECK(r.x[0] == doctest::Approx(0.8).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(0.6).epsilon(1e-5));
  CHECK(r.objective == doctest::Approx(-16.0).epsilon(1e-6));
  REQUIRE(r.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
    CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-12);
  }

  SmoothOptions capped;
  capped.iteration_cap = 1;
  const SolveReport rc = solve_smooth(prog, capped);
  CHECK(rc.status == SolveStatus::kIterationCap);
  CHECK(smooth_max_violation(prog, Eigen::Map<const Eigen::VectorXd>(rc.x.data(), 2)) <= 1e-7);
  CHECK(rc.objective >= prog.objective(prog.start, nullptr, nullptr));

  // Deterministic.
  const SolveReport again = solve_smooth(prog);
  CHECK(again.x == r.x);
}

TEST_CASE("equality-constrained quadratic") {
  // maximize -|x - (1, 2, 3)|^2 s.t. x0 + x1 + x2 = 3 -> x = (0, 1, 2).
  SmoothConvexProgram prog;
  prog.num_vars = 3;
  Eigen::VectorXd c(3);
  c << 1.0, 2.0, 3.0;
  prog.objective = negative_distance(c);
  prog.lower = Eigen::VectorXd::Constant(3, -5.0);
  prog.upper = Eigen::VectorXd::Constant(3, 5.0);
  prog.a_eq = Eigen::MatrixXd::Ones(1, 3);
  prog.b_eq = Eigen::VectorXd::Constant(1, 3.0);
  prog.start = Eigen::VectorXd::Constant(3, 1.0);
  const SolveReport r = solve_smooth(prog);
  REQUIRE(r.optimal());
  CHECK(r.x[0] == doctest::Approx(0.0).epsilon(1e-5).scale(1.0));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[2] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("malformed programs are rejected") {
  SmoothConvexProgram prog = box_program(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3));
  CHECK_THROWS_AS(solve_smooth(prog), std::invalid_argument);
}

TEST_CASE("single-slot horizontal surrogate over a speed disc moves toward the sensor") {
  const ChannelParams p = ChannelParams::urban(1);
  const double snr = p.snr_ref(0), z = 50.0, reach = 8.0;
  const Vec2 q_hat{0.0, 0.0}, w{20.0, 5.0};
  const SurrogateCoeffs sc = horizontal_surrogate(q_hat, z, w, snr, p);
  const double kappa = p.logistic.b2 * kRadToDeg * sc.lambda_hat;

  // Surrogate value with hand-derived derivatives in the horizontal distance
  // d = |q - w|: the LoS term is -omega exp(-phi(d)) with phi' = -kappa, the
  // path-loss term is -psi d^2.
  SmoothConvexProgram prog;
  prog.num_vars = 2;
  prog.objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    const Vec2 q{x[0], x[1]};
    const Eigen::Vector2d diff(x[0] - w.x, x[1] - w.y);
    const double d = diff.norm();
    const double phi = p.logistic.b1 + p.logistic.b2 * kRadToDeg * surrogate_angle(sc, d);
    const double e = sc.omega_hat * std::exp(-phi);
    const Eigen::Vector2d u = diff / d;
    if (g) *g = -e * kappa * u - 2.0 * sc.psi_hat * diff;
    if (h) {
      const Eigen::Matrix2d uu = u * u.transpose();
      *h = -e * kappa * kappa * uu - (e * kappa / d) * (Eigen::Matrix2d::Identity() - uu) -
           2.0 * sc.psi_hat * Eigen::Matrix2d::Identity();
    }
    return horizontal_surrogate_value(sc, p.logistic, q, w);
  };
  prog.constraints.push_back(disc("speed", {0, 1}, Eigen::Vector2d::Zero(), reach));
  prog.lower = Eigen::VectorXd::Constant(2, -kInf);
  prog.upper = Eigen::VectorXd::Constant(2, kInf);
  prog.start = Eigen::VectorXd::Zero(2);
  const SolveReport r = solve_smooth(prog);
  REQUIRE(r.optimal());

  // Coarse-to-fine grid search over the disc down to 1e-3 m.
  auto value = [&](double x, double y) {
    return x * x + y * y <= reach * reach ? horizontal_surrogate_value(sc, p.logistic, {x, y}, w)
                                          : -kInf;
  };
  double bx = 0.0, by = 0.0, best = value(0.0, 0.0);
  for (double step : {0.1, 0.01, 0.001}) {
    const double cx = bx, cy = by, span = step == 0.1 ? reach : 20.0 * step;
    for (double x = cx - span; x <= cx + span; x += step) {
      for (double y = cy - span; y <= cy + span; y += step) {
        const double v = value(x, y);
        if (v > best) best = v, bx = x, by = y;
      }
    }
  }
  CHECK(r.objective >= best - 1e-6);
  CHECK(std::hypot(r.x[0] - bx, r.x[1] - by) <= 5e-3);
  // The optimum uses the full reach straight toward the sensor.
  const double dir = std::hypot(w.x, w.y);
  CHECK(r.x[0] == doctest::Approx(reach * w.x / dir).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(reach * w.y / dir).epsilon(1e-4));
  CHECK(distance({r.x[0], r.x[1]}, w) < distance(q_hat, w));
}
