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

// Log-barrier interior-point solver for smooth convex programs in
// maximization form:
//
//   maximize   f(x)                 (f concave)
//   s.t.       g_i(x) >= 0          (each -log g_i convex on {g_i > 0})
//              lower <= x <= upper
//              A x = b
//
// Concave g_i qualify, as does the second-order cone d^2 - |u|^2 together
// with a lower bound d >= 0. Each constraint only touches the variables in
// its `support` list and reports its value, gradient and Hessian in that
// local coordinate order, so sparse coupling (one rate constraint per
// sensor, one speed constraint per slot) stays cheap to evaluate.

#ifndef UAVH_SMOOTH_HPP_
#define UAVH_SMOOTH_HPP_

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "uavh/lp.hpp"

namespace uavh {

// Value, gradient and Hessian of a scalar function. `gradient` and `hessian`
// are requested only when the pointers are non-null.
using SmoothFunction =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* gradient,
                         Eigen::MatrixXd* hessian)>;

struct SmoothConstraint {
  std::string name;
  std::vector<int> support;
  SmoothFunction fn;  // evaluated on x restricted to `support`
};

struct SmoothConvexProgram {
  int num_vars = 0;
  SmoothFunction objective;  // over all variables
  std::vector<SmoothConstraint> constraints;
  Eigen::VectorXd lower;  // may hold -inf
  Eigen::VectorXd upper;  // may hold +inf
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;

  // A feasible point (for SCA subproblems, the expansion point). The solver
  // never returns anything worse than this.
  Eigen::VectorXd start;
  // A strictly feasible point for the barrier; defaults to `start` when empty.
  Eigen::VectorXd interior;

  // Free-form description carried into debug dumps (expansion point, etc.).
  std::vector<std::pair<std::string, double>> metadata;

  // Linear objective c^T x.
  void set_linear_objective(const Eigen::VectorXd& c);
  void validate() const;
};

struct SmoothOptions {
  double feas_tol = 1e-7;
  double kkt_tol = 1e-5;
  int iteration_cap = 500;  // total Newton steps
  // The barrier method stops once the duality gap m / t of the central
  // path falls below this.
  double gap_tol = 1e-6;
  // First barrier weight; <= 0 picks it from the barrier gradient at the
  // interior point.
  double t_initial = 0.0;
  double t_growth = 10.0;
};

// Evaluates constraint i at the full vector x.
double constraint_value(const SmoothConvexProgram& prog, std::size_t i,
                        const Eigen::VectorXd& x);
// Largest violation of any constraint, bound or equality at x.
double smooth_max_violation(const SmoothConvexProgram& prog, const Eigen::VectorXd& x);

SolveReport solve_smooth(const SmoothConvexProgram& prog, const SmoothOptions& options = {});

}  // namespace uavh

#endif  // UAVH_SMOOTH_HPP_
