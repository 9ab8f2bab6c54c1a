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

#ifndef UAVH_LP_HPP_
#define UAVH_LP_HPP_

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

namespace uavh {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationCap };

std::string to_string(SolveStatus s);

// Shared result contract of the LP and smooth solvers.
struct SolveReport {
  SolveStatus status = SolveStatus::kIterationCap;
  double objective = 0.0;
  std::vector<double> x;
  double max_violation = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;

  // LP only: dual objective and multipliers of the inequality rows followed
  // by the equality rows, in the sign convention of the original sense.
  double dual_objective = 0.0;
  std::vector<double> duals;

  // Smooth solver only: objective at each central point of the barrier path.
  std::vector<double> objective_trace;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

//   optimize  c^T x
//   s.t.      A_ineq x <= b_ineq
//             A_eq   x  = b_eq
//             lower <= x <= upper     (entries may be infinite)
struct LinearProgram {
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  bool maximize = true;
  Eigen::VectorXd objective;
  Eigen::MatrixXd a_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // n variables in [0, inf), no rows.
  static LinearProgram with_variables(Eigen::Index n, bool maximize = true);
  Eigen::Index num_vars() const { return objective.size(); }
  void validate() const;
};

struct LpOptions {
  double feas_tol = 1e-7;
  int max_iterations = 50000;
  // Consecutive degenerate pivots after which pricing switches from
  // Dantzig's rule to Bland's rule.
  int degenerate_switch = 50;
};

// Two-phase revised simplex on a dense basis inverse. Deterministic: pricing
// and ratio-test ties always resolve to the lowest index.
SolveReport solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace uavh

#endif  // UAVH_LP_HPP_
