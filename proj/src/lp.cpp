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

#include "uavh/lp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace uavh {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationCap: return "iteration-cap";
  }
  return "unknown";
}

LinearProgram LinearProgram::with_variables(Eigen::Index n, bool maximize) {
  LinearProgram lp;
  lp.maximize = maximize;
  lp.objective = Eigen::VectorXd::Zero(n);
  lp.a_ineq.resize(0, n);
  lp.b_ineq.resize(0);
  lp.a_eq.resize(0, n);
  lp.b_eq.resize(0);
  lp.lower = Eigen::VectorXd::Zero(n);
  lp.upper = Eigen::VectorXd::Constant(n, kInf);
  return lp;
}

void LinearProgram::validate() const {
  const Eigen::Index n = num_vars();
  if (a_ineq.cols() != n || a_eq.cols() != n || lower.size() != n || upper.size() != n ||
      a_ineq.rows() != b_ineq.size() || a_eq.rows() != b_eq.size()) {
    throw std::invalid_argument("LinearProgram: inconsistent dimensions");
  }
  if (!objective.allFinite() || !a_ineq.allFinite() || !b_ineq.allFinite() ||
      !a_eq.allFinite() || !b_eq.allFinite()) {
    throw std::invalid_argument("LinearProgram: non-finite coefficient");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
        lower[j] == kInf || upper[j] == -kInf) {
      throw std::invalid_argument("LinearProgram: invalid variable bounds");
    }
  }
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr int kRefactorEvery = 100;

// x_orig[j] = offset[j] + sum over terms of coef * x_std[col].
struct VarMap {
  double offset = 0.0;
  int col_pos = -1;  // +1 coefficient column
  int col_neg = -1;  // -1 coefficient column
};

struct StandardForm {
  Eigen::MatrixXd a;  // m x total columns (structural, slack, artificial)
  Eigen::VectorXd b;
  Eigen::VectorXd cost;  // minimization costs over all columns
  double cost_offset = 0.0;
  std::vector<double> row_sign;  // +1, or -1 when the row was negated
  std::vector<VarMap> vars;
  int n_struct = 0;
  int first_artificial = 0;
  std::vector<int> initial_basis;
};

StandardForm build_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  const Eigen::Index n = lp.num_vars();
  const double sense = lp.maximize ? -1.0 : 1.0;

  std::vector<std::pair<int, double>> bound_rows;  // (std column, capacity)
  sf.vars.resize(n);
  int col = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    VarMap& v = sf.vars[j];
    const double lo = lp.lower[j];
    const double up = lp.upper[j];
    if (std::isfinite(lo) && lo == up) {
      v.offset = lo;
    } else if (std::isfinite(lo)) {
      v.offset = lo;
      v.col_pos = col++;
      if (std::isfinite(up)) bound_rows.emplace_back(v.col_pos, up - lo);
    } else if (std::isfinite(up)) {
      v.offset = up;
      v.col_neg = col++;
    } else {
      v.col_pos = col++;
      v.col_neg = col++;
    }
  }
  sf.n_struct = col;

  const Eigen::Index m_ineq = lp.a_ineq.rows();
  const Eigen::Index m_eq = lp.a_eq.rows();
  const Eigen::Index m_bound = static_cast<Eigen::Index>(bound_rows.size());
  const Eigen::Index m = m_ineq + m_eq + m_bound;
  const Eigen::Index n_slack = m_ineq + m_bound;

  // Rows before artificials: structural then slack columns.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, sf.n_struct + n_slack);
  Eigen::VectorXd b(m);
  auto put_row = [&](Eigen::Index r, const Eigen::RowVectorXd& coeffs, double rhs) {
    double shifted = rhs;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double aij = coeffs[j];
      if (aij == 0.0) continue;
      const VarMap& v = sf.vars[j];
      shifted -= aij * v.offset;
      if (v.col_pos >= 0) a(r, v.col_pos) += aij;
      if (v.col_neg >= 0) a(r, v.col_neg) -= aij;
    }
    b[r] = shifted;
  };
  for (Eigen::Index i = 0; i < m_ineq; ++i) {
    put_row(i, lp.a_ineq.row(i), lp.b_ineq[i]);
    a(i, sf.n_struct + i) = 1.0;
  }
  for (Eigen::Index i = 0; i < m_eq; ++i) put_row(m_ineq + i, lp.a_eq.row(i), lp.b_eq[i]);
  for (Eigen::Index i = 0; i < m_bound; ++i) {
    const Eigen::Index r = m_ineq + m_eq + i;
    a(r, bound_rows[i].first) = 1.0;
    a(r, sf.n_struct + m_ineq + i) = 1.0;
    b[r] = bound_rows[i].second;
  }

  sf.row_sign.assign(m, 1.0);
  for (Eigen::Index r = 0; r < m; ++r) {
    if (b[r] < 0.0) {
      a.row(r) *= -1.0;
      b[r] = -b[r];
      sf.row_sign[r] = -1.0;
    }
  }

  // Basis: a slack with +1 where available, an artificial otherwise.
  std::vector<int> basis(m, -1);
  std::vector<Eigen::Index> needs_art;
  for (Eigen::Index r = 0; r < m; ++r) {
    Eigen::Index slack = -1;
    if (r < m_ineq) slack = sf.n_struct + r;
    if (r >= m_ineq + m_eq) slack = sf.n_struct + m_ineq + (r - m_ineq - m_eq);
    if (slack >= 0 && a(r, slack) > 0.0) {
      basis[r] = static_cast<int>(slack);
    } else {
      needs_art.push_back(r);
    }
  }
  sf.first_artificial = static_cast<int>(sf.n_struct + n_slack);
  const Eigen::Index total = sf.first_artificial + static_cast<Eigen::Index>(needs_art.size());
  sf.a = Eigen::MatrixXd::Zero(m, total);
  sf.a.leftCols(sf.first_artificial) = a;
  for (std::size_t k = 0; k < needs_art.size(); ++k) {
    sf.a(needs_art[k], sf.first_artificial + static_cast<Eigen::Index>(k)) = 1.0;
    basis[needs_art[k]] = sf.first_artificial + static_cast<int>(k);
  }
  sf.b = b;
  sf.initial_basis = basis;

  sf.cost = Eigen::VectorXd::Zero(total);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double cj = sense * lp.objective[j];
    const VarMap& v = sf.vars[j];
    sf.cost_offset += cj * v.offset;
    if (v.col_pos >= 0) sf.cost[v.col_pos] += cj;
    if (v.col_neg >= 0) sf.cost[v.col_neg] -= cj;
  }
  return sf;
}

enum class PhaseResult { kOptimal, kUnbounded, kIterationCap };

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardForm& sf, const LpOptions& opt)
      : sf_(sf), opt_(opt), m_(sf.a.rows()), basis_(sf.initial_basis) {
    position_.assign(sf.a.cols(), -1);
    for (Eigen::Index r = 0; r < m_; ++r) position_[basis_[r]] = static_cast<int>(r);
    refactor();
  }

  PhaseResult run(const Eigen::VectorXd& cost) {
    bool bland = false;
    int degenerate_run = 0;
    while (true) {
      if (iterations_ >= opt_.max_iterations) return PhaseResult::kIterationCap;
      const Eigen::RowVectorXd y = dual_values(cost);
      const Eigen::VectorXd reduced = cost.transpose() - y * sf_.a;

      int entering = -1;
      double best = -kCostTol;
      for (int j = 0; j < sf_.first_artificial; ++j) {
        if (position_[j] >= 0) continue;
        if (reduced[j] < best) {
          entering = j;
          if (bland) break;
          best = reduced[j];
        }
      }
      if (entering < 0) return PhaseResult::kOptimal;

      const Eigen::VectorXd u = binv_ * sf_.a.col(entering);
      int leaving = -1;
      double ratio = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (u[i] <= kPivotTol) continue;
        const double r = std::max(x_basic_[i], 0.0) / u[i];
        if (leaving < 0 || r < ratio - 1e-12 * (1.0 + ratio)) {
          leaving = static_cast<int>(i);
          ratio = r;
        } else if (r <= ratio + 1e-12 * (1.0 + ratio)) {
          const bool prefer = bland ? basis_[i] < basis_[leaving] : u[i] > u[leaving];
          if (prefer) {
            leaving = static_cast<int>(i);
            ratio = std::min(ratio, r);
          }
        }
      }
      if (leaving < 0) return PhaseResult::kUnbounded;

      pivot(entering, leaving, u);
      if (ratio <= 1e-12) {
        if (++degenerate_run >= opt_.degenerate_switch) bland = true;
      } else {
        degenerate_run = 0;
      }
    }
  }

  // Pivots zero-valued artificials out of the basis where possible.
  void expel_artificials() {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[r] < sf_.first_artificial) continue;
      const Eigen::RowVectorXd row = binv_.row(r) * sf_.a;
      for (int j = 0; j < sf_.first_artificial; ++j) {
        if (position_[j] < 0 && std::abs(row[j]) > 1e-7) {
          const Eigen::VectorXd u = binv_ * sf_.a.col(j);
          pivot(j, static_cast<int>(r), u);
          break;
        }
      }
    }
  }

  Eigen::RowVectorXd dual_values(const Eigen::VectorXd& cost) const {
    Eigen::RowVectorXd cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) cb[r] = cost[basis_[r]];
    return cb * binv_;
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sf_.a.cols());
    for (Eigen::Index r = 0; r < m_; ++r) x[basis_[r]] = std::max(x_basic_[r], 0.0);
    return x;
  }

  int iterations() const { return iterations_; }

 private:
  void refactor() {
    if (m_ == 0) return;
    Eigen::MatrixXd basis_matrix(m_, m_);
    for (Eigen::Index r = 0; r < m_; ++r) basis_matrix.col(r) = sf_.a.col(basis_[r]);
    binv_ = basis_matrix.partialPivLu().inverse();
    x_basic_ = binv_ * sf_.b;
    since_refactor_ = 0;
  }

  void pivot(int entering, int leaving, const Eigen::VectorXd& u) {
    const double theta = std::max(x_basic_[leaving], 0.0) / u[leaving];
    x_basic_ -= theta * u;
    x_basic_[leaving] = theta;
    const Eigen::RowVectorXd pivot_row = binv_.row(leaving) / u[leaving];
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == leaving || u[i] == 0.0) continue;
      binv_.row(i) -= u[i] * pivot_row;
    }
    binv_.row(leaving) = pivot_row;
    position_[basis_[leaving]] = -1;
    basis_[leaving] = entering;
    position_[entering] = leaving;
    ++iterations_;
    if (++since_refactor_ >= kRefactorEvery) refactor();
  }

  const StandardForm& sf_;
  const LpOptions& opt_;
  Eigen::Index m_;
  std::vector<int> basis_;
  std::vector<int> position_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd x_basic_;
  int iterations_ = 0;
  int since_refactor_ = 0;
};

double max_violation(const LinearProgram& lp, const Eigen::VectorXd& x) {
  double v = 0.0;
  if (lp.a_ineq.rows() > 0) {
    v = std::max(v, (lp.a_ineq * x - lp.b_ineq).maxCoeff());
  }
  if (lp.a_eq.rows() > 0) {
    v = std::max(v, (lp.a_eq * x - lp.b_eq).cwiseAbs().maxCoeff());
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    v = std::max({v, lp.lower[j] - x[j], x[j] - lp.upper[j]});
  }
  return std::max(v, 0.0);
}

}  // namespace

SolveReport solve_lp(const LinearProgram& lp, const LpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  lp.validate();
  const StandardForm sf = build_standard_form(lp);
  RevisedSimplex simplex(sf, options);
  SolveReport report;

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  if (sf.first_artificial < sf.a.cols()) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(sf.a.cols());
    phase1.tail(sf.a.cols() - sf.first_artificial).setOnes();
    const PhaseResult r1 = simplex.run(phase1);
    const Eigen::VectorXd x1 = simplex.solution();
    const double infeas = x1.tail(sf.a.cols() - sf.first_artificial).sum();
    if (r1 == PhaseResult::kIterationCap) {
      report.status = SolveStatus::kIterationCap;
    } else if (infeas > options.feas_tol * std::max(1.0, sf.b.lpNorm<Eigen::Infinity>())) {
      report.status = SolveStatus::kInfeasible;
    }
    if (report.status == SolveStatus::kIterationCap && r1 == PhaseResult::kIterationCap) {
      report.iterations = simplex.iterations();
      report.wall_time_s = elapsed();
      return report;
    }
    if (report.status == SolveStatus::kInfeasible) {
      report.iterations = simplex.iterations();
      report.max_violation = infeas;
      report.wall_time_s = elapsed();
      return report;
    }
    simplex.expel_artificials();
  }

  const PhaseResult r2 = simplex.run(sf.cost);
  report.iterations = simplex.iterations();
  if (r2 == PhaseResult::kUnbounded) {
    report.status = SolveStatus::kUnbounded;
    report.wall_time_s = elapsed();
    return report;
  }
  report.status = r2 == PhaseResult::kOptimal ? SolveStatus::kOptimal : SolveStatus::kIterationCap;

  const Eigen::VectorXd xs = simplex.solution();
  Eigen::VectorXd x(lp.num_vars());
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j) {
    const VarMap& v = sf.vars[j];
    double val = v.offset;
    if (v.col_pos >= 0) val += xs[v.col_pos];
    if (v.col_neg >= 0) val -= xs[v.col_neg];
    x[j] = val;
  }
  report.x.assign(x.data(), x.data() + x.size());
  report.objective = lp.objective.dot(x);
  report.max_violation = max_violation(lp, x);

  // Dual certificate of the minimization-form problem.
  const double sense = lp.maximize ? -1.0 : 1.0;
  const Eigen::RowVectorXd y = simplex.dual_values(sf.cost);
  const double dual_min = y.dot(sf.b) + sf.cost_offset;
  report.dual_objective = sense * dual_min;
  const Eigen::VectorXd reduced =
      (sf.cost.transpose() - y * sf.a).transpose().head(sf.first_artificial);
  const double dual_infeas = std::max(0.0, -reduced.minCoeff());
  report.kkt_residual =
      std::max(std::abs(report.objective - report.dual_objective), dual_infeas);

  const Eigen::Index m_rows = lp.a_ineq.rows() + lp.a_eq.rows();
  report.duals.resize(m_rows);
  for (Eigen::Index r = 0; r < m_rows; ++r) report.duals[r] = sense * sf.row_sign[r] * y[r];

  report.wall_time_s = elapsed();
  return report;
}

}  // namespace uavh
