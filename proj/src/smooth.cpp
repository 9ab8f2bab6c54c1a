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

#include "uavh/smooth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavh {

void SmoothConvexProgram::set_linear_objective(const Eigen::VectorXd& c) {
  objective = [c](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    if (g != nullptr) *g = c;
    if (h != nullptr) h->setZero(c.size(), c.size());
    return c.dot(x);
  };
}

void SmoothConvexProgram::validate() const {
  const Eigen::Index n = num_vars;
  if (!objective) throw std::invalid_argument("SmoothConvexProgram: missing objective");
  if (lower.size() != n || upper.size() != n || start.size() != n) {
    throw std::invalid_argument("SmoothConvexProgram: bound/start dimension mismatch");
  }
  if (interior.size() != 0 && interior.size() != n) {
    throw std::invalid_argument("SmoothConvexProgram: interior dimension mismatch");
  }
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n)) {
    throw std::invalid_argument("SmoothConvexProgram: equality dimension mismatch");
  }
  for (const auto& c : constraints) {
    if (!c.fn) throw std::invalid_argument("SmoothConvexProgram: constraint without callback");
    for (int j : c.support) {
      if (j < 0 || j >= num_vars) {
        throw std::invalid_argument("SmoothConvexProgram: support index out of range");
      }
    }
  }
}

namespace {

// Centering stops once the dual residual is below kDualTolFactor * kkt_tol
// and every complementarity product is within relative kCentralityTol of
// 1/t. Tighter centering cannot be certified: the products lose relative
// precision to cancellation in the constraint values as t grows.
constexpr double kDualTolFactor = 1e-2;
constexpr double kCentralityTol = 0.1;
constexpr double kMinStep = 1e-10;

// Solves the symmetric positive semidefinite system H x = b after symmetric
// diagonal scaling, with two rounds of iterative refinement; the barrier
// curvature makes H badly scaled near the solution.
Eigen::VectorXd solve_equilibrated(const Eigen::MatrixXd& h, const Eigen::VectorXd& b) {
  const Eigen::VectorXd d =
      h.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd scaled = d.asDiagonal() * h * d.asDiagonal();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled + 1e-13 * Eigen::MatrixXd::Identity(h.rows(), h.cols()));
  const Eigen::VectorXd sb = d.cwiseProduct(b);
  Eigen::VectorXd y = ldlt.solve(sb);
  for (int round = 0; round < 2; ++round) y += ldlt.solve(sb - scaled * y);
  return d.cwiseProduct(y);
}

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& support) {
  Eigen::VectorXd local(static_cast<Eigen::Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) local[i] = x[support[i]];
  return local;
}

// Inequalities in the standard form F_i(x) < 0: every general constraint
// (F = -g) followed by the finite variable bounds.
class Inequalities {
 public:
  explicit Inequalities(const SmoothConvexProgram& prog) : prog_(prog) {
    for (int j = 0; j < prog.num_vars; ++j) {
      if (std::isfinite(prog.lower[j])) bounds_.push_back({j, -1.0, prog.lower[j]});
      if (std::isfinite(prog.upper[j])) bounds_.push_back({j, 1.0, prog.upper[j]});
    }
  }

  int size() const { return static_cast<int>(prog_.constraints.size() + bounds_.size()); }

  // Values of all F_i; false if some F_i is not strictly negative.
  bool values(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    f.resize(size());
    Eigen::Index i = 0;
    for (const auto& c : prog_.constraints) {
      const double g = c.fn(gather(x, c.support), nullptr, nullptr);
      if (!(g > 0.0) || !std::isfinite(g)) return false;
      f[i++] = -g;
    }
    for (const auto& b : bounds_) {
      const double v = b.sign * (x[b.var] - b.bound);
      if (!(v < 0.0)) return false;
      f[i++] = v;
    }
    return true;
  }

  // Dual residual grad f0 + sum lambda_i grad F_i (before the equality
  // term) for the minimization objective f0 = -f. With `hess` non-null, also
  // the Hessian of the Lagrangian plus the primal-dual barrier curvature
  // sum (lambda_i / -F_i) grad F_i grad F_i^T, and `cent_rhs` receives
  // -sum grad F_i * r_cent_i / F_i.
  void dual_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& f,
                     const Eigen::VectorXd& lambda, double t, Eigen::VectorXd& r_dual,
                     Eigen::MatrixXd* hess, Eigen::VectorXd* cent_rhs) const {
    Eigen::VectorXd fg;
    Eigen::MatrixXd fh;
    prog_.objective(x, &fg, hess != nullptr ? &fh : nullptr);
    r_dual = -fg;
    if (hess != nullptr) {
      *hess = -fh;
      cent_rhs->setZero(x.size());
    }
    Eigen::VectorXd lg;
    Eigen::MatrixXd lh;
    Eigen::Index i = 0;
    for (const auto& c : prog_.constraints) {
      c.fn(gather(x, c.support), &lg, hess != nullptr ? &lh : nullptr);
      const auto m = c.support.size();
      const double lam = lambda[i];
      const double fi = f[i];
      for (std::size_t a = 0; a < m; ++a) r_dual[c.support[a]] -= lam * lg[a];
      if (hess != nullptr) {
        const double w = lam / -fi;
        const double rc = -lam * fi - 1.0 / t;
        for (std::size_t a = 0; a < m; ++a) {
          (*cent_rhs)[c.support[a]] -= -lg[a] * rc / fi;
          for (std::size_t b = 0; b < m; ++b) {
            (*hess)(c.support[a], c.support[b]) += -lam * lh(a, b) + w * lg[a] * lg[b];
          }
        }
      }
      ++i;
    }
    for (const auto& b : bounds_) {
      const double lam = lambda[i];
      const double fi = f[i];
      r_dual[b.var] += lam * b.sign;
      if (hess != nullptr) {
        const double rc = -lam * fi - 1.0 / t;
        (*cent_rhs)[b.var] -= b.sign * rc / fi;
        (*hess)(b.var, b.var) += lam / -fi;
      }
      ++i;
    }
  }

  // grad F_i^T dx for every inequality.
  Eigen::VectorXd directional(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) const {
    Eigen::VectorXd out(size());
    Eigen::Index i = 0;
    Eigen::VectorXd lg;
    for (const auto& c : prog_.constraints) {
      c.fn(gather(x, c.support), &lg, nullptr);
      double v = 0.0;
      for (std::size_t a = 0; a < c.support.size(); ++a) v -= lg[a] * dx[c.support[a]];
      out[i++] = v;
    }
    for (const auto& b : bounds_) out[i++] = b.sign * dx[b.var];
    return out;
  }

 private:
  struct Bound {
    int var;
    double sign;
    double bound;
  };
  const SmoothConvexProgram& prog_;
  std::vector<Bound> bounds_;
};

// KKT residual at a feasible point from a sign-constrained least-squares fit
// of multipliers over the active set. A small value certifies optimality.
double kkt_at_feasible_point(const SmoothConvexProgram& prog, const Eigen::VectorXd& x,
                             double active_tol) {
  const int n = prog.num_vars;
  Eigen::VectorXd fg;
  prog.objective(x, &fg, nullptr);
  std::vector<Eigen::VectorXd> columns;  // gradients of active constraints
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(prog.lower[j]) && x[j] - prog.lower[j] <= active_tol) {
      columns.push_back(Eigen::VectorXd::Unit(n, j));
    }
    if (std::isfinite(prog.upper[j]) && prog.upper[j] - x[j] <= active_tol) {
      columns.push_back(-Eigen::VectorXd::Unit(n, j));
    }
  }
  Eigen::VectorXd lg;
  for (const auto& c : prog.constraints) {
    const double g = c.fn(gather(x, c.support), &lg, nullptr);
    if (g <= active_tol) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
      for (std::size_t a = 0; a < c.support.size(); ++a) col[c.support[a]] += lg[a];
      columns.push_back(col);
    }
  }
  const auto n_ineq = static_cast<Eigen::Index>(columns.size());
  const Eigen::Index n_eq = prog.a_eq.rows();
  std::vector<bool> kept(n_ineq, true);
  // grad f + G lambda + A^T nu = 0 with lambda >= 0: drop the most negative
  // multiplier and refit until all remaining ones are non-negative.
  for (Eigen::Index round = 0; round <= n_ineq; ++round) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n_ineq; ++i) {
      if (kept[i]) idx.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd m(n, k + n_eq);
    for (Eigen::Index i = 0; i < k; ++i) m.col(i) = columns[idx[i]];
    if (n_eq > 0) m.rightCols(n_eq) = prog.a_eq.transpose();
    Eigen::VectorXd mult = Eigen::VectorXd::Zero(k + n_eq);
    if (k + n_eq > 0) mult = m.colPivHouseholderQr().solve(-fg);
    Eigen::Index worst = -1;
    double worst_val = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (mult[i] < worst_val) {
        worst_val = mult[i];
        worst = i;
      }
    }
    if (worst < 0) {
      const Eigen::VectorXd r = fg + (k + n_eq > 0 ? Eigen::VectorXd(m * mult)
                                                    : Eigen::VectorXd::Zero(n));
      return r.lpNorm<Eigen::Infinity>();
    }
    kept[idx[worst]] = false;
  }
  return fg.lpNorm<Eigen::Infinity>();
}

}  // namespace

double constraint_value(const SmoothConvexProgram& prog, std::size_t i,
                        const Eigen::VectorXd& x) {
  const auto& c = prog.constraints.at(i);
  return c.fn(gather(x, c.support), nullptr, nullptr);
}

double smooth_max_violation(const SmoothConvexProgram& prog, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (int j = 0; j < prog.num_vars; ++j) {
    v = std::max({v, prog.lower[j] - x[j], x[j] - prog.upper[j]});
  }
  for (std::size_t i = 0; i < prog.constraints.size(); ++i) {
    const double g = constraint_value(prog, i, x);
    v = std::max(v, std::isfinite(g) ? -g : std::numeric_limits<double>::infinity());
  }
  if (prog.a_eq.rows() > 0) {
    v = std::max(v, (prog.a_eq * x - prog.b_eq).lpNorm<Eigen::Infinity>());
  }
  return v;
}

SolveReport solve_smooth(const SmoothConvexProgram& prog, const SmoothOptions& options) {
  const auto clock_start = std::chrono::steady_clock::now();
  prog.validate();
  SolveReport report;
  auto finish = [&](const Eigen::VectorXd& x, SolveStatus status, double kkt) {
    report.status = status;
    report.x.assign(x.data(), x.data() + x.size());
    report.objective = prog.objective(x, nullptr, nullptr);
    report.max_violation = smooth_max_violation(prog, x);
    report.kkt_residual = kkt;
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return report;
  };

  const Eigen::VectorXd& start = prog.start;
  const bool start_feasible = smooth_max_violation(prog, start) <= options.feas_tol;
  const double f_start = prog.objective(start, nullptr, nullptr);
  if (start_feasible) {
    const double kkt = kkt_at_feasible_point(prog, start, options.feas_tol);
    if (kkt <= options.kkt_tol) return finish(start, SolveStatus::kOptimal, kkt);
  }

  // Barrier method on the minimization form f0 = -f: for an increasing
  // sequence of t, the central point minimizing t f0 - sum log(-F_i) is
  // located by primal-dual Newton steps on the perturbed KKT system
  //   grad f0 + sum lambda_i grad F_i + A^T nu = 0,  -lambda_i F_i = 1/t.
  // The multipliers decouple the barrier curvature from the primal step,
  // which follows curved constraint boundaries far better than primal
  // Newton on the barrier function itself.
  Inequalities ineq(prog);
  Eigen::VectorXd x = prog.interior.size() == prog.num_vars ? prog.interior : start;
  Eigen::VectorXd fv;
  if (!ineq.values(x, fv)) {
    x = start;
    if (!ineq.values(x, fv)) {
      return finish(start, start_feasible ? SolveStatus::kIterationCap : SolveStatus::kInfeasible,
                    std::numeric_limits<double>::infinity());
    }
  }

  const int m = std::max(ineq.size(), 1);
  const int n = prog.num_vars;
  const Eigen::Index n_eq = prog.a_eq.rows();
  const Eigen::MatrixXd at = prog.a_eq.transpose();
  double t = options.t_initial;
  if (!(t > 0.0)) {
    // Pick the t whose central-path stationarity condition the barrier
    // gradient at the starting point fits best (least squares).
    Eigen::VectorXd grad_f0, grad_barrier;
    const Eigen::VectorXd unit = (-fv).cwiseInverse();
    ineq.dual_residual(x, fv, Eigen::VectorXd::Zero(ineq.size()), 1.0, grad_f0, nullptr, nullptr);
    ineq.dual_residual(x, fv, unit, 1.0, grad_barrier, nullptr, nullptr);
    grad_barrier -= grad_f0;
    const double denom = grad_f0.squaredNorm();
    t = denom > 0.0 ? -grad_f0.dot(grad_barrier) / denom : 1.0;
    t = std::clamp(t, 1.0, 1e6);
  }
  Eigen::VectorXd lambda = (-fv).cwiseInverse() / t;
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(n_eq);

  // Residual of the perturbed KKT system: dual, centrality, primal.
  auto residual = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& ff,
                      const Eigen::VectorXd& ll, const Eigen::VectorXd& vv, Eigen::VectorXd& rd,
                      Eigen::VectorXd& rc, Eigen::VectorXd& rp) {
    ineq.dual_residual(xx, ff, ll, t, rd, nullptr, nullptr);
    if (n_eq > 0) rd += at * vv;
    rc = (-ll.cwiseProduct(ff).array() - 1.0 / t).matrix();
    rp = n_eq > 0 ? Eigen::VectorXd(prog.a_eq * xx - prog.b_eq) : Eigen::VectorXd();
  };
  auto norm3 = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
    return std::sqrt(a.squaredNorm() + b.squaredNorm() + c.squaredNorm());
  };

  bool converged = false;
  bool capped = false;
  Eigen::VectorXd rd, rc, rp;
  Eigen::MatrixXd hess;
  Eigen::VectorXd cent_rhs;
  while (true) {
    // Centering at fixed t.
    while (true) {
      residual(x, fv, lambda, nu, rd, rc, rp);
      const double centrality = t * rc.lpNorm<Eigen::Infinity>();
      if (rd.lpNorm<Eigen::Infinity>() <= kDualTolFactor * options.kkt_tol &&
          centrality <= kCentralityTol &&
          (n_eq == 0 || rp.lpNorm<Eigen::Infinity>() <= options.feas_tol)) {
        break;
      }
      if (report.iterations >= options.iteration_cap) {
        capped = true;
        break;
      }
      ineq.dual_residual(x, fv, lambda, t, rd, &hess, &cent_rhs);
      if (n_eq > 0) rd += at * nu;
      const Eigen::VectorXd rhs = -rd + cent_rhs;
      Eigen::VectorXd dx;
      Eigen::VectorXd dnu = Eigen::VectorXd::Zero(n_eq);
      if (n_eq == 0) {
        dx = solve_equilibrated(hess, rhs);
      } else {
        Eigen::MatrixXd kkt_mat = Eigen::MatrixXd::Zero(n + n_eq, n + n_eq);
        kkt_mat.topLeftCorner(n, n) = hess;
        kkt_mat.topRightCorner(n, n_eq) = at;
        kkt_mat.bottomLeftCorner(n_eq, n) = prog.a_eq;
        Eigen::VectorXd full(n + n_eq);
        full.head(n) = rhs;
        full.tail(n_eq) = -rp;
        const Eigen::VectorXd sol = kkt_mat.partialPivLu().solve(full);
        dx = sol.head(n);
        dnu = sol.tail(n_eq);
      }
      ++report.iterations;
      if (!dx.allFinite()) break;
      const Eigen::VectorXd dfx = ineq.directional(x, dx);
      Eigen::VectorXd dlambda(ineq.size());
      for (int i = 0; i < ineq.size(); ++i) {
        dlambda[i] = (rc[i] - lambda[i] * dfx[i]) / fv[i];
      }

      // Largest step keeping lambda positive, then backtrack until the
      // iterate is strictly feasible and the residual decreases.
      double s = 1.0;
      for (Eigen::Index i = 0; i < dlambda.size(); ++i) {
        if (dlambda[i] < 0.0) s = std::min(s, -0.99 * lambda[i] / dlambda[i]);
      }
      const double r0 = norm3(rd, rc, rp);
      Eigen::VectorXd trial_x, trial_f, trd, trc, trp;
      bool accepted = false;
      for (; s > kMinStep; s *= 0.5) {
        trial_x = x + s * dx;
        if (!ineq.values(trial_x, trial_f)) continue;
        residual(trial_x, trial_f, lambda + s * dlambda, nu + s * dnu, trd, trc, trp);
        if (norm3(trd, trc, trp) <= (1.0 - 0.01 * s) * r0) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;  // no further progress at machine precision
      x = trial_x;
      fv = trial_f;
      lambda += s * dlambda;
      nu += s * dnu;
    }
    report.objective_trace.push_back(prog.objective(x, nullptr, nullptr));
    if (capped) break;
    if (m / t <= options.gap_tol) {
      converged = true;
      break;
    }
    t *= options.t_growth;
  }

  residual(x, fv, lambda, nu, rd, rc, rp);
  const double kkt = std::max(rd.lpNorm<Eigen::Infinity>(), -fv.dot(lambda));
  const bool optimal = converged && kkt <= options.kkt_tol;
  const SolveStatus status = optimal ? SolveStatus::kOptimal : SolveStatus::kIterationCap;
  // The final point sits within the duality gap of the optimum; if the
  // feasible start is better still, it is at least as close.
  if (start_feasible && prog.objective(x, nullptr, nullptr) < f_start) {
    return finish(start, status, kkt);
  }
  return finish(x, status, kkt);
}

}  // namespace uavh
