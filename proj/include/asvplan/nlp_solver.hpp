// Copyright 2026 The asvplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Augmented-Lagrangian solver for smooth problems of the form
//
//   minimize f(z)  subject to  c(z) = 0,  g(z) <= 0,  lo <= z <= hi.
//
// Equalities and one-sided inequalities are moved into the augmented
// Lagrangian (Powell-Hestenes-Rockafellar form for g); the box stays explicit
// and is handled by a projected limited-memory BFGS inner loop.
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "asvplan/errors.hpp"

namespace asvplan {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// What `minimize` needs from a problem. Jacobians are sparse, one row per
/// constraint.
template <typename P>
concept NlpProblem = requires(const P& p, const Vector& z, Vector& out,
                              SparseMatrix& jac) {
  { p.num_variables() } -> std::convertible_to<Eigen::Index>;
  { p.num_equalities() } -> std::convertible_to<Eigen::Index>;
  { p.num_inequalities() } -> std::convertible_to<Eigen::Index>;
  { p.lower_bounds() } -> std::convertible_to<const Vector&>;
  { p.upper_bounds() } -> std::convertible_to<const Vector&>;
  { p.objective(z, out) } -> std::convertible_to<double>;
  p.equalities(z, out, jac);
  p.inequalities(z, out, jac);
};

struct SolverConfig {
  int max_outer_iterations = 60;
  int max_inner_iterations = 3000;
  double constraint_tolerance = 1e-6;
  double optimality_tolerance = 1e-5;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e8;
  int memory = 10;

  bool operator==(const SolverConfig&) const = default;

  void validate() const {
    if (!(constraint_tolerance > 0.0) || !(optimality_tolerance > 0.0) ||
        !(penalty_growth > 1.0) || !(initial_penalty > 0.0) ||
        !(max_penalty >= initial_penalty) || max_outer_iterations < 1 ||
        max_inner_iterations < 1 || memory < 1) {
      throw PlanningError(ErrorKind::kInvalidInput,
                          "solver configuration out of range");
    }
  }
};

enum class SolveStatus { kConverged, kMaxIterations, kDiverged };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "Converged";
    case SolveStatus::kMaxIterations: return "MaxIterations";
    case SolveStatus::kDiverged: return "Diverged";
  }
  return "Unknown";
}

struct OuterRecord {
  double violation;
  double penalty;
  double projected_gradient;
  int inner_iterations;
};

struct Solution {
  Vector z;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double max_constraint_violation = std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::kMaxIterations;
  std::vector<OuterRecord> history;
};

namespace detail {

inline Vector project(const Vector& z, const Vector& lo, const Vector& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

inline double projected_gradient_norm(const Vector& z, const Vector& grad,
                                      const Vector& lo, const Vector& hi) {
  if (z.size() == 0) return 0.0;
  return (project(z - grad, lo, hi) - z).lpNorm<Eigen::Infinity>();
}

template <NlpProblem P>
class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const P& problem, const Vector& eq_mult,
                      const Vector& ineq_mult, double penalty)
      : problem_(problem), eq_mult_(eq_mult), ineq_mult_(ineq_mult),
        penalty_(penalty) {}

  /// Gauss-Newton part of the augmented-Lagrangian Hessian at z:
  /// rho Jc^T Jc + rho Jg_A^T Jg_A over the active inequalities.
  SparseMatrix gauss_newton(const Vector& z) const {
    const Eigen::Index n = z.size();
    SparseMatrix h(n, n);
    if (eq_mult_.size() > 0) {
      problem_.equalities(z, c_, jc_);
      h += penalty_ * SparseMatrix(jc_.transpose() * jc_);
    }
    if (ineq_mult_.size() > 0) {
      problem_.inequalities(z, g_, jg_);
      Eigen::VectorXd active(g_.size());
      for (Eigen::Index i = 0; i < g_.size(); ++i) {
        active[i] = ineq_mult_[i] + penalty_ * g_[i] > 0.0 ? 1.0 : 0.0;
      }
      h += penalty_ * SparseMatrix(jg_.transpose() * active.asDiagonal() * jg_);
    }
    return h;
  }

  /// Value and gradient. Non-finite evaluations come back as +inf.
  double operator()(const Vector& z, Vector& grad) const {
    try {
      double value = problem_.objective(z, grad);
      if (eq_mult_.size() > 0) {
        problem_.equalities(z, c_, jc_);
        const Vector weight = eq_mult_ + penalty_ * c_;
        value += eq_mult_.dot(c_) + 0.5 * penalty_ * c_.squaredNorm();
        grad.noalias() += jc_.transpose() * weight;
      }
      if (ineq_mult_.size() > 0) {
        problem_.inequalities(z, g_, jg_);
        const Vector shifted = (ineq_mult_ + penalty_ * g_).cwiseMax(0.0);
        value += (shifted.squaredNorm() - ineq_mult_.squaredNorm()) /
                 (2.0 * penalty_);
        grad.noalias() += jg_.transpose() * shifted;
      }
      if (!std::isfinite(value) || !grad.allFinite()) {
        return std::numeric_limits<double>::infinity();
      }
      return value;
    } catch (const PlanningError& e) {
      if (e.kind() != ErrorKind::kNonFiniteEvaluation) throw;
      return std::numeric_limits<double>::infinity();
    }
  }

 private:
  const P& problem_;
  const Vector& eq_mult_;
  const Vector& ineq_mult_;
  double penalty_;
  mutable Vector c_, g_;
  mutable SparseMatrix jc_, jg_;
};

struct InnerResult {
  double value;
  double projected_gradient;
  int iterations;
  bool finite;
};

// Projected L-BFGS with backtracking on the projection arc. The two-loop
// recursion is seeded with (G + sigma I)^-1 on the free variables, where G is
// the Gauss-Newton curvature of the penalty terms and sigma tracks the
// remaining curvature seen along the latest step.
template <typename Fn>
InnerResult projected_lbfgs(const Fn& fn, Vector& z, const Vector& lo,
                            const Vector& hi, double tolerance, int max_iterations,
                            int memory) {
  const Eigen::Index n = z.size();
  Vector grad(n);
  double value = fn(z, grad);
  if (!std::isfinite(value)) return {value, std::numeric_limits<double>::infinity(), 0, false};

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vector grad_new(n);
  Vector direction(n);
  Vector free_mask(n);
  double sigma = 1.0;
  Eigen::SimplicialLDLT<SparseMatrix> factor;
  int it = 0;
  double pg = projected_gradient_norm(z, grad, lo, hi);
  for (; it < max_iterations && pg > tolerance; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool pinned = lo[i] == hi[i];
      const bool at_lo = z[i] <= lo[i] && grad[i] > 0.0;
      const bool at_hi = z[i] >= hi[i] && grad[i] < 0.0;
      free_mask[i] = (pinned || at_lo || at_hi) ? 0.0 : 1.0;
    }

    // Seed matrix restricted to the free variables; fixed ones decouple.
    const SparseMatrix gn = fn.gauss_newton(z);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(gn.nonZeros() + n));
    for (int col = 0; col < gn.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator e(gn, col); e; ++e) {
        if (free_mask[e.row()] > 0.0 && free_mask[e.col()] > 0.0) {
          triplets.emplace_back(e.row(), e.col(), e.value());
        }
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      triplets.emplace_back(i, i, free_mask[i] > 0.0 ? sigma : 1.0);
    }
    SparseMatrix seed(n, n);
    seed.setFromTriplets(triplets.begin(), triplets.end());
    factor.compute(seed);
    const bool seeded = factor.info() == Eigen::Success;
    auto apply_seed = [&](const Vector& v) -> Vector {
      if (seeded) return factor.solve(v).cwiseProduct(free_mask);
      return v / sigma;
    };

    // Two-loop recursion on the free subspace.
    Vector q = grad.cwiseProduct(free_mask);
    const std::size_t m = s_hist.size();
    std::vector<double> alpha(m);
    for (std::size_t k = m; k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].cwiseProduct(free_mask).dot(q);
      q -= alpha[k] * y_hist[k].cwiseProduct(free_mask);
    }
    q = apply_seed(q);
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * y_hist[k].cwiseProduct(free_mask).dot(q);
      q += (alpha[k] - beta) * s_hist[k].cwiseProduct(free_mask);
    }
    direction = -q.cwiseProduct(free_mask);

    bool steepest = false;
    if (!(direction.dot(grad) < 0.0) || !direction.allFinite()) {
      direction = -apply_seed(grad.cwiseProduct(free_mask));
      steepest = true;
    }

    bool accepted = false;
    Vector trial(n);
    double trial_value = value;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
        trial = project(z + step * direction, lo, hi);
        const double decrease = grad.dot(trial - z);
        if (!(decrease < 0.0)) continue;
        trial_value = fn(trial, grad_new);
        if (std::isfinite(trial_value) && trial_value <= value + 1e-4 * decrease) {
          accepted = true;
          break;
        }
      }
      if (!accepted && !steepest) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        const double gmax = grad.cwiseProduct(free_mask).lpNorm<Eigen::Infinity>();
        direction = -grad.cwiseProduct(free_mask) * (gmax > 0.0 ? 1.0 / gmax : 1.0);
        steepest = true;
      } else {
        break;
      }
    }
    if (!accepted) break;

    Vector s = trial - z;
    Vector y = grad_new - grad;
    const double ss = s.squaredNorm();
    const double sy = s.dot(y);
    if (ss > 0.0) {
      const double residual = (sy - s.dot(gn * s)) / ss;
      sigma = std::clamp(residual, 1e-6, 1e6);
    }
    if (sy > 1e-12 * std::sqrt(ss) * y.norm() && sy > 0.0) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    z = trial;
    value = trial_value;
    grad = grad_new;
    pg = projected_gradient_norm(z, grad, lo, hi);
  }
  return {value, pg, it, true};
}

template <NlpProblem P>
double max_violation(const P& problem, const Vector& z) {
  Vector c, g;
  SparseMatrix jc, jg;
  double violation = 0.0;
  if (problem.num_equalities() > 0) {
    problem.equalities(z, c, jc);
    violation = std::max(violation, c.template lpNorm<Eigen::Infinity>());
  }
  if (problem.num_inequalities() > 0) {
    problem.inequalities(z, g, jg);
    violation = std::max(violation, g.cwiseMax(0.0).maxCoeff());
  }
  return violation;
}

}  // namespace detail

/// Solves `problem` from `z0` (clipped into the box first). Deterministic:
/// identical inputs give an identical iterate sequence.
template <NlpProblem P>
Solution minimize(const P& problem, const Vector& z0, const SolverConfig& config) {
  config.validate();
  const Vector& lo = problem.lower_bounds();
  const Vector& hi = problem.upper_bounds();
  Solution result;
  result.z = detail::project(z0, lo, hi);

  Vector eq_mult = Vector::Zero(problem.num_equalities());
  Vector ineq_mult = Vector::Zero(problem.num_inequalities());
  double penalty = config.initial_penalty;
  double inner_tolerance = std::max(config.optimality_tolerance, 1e-2);

  double previous_violation;
  try {
    previous_violation = detail::max_violation(problem, result.z);
  } catch (const PlanningError& e) {
    if (e.kind() != ErrorKind::kNonFiniteEvaluation) throw;
    result.status = SolveStatus::kDiverged;
    return result;
  }

  for (int outer = 0; outer < config.max_outer_iterations; ++outer) {
    detail::AugmentedLagrangian<P> lagrangian(problem, eq_mult, ineq_mult, penalty);
    const auto inner = detail::projected_lbfgs(
        lagrangian, result.z, lo, hi, inner_tolerance,
        config.max_inner_iterations, config.memory);
    if (!inner.finite || !result.z.allFinite()) {
      result.status = SolveStatus::kDiverged;
      return result;
    }

    Vector c, g;
    SparseMatrix jc, jg;
    double violation = 0.0;
    if (problem.num_equalities() > 0) {
      problem.equalities(result.z, c, jc);
      violation = std::max(violation, c.template lpNorm<Eigen::Infinity>());
    }
    if (problem.num_inequalities() > 0) {
      problem.inequalities(result.z, g, jg);
      violation = std::max(violation, g.cwiseMax(0.0).maxCoeff());
    }
    result.history.push_back({violation, penalty, inner.projected_gradient, inner.iterations});
    result.max_constraint_violation = violation;

    if (violation <= config.constraint_tolerance &&
        inner.projected_gradient <= config.optimality_tolerance) {
      result.status = SolveStatus::kConverged;
      break;
    }

    if (c.size() > 0) eq_mult += penalty * c;
    if (g.size() > 0) ineq_mult = (ineq_mult + penalty * g).cwiseMax(0.0);
    if (violation > 0.25 * previous_violation && violation > config.constraint_tolerance) {
      penalty = std::min(penalty * config.penalty_growth, config.max_penalty);
    }
    previous_violation = violation;
    inner_tolerance = std::max(config.optimality_tolerance, 0.1 * inner_tolerance);
  }

  Vector grad(problem.num_variables());
  result.objective = problem.objective(result.z, grad);
  if (!std::isfinite(result.objective)) result.status = SolveStatus::kDiverged;
  return result;
}

}  // namespace asvplan
