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

// Trapezoidal direct collocation of one sub-trajectory.
//
// Decision vector layout, K nodes, 0-based node index k:
//
//   z = [ t | x_0 .. x_{K-1} | tau_0 .. tau_{K-1} ]
//   x_k = (x, y, psi, u, v, r),  tau_k = (tau_u, tau_r)
//
// Node k sits at time s_k = k h with h = t / (K - 1). Boundary pins are
// expressed as degenerate boxes (lower == upper) so the solver never sees
// them as equality rows. Equalities are the 6 (K - 1) trapezoid defects;
// inequalities are the acceleration bounds at every node.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "asvplan/dynamics.hpp"
#include "asvplan/errors.hpp"
#include "asvplan/nlp_solver.hpp"
#include "asvplan/world.hpp"

namespace asvplan {

enum class ObjectiveKind { kMinControlInput, kMinAcceleration };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kMinControlInput;
  double weight = 1.0;  // lambda on the running-time term
  bool operator==(const Objective&) const = default;
};

struct BoundSet {
  double t_max = 35.0;
  BodyVelocity vel_lo{-0.1, -1.0, -std::numbers::pi / 6.0};
  BodyVelocity vel_hi{1.7, 1.0, std::numbers::pi / 6.0};
  BodyAcceleration acc_lo{-1.0, -1.0, -0.5};
  BodyAcceleration acc_hi{1.0, 1.0, 0.5};
  ControlInput tau_lo{-30.0, -15.0};
  ControlInput tau_hi{60.0, 15.0};
  double psi_lo = -std::numbers::pi;
  double psi_hi = std::numbers::pi;

  bool operator==(const BoundSet&) const = default;

  void validate() const {
    const bool ok = t_max > 0.0 && vel_lo.u <= vel_hi.u && vel_lo.v <= vel_hi.v &&
                    vel_lo.r <= vel_hi.r && acc_lo.du <= acc_hi.du &&
                    acc_lo.dv <= acc_hi.dv && acc_lo.dr <= acc_hi.dr &&
                    tau_lo.tau_u <= tau_hi.tau_u && tau_lo.tau_r <= tau_hi.tau_r &&
                    psi_lo <= psi_hi;
    if (!ok) throw PlanningError(ErrorKind::kInvalidInput, "bound set has lo > hi or t_max <= 0");
  }
};

/// Pose, velocity and control pinned at a segment start.
struct BoundaryState {
  Pose pose;
  BodyVelocity vel;
  ControlInput tau;
  bool operator==(const BoundaryState&) const = default;
};

/// Only the end position is constrained.
struct WaypointEnd {
  Vec2 position;
};

/// End at `pose` with zero velocity and zero acceleration (hence zero control).
struct RestEnd {
  Pose pose;
};

using EndCondition = std::variant<WaypointEnd, RestEnd>;

struct SegmentProblem {
  BoundaryState start;
  EndCondition end;
  Corridor corridor;
  BoundSet bounds;
  Objective objective;
  int nodes = 21;
  VesselParams params;
};

inline constexpr int kStateDim = 6;
inline constexpr int kControlDim = 2;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using ControlVector = Eigen::Matrix<double, kControlDim, 1>;

inline StateVector pack_state(const Pose& pose, const BodyVelocity& vel) {
  return (StateVector() << pose.x, pose.y, pose.psi, vel.u, vel.v, vel.r).finished();
}

/// f(x, tau) together with its Jacobians.
struct DynamicsLinearization {
  StateVector f;
  Eigen::Matrix<double, kStateDim, kStateDim> dfdx;
  Eigen::Matrix<double, kStateDim, kControlDim> dfdu;
};

inline StateVector dynamics_rhs(const StateVector& x, const ControlVector& tau,
                                const VesselParams& p) {
  const auto d = state_derivative({x[0], x[1], x[2]}, {x[3], x[4], x[5]},
                                  {tau[0], tau[1]}, p);
  return (StateVector() << d.pose_rate.dx, d.pose_rate.dy, d.pose_rate.dpsi,
          d.acc.du, d.acc.dv, d.acc.dr).finished();
}

inline DynamicsLinearization linearize(const StateVector& x, const ControlVector& tau,
                                       const VesselParams& p) {
  DynamicsLinearization lin;
  lin.f = dynamics_rhs(x, tau, p);
  const double c = std::cos(x[2]);
  const double s = std::sin(x[2]);
  const double u = x[3], v = x[4], r = x[5];
  auto& A = lin.dfdx;
  A.setZero();
  A(0, 2) = -u * s - v * c;
  A(0, 3) = c;
  A(0, 4) = -s;
  A(1, 2) = u * c - v * s;
  A(1, 3) = s;
  A(1, 4) = c;
  A(2, 5) = 1.0;
  A(3, 3) = -p.damping_surge / p.mass;
  A(3, 4) = -r;
  A(3, 5) = -v;
  A(4, 3) = r;
  A(4, 4) = -p.damping_sway / p.mass;
  A(4, 5) = u;
  A(5, 5) = -p.damping_yaw / p.inertia_z;
  auto& B = lin.dfdu;
  B.setZero();
  B(3, 0) = 1.0 / p.mass;
  B(5, 1) = 1.0 / p.inertia_z;
  return lin;
}

struct ObjectiveEvaluation {
  double value;
  Vector gradient;
};

struct ConstraintEvaluation {
  Vector residual;     // defects followed by acceleration inequalities
  SparseMatrix jacobian;
};

/// One sub-trajectory NLP. Satisfies NlpProblem.
class SegmentNlp {
 public:
  explicit SegmentNlp(SegmentProblem problem) : p_(std::move(problem)) {
    if (p_.nodes < 3) {
      throw PlanningError(ErrorKind::kInvalidInput, "need at least 3 collocation nodes");
    }
    p_.params.validate();
    p_.bounds.validate();
    K_ = p_.nodes;
    build_bounds();
  }

  const SegmentProblem& problem() const { return p_; }
  int nodes() const { return K_; }

  Vec2 end_position() const {
    if (const auto* wp = std::get_if<WaypointEnd>(&p_.end)) return wp->position;
    const auto& rest = std::get<RestEnd>(p_.end);
    return {rest.pose.x, rest.pose.y};
  }

  Eigen::Index num_variables() const { return 1 + (kStateDim + kControlDim) * K_; }
  Eigen::Index num_equalities() const { return kStateDim * (K_ - 1); }
  Eigen::Index num_inequalities() const { return 6 * K_; }
  const Vector& lower_bounds() const { return lo_; }
  const Vector& upper_bounds() const { return hi_; }

  static constexpr Eigen::Index time_index() { return 0; }
  Eigen::Index state_index(int k, int j = 0) const { return 1 + kStateDim * k + j; }
  Eigen::Index control_index(int k, int j = 0) const {
    return 1 + kStateDim * K_ + kControlDim * k + j;
  }

  StateVector state(const Vector& z, int k) const {
    return z.segment<kStateDim>(state_index(k));
  }
  ControlVector control(const Vector& z, int k) const {
    return z.segment<kControlDim>(control_index(k));
  }

  /// Trapezoid quadrature weight of node k (without the factor h).
  double weight(int k) const { return (k == 0 || k == K_ - 1) ? 0.5 : 1.0; }

  double objective(const Vector& z, Vector& grad) const {
    check_finite(z);
    const double t = z[time_index()];
    const double h = t / (K_ - 1);
    const double lambda = p_.objective.weight;
    grad.setZero(num_variables());

    double running = 0.0;  // sum_k w_k q_k
    double time_moment = 0.0;  // sum_k w_k k^2
    for (int k = 0; k < K_; ++k) {
      const double w = weight(k);
      time_moment += w * k * k;
      const ControlVector tau = control(z, k);
      if (p_.objective.kind == ObjectiveKind::kMinControlInput) {
        running += w * tau.squaredNorm();
        grad.segment<kControlDim>(control_index(k)) += 2.0 * h * w * tau;
      } else {
        const auto lin = linearize(state(z, k), tau, p_.params);
        const Eigen::Vector3d acc = lin.f.tail<3>();
        running += w * acc.squaredNorm();
        const Eigen::Matrix<double, 3, kStateDim> da_dx = lin.dfdx.bottomRows<3>();
        const Eigen::Matrix<double, 3, kControlDim> da_du = lin.dfdu.bottomRows<3>();
        grad.segment<kStateDim>(state_index(k)) += 2.0 * h * w * (da_dx.transpose() * acc);
        grad.segment<kControlDim>(control_index(k)) += 2.0 * h * w * (da_du.transpose() * acc);
      }
    }
    const double value = h * running + lambda * h * h * h * time_moment;
    grad[time_index()] = (running + 3.0 * lambda * h * h * time_moment) / (K_ - 1);
    if (!std::isfinite(value) || !grad.allFinite()) {
      throw PlanningError(ErrorKind::kNonFiniteEvaluation, "objective is not finite");
    }
    return value;
  }

  void equalities(const Vector& z, Vector& c, SparseMatrix& jac) const {
    check_finite(z);
    const double t = z[time_index()];
    const double h = t / (K_ - 1);
    c.resize(num_equalities());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(K_ - 1) * (1 + 2 * 36 + 2 * 12));

    DynamicsLinearization here = linearize(state(z, 0), control(z, 0), p_.params);
    for (int k = 0; k + 1 < K_; ++k) {
      const DynamicsLinearization next = linearize(state(z, k + 1), control(z, k + 1), p_.params);
      const Eigen::Index row = kStateDim * k;
      c.segment<kStateDim>(row) =
          state(z, k + 1) - state(z, k) - 0.5 * h * (here.f + next.f);
      for (int i = 0; i < kStateDim; ++i) {
        triplets.emplace_back(row + i, time_index(),
                              -0.5 / (K_ - 1) * (here.f[i] + next.f[i]));
        for (int j = 0; j < kStateDim; ++j) {
          const double a0 = -0.5 * h * here.dfdx(i, j) - (i == j ? 1.0 : 0.0);
          const double a1 = -0.5 * h * next.dfdx(i, j) + (i == j ? 1.0 : 0.0);
          if (a0 != 0.0) triplets.emplace_back(row + i, state_index(k, j), a0);
          if (a1 != 0.0) triplets.emplace_back(row + i, state_index(k + 1, j), a1);
        }
        for (int j = 0; j < kControlDim; ++j) {
          if (here.dfdu(i, j) != 0.0) {
            triplets.emplace_back(row + i, control_index(k, j), -0.5 * h * here.dfdu(i, j));
          }
          if (next.dfdu(i, j) != 0.0) {
            triplets.emplace_back(row + i, control_index(k + 1, j), -0.5 * h * next.dfdu(i, j));
          }
        }
      }
      here = next;
    }
    jac.resize(num_equalities(), num_variables());
    jac.setFromTriplets(triplets.begin(), triplets.end());
    if (!c.allFinite()) {
      throw PlanningError(ErrorKind::kNonFiniteEvaluation, "defects are not finite");
    }
  }

  /// Acceleration bounds as g(z) <= 0: rows 6k..6k+2 are a - a_hi, rows
  /// 6k+3..6k+5 are a_lo - a.
  void inequalities(const Vector& z, Vector& g, SparseMatrix& jac) const {
    check_finite(z);
    g.resize(num_inequalities());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(K_) * 6 * 5);
    const Eigen::Vector3d hi(p_.bounds.acc_hi.du, p_.bounds.acc_hi.dv, p_.bounds.acc_hi.dr);
    const Eigen::Vector3d lo(p_.bounds.acc_lo.du, p_.bounds.acc_lo.dv, p_.bounds.acc_lo.dr);
    for (int k = 0; k < K_; ++k) {
      const auto lin = linearize(state(z, k), control(z, k), p_.params);
      const Eigen::Vector3d acc = lin.f.tail<3>();
      g.segment<3>(6 * k) = acc - hi;
      g.segment<3>(6 * k + 3) = lo - acc;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < kStateDim; ++j) {
          const double d = lin.dfdx(3 + i, j);
          if (d == 0.0) continue;
          triplets.emplace_back(6 * k + i, state_index(k, j), d);
          triplets.emplace_back(6 * k + 3 + i, state_index(k, j), -d);
        }
        for (int j = 0; j < kControlDim; ++j) {
          const double d = lin.dfdu(3 + i, j);
          if (d == 0.0) continue;
          triplets.emplace_back(6 * k + i, control_index(k, j), d);
          triplets.emplace_back(6 * k + 3 + i, control_index(k, j), -d);
        }
      }
    }
    jac.resize(num_inequalities(), num_variables());
    jac.setFromTriplets(triplets.begin(), triplets.end());
  }

  ObjectiveEvaluation eval_objective_and_gradient(const Vector& z) const {
    check_layout(z);
    ObjectiveEvaluation out;
    out.value = objective(z, out.gradient);
    return out;
  }

  ConstraintEvaluation eval_constraints_and_jacobian(const Vector& z) const {
    check_layout(z);
    Vector c, g;
    SparseMatrix jc, jg;
    equalities(z, c, jc);
    inequalities(z, g, jg);
    ConstraintEvaluation out;
    out.residual.resize(c.size() + g.size());
    out.residual << c, g;
    std::vector<Eigen::Triplet<double>> triplets;
    for (int outer = 0; outer < jc.outerSize(); ++outer) {
      for (SparseMatrix::InnerIterator it(jc, outer); it; ++it) {
        triplets.emplace_back(it.row(), it.col(), it.value());
      }
      for (SparseMatrix::InnerIterator it(jg, outer); it; ++it) {
        triplets.emplace_back(c.size() + it.row(), it.col(), it.value());
      }
    }
    out.jacobian.resize(out.residual.size(), num_variables());
    out.jacobian.setFromTriplets(triplets.begin(), triplets.end());
    return out;
  }

 private:
  void check_layout(const Vector& z) const {
    if (z.size() != num_variables() || !(z[time_index()] > 0.0)) {
      throw PlanningError(ErrorKind::kInvalidInput,
                          "decision vector has the wrong length or t <= 0");
    }
  }

  static void check_finite(const Vector& z) {
    if (!z.allFinite()) {
      throw PlanningError(ErrorKind::kNonFiniteEvaluation, "decision vector is not finite");
    }
  }

  void pin(Eigen::Index i, double value, const char* what) {
    constexpr double kSlack = 1e-9;
    if (value < lo_[i] - kSlack || value > hi_[i] + kSlack) {
      throw PlanningError(ErrorKind::kInfeasibleBox,
                          std::string("pinned ") + what + " violates its bounds");
    }
    lo_[i] = hi_[i] = value;
  }

  void build_bounds() {
    const auto& b = p_.bounds;
    const auto& corridor = p_.corridor;
    lo_.resize(num_variables());
    hi_.resize(num_variables());
    // No feasible trajectory covers the endpoint distance faster than the top
    // planar speed allows, so that time is a valid lower bound.
    const Vec2 from{p_.start.pose.x, p_.start.pose.y};
    const Vec2 to = end_position();
    const double top_speed =
        std::hypot(std::max(std::abs(b.vel_lo.u), std::abs(b.vel_hi.u)),
                   std::max(std::abs(b.vel_lo.v), std::abs(b.vel_hi.v)));
    double t_lo = kMinDuration;
    if (top_speed > 0.0) t_lo = std::max(t_lo, distance(from, to) / top_speed);
    if (t_lo > b.t_max) {
      throw PlanningError(ErrorKind::kInfeasibleBox,
                          "segment cannot be covered within t_max at top speed");
    }
    lo_[time_index()] = t_lo;
    hi_[time_index()] = b.t_max;
    const std::array<double, kStateDim> state_lo{corridor.x_min, corridor.y_min, b.psi_lo,
                                                 b.vel_lo.u, b.vel_lo.v, b.vel_lo.r};
    const std::array<double, kStateDim> state_hi{corridor.x_max, corridor.y_max, b.psi_hi,
                                                 b.vel_hi.u, b.vel_hi.v, b.vel_hi.r};
    for (int k = 0; k < K_; ++k) {
      for (int j = 0; j < kStateDim; ++j) {
        lo_[state_index(k, j)] = state_lo[j];
        hi_[state_index(k, j)] = state_hi[j];
      }
      lo_[control_index(k, 0)] = b.tau_lo.tau_u;
      hi_[control_index(k, 0)] = b.tau_hi.tau_u;
      lo_[control_index(k, 1)] = b.tau_lo.tau_r;
      hi_[control_index(k, 1)] = b.tau_hi.tau_r;
    }

    const auto& s = p_.start;
    pin(state_index(0, 0), s.pose.x, "start x");
    pin(state_index(0, 1), s.pose.y, "start y");
    pin(state_index(0, 2), s.pose.psi, "start heading");
    pin(state_index(0, 3), s.vel.u, "start surge velocity");
    pin(state_index(0, 4), s.vel.v, "start sway velocity");
    pin(state_index(0, 5), s.vel.r, "start yaw rate");
    pin(control_index(0, 0), s.tau.tau_u, "start surge force");
    pin(control_index(0, 1), s.tau.tau_r, "start yaw moment");

    const int last = K_ - 1;
    if (const auto* wp = std::get_if<WaypointEnd>(&p_.end)) {
      pin(state_index(last, 0), wp->position.x, "waypoint x");
      pin(state_index(last, 1), wp->position.y, "waypoint y");
    } else {
      const auto& rest = std::get<RestEnd>(p_.end);
      pin(state_index(last, 0), rest.pose.x, "goal x");
      pin(state_index(last, 1), rest.pose.y, "goal y");
      pin(state_index(last, 2), rest.pose.psi, "goal heading");
      for (int j = 3; j < kStateDim; ++j) pin(state_index(last, j), 0.0, "goal velocity");
      pin(control_index(last, 0), 0.0, "goal surge force");
      pin(control_index(last, 1), 0.0, "goal yaw moment");
    }
  }

  static constexpr double kMinDuration = 0.05;  // [s]

  SegmentProblem p_;
  int K_ = 0;
  Vector lo_;
  Vector hi_;
};

static_assert(NlpProblem<SegmentNlp>);

/// Convenience wrapper matching the free-function style of the other
/// modules.
inline SegmentNlp build_nlp(const SegmentProblem& problem) { return SegmentNlp(problem); }

struct NodeState {
  Pose pose;
  BodyVelocity vel;
};

/// Decoded segment: linear control spline, quadratic state spline obtained by
/// integrating the linear spline through the node derivatives.
class SegmentTrajectory {
 public:
  SegmentTrajectory() = default;
  SegmentTrajectory(double duration, std::vector<StateVector> states,
                    std::vector<ControlVector> controls, VesselParams params)
      : duration_(duration), states_(std::move(states)), controls_(std::move(controls)),
        params_(params) {
    derivatives_.reserve(states_.size());
    for (std::size_t k = 0; k < states_.size(); ++k) {
      derivatives_.push_back(dynamics_rhs(states_[k], controls_[k], params_));
    }
  }

  double duration() const { return duration_; }
  int nodes() const { return static_cast<int>(states_.size()); }
  double step() const { return duration_ / (nodes() - 1); }
  double node_time(int k) const { return k * step(); }
  const std::vector<StateVector>& node_states() const { return states_; }
  const std::vector<ControlVector>& node_controls() const { return controls_; }
  const VesselParams& params() const { return params_; }

  StateVector state_vector_at(double s) const {
    int k;
    double offset;
    if (locate(s, k, offset)) return states_[k];
    const double h = step();
    return states_[k] + offset * derivatives_[k] +
           (offset * offset / (2.0 * h)) * (derivatives_[k + 1] - derivatives_[k]);
  }

  NodeState state_at(double s) const {
    const StateVector x = state_vector_at(s);
    return {{x[0], x[1], x[2]}, {x[3], x[4], x[5]}};
  }

  ControlInput control_at(double s) const {
    int k;
    double offset;
    if (locate(s, k, offset)) return {controls_[k][0], controls_[k][1]};
    const double a = offset / step();
    const ControlVector c = (1.0 - a) * controls_[k] + a * controls_[k + 1];
    return {c[0], c[1]};
  }

  /// Acceleration consistent with the velocity and control at s.
  BodyAcceleration acceleration_at(double s) const {
    return acceleration(state_at(s).vel, control_at(s), params_);
  }

  NodeState initial() const { return state_at(0.0); }
  NodeState terminal() const { return state_at(duration_); }
  ControlInput terminal_control() const { return control_at(duration_); }

 private:
  // Finds the interval containing s. Returns true (and the node in k) when s
  // coincides with a node time.
  bool locate(double s, int& k, double& offset) const {
    const int last = nodes() - 1;
    if (s <= 0.0) {
      k = 0;
      return true;
    }
    if (s >= duration_) {
      k = last;
      return true;
    }
    const double h = step();
    const double pos = s / h;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-12) {
      k = static_cast<int>(nearest);
      return true;
    }
    k = std::min(static_cast<int>(std::floor(pos)), last - 1);
    offset = s - k * h;
    return false;
  }

  double duration_ = 0.0;
  std::vector<StateVector> states_;
  std::vector<ControlVector> controls_;
  std::vector<StateVector> derivatives_;
  VesselParams params_;
};

inline SegmentTrajectory decode(const SegmentNlp& nlp, const Vector& z) {
  std::vector<StateVector> states;
  std::vector<ControlVector> controls;
  for (int k = 0; k < nlp.nodes(); ++k) {
    states.push_back(nlp.state(z, k));
    controls.push_back(nlp.control(z, k));
  }
  return SegmentTrajectory(z[SegmentNlp::time_index()], std::move(states),
                           std::move(controls), nlp.problem().params);
}

}  // namespace asvplan
