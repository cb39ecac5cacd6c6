#pragma once

// Elementary flows and single steps of splitting schemes on second-order
// systems.
//
// FSAL handling comes in two flavours:
//  * drift merging: the trailing drift of an ABA-type step is held in the
//    carry and added to the leading drift of the next step (saves one drift,
//    the state between steps is then not materialised);
//  * force reuse: the force evaluated by the trailing kick of a BAB-type step
//    is kept and reused by the leading kick of the next step, which acts at
//    the same (t, y). The boundary state stays observable.

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "rkn/errors.hpp"
#include "rkn/scheme.hpp"
#include "rkn/system.hpp"

namespace rkn {

enum class Summation { Plain, Compensated };

struct FsalCarry {
  double pending_drift = 0;
  bool has_pending_drift = false;
  bool has_force = false;
  double force_t = 0;
  Vector force_y;
  Vector force;
};

namespace detail {

// Applies flows to an owned state, optionally with Kahan-compensated
// accumulation of every increment (positions, velocities and time).
class FlowEngine {
 public:
  FlowEngine(const SecondOrderSystem& sys, State state, StepStats& stats,
             Summation mode)
      : sys_(sys), state_(std::move(state)), stats_(stats), mode_(mode) {
    if (state_.y.size() != sys.dimension || state_.v.size() != sys.dimension)
      throw InvalidArgument(sys.name + ": state dimension does not match system");
    if (mode_ == Summation::Compensated) {
      cy_ = Vector::Zero(sys.dimension);
      cv_ = Vector::Zero(sys.dimension);
    }
  }

  const State& state() const { return state_; }
  State& mutable_state() { return state_; }
  StepStats& stats() { return stats_; }
  const SecondOrderSystem& system() const { return sys_; }

  void drift(double tau) {
    if (tau == 0) return;
    ++stats_.drift_applications;
    if (sys_.linear_part) {
      sys_.linear_part->increment(tau, state_.y, state_.v, dy_, dv_);
      add(state_.y, cy_, dy_);
      add(state_.v, cv_, dv_);
    } else {
      dy_.noalias() = tau * state_.v;
      add(state_.y, cy_, dy_);
    }
    add_time(tau);
  }

  // Adds externally computed increments (extrapolated steps).
  void apply_increment(const Vector& dy, const Vector& dv, double dt) {
    add(state_.y, cy_, dy);
    add(state_.v, cv_, dv);
    add_time(dt);
  }

  // `remember` stores the evaluated force in the carry for reuse by the
  // next step's leading kick.
  void kick(double tau, FsalCarry* carry = nullptr, bool remember = false) {
    if (tau == 0) return;
    const Vector* g = nullptr;
    if (carry && carry->has_force && carry->force_t == state_.t &&
        carry->force_y.size() == state_.y.size() &&
        (carry->force_y.array() == state_.y.array()).all()) {
      g = &carry->force;
      ++stats_.fsal_merges;
    } else {
      evaluate_force(sys_, state_.t, state_.y, force_, stats_);
      g = &force_;
      if (carry && remember) {
        carry->has_force = true;
        carry->force_t = state_.t;
        carry->force_y = state_.y;
        carry->force = force_;
      }
    }
    dv_.noalias() = tau * (*g);
    add(state_.v, cv_, dv_);
  }

 private:
  void add(Vector& x, Vector& c, const Vector& dx) {
    if (mode_ == Summation::Plain) {
      x += dx;
      return;
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double z = dx[i] - c[i];
      const double t = x[i] + z;
      c[i] = (t - x[i]) - z;
      x[i] = t;
    }
  }

  void add_time(double dt) {
    if (mode_ == Summation::Plain) {
      state_.t += dt;
      return;
    }
    const double z = dt - ct_;
    const double t = state_.t + z;
    ct_ = (t - state_.t) - z;
    state_.t = t;
  }

  const SecondOrderSystem& sys_;
  State state_;
  StepStats& stats_;
  Summation mode_;
  Vector cy_, cv_;
  double ct_ = 0;
  Vector force_, dy_, dv_;
};

// One application of a schedule with scaled times coefficient * h.
inline void run_schedule(FlowEngine& eng, const FlowSchedule& s, double h,
                         FsalCarry* carry, bool defer_last_drift) {
  const std::size_t n = s.entries.size();
  for (std::size_t i = 0; i < n; ++i) {
    const FlowEntry& e = s.entries[i];
    double tau = e.coefficient * h;
    if (e.kind == FlowKind::Drift) {
      if (i == 0 && carry && carry->has_pending_drift) {
        tau += carry->pending_drift;
        carry->has_pending_drift = false;
        ++eng.stats().fsal_merges;
      }
      if (i + 1 == n && carry && defer_last_drift && s.fsal_mergeable) {
        carry->pending_drift = tau;
        carry->has_pending_drift = true;
        continue;
      }
      eng.drift(tau);
    } else {
      if (i == 0 && carry && carry->has_pending_drift) {
        eng.drift(carry->pending_drift);
        carry->has_pending_drift = false;
      }
      eng.kick(tau, carry, i + 1 == n);
    }
  }
  ++eng.stats().steps_taken;
}

inline void flush(FlowEngine& eng, FsalCarry& carry) {
  if (carry.has_pending_drift) {
    eng.drift(carry.pending_drift);
    carry.has_pending_drift = false;
  }
}

}  // namespace detail

// phi^[a]_tau: y <- y + tau v (or the exact linear flow), t <- t + tau.
inline State flow_drift(const SecondOrderSystem& sys, double tau, State state) {
  StepStats unused;
  detail::FlowEngine eng(sys, std::move(state), unused, Summation::Plain);
  eng.drift(tau);
  return eng.state();
}

// phi^[b]_tau: v <- v + tau g(t, y). tau == 0 skips the force evaluation.
inline State flow_kick(const SecondOrderSystem& sys, double tau, State state,
                       StepStats& stats) {
  detail::FlowEngine eng(sys, std::move(state), stats, Summation::Plain);
  eng.kick(tau);
  return eng.state();
}

// One step of size h. With a carry, forces are reused across kick-bounded
// steps; with defer_last_drift the trailing drift is left pending in the
// carry (call flush() before using the state).
inline State step(const FlowSchedule& schedule, const SecondOrderSystem& sys,
                  double h, State state, StepStats& stats,
                  FsalCarry* carry = nullptr, bool defer_last_drift = false) {
  if (h == 0) throw InvalidArgument("step: h must be non-zero");
  detail::FlowEngine eng(sys, std::move(state), stats, Summation::Plain);
  detail::run_schedule(eng, schedule, h, carry, defer_last_drift);
  return eng.state();
}

inline State flush(const SecondOrderSystem& sys, State state, FsalCarry& carry,
                   StepStats& stats) {
  detail::FlowEngine eng(sys, std::move(state), stats, Summation::Plain);
  detail::flush(eng, carry);
  return eng.state();
}

// One step of a palindromic composition of Strang kernels S_{gamma_i h}.
inline State ss_step(const SchemeCoefficients& composition, StrangKernel kernel,
                     const SecondOrderSystem& sys, double h, State state,
                     StepStats& stats) {
  if (composition.kind != SchemeKind::SS)
    throw InvalidArgument("ss_step: scheme " + composition.name + " is not an SS composition");
  return step(unfold(composition, kernel), sys, h, std::move(state), stats);
}

// || psi_{-h}(psi_h(x)) - x ||_inf over (y, v, t).
inline double time_symmetry_defect(const FlowSchedule& schedule,
                                   const SecondOrderSystem& sys, double h,
                                   const State& state) {
  if (h == 0) return 0;
  StepStats stats;
  const State forward = step(schedule, sys, h, state, stats);
  const State back = step(schedule, sys, -h, forward, stats);
  return max_abs_difference(back, state);
}

// Central-difference Jacobian M of one step in (y, v); returns
// max |(M^T Omega M - Omega)_ij| with Omega = [[0, I], [-I, 0]].
inline double symplecticity_defect(const FlowSchedule& schedule,
                                   const SecondOrderSystem& sys, double h,
                                   const State& state,
                                   std::optional<double> epsilon = std::nullopt) {
  const Eigen::Index d = sys.dimension;
  const Eigen::Index n = 2 * d;
  Vector x(n);
  x << state.y, state.v;
  const double eps = epsilon.value_or(1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff()));
  auto advance = [&](const Vector& z) {
    State s;
    s.y = z.head(d);
    s.v = z.tail(d);
    s.t = state.t;
    StepStats stats;
    const State out = h == 0 ? s : step(schedule, sys, h, s, stats);
    Vector r(n);
    r << out.y, out.v;
    return r;
  };
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector plus = x, minus = x;
    plus[j] += eps;
    minus[j] -= eps;
    M.col(j) = (advance(plus) - advance(minus)) / (2 * eps);
  }
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
  omega.topRightCorner(d, d).setIdentity();
  omega.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
  return (M.transpose() * omega * M - omega).cwiseAbs().maxCoeff();
}

}  // namespace rkn
