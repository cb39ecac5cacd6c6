#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "rkn/errors.hpp"
#include "rkn/linear_flow.hpp"

namespace rkn {

using Vector = Eigen::VectorXd;

// Phase-space point of a second-order system: position y, velocity v = y'.
struct State {
  Vector y;
  Vector v;
  double t = 0;
};

// Writes the acceleration g(t, y) into `out` (already sized to dimension).
using ForceFunction = std::function<void(double t, const Vector& y, Vector& out)>;
using EnergyFunction = std::function<double(const State&)>;

// y'' = alpha y' + beta y + g(t, y). Without a linear part the drift is the
// shear (y + tau v, v).
struct SecondOrderSystem {
  std::string name;
  int dimension = 0;
  ForceFunction force;
  std::optional<LinearDrift> linear_part;
  EnergyFunction energy;  // empty when no conserved energy is known
  bool autonomous = true;
};

struct StepStats {
  long force_evaluations = 0;
  long steps_taken = 0;
  long fsal_merges = 0;
  long drift_applications = 0;
};

inline State make_state(std::initializer_list<double> y,
                        std::initializer_list<double> v, double t = 0) {
  State s;
  s.y = Eigen::Map<const Vector>(y.begin(), static_cast<Eigen::Index>(y.size()));
  s.v = Eigen::Map<const Vector>(v.begin(), static_cast<Eigen::Index>(v.size()));
  s.t = t;
  return s;
}

// Evaluates g and rejects non-finite output.
inline void evaluate_force(const SecondOrderSystem& sys, double t,
                           const Vector& y, Vector& out, StepStats& stats) {
  out.resize(sys.dimension);
  sys.force(t, y, out);
  ++stats.force_evaluations;
  if (!out.allFinite())
    throw ForceSingularity(sys.name + ": non-finite force at t=" + std::to_string(t));
}

inline double max_abs_difference(const State& a, const State& b) {
  double d = std::abs(a.t - b.t);
  if (a.y.size() > 0) d = std::max(d, (a.y - b.y).cwiseAbs().maxCoeff());
  if (a.v.size() > 0) d = std::max(d, (a.v - b.v).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace rkn
