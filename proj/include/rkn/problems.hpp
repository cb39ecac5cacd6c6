#pragma once

// Classical test systems: Kepler, pendulum, Henon-Heiles, harmonic
// oscillator and the planar restricted three-body problem in two frames.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>

#include "rkn/errors.hpp"
#include "rkn/system.hpp"

namespace rkn {

struct ProblemInstance {
  SecondOrderSystem system;
  State initial;
  std::optional<double> energy;  // exact conserved value at `initial`
  std::optional<double> period;
  std::map<std::string, double> parameters;
  // Potential V with g = -grad V, for autonomous Hamiltonian systems.
  std::function<double(const Vector&)> potential;
};

inline ProblemInstance kepler(double e, double mu = 1.0) {
  if (!(e >= 0 && e < 1)) throw EccentricityOutOfRange("eccentricity must lie in [0, 1)");
  if (!(mu > 0)) throw InvalidArgument("kepler: mu must be positive");
  ProblemInstance p;
  p.parameters = {{"e", e}, {"mu", mu}};
  p.system.name = "kepler";
  p.system.dimension = 2;
  p.system.force = [mu](double, const Vector& q, Vector& g) {
    const double r2 = q.squaredNorm();
    g = (-mu / (r2 * std::sqrt(r2))) * q;
  };
  p.system.energy = [mu](const State& s) {
    return 0.5 * s.v.squaredNorm() - mu / s.y.norm();
  };
  p.potential = [mu](const Vector& q) { return -mu / q.norm(); };
  p.initial = make_state({1 - e, 0}, {0, std::sqrt((1 + e) / (1 - e))});
  const double energy = 0.5 * (1 + e) / (1 - e) - mu / (1 - e);
  p.energy = energy;
  const double a = -mu / (2 * energy);
  p.period = 2 * std::numbers::pi * std::sqrt(a * a * a / mu);
  return p;
}

// Exact Kepler orbit (mu = 1) started at pericentre as in kepler(e):
// Newton iteration on Kepler's equation E - e sin E = t.
inline State kepler_exact(double e, double t) {
  double E = e < 0.8 ? t : std::numbers::pi;
  const double M = t;
  for (int i = 0; i < 100; ++i) {
    const double f = E - e * std::sin(E) - M;
    const double dE = f / (1 - e * std::cos(E));
    E -= dE;
    if (std::abs(dE) < 1e-16 * std::max(1.0, std::abs(E))) break;
  }
  const double c = std::cos(E), s = std::sin(E), w = std::sqrt(1 - e * e);
  const double rdot = 1 / (1 - e * c);
  return make_state({c - e, w * s}, {-s * rdot, w * c * rdot}, t);
}

inline ProblemInstance pendulum(double alpha) {
  ProblemInstance p;
  p.parameters = {{"alpha", alpha}};
  p.system.name = "pendulum";
  p.system.dimension = 1;
  p.system.force = [](double, const Vector& q, Vector& g) { g[0] = -std::sin(q[0]); };
  p.system.energy = [](const State& s) { return 0.5 * s.v[0] * s.v[0] - std::cos(s.y[0]); };
  p.potential = [](const Vector& q) { return -std::cos(q[0]); };
  p.initial = make_state({0}, {alpha});
  p.energy = 0.5 * alpha * alpha - 1;
  return p;
}

inline ProblemInstance henon_heiles(double alpha) {
  ProblemInstance p;
  p.parameters = {{"alpha", alpha}};
  p.system.name = "henon_heiles";
  p.system.dimension = 2;
  p.system.force = [](double, const Vector& q, Vector& g) {
    g[0] = -q[0] - 2 * q[0] * q[1];
    g[1] = -q[1] - q[0] * q[0] + q[1] * q[1];
  };
  auto V = [](const Vector& q) {
    return 0.5 * (q[0] * q[0] + q[1] * q[1]) + q[0] * q[0] * q[1] -
           q[1] * q[1] * q[1] / 3;
  };
  p.system.energy = [V](const State& s) { return 0.5 * s.v.squaredNorm() + V(s.y); };
  p.potential = V;
  p.initial = make_state({alpha / 2, 0}, {0, alpha / 4});
  p.energy = p.system.energy(p.initial);
  return p;
}

inline ProblemInstance harmonic_oscillator(double omega = 1.0) {
  ProblemInstance p;
  p.parameters = {{"omega", omega}};
  p.system.name = "harmonic";
  p.system.dimension = 1;
  const double w2 = omega * omega;
  p.system.force = [w2](double, const Vector& q, Vector& g) { g[0] = -w2 * q[0]; };
  p.system.energy = [w2](const State& s) { return 0.5 * (s.v[0] * s.v[0] + w2 * s.y[0] * s.y[0]); };
  p.potential = [w2](const Vector& q) { return 0.5 * w2 * q[0] * q[0]; };
  p.initial = make_state({1}, {0});
  p.energy = 0.5 * w2;
  p.period = 2 * std::numbers::pi / omega;
  return p;
}

// Restricted three-body problem. Primaries of mass 1 - mu and mu orbit the
// origin with unit angular velocity; positions at time t:
//   a(t) = -mu (cos t, sin t),   b(t) = (1 - mu)(cos t, sin t).
namespace arenstorf {
inline constexpr double kMu = 0.012277471;
inline constexpr double kPeriod = 17.06521656015796255889;
inline constexpr double kY1 = 0.994;
inline constexpr double kV2 = -1.00758510637908252240;
}  // namespace arenstorf

inline constexpr double kCollisionGuard = 1e-30;

namespace detail {
inline void check_mass_ratio(double mu) {
  if (!(mu > 0 && mu < 1)) throw InvalidArgument("mass ratio must lie in (0, 1)");
}
}  // namespace detail

// Equations of motion with the primaries moving on circles (time-dependent
// force, pure-shear drift). Initial data are the Arenstorf values.
inline ProblemInstance three_body_rotating(double mu = arenstorf::kMu) {
  detail::check_mass_ratio(mu);
  const double mup = 1 - mu;
  ProblemInstance p;
  p.parameters = {{"mu", mu}};
  p.system.name = "three_body_rotating";
  p.system.dimension = 2;
  p.system.autonomous = false;
  p.system.force = [mu, mup](double t, const Vector& y, Vector& g) {
    const double c = std::cos(t), s = std::sin(t);
    const double a1 = -mu * c, a2 = -mu * s, b1 = mup * c, b2 = mup * s;
    const double r1 = (y[0] - a1) * (y[0] - a1) + (y[1] - a2) * (y[1] - a2);
    const double r2 = (y[0] - b1) * (y[0] - b1) + (y[1] - b2) * (y[1] - b2);
    const double D1 = r1 * std::sqrt(r1), D2 = r2 * std::sqrt(r2);
    if (D1 < kCollisionGuard || D2 < kCollisionGuard)
      throw CollisionSingularity("three-body collision at t=" + std::to_string(t));
    g[0] = mup * (a1 - y[0]) / D1 + mu * (b1 - y[0]) / D2;
    g[1] = mup * (a2 - y[1]) / D1 + mu * (b2 - y[1]) / D2;
  };
  // Jacobi integral: energy minus angular momentum.
  p.system.energy = [mu, mup](const State& s) {
    const double c = std::cos(s.t), sn = std::sin(s.t);
    const Vector a = Eigen::Vector2d(-mu * c, -mu * sn), b = Eigen::Vector2d(mup * c, mup * sn);
    return 0.5 * s.v.squaredNorm() - (s.y[0] * s.v[1] - s.y[1] * s.v[0]) -
           mup / (s.y - a).norm() - mu / (s.y - b).norm();
  };
  p.initial = make_state({arenstorf::kY1, 0}, {0, arenstorf::kV2});
  p.period = arenstorf::kPeriod;
  p.energy = p.system.energy(p.initial);
  return p;
}

// Equations of motion in the frame co-rotating with the primaries, which sit
// at (-mu, 0) and (1 - mu, 0). The Coriolis and centrifugal terms form the
// linear part alpha = [[0, 2], [-2, 0]], beta = I.
inline ProblemInstance three_body_fixed(double mu = arenstorf::kMu) {
  detail::check_mass_ratio(mu);
  const double mup = 1 - mu;
  ProblemInstance p;
  p.parameters = {{"mu", mu}};
  p.system.name = "three_body_fixed";
  p.system.dimension = 2;
  Eigen::MatrixXd alpha(2, 2), beta = Eigen::MatrixXd::Identity(2, 2);
  alpha << 0, 2, -2, 0;
  p.system.linear_part.emplace(alpha, beta);
  p.system.force = [mu, mup](double, const Vector& y, Vector& g) {
    const double r1 = (y[0] + mu) * (y[0] + mu) + y[1] * y[1];
    const double r2 = (y[0] - mup) * (y[0] - mup) + y[1] * y[1];
    const double D1 = r1 * std::sqrt(r1), D2 = r2 * std::sqrt(r2);
    if (D1 < kCollisionGuard || D2 < kCollisionGuard)
      throw CollisionSingularity("three-body collision");
    g[0] = -mup * (y[0] + mu) / D1 - mu * (y[0] - mup) / D2;
    g[1] = -mup * y[1] / D1 - mu * y[1] / D2;
  };
  auto V = [mu, mup](const Vector& y) {
    return -mup / std::hypot(y[0] + mu, y[1]) - mu / std::hypot(y[0] - mup, y[1]);
  };
  p.potential = V;
  p.system.energy = [V](const State& s) {
    return 0.5 * s.v.squaredNorm() - 0.5 * s.y.squaredNorm() + V(s.y);
  };
  p.initial = make_state({arenstorf::kY1, 0}, {0, arenstorf::kV2 - arenstorf::kY1});
  p.period = arenstorf::kPeriod;
  p.energy = p.system.energy(p.initial);
  return p;
}

// Frame maps between the moving-primaries frame (three_body_rotating) and
// the co-rotating frame (three_body_fixed): positions rotate by -t,
// velocities additionally lose the frame velocity omega x r.
inline State to_corotating(const State& s) {
  const double c = std::cos(s.t), sn = std::sin(s.t);
  State r;
  r.t = s.t;
  r.y = Eigen::Vector2d(c * s.y[0] + sn * s.y[1], -sn * s.y[0] + c * s.y[1]);
  const Eigen::Vector2d w(c * s.v[0] + sn * s.v[1], -sn * s.v[0] + c * s.v[1]);
  r.v = Eigen::Vector2d(w[0] + r.y[1], w[1] - r.y[0]);
  return r;
}

inline State from_corotating(const State& r) {
  const double c = std::cos(r.t), sn = std::sin(r.t);
  const Eigen::Vector2d w(r.v[0] - r.y[1], r.v[1] + r.y[0]);
  State s;
  s.t = r.t;
  s.y = Eigen::Vector2d(c * r.y[0] - sn * r.y[1], sn * r.y[0] + c * r.y[1]);
  s.v = Eigen::Vector2d(c * w[0] - sn * w[1], sn * w[0] + c * w[1]);
  return s;
}

// Infinity-norm distance of (y, y') between two moving-primaries-frame
// states, measured in the co-rotating frame where the Arenstorf orbit closes.
inline double corotating_return_error(const State& final_state, const State& initial) {
  const State a = to_corotating(final_state), b = to_corotating(initial);
  return std::max((a.y - b.y).cwiseAbs().maxCoeff(), (a.v - b.v).cwiseAbs().maxCoeff());
}

}  // namespace rkn
