#pragma once

// Extrapolation of the symmetric Strang kernel along the harmonic sequence
// n_l = l, l = 1..k, giving a method of order 2k. Each step combines the
// increments y^(l) - y_n of the k sub-chains rather than the end points.

#include <cstdint>
#include <numeric>
#include <vector>

#include "rkn/errors.hpp"
#include "rkn/splitting.hpp"

namespace rkn {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double to_double() const {
    return static_cast<double>(static_cast<long double>(num) / den);
  }
  friend bool operator==(const Rational&, const Rational&) = default;
};

inline Rational normalized(std::int64_t num, std::int64_t den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return {num / (g ? g : 1), den / (g ? g : 1)};
}

inline Rational operator*(const Rational& x, const Rational& y) {
  const std::int64_t g1 = std::gcd(x.num, y.den), g2 = std::gcd(y.num, x.den);
  return normalized((x.num / (g1 ? g1 : 1)) * (y.num / (g2 ? g2 : 1)),
                    (x.den / (g2 ? g2 : 1)) * (y.den / (g1 ? g1 : 1)));
}

inline Rational operator+(const Rational& x, const Rational& y) {
  const std::int64_t l = std::lcm(x.den, y.den);
  return normalized(x.num * (l / x.den) + y.num * (l / y.den), l);
}

struct ExtrapolationTableau {
  int k = 0;
  std::vector<Rational> weights;  // alpha_1 .. alpha_k
};

// Aitken-Neville weights for h^2-extrapolation at step sizes h/l:
//   alpha_l = prod_{j != l} l^2 / (l^2 - j^2).
inline ExtrapolationTableau tableau(int k) {
  if (k < 2 || k > 4) throw UnsupportedLevel(k);
  ExtrapolationTableau t{k, {}};
  for (std::int64_t l = 1; l <= k; ++l) {
    Rational w{1, 1};
    for (std::int64_t j = 1; j <= k; ++j) {
      if (j == l) continue;
      w = w * normalized(l * l, l * l - j * j);
    }
    t.weights.push_back(w);
  }
  return t;
}

enum class ExtrapolationForm { Increment, Direct };

namespace detail {

// Runs l Strang sub-steps of size h/l from `start`, accumulating the
// increments (dy, dv) separately from the base point.
inline void strang_chain_increment(const SecondOrderSystem& sys,
                                   StrangKernel kernel, int l, double h,
                                   const State& start, Vector& dy, Vector& dv,
                                   StepStats& stats, FsalCarry& shared) {
  const double sub = h / l;
  const Eigen::Index d = sys.dimension;
  dy = Vector::Zero(d);
  dv = Vector::Zero(d);
  double dt = 0;
  Vector y(d), g(d), iy, iv;
  auto drift = [&](double tau) {
    ++stats.drift_applications;
    if (sys.linear_part) {
      sys.linear_part->increment(tau, start.y + dy, start.v + dv, iy, iv);
      dy += iy;
      dv += iv;
    } else {
      dy += tau * (start.v + dv);
    }
    dt += tau;
  };
  auto kick = [&](double tau) {
    y = start.y + dy;
    const double t = start.t + dt;
    // the leading kick of every BAB chain acts at the base point
    if (dt == 0 && dy.isZero(0) && shared.has_force) {
      g = shared.force;
      ++stats.fsal_merges;
    } else {
      evaluate_force(sys, t, y, g, stats);
      if (dt == 0 && dy.isZero(0)) {
        shared.has_force = true;
        shared.force = g;
      }
    }
    dv += tau * g;
  };
  // Interior FSAL: adjacent outer half-flows of consecutive kernels merge.
  if (kernel == StrangKernel::ABA) {
    drift(0.5 * sub);
    for (int i = 0; i < l; ++i) {
      kick(sub);
      drift(i + 1 == l ? 0.5 * sub : sub);
    }
  } else {
    kick(0.5 * sub);
    for (int i = 0; i < l; ++i) {
      drift(sub);
      kick(i + 1 == l ? 0.5 * sub : sub);
    }
  }
}

// Combined increment sum_l alpha_l (y^(l) - y_n) without forming the new
// state.
inline void extrapolated_increment(int k, StrangKernel kernel,
                                   const SecondOrderSystem& sys, double h,
                                   const State& state, StepStats& stats,
                                   const ExtrapolationTableau& tab, Vector& sum_dy,
                                   Vector& sum_dv) {
  const Eigen::Index d = sys.dimension;
  sum_dy = Vector::Zero(d);
  sum_dv = Vector::Zero(d);
  Vector dy, dv;
  FsalCarry shared;
  for (int l = 1; l <= k; ++l) {
    strang_chain_increment(sys, kernel, l, h, state, dy, dv, stats, shared);
    const double w = tab.weights[static_cast<std::size_t>(l - 1)].to_double();
    sum_dy += w * dy;
    sum_dv += w * dv;
  }
  ++stats.steps_taken;
}

}  // namespace detail

// Order-2k extrapolated step from `state`. Stage cost per step with the ABA
// kernel is k(k+1)/2 force evaluations.
inline State extrapolated_step(int k, StrangKernel kernel,
                               const SecondOrderSystem& sys, double h,
                               const State& state, StepStats& stats,
                               ExtrapolationForm form = ExtrapolationForm::Increment) {
  if (h == 0) throw InvalidArgument("extrapolated_step: h must be non-zero");
  const ExtrapolationTableau tab = tableau(k);
  State out;
  out.t = state.t + h;
  if (form == ExtrapolationForm::Increment) {
    Vector dy, dv;
    detail::extrapolated_increment(k, kernel, sys, h, state, stats, tab, dy, dv);
    out.y = state.y + dy;
    out.v = state.v + dv;
    return out;
  }
  const Eigen::Index d = sys.dimension;
  out.y = Vector::Zero(d);
  out.v = Vector::Zero(d);
  Vector dy, dv;
  FsalCarry shared;
  for (int l = 1; l <= k; ++l) {
    detail::strang_chain_increment(sys, kernel, l, h, state, dy, dv, stats, shared);
    const double w = tab.weights[static_cast<std::size_t>(l - 1)].to_double();
    out.y += w * (state.y + dy);
    out.v += w * (state.v + dv);
  }
  ++stats.steps_taken;
  return out;
}

}  // namespace rkn
