#pragma once

// Constant-step integration driver shared by splitting schemes, Strang
// compositions and extrapolation methods.

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rkn/extrapolation.hpp"
#include "rkn/scheme.hpp"
#include "rkn/splitting.hpp"

namespace rkn {

struct Method {
  enum class Type { Splitting, Extrapolation };

  std::string name;
  Type type = Type::Splitting;
  int order = 0;
  int stages = 0;  // force evaluations per step in an unbroken run
  FlowSchedule schedule;
  int level = 0;  // extrapolation level k
  StrangKernel kernel = StrangKernel::ABA;

  static Method splitting(const SchemeCoefficients& scheme,
                          StrangKernel ss_kernel = StrangKernel::ABA) {
    Method m;
    m.name = scheme.name;
    m.order = scheme.order;
    m.schedule = unfold(scheme, ss_kernel);
    m.kernel = ss_kernel;
    m.stages = m.schedule.stages;
    // kick-bounded schedules reuse the trailing force in the next step
    if (m.schedule.fsal_mergeable && m.schedule.entries.front().kind == FlowKind::Kick)
      --m.stages;
    return m;
  }

  static Method extrapolation(int k, StrangKernel kernel = StrangKernel::ABA) {
    tableau(k);  // validates k
    Method m;
    m.name = "EXTRAP" + std::to_string(2 * k);
    m.type = Type::Extrapolation;
    m.order = 2 * k;
    m.level = k;
    m.kernel = kernel;
    m.stages = k * (k + 1) / 2 + (kernel == StrangKernel::BAB ? 1 : 0);
    return m;
  }
};

// Resolves a method name: embedded schemes, EXTRAP4/6/8, or the name of
// one of the externally loaded schemes.
inline Method make_method(std::string_view name,
                          const std::vector<SchemeCoefficients>& external = {},
                          StrangKernel ss_kernel = StrangKernel::ABA) {
  if (name == "EXTRAP4") return Method::extrapolation(2);
  if (name == "EXTRAP6") return Method::extrapolation(3);
  if (name == "EXTRAP8") return Method::extrapolation(4);
  for (const auto& s : external)
    if (s.name == name) return Method::splitting(s, ss_kernel);
  return Method::splitting(build_scheme(name));
}

using Observer = std::function<void(const State&)>;

struct IntegrateOptions {
  bool fsal = true;
  Summation summation = Summation::Compensated;
};

struct IntegrationResult {
  State final_state;
  StepStats stats;
  long steps = 0;
};

// Number of constant steps of size h from t0 to t_final; the final step is
// never shrunk, so the ratio has to be an integer.
inline long step_count(double t0, double t_final, double h) {
  if (t_final == t0) return 0;
  if (h == 0 || !std::isfinite(h)) throw InvalidArgument("step size must be finite and non-zero");
  const double n = (t_final - t0) / h;
  const double rounded = std::round(n);
  if (n < 0 || std::abs(n - rounded) > 1e-8)
    throw NonIntegerStepCount("(t_final - t0)/h = " + std::to_string(n) +
                              " is not a non-negative integer");
  return static_cast<long>(rounded);
}

// Observers see the initial state and the state after every step. Drift
// merging across steps is used only when nothing observes the intermediate
// states; force reuse is always exact and stays on with observers.
inline IntegrationResult integrate(const Method& method,
                                   const SecondOrderSystem& sys, double h,
                                   State state0, double t_final,
                                   const std::vector<Observer>& observers = {},
                                   IntegrateOptions options = {}) {
  const long n = step_count(state0.t, t_final, h);
  IntegrationResult result;
  detail::FlowEngine eng(sys, std::move(state0), result.stats, options.summation);
  for (const auto& obs : observers) obs(eng.state());

  if (method.type == Method::Type::Splitting) {
    FsalCarry carry;
    FsalCarry* c = options.fsal ? &carry : nullptr;
    const bool defer = options.fsal && observers.empty();
    for (long i = 0; i < n; ++i) {
      detail::run_schedule(eng, method.schedule, h, c, defer);
      for (const auto& obs : observers) obs(eng.state());
    }
    detail::flush(eng, carry);
  } else {
    const ExtrapolationTableau tab = tableau(method.level);
    Vector dy, dv;
    for (long i = 0; i < n; ++i) {
      detail::extrapolated_increment(method.level, method.kernel, sys, h, eng.state(),
                                     result.stats, tab, dy, dv);
      eng.apply_increment(dy, dv, h);
      for (const auto& obs : observers) obs(eng.state());
    }
  }
  result.final_state = eng.state();
  result.steps = n;
  return result;
}

inline IntegrationResult integrate(const SchemeCoefficients& scheme,
                                   const SecondOrderSystem& sys, double h,
                                   State state0, double t_final,
                                   const std::vector<Observer>& observers = {},
                                   IntegrateOptions options = {}) {
  return integrate(Method::splitting(scheme), sys, h, std::move(state0), t_final,
                   observers, options);
}

// Relative energy error |H - H0| / |H0| (absolute when H0 vanishes), with
// the running maximum split at a time threshold so boundedness can be
// compared between the two halves of a run.
class EnergyErrorTracker {
 public:
  EnergyErrorTracker(const SecondOrderSystem& sys, double split_time = INFINITY)
      : energy_(sys.energy), split_time_(split_time) {
    if (!energy_) throw InvalidArgument(sys.name + ": no energy function");
  }

  void operator()(const State& s) {
    const double e = energy_(s);
    if (!initialised_) {
      reference_ = e;
      initialised_ = true;
    }
    const double err = std::abs(reference_) > 1e-300
                           ? std::abs(e - reference_) / std::abs(reference_)
                           : std::abs(e - reference_);
    last_ = err;
    max_ = std::max(max_, err);
    if (s.t <= split_time_) max_first_ = std::max(max_first_, err);
    else max_second_ = std::max(max_second_, err);
  }

  Observer observer() {
    return [this](const State& s) { (*this)(s); };
  }

  double reference() const { return reference_; }
  double last() const { return last_; }
  double max_error() const { return max_; }
  double max_first_half() const { return max_first_; }
  double max_second_half() const { return max_second_; }

 private:
  EnergyFunction energy_;
  double split_time_;
  bool initialised_ = false;
  double reference_ = 0, last_ = 0, max_ = 0, max_first_ = 0, max_second_ = 0;
};

// Max-norm position error against a reference trajectory y_ref(t).
class PositionErrorTracker {
 public:
  explicit PositionErrorTracker(std::function<Vector(double)> reference)
      : reference_(std::move(reference)) {}

  void operator()(const State& s) {
    last_ = (s.y - reference_(s.t)).cwiseAbs().maxCoeff();
    max_ = std::max(max_, last_);
  }
  Observer observer() {
    return [this](const State& s) { (*this)(s); };
  }
  double max_error() const { return max_; }
  double last() const { return last_; }

 private:
  std::function<Vector(double)> reference_;
  double max_ = 0, last_ = 0;
};

// Writes `t,y1..yd,v1..vd,energy_err` every `stride` observed states.
class TrajectoryCsvWriter {
 public:
  TrajectoryCsvWriter(std::ostream& out, const SecondOrderSystem& sys, long stride = 1)
      : out_(out), energy_(sys.energy), stride_(stride < 1 ? 1 : stride) {
    out_ << "t";
    for (int i = 1; i <= sys.dimension; ++i) out_ << ",y" << i;
    for (int i = 1; i <= sys.dimension; ++i) out_ << ",v" << i;
    out_ << ",energy_err\n";
    out_.precision(17);
  }

  void operator()(const State& s) {
    const bool first = count_ == 0;
    if (first && energy_) reference_ = energy_(s);
    if (count_++ % stride_ != 0) return;
    out_ << s.t;
    for (double x : s.y) out_ << ',' << x;
    for (double x : s.v) out_ << ',' << x;
    out_ << ',';
    if (energy_) out_ << std::abs(energy_(s) - reference_);
    else out_ << "nan";
    out_ << '\n';
  }
  Observer observer() {
    return [this](const State& s) { (*this)(s); };
  }

 private:
  std::ostream& out_;
  EnergyFunction energy_;
  long stride_;
  long count_ = 0;
  double reference_ = 0;
};

}  // namespace rkn
