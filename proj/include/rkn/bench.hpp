#pragma once

// Benchmark harness: efficiency sweeps, parameter scans, convergence-order
// fits and the Arenstorf period-return experiment, with CSV output.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rkn/integrate.hpp"
#include "rkn/problems.hpp"

namespace rkn::bench {

struct BenchmarkRecord {
  std::string scheme;
  std::string problem;
  double parameter = 0;
  double h = 0;
  int stages = 0;
  double cost = 0;  // stages / h, force evaluations per unit time
  long force_evaluations = 0;
  double max_energy_err = NAN;
  std::optional<double> final_position_err;
  std::string status = "ok";
  double wall_time = 0;
};

inline constexpr const char* kCsvHeader =
    "scheme,problem,parameter,h,stages,cost,force_evals,max_energy_err,final_pos_err,status,"
    "wall_time_s";

namespace detail {
inline std::string fmt_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records,
                      bool include_wall_time = true) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.scheme << ',' << r.problem << ',' << detail::fmt_real(r.parameter) << ','
        << detail::fmt_real(r.h) << ',' << r.stages << ',' << detail::fmt_real(r.cost) << ','
        << r.force_evaluations << ',' << detail::fmt_real(r.max_energy_err) << ','
        << (r.final_position_err ? detail::fmt_real(*r.final_position_err) : "") << ','
        << r.status << ',' << (include_wall_time ? detail::fmt_real(r.wall_time) : "") << '\n';
  }
}

struct ProblemSpec {
  std::string name;  // kepler | pendulum | henon_heiles | harmonic | three_body_rotating | three_body_fixed
  double parameter = 0;  // e for kepler, alpha for pendulum / Henon-Heiles, omega for harmonic
  double mu = 1.0;       // gravitational parameter (kepler) or mass ratio (three body)
};

inline ProblemInstance make_problem(const ProblemSpec& spec) {
  if (spec.name == "kepler") return kepler(spec.parameter, spec.mu);
  if (spec.name == "pendulum") return pendulum(spec.parameter);
  if (spec.name == "henon_heiles") return henon_heiles(spec.parameter);
  if (spec.name == "harmonic") return harmonic_oscillator(spec.parameter);
  if (spec.name == "three_body_rotating") return three_body_rotating(spec.mu);
  if (spec.name == "three_body_fixed") return three_body_fixed(spec.mu);
  throw InvalidArgument("unknown problem: " + spec.name);
}

// h = t_final / round(t_final * cost / stages); at least one step.
inline double commensurate_step(double t_final, double cost, int stages) {
  if (!(cost > 0)) throw InvalidArgument("cost must be positive");
  const double n = std::max(1.0, std::round(t_final * cost / stages));
  return t_final / n;
}

// Log-spaced grid lo..hi with n points; n == 1 gives {lo}.
inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0) || !(hi > 0)) throw InvalidArgument("log grid needs n >= 1 and positive bounds");
  std::vector<double> g;
  for (int i = 0; i < n; ++i)
    g.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return g;
}

// Runs jobs 0..n-1 on at most `workers` threads; job i writes slot i.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  for (auto& th : pool) th.join();
}

// Integrates one (method, problem, h) cell. Failures are reported in the
// status column instead of being thrown.
inline BenchmarkRecord run_cell(const Method& method, const ProblemSpec& spec, double h,
                                double t_final) {
  BenchmarkRecord r;
  r.scheme = method.name;
  r.problem = spec.name;
  r.parameter = spec.name.rfind("three_body", 0) == 0 ? spec.mu : spec.parameter;
  r.h = h;
  r.stages = method.stages;
  r.cost = method.stages / h;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ProblemInstance p = make_problem(spec);
    EnergyErrorTracker energy(p.system);
    const IntegrationResult res =
        integrate(method, p.system, h, p.initial, t_final, {energy.observer()});
    r.force_evaluations = res.stats.force_evaluations;
    r.max_energy_err = energy.max_error();
    if (spec.name == "kepler" && spec.mu == 1.0) {
      const State exact = kepler_exact(spec.parameter, res.final_state.t);
      r.final_position_err = (res.final_state.y - exact.y).cwiseAbs().maxCoeff();
    }
    if (!res.final_state.y.allFinite() || !res.final_state.v.allFinite() ||
        !std::isfinite(r.max_energy_err))
      r.status = "failed:overflow";
  } catch (const ForceSingularity&) {
    r.status = "failed:singularity";
  } catch (const Error& e) {
    r.status = "failed:error";
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// One record per (method, cost), ordered by method then cost.
inline std::vector<BenchmarkRecord> run_sweep(const ProblemSpec& spec,
                                              const std::vector<Method>& methods,
                                              const std::vector<double>& costs, double t_final,
                                              int workers = 1) {
  for (double c : costs)
    if (!(c > 0)) throw InvalidArgument("cost values must be positive");
  std::vector<BenchmarkRecord> out(methods.size() * costs.size());
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const Method& m = methods[i / costs.size()];
    const double h = commensurate_step(t_final, costs[i % costs.size()], m.stages);
    out[i] = run_cell(m, spec, h, t_final);
  });
  return out;
}

// Integrates each parameter value at a fixed cost; ordered by method then
// parameter.
inline std::vector<BenchmarkRecord> parameter_scan(const std::string& family,
                                                   const std::vector<Method>& methods,
                                                   const std::vector<double>& parameters,
                                                   double fixed_cost, double t_final,
                                                   int workers = 1) {
  if (!(fixed_cost > 0)) throw InvalidArgument("fixed cost must be positive");
  std::vector<BenchmarkRecord> out(methods.size() * parameters.size());
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const Method& m = methods[i / parameters.size()];
    ProblemSpec spec{family, parameters[i % parameters.size()]};
    const double h = commensurate_step(t_final, fixed_cost, m.stages);
    out[i] = run_cell(m, spec, h, t_final);
  });
  return out;
}

// Least-squares slope of log(error) against log(h).
inline double estimate_order(const std::vector<std::pair<double, double>>& points,
                             double roundoff_floor = 1e-15) {
  if (points.size() < 2) throw InsufficientData("order fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [h, err] : points) {
    if (!(h > 0) || !std::isfinite(err) || !(err > roundoff_floor))
      throw DegenerateFit("error " + std::to_string(err) + " at h=" + std::to_string(h) +
                          " is at or below the round-off floor");
    const double x = std::log(h), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double var = sxx - sx * sx / n;
  if (!(var > 0)) throw DegenerateFit("step sizes must not all coincide");
  return (sxy - sx * sy / n) / var;
}

// Keeps the points whose error lies in [lo, hi].
inline std::vector<std::pair<double, double>> asymptotic_window(
    const std::vector<std::pair<double, double>>& points, double lo = 1e-12, double hi = 1e-6) {
  std::vector<std::pair<double, double>> w;
  for (const auto& p : points)
    if (p.second >= lo && p.second <= hi) w.push_back(p);
  return w;
}

// One Arenstorf period per grid entry in the moving-primaries frame;
// final_pos_err holds the co-rotating return error, max_energy_err the
// relative Jacobi-integral error.
inline std::vector<BenchmarkRecord> arenstorf_run(const Method& method,
                                                  const std::vector<long>& steps_per_period,
                                                  int workers = 1) {
  std::vector<BenchmarkRecord> out(steps_per_period.size());
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const ProblemInstance p = three_body_rotating();
    const double T = *p.period;
    const double h = T / static_cast<double>(steps_per_period[i]);
    BenchmarkRecord r;
    r.scheme = method.name;
    r.problem = "arenstorf";
    r.parameter = arenstorf::kMu;
    r.h = h;
    r.stages = method.stages;
    r.cost = method.stages / h;
    const auto start = std::chrono::steady_clock::now();
    try {
      EnergyErrorTracker jacobi(p.system);
      const IntegrationResult res =
          integrate(method, p.system, h, p.initial, T, {jacobi.observer()});
      r.force_evaluations = res.stats.force_evaluations;
      r.max_energy_err = jacobi.max_error();
      r.final_position_err = corotating_return_error(res.final_state, p.initial);
      if (!std::isfinite(*r.final_position_err)) r.status = "failed:overflow";
    } catch (const ForceSingularity&) {
      r.status = "failed:singularity";
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out[i] = std::move(r);
  });
  return out;
}

}  // namespace rkn::bench
